#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blend/allocator.hpp"

namespace blend {

enum class PaymentScheme { kGsp, kVcg };

std::string to_string(PaymentScheme scheme);
PaymentScheme payment_scheme_from_string(const std::string& name);

struct AdPayment {
  std::string ad_id;
  std::size_t candidate_index = 0;
  std::size_t position = 0;
  /// Absent when the ad's predicted CTR is zero and a per-click price is
  /// undefined (VCG only).
  std::optional<double> price_per_click;
  double expected_payment = 0.0;
  double pctr = 0.0;  // CTR used for the per-click conversion
  /// VCG: the Clarke pivot before the floor is applied. GSP: same as
  /// expected_payment.
  double unreserved_payment = 0.0;
};

struct PaymentSchedule {
  PaymentScheme scheme = PaymentScheme::kGsp;
  double gsp_exponent = 1.0;
  double floor_price = 0.0;
  std::vector<AdPayment> ads;  // allocated ads only, in position order

  /// Per-ad lookup; ads that were not allocated pay nothing.
  double expected_payment_of(const std::string& ad_id) const;
  const AdPayment* find(const std::string& ad_id) const;
};

/// GSP on the allocated ads. The ads shown are ranked by b * pCTR^t using the
/// pointwise CTRs of their slots; rank i pays
///   max(floor, b_{i+1} pCTR_{i+1}^t / pCTR_i^t)
/// and the last-ranked ad pays the floor.
PaymentSchedule gsp_payments(const Impression& impression, const MixedTuple& chosen,
                             const CtrVector& pointwise_ctrs, double t, double floor);

/// VCG with the platform's virtual bid treated as a pseudo-bidder. For each
/// allocated ad j:
///   payment_j = max_{w without j} W(w) - (W(w*) - b_j x_j(w*))
/// where the counterfactual tuples are regenerated from the candidate list
/// with j removed and the same n_prime window; ad slots the shorter list
/// cannot fill stay empty. The charged payment is max(floor, payment_j) with a
/// zero floor; the pivot itself is kept in unreserved_payment.
PaymentSchedule vcg_payments(const Impression& impression, const CtrModel& model, const VirtualBid& v,
                             std::size_t n_prime);

/// Same as above, reusing an already computed allocation.
PaymentSchedule vcg_payments(const Impression& impression, const CtrModel& model, const VirtualBid& v,
                             std::size_t n_prime, const AllocationResult& allocation);

}  // namespace blend
