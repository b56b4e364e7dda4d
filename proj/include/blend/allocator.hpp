#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "blend/core.hpp"
#include "blend/ctr.hpp"

namespace blend {

/// The platform's money-per-click valuation of ad engagement. `extra` holds
/// further virtual bids (e.g. for organic clicks) for vector tuning; the
/// deployed objective reads only v_a.
struct VirtualBid {
  double v_a = 0.0;
  std::vector<double> extra;

  bool operator==(const VirtualBid&) const = default;
};

using BidMap = std::unordered_map<std::string, double>;

struct AllocationResult {
  MixedTuple chosen;
  std::size_t chosen_index = 0;  // position of `chosen` in the ranked list
  CtrVector ctrs;                // model prediction for `chosen`
  double objective_value = 0.0;
  double v_ia = 0.0;             // v_a * sum of ad CTRs
  double v_ir = 0.0;             // sum of bid * ad CTR
  double ad_ctr_sum = 0.0;
  double org_ctr_sum = 0.0;
};

/// sum over ad slots of x_j * (v_a + b_j). The summation runs in slot order;
/// every objective evaluation in the library goes through this function so
/// ties resolve identically everywhere.
double composite_score(std::span<const double> ad_ctrs, std::span<const double> ad_bids, double v_a);

/// Objective summand for one tuple. Throws InvalidArgument when an ad of the
/// tuple has no bid in `bids`.
double score_tuple(const Impression& impression, const MixedTuple& tuple, const CtrVector& ctrs,
                   const BidMap& bids, const VirtualBid& v);

BidMap bid_map(const Impression& impression);

/// Pre-scored tuple list of one impression. Holds each tuple's ad CTRs and
/// bids so the argmax can be re-solved for many virtual bids without calling
/// the CTR model again.
class TupleTable {
 public:
  TupleTable(const Impression& impression, std::span<const MixedTuple> tuples,
             std::span<const CtrVector> ctrs, const BidMap& bids);

  std::size_t size() const { return offsets_.size() - 1; }

  double score(std::size_t i, double v_a) const;
  /// First index attaining the maximum score (strict improvement required to
  /// replace the incumbent).
  std::size_t best(double v_a) const;

  double ad_ctr_sum(std::size_t i) const { return ctr_sums_[i]; }
  double revenue(std::size_t i) const { return revenues_[i]; }
  double max_ad_ctr_sum() const;
  double max_revenue() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<double> ad_ctrs_;
  std::vector<double> ad_bids_;
  std::vector<double> ctr_sums_;
  std::vector<double> revenues_;
};

/// Linear search over `tuples` for the maximizer of the composite objective.
/// Ties keep the earliest tuple. Throws InvalidArgument on an empty list.
AllocationResult rank_listwise(std::span<const MixedTuple> tuples, const Impression& impression,
                               const CtrModel& model, const VirtualBid& v);

/// generate_tuples over the top n_prime candidates followed by rank_listwise.
AllocationResult optimize_impression(const Impression& impression, const CtrModel& model,
                                     const VirtualBid& v, std::size_t n_prime);

/// Candidate indices sorted by descending weighted eCPM b_j * pctr_j^t.
/// Equal eCPMs keep candidate order.
std::vector<std::size_t> weighted_ecpm_order(const Impression& impression,
                                             std::span<const double> pctr, double t);

/// Baseline allocation: top-K_ads candidates by weighted eCPM, best eCPM on
/// the first ad position. `pctr` is the position-free pointwise CTR of every
/// candidate.
MixedTuple baseline_tuple(const Impression& impression, std::span<const double> pctr, double t);

/// Position-free pointwise CTRs (base CTRs) of every ad candidate.
std::vector<double> candidate_base_ctrs(const SyntheticJointModel& model, const Impression& impression);

}  // namespace blend
