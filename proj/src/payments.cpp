#include "blend/payments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blend {

std::string to_string(PaymentScheme scheme) { return scheme == PaymentScheme::kGsp ? "GSP" : "VCG"; }

PaymentScheme payment_scheme_from_string(const std::string& name) {
  if (name == "GSP" || name == "gsp") return PaymentScheme::kGsp;
  if (name == "VCG" || name == "vcg") return PaymentScheme::kVcg;
  throw InvalidArgument("unknown payment scheme '" + name + "'");
}

const AdPayment* PaymentSchedule::find(const std::string& ad_id) const {
  auto it = std::find_if(ads.begin(), ads.end(), [&](const AdPayment& p) { return p.ad_id == ad_id; });
  return it == ads.end() ? nullptr : &*it;
}

double PaymentSchedule::expected_payment_of(const std::string& ad_id) const {
  const AdPayment* p = find(ad_id);
  return p ? p->expected_payment : 0.0;
}

PaymentSchedule gsp_payments(const Impression& impression, const MixedTuple& chosen,
                             const CtrVector& pointwise_ctrs, double t, double floor) {
  if (t < 0.0) throw InvalidArgument("gsp: exponent t must be non-negative");
  if (floor < 0.0) throw InvalidArgument("gsp: floor must be non-negative");
  if (pointwise_ctrs.size() != chosen.slots.size()) throw InvalidArgument("gsp: CTRs not aligned with tuple");

  PaymentSchedule out;
  out.scheme = PaymentScheme::kGsp;
  out.gsp_exponent = t;
  out.floor_price = floor;

  std::vector<std::size_t> positions;
  for (std::size_t p = 0; p < chosen.slots.size(); ++p) {
    if (chosen.slots[p].kind == SlotKind::kAd) positions.push_back(p);
  }
  std::vector<double> weight(positions.size()), ecpm(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double p = pointwise_ctrs[positions[i]];
    weight[i] = std::pow(p, t);
    ecpm[i] = impression.ads.at(chosen.slots[positions[i]].index).bid_cpc * weight[i];
  }
  std::vector<std::size_t> rank(positions.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return ecpm[a] > ecpm[b]; });

  std::vector<double> price(positions.size(), floor);
  for (std::size_t r = 0; r + 1 < rank.size(); ++r) {
    const std::size_t i = rank[r];
    if (weight[i] == 0.0) throw UndefinedValue("gsp: zero pCTR for a ranked ad");
    price[i] = std::max(floor, ecpm[rank[r + 1]] / weight[i]);
  }

  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t idx = chosen.slots[positions[i]].index;
    const double p = pointwise_ctrs[positions[i]];
    out.ads.push_back(AdPayment{impression.ads[idx].ad_id, idx, positions[i], price[i], price[i] * p, p, price[i] * p});
  }
  return out;
}

PaymentSchedule vcg_payments(const Impression& impression, const CtrModel& model, const VirtualBid& v,
                             std::size_t n_prime) {
  return vcg_payments(impression, model, v, n_prime, optimize_impression(impression, model, v, n_prime));
}

PaymentSchedule vcg_payments(const Impression& impression, const CtrModel& model, const VirtualBid& v,
                             std::size_t n_prime, const AllocationResult& allocation) {
  PaymentSchedule out;
  out.scheme = PaymentScheme::kVcg;
  out.gsp_exponent = 0.0;
  out.floor_price = 0.0;

  const BidMap bids = bid_map(impression);
  const MixedTuple& chosen = allocation.chosen;
  const double welfare = allocation.objective_value;

  for (std::size_t p = 0; p < chosen.slots.size(); ++p) {
    if (chosen.slots[p].kind != SlotKind::kAd) continue;
    const std::size_t j = chosen.slots[p].index;
    const double x_j = allocation.ctrs[p];
    const double own_value = impression.ads[j].bid_cpc * x_j;

    std::vector<std::size_t> pool;
    pool.reserve(impression.ads.size());
    for (std::size_t c = 0; c < impression.ads.size(); ++c) {
      if (c != j) pool.push_back(c);
    }
    const auto tuples = generate_tuples_from_pool(impression, pool, n_prime);
    const auto ctrs = model.predict_all(impression, tuples);
    const TupleTable table(impression, tuples, ctrs, bids);
    const double best_without_j = table.score(table.best(v.v_a), v.v_a);

    const double clarke = best_without_j - (welfare - own_value);
    const double payment = std::max(out.floor_price, clarke);
    AdPayment ap{impression.ads[j].ad_id, j, p, std::nullopt, payment, x_j, clarke};
    if (x_j > 0.0) ap.price_per_click = payment / x_j;
    out.ads.push_back(std::move(ap));
  }
  return out;
}

}  // namespace blend
