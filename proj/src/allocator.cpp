#include "blend/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blend {

double composite_score(std::span<const double> ad_ctrs, std::span<const double> ad_bids, double v_a) {
  double obj = 0.0;
  for (std::size_t i = 0; i < ad_ctrs.size(); ++i) obj += ad_ctrs[i] * (v_a + ad_bids[i]);
  return obj;
}

BidMap bid_map(const Impression& impression) {
  BidMap bids;
  bids.reserve(impression.ads.size());
  for (const auto& ad : impression.ads) bids.emplace(ad.ad_id, ad.bid_cpc);
  return bids;
}

namespace {

void collect_ad_terms(const Impression& impression, const MixedTuple& tuple, const CtrVector& ctrs,
                      const BidMap& bids, std::vector<double>& x, std::vector<double>& b) {
  if (ctrs.size() != tuple.slots.size()) throw InvalidArgument("CTR vector not aligned with tuple");
  for (std::size_t p = 0; p < tuple.slots.size(); ++p) {
    const Slot& s = tuple.slots[p];
    if (s.kind != SlotKind::kAd) continue;
    const auto& id = impression.ads.at(s.index).ad_id;
    auto it = bids.find(id);
    if (it == bids.end()) throw InvalidArgument("no bid for ad " + id);
    x.push_back(ctrs[p]);
    b.push_back(it->second);
  }
}

}  // namespace

double score_tuple(const Impression& impression, const MixedTuple& tuple, const CtrVector& ctrs,
                   const BidMap& bids, const VirtualBid& v) {
  std::vector<double> x, b;
  collect_ad_terms(impression, tuple, ctrs, bids, x, b);
  return composite_score(x, b, v.v_a);
}

TupleTable::TupleTable(const Impression& impression, std::span<const MixedTuple> tuples,
                       std::span<const CtrVector> ctrs, const BidMap& bids) {
  if (tuples.size() != ctrs.size()) throw InvalidArgument("one CTR vector per tuple required");
  offsets_.reserve(tuples.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const std::size_t start = ad_ctrs_.size();
    collect_ad_terms(impression, tuples[i], ctrs[i], bids, ad_ctrs_, ad_bids_);
    offsets_.push_back(ad_ctrs_.size());
    std::span<const double> x(ad_ctrs_.data() + start, ad_ctrs_.size() - start);
    std::span<const double> b(ad_bids_.data() + start, ad_bids_.size() - start);
    ctr_sums_.push_back(std::accumulate(x.begin(), x.end(), 0.0));
    revenues_.push_back(composite_score(x, b, 0.0));
  }
}

double TupleTable::score(std::size_t i, double v_a) const {
  const std::size_t start = offsets_[i];
  const std::size_t n = offsets_[i + 1] - start;
  return composite_score(std::span(ad_ctrs_.data() + start, n), std::span(ad_bids_.data() + start, n), v_a);
}

std::size_t TupleTable::best(double v_a) const {
  if (size() == 0) throw InvalidArgument("empty tuple list");
  std::size_t best_i = 0;
  double best_obj = score(0, v_a);
  for (std::size_t i = 1; i < size(); ++i) {
    const double obj = score(i, v_a);
    if (obj > best_obj) {
      best_obj = obj;
      best_i = i;
    }
  }
  return best_i;
}

double TupleTable::max_ad_ctr_sum() const {
  if (ctr_sums_.empty()) throw InvalidArgument("empty tuple list");
  return *std::max_element(ctr_sums_.begin(), ctr_sums_.end());
}

double TupleTable::max_revenue() const {
  if (revenues_.empty()) throw InvalidArgument("empty tuple list");
  return *std::max_element(revenues_.begin(), revenues_.end());
}

AllocationResult rank_listwise(std::span<const MixedTuple> tuples, const Impression& impression,
                               const CtrModel& model, const VirtualBid& v) {
  if (tuples.empty()) throw InvalidArgument("rank_listwise: empty tuple list");
  if (!std::isfinite(v.v_a)) throw InvalidArgument("rank_listwise: virtual bid must be finite");
  const auto ctrs = model.predict_all(impression, tuples);
  const TupleTable table(impression, tuples, ctrs, bid_map(impression));
  const std::size_t i = table.best(v.v_a);

  AllocationResult r;
  r.chosen = tuples[i];
  r.chosen_index = i;
  r.ctrs = ctrs[i];
  r.objective_value = table.score(i, v.v_a);
  r.ad_ctr_sum = table.ad_ctr_sum(i);
  r.v_ia = v.v_a * r.ad_ctr_sum;
  r.v_ir = table.revenue(i);
  r.org_ctr_sum = organic_ctr_sum(r.chosen, r.ctrs);
  return r;
}

AllocationResult optimize_impression(const Impression& impression, const CtrModel& model,
                                     const VirtualBid& v, std::size_t n_prime) {
  const auto tuples = generate_tuples(impression, n_prime);
  return rank_listwise(tuples, impression, model, v);
}

std::vector<std::size_t> weighted_ecpm_order(const Impression& impression,
                                             std::span<const double> pctr, double t) {
  if (pctr.size() != impression.ads.size()) throw InvalidArgument("one pCTR per candidate required");
  if (t < 0.0) throw InvalidArgument("eCPM exponent t must be non-negative");
  std::vector<double> ecpm(pctr.size());
  for (std::size_t j = 0; j < pctr.size(); ++j) ecpm[j] = impression.ads[j].bid_cpc * std::pow(pctr[j], t);
  std::vector<std::size_t> order(pctr.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ecpm[a] > ecpm[b]; });
  return order;
}

MixedTuple baseline_tuple(const Impression& impression, std::span<const double> pctr, double t) {
  auto order = weighted_ecpm_order(impression, pctr, t);
  order.resize(impression.layout.k_ads());
  return blend::make_tuple(impression, order);
}

std::vector<double> candidate_base_ctrs(const SyntheticJointModel& model, const Impression& impression) {
  std::vector<double> out;
  out.reserve(impression.ads.size());
  for (const auto& ad : impression.ads) out.push_back(model.base_ctr_of(ad.ad_id));
  return out;
}

}  // namespace blend
