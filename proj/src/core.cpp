#include "blend/core.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace blend {

PositionLayout::PositionLayout(std::size_t total_slots, std::vector<std::size_t> ad_positions,
                               std::vector<std::size_t> organic_positions)
    : total_slots_(total_slots),
      ad_positions_(std::move(ad_positions)),
      organic_positions_(std::move(organic_positions)) {
  if (ad_positions_.size() + organic_positions_.size() != total_slots_) {
    throw InvalidArgument("layout: ad and organic positions must cover every slot");
  }
  std::vector<bool> seen(total_slots_, false);
  for (const auto* positions : {&ad_positions_, &organic_positions_}) {
    for (std::size_t p : *positions) {
      if (p >= total_slots_) throw InvalidArgument("layout: position out of range");
      if (seen[p]) throw InvalidArgument("layout: position assigned twice");
      seen[p] = true;
    }
  }
  if (!std::is_sorted(ad_positions_.begin(), ad_positions_.end()) ||
      !std::is_sorted(organic_positions_.begin(), organic_positions_.end())) {
    throw InvalidArgument("layout: positions must be listed in increasing order");
  }
}

PositionLayout PositionLayout::with_ads_at(std::vector<std::size_t> ad_positions,
                                           std::size_t total_slots) {
  std::sort(ad_positions.begin(), ad_positions.end());
  std::vector<std::size_t> organic_positions;
  for (std::size_t p = 0; p < total_slots; ++p) {
    if (!std::binary_search(ad_positions.begin(), ad_positions.end(), p)) {
      organic_positions.push_back(p);
    }
  }
  return PositionLayout(total_slots, std::move(ad_positions), std::move(organic_positions));
}

void Impression::validate() const {
  if (layout.total_slots() == 0) throw InvalidArgument("impression " + impression_id + ": empty layout");
  if (ads.size() < layout.k_ads()) {
    throw InvalidArgument("impression " + impression_id + ": fewer ad candidates than ad slots");
  }
  if (organics.size() < layout.k_orgs()) {
    throw InvalidArgument("impression " + impression_id + ": fewer organics than organic slots");
  }
  std::unordered_set<std::string> ids;
  for (const auto& ad : ads) {
    if (!(ad.bid_cpc > 0.0)) throw InvalidArgument("ad " + ad.ad_id + ": bid_cpc must be positive");
    if (!ids.insert(ad.ad_id).second) throw InvalidArgument("duplicate ad_id " + ad.ad_id);
  }
  ids.clear();
  for (const auto& item : organics) {
    if (!ids.insert(item.item_id).second) throw InvalidArgument("duplicate item_id " + item.item_id);
  }
}

std::vector<std::size_t> MixedTuple::ad_indices() const {
  std::vector<std::size_t> out;
  for (const auto& s : slots) {
    if (s.kind == SlotKind::kAd) out.push_back(s.index);
  }
  return out;
}

bool MixedTuple::contains_ad(std::size_t candidate_index) const {
  return std::any_of(slots.begin(), slots.end(), [&](const Slot& s) {
    return s.kind == SlotKind::kAd && s.index == candidate_index;
  });
}

namespace {

double sum_kind(const MixedTuple& tuple, std::span<const double> ctrs, SlotKind kind) {
  double sum = 0.0;
  for (std::size_t p = 0; p < tuple.slots.size(); ++p) {
    if (tuple.slots[p].kind == kind) sum += ctrs[p];
  }
  return sum;
}

MixedTuple organics_only(const Impression& impression) {
  const auto& layout = impression.layout;
  MixedTuple t;
  t.slots.assign(layout.total_slots(), Slot{});
  for (std::size_t r = 0; r < layout.k_orgs(); ++r) {
    t.slots[layout.organic_positions()[r]] = Slot{SlotKind::kOrganic, r};
  }
  return t;
}

// Calls fn on every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    fn(std::span<const std::size_t>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double ad_ctr_sum(const MixedTuple& tuple, std::span<const double> ctrs) {
  return sum_kind(tuple, ctrs, SlotKind::kAd);
}

double organic_ctr_sum(const MixedTuple& tuple, std::span<const double> ctrs) {
  return sum_kind(tuple, ctrs, SlotKind::kOrganic);
}

MixedTuple make_tuple(const Impression& impression, std::span<const std::size_t> ads) {
  const auto& layout = impression.layout;
  if (ads.size() != layout.k_ads()) throw InvalidArgument("make_tuple: wrong number of ads");
  MixedTuple t = organics_only(impression);
  for (std::size_t r = 0; r < ads.size(); ++r) {
    if (ads[r] >= impression.ads.size()) throw InvalidArgument("make_tuple: ad index out of range");
    t.slots[layout.ad_positions()[r]] = Slot{SlotKind::kAd, ads[r]};
  }
  return t;
}

std::vector<MixedTuple> generate_tuples_from_pool(const Impression& impression,
                                                  std::span<const std::size_t> pool,
                                                  std::size_t n_prime) {
  const auto& layout = impression.layout;
  const std::size_t k = layout.k_ads();
  const std::size_t window = std::min(n_prime, pool.size());
  const MixedTuple base = organics_only(impression);
  std::vector<MixedTuple> out;

  if (window >= k) {
    out.reserve(tuple_space_size(window, k));
    for_each_combination(window, k, [&](std::span<const std::size_t> combo) {
      std::vector<std::size_t> perm(combo.begin(), combo.end());
      do {
        MixedTuple t = base;
        for (std::size_t r = 0; r < k; ++r) {
          t.slots[layout.ad_positions()[r]] = Slot{SlotKind::kAd, pool[perm[r]]};
        }
        out.push_back(std::move(t));
      } while (std::next_permutation(perm.begin(), perm.end()));
    });
    return out;
  }

  // Short window: all ads shown, some ad positions stay empty.
  for_each_combination(k, window, [&](std::span<const std::size_t> positions) {
    std::vector<std::size_t> perm(window);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      MixedTuple t = base;
      for (std::size_t r = 0; r < window; ++r) {
        t.slots[layout.ad_positions()[positions[r]]] = Slot{SlotKind::kAd, pool[perm[r]]};
      }
      out.push_back(std::move(t));
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
  return out;
}

std::vector<MixedTuple> generate_tuples(const Impression& impression, std::size_t n_prime) {
  const std::size_t k = impression.layout.k_ads();
  if (n_prime < k) throw InvalidArgument("generate_tuples: n_prime smaller than K_ads");
  if (n_prime > impression.ads.size()) throw InvalidArgument("generate_tuples: n_prime exceeds N_ads");
  if (impression.organics.size() < impression.layout.k_orgs()) {
    throw InvalidArgument("generate_tuples: fewer organics than organic slots");
  }
  std::vector<std::size_t> pool(n_prime);
  std::iota(pool.begin(), pool.end(), 0);
  return generate_tuples_from_pool(impression, pool, n_prime);
}

std::uint64_t tuple_space_size(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::uint64_t count = 1;
  // n! / (n-k)! == K! * C(n, K)
  for (std::size_t i = 0; i < k; ++i) count *= static_cast<std::uint64_t>(n - i);
  return count;
}

double lift(double metric_treatment, double metric_baseline) {
  if (metric_baseline == 0.0) throw UndefinedValue("lift: baseline metric is zero");
  return 100.0 * (metric_treatment - metric_baseline) / metric_baseline;
}

}  // namespace blend
