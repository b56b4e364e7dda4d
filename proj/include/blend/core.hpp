#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blend/errors.hpp"

namespace blend {

struct AdCandidate {
  std::string ad_id;
  double bid_cpc = 0.0;
  std::string subcategory;
  std::vector<double> features;

  bool operator==(const AdCandidate&) const = default;
};

struct OrganicItem {
  std::string item_id;
  std::string subcategory;
  std::vector<double> features;

  bool operator==(const OrganicItem&) const = default;
};

/// Which page positions carry ads and which carry organics.
/// Positions are zero-based slot indices in [0, total_slots).
class PositionLayout {
 public:
  PositionLayout() = default;
  PositionLayout(std::size_t total_slots, std::vector<std::size_t> ad_positions,
                 std::vector<std::size_t> organic_positions);

  /// Six slots with ads at the given positions and organics everywhere else.
  static PositionLayout with_ads_at(std::vector<std::size_t> ad_positions,
                                    std::size_t total_slots = 6);

  std::size_t total_slots() const { return total_slots_; }
  const std::vector<std::size_t>& ad_positions() const { return ad_positions_; }
  const std::vector<std::size_t>& organic_positions() const { return organic_positions_; }
  std::size_t k_ads() const { return ad_positions_.size(); }
  std::size_t k_orgs() const { return organic_positions_.size(); }

  bool operator==(const PositionLayout&) const = default;

 private:
  std::size_t total_slots_ = 0;
  std::vector<std::size_t> ad_positions_;
  std::vector<std::size_t> organic_positions_;
};

struct Impression {
  std::string impression_id;
  std::vector<double> context_features;
  std::vector<AdCandidate> ads;        // pre-ranked, best first
  std::vector<OrganicItem> organics;   // ranked, best first
  PositionLayout layout;
  std::string page_subcategory;        // optional; empty when unknown

  /// Throws InvalidArgument if candidate counts, bids or ids break the
  /// impression invariants.
  void validate() const;

  bool operator==(const Impression&) const = default;
};

enum class SlotKind : std::uint8_t { kAd, kOrganic, kEmpty };

/// One page slot of a mixed tuple. `index` points into Impression::ads or
/// Impression::organics depending on `kind`; it is unused for empty slots.
struct Slot {
  SlotKind kind = SlotKind::kEmpty;
  std::size_t index = 0;

  bool operator==(const Slot&) const = default;
};

/// An ordered arrangement of ads and organics over the page slots.
/// Slots are stored by position; slots[p] is what is shown at position p.
struct MixedTuple {
  std::vector<Slot> slots;

  bool operator==(const MixedTuple&) const = default;

  /// Candidate indices of the ads in ad-position order (empty slots skipped).
  std::vector<std::size_t> ad_indices() const;
  bool contains_ad(std::size_t candidate_index) const;
};

/// Per-slot click probabilities aligned with MixedTuple::slots.
using CtrVector = std::vector<double>;

/// Sum of the CTR entries sitting on ad slots.
double ad_ctr_sum(const MixedTuple& tuple, std::span<const double> ctrs);
/// Sum of the CTR entries sitting on organic slots.
double organic_ctr_sum(const MixedTuple& tuple, std::span<const double> ctrs);

/// Builds the tuple that places `ads` (candidate indices) on the ad positions
/// in order, with the top organics on the organic positions.
MixedTuple make_tuple(const Impression& impression, std::span<const std::size_t> ads);

/// All ordered placements of K_ads ads drawn from the top `n_prime`
/// candidates. Subsets are visited in lexicographic order of candidate index
/// and each subset in lexicographic permutation order.
std::vector<MixedTuple> generate_tuples(const Impression& impression, std::size_t n_prime);

/// Same enumeration over an explicit candidate pool (indices into
/// impression.ads, in pre-rank order) restricted to its first `n_prime`
/// entries. When the window holds fewer ads than ad positions, every ordered
/// placement of all window ads onto a subset of ad positions is produced and
/// the remaining ad positions are left empty.
std::vector<MixedTuple> generate_tuples_from_pool(const Impression& impression,
                                                  std::span<const std::size_t> pool,
                                                  std::size_t n_prime);

/// K! * C(n, K) computed exactly in 64 bits.
std::uint64_t tuple_space_size(std::size_t n, std::size_t k);

/// 100 * (treatment - baseline) / baseline. Throws UndefinedValue on a zero
/// baseline.
double lift(double metric_treatment, double metric_baseline);

}  // namespace blend
