#include "blend/ctr.hpp"

#include <algorithm>

namespace blend {

std::vector<CtrVector> CtrModel::predict_all(const Impression& impression,
                                             std::span<const MixedTuple> tuples) const {
  std::vector<CtrVector> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) out.push_back(predict(impression, t));
  return out;
}

double InteractionConfig::factor(const std::string& own, const std::string& neighbour) const {
  if (!overrides.empty()) {
    auto it = overrides.find({own, neighbour});
    if (it != overrides.end()) return it->second;
  }
  return own == neighbour ? default_same : default_cross;
}

SyntheticJointModel::SyntheticJointModel(std::unordered_map<std::string, double> base_ctr,
                                         std::vector<double> position_multipliers,
                                         InteractionConfig interaction)
    : base_ctr_(std::move(base_ctr)),
      position_multipliers_(std::move(position_multipliers)),
      interaction_(std::move(interaction)) {
  for (const auto& [id, p] : base_ctr_) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("base_ctr for " + id + " outside [0, 1]");
  }
  for (double m : position_multipliers_) {
    if (!(m >= 0.0)) throw ConfigError("position multipliers must be non-negative");
  }
  auto positive = [](double g) { return g > 0.0; };
  if (!positive(interaction_.default_same) || !positive(interaction_.default_cross)) {
    throw ConfigError("interaction factors must be positive");
  }
  for (const auto& [key, g] : interaction_.overrides) {
    if (!positive(g)) throw ConfigError("interaction override must be positive");
  }
}

double SyntheticJointModel::base_ctr_of(const std::string& item_id) const {
  auto it = base_ctr_.find(item_id);
  if (it == base_ctr_.end()) throw ConfigError("no base_ctr entry for item " + item_id);
  return it->second;
}

SyntheticJointModel SyntheticJointModel::without_interactions() const {
  return SyntheticJointModel(base_ctr_, position_multipliers_, InteractionConfig{});
}

std::vector<CtrVector> SyntheticJointModel::predict_impl(const Impression& impression,
                                                         std::span<const MixedTuple> tuples,
                                                         bool joint) const {
  const std::size_t n_slots = impression.layout.total_slots();
  if (position_multipliers_.size() < n_slots) {
    throw ConfigError("position_multipliers shorter than the layout");
  }

  // Resolve base CTRs and subcategories once per impression; a tuple is then a
  // pure table walk. Subcategories are interned to small integers.
  std::vector<std::string> subcats;
  auto intern = [&](const std::string& s) {
    auto it = std::find(subcats.begin(), subcats.end(), s);
    if (it != subcats.end()) return static_cast<std::size_t>(it - subcats.begin());
    subcats.push_back(s);
    return subcats.size() - 1;
  };
  struct Resolved {
    double base;
    std::size_t subcat;
  };
  std::vector<Resolved> ads(impression.ads.size(), Resolved{0.0, 0});
  std::vector<Resolved> orgs(impression.organics.size(), Resolved{0.0, 0});
  std::vector<bool> ad_done(ads.size(), false), org_done(orgs.size(), false);
  for (const auto& t : tuples) {
    if (t.slots.size() != n_slots) throw InvalidArgument("tuple length does not match layout");
    for (const auto& s : t.slots) {
      if (s.kind == SlotKind::kAd && !ad_done[s.index]) {
        const auto& ad = impression.ads.at(s.index);
        ads[s.index] = {base_ctr_of(ad.ad_id), intern(ad.subcategory)};
        ad_done[s.index] = true;
      } else if (s.kind == SlotKind::kOrganic && !org_done[s.index]) {
        const auto& item = impression.organics.at(s.index);
        orgs[s.index] = {base_ctr_of(item.item_id), intern(item.subcategory)};
        org_done[s.index] = true;
      }
    }
  }
  const std::size_t n_sub = subcats.size();
  std::vector<double> table(n_sub * n_sub, 1.0);
  if (joint) {
    for (std::size_t a = 0; a < n_sub; ++a) {
      for (std::size_t b = 0; b < n_sub; ++b) table[a * n_sub + b] = interaction_.factor(subcats[a], subcats[b]);
    }
  }

  std::vector<CtrVector> out;
  out.reserve(tuples.size());
  std::vector<const Resolved*> slot_items(n_slots);
  for (const auto& t : tuples) {
    for (std::size_t p = 0; p < n_slots; ++p) {
      const Slot& s = t.slots[p];
      slot_items[p] = s.kind == SlotKind::kAd       ? &ads[s.index]
                      : s.kind == SlotKind::kOrganic ? &orgs[s.index]
                                                     : nullptr;
    }
    CtrVector x(n_slots, 0.0);
    for (std::size_t j = 0; j < n_slots; ++j) {
      const Resolved* own = slot_items[j];
      if (own == nullptr) continue;
      double product = 1.0;
      if (joint) {
        for (std::size_t k = 0; k < n_slots; ++k) {
          if (k == j || slot_items[k] == nullptr) continue;
          product *= table[own->subcat * n_sub + slot_items[k]->subcat];
        }
      }
      x[j] = std::clamp(own->base * position_multipliers_[j] * product, 0.0, 1.0);
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<CtrVector> SyntheticJointModel::predict_listwise_all(
    const Impression& impression, std::span<const MixedTuple> tuples) const {
  return predict_impl(impression, tuples, true);
}

std::vector<CtrVector> SyntheticJointModel::predict_pointwise_all(
    const Impression& impression, std::span<const MixedTuple> tuples) const {
  return predict_impl(impression, tuples, false);
}

CtrVector predict_listwise(const SyntheticJointModel& model, const Impression& impression,
                           const MixedTuple& tuple) {
  return model.predict_listwise_all(impression, std::span(&tuple, 1)).front();
}

CtrVector predict_pointwise(const SyntheticJointModel& model, const Impression& impression,
                            const MixedTuple& tuple) {
  return model.predict_pointwise_all(impression, std::span(&tuple, 1)).front();
}

CtrVector ListwisePredictor::predict(const Impression& impression, const MixedTuple& tuple) const {
  return predict_listwise(*model_, impression, tuple);
}

std::vector<CtrVector> ListwisePredictor::predict_all(const Impression& impression,
                                                      std::span<const MixedTuple> tuples) const {
  return model_->predict_listwise_all(impression, tuples);
}

CtrVector PointwisePredictor::predict(const Impression& impression, const MixedTuple& tuple) const {
  return predict_pointwise(*model_, impression, tuple);
}

std::vector<CtrVector> PointwisePredictor::predict_all(const Impression& impression,
                                                       std::span<const MixedTuple> tuples) const {
  return model_->predict_pointwise_all(impression, tuples);
}

}  // namespace blend
