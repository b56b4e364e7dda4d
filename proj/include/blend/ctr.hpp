#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blend/core.hpp"

namespace blend {

/// Anything that can predict per-slot click probabilities for a mixed tuple.
class CtrModel {
 public:
  virtual ~CtrModel() = default;

  virtual CtrVector predict(const Impression& impression, const MixedTuple& tuple) const = 0;

  /// Predicts every tuple of one impression. Results must be identical to
  /// calling predict() tuple by tuple.
  virtual std::vector<CtrVector> predict_all(const Impression& impression,
                                             std::span<const MixedTuple> tuples) const;
};

struct InteractionConfig {
  double default_same = 1.0;   // neighbour shares the slot item's subcategory
  double default_cross = 1.0;  // neighbour has a different subcategory
  /// (subcategory of the item, subcategory of the neighbour) -> factor.
  std::map<std::pair<std::string, std::string>, double> overrides;

  double factor(const std::string& own, const std::string& neighbour) const;
};

/// Synthetic joint-effects CTR model:
///
///   x_j = clamp(base_j * m(pos_j) * prod_{k != j} g(subcat_j, subcat_k), 0, 1)
///
/// The product runs over every other occupied slot, ads and organics alike, so
/// ads exert externalities on organics and vice versa. With every g == 1 this
/// is the position-discounted independent model.
class SyntheticJointModel {
 public:
  SyntheticJointModel() = default;
  SyntheticJointModel(std::unordered_map<std::string, double> base_ctr,
                      std::vector<double> position_multipliers, InteractionConfig interaction);

  const std::unordered_map<std::string, double>& base_ctr() const { return base_ctr_; }
  const std::vector<double>& position_multipliers() const { return position_multipliers_; }
  const InteractionConfig& interaction() const { return interaction_; }

  /// Throws ConfigError when the item has no base CTR entry.
  double base_ctr_of(const std::string& item_id) const;

  std::vector<CtrVector> predict_listwise_all(const Impression& impression,
                                              std::span<const MixedTuple> tuples) const;
  std::vector<CtrVector> predict_pointwise_all(const Impression& impression,
                                               std::span<const MixedTuple> tuples) const;

  /// Copy with every interaction factor set to 1.
  SyntheticJointModel without_interactions() const;

 private:
  std::vector<CtrVector> predict_impl(const Impression& impression,
                                      std::span<const MixedTuple> tuples, bool joint) const;

  std::unordered_map<std::string, double> base_ctr_;
  std::vector<double> position_multipliers_;
  InteractionConfig interaction_;
};

CtrVector predict_listwise(const SyntheticJointModel& model, const Impression& impression,
                           const MixedTuple& tuple);
CtrVector predict_pointwise(const SyntheticJointModel& model, const Impression& impression,
                            const MixedTuple& tuple);

/// CtrModel adapter over the joint (listwise) prediction.
class ListwisePredictor final : public CtrModel {
 public:
  explicit ListwisePredictor(std::shared_ptr<const SyntheticJointModel> model)
      : model_(std::move(model)) {}
  CtrVector predict(const Impression& impression, const MixedTuple& tuple) const override;
  std::vector<CtrVector> predict_all(const Impression& impression,
                                     std::span<const MixedTuple> tuples) const override;
  const SyntheticJointModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SyntheticJointModel> model_;
};

/// CtrModel adapter over the independence (pointwise) prediction.
class PointwisePredictor final : public CtrModel {
 public:
  explicit PointwisePredictor(std::shared_ptr<const SyntheticJointModel> model)
      : model_(std::move(model)) {}
  CtrVector predict(const Impression& impression, const MixedTuple& tuple) const override;
  std::vector<CtrVector> predict_all(const Impression& impression,
                                     std::span<const MixedTuple> tuples) const override;
  const SyntheticJointModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SyntheticJointModel> model_;
};

}  // namespace blend
