#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "blend/allocator.hpp"
#include "blend/ctr.hpp"
#include "blend/payments.hpp"
#include "blend/tuner.hpp"

namespace blend::sim {

// ---------------------------------------------------------------------------
// Configuration

struct BidSpec {
  double log_mean = 0.0;           // location of log(bid)
  double log_sd = 0.4;             // within-subcategory spread
  double subcategory_log_sd = 0.3; // spread of per-subcategory locations
  double scale = 2.0;              // multiplies every bid
};

struct CtrSpec {
  double ad_log_mean = -3.0;
  double ad_log_sd = 0.5;
  double organic_log_mean = -2.5;
  double organic_log_sd = 0.5;
  double scale = 1.0;              // multiplies every base CTR (clamped to 0.95)
};

struct TuningSpec {
  std::size_t impressions = 5000;  // size of the tuning epoch
  double bracket_lo = 0.0;
  double bracket_hi = -1.0;        // < 0: 10 x the largest bid in the tuning epoch
  double tol = 1e-6;
  std::size_t max_iter = 200;
  TuneMethod method = TuneMethod::kGolden;
};

/// Second-epoch environment for the distribution-shift scenario.
struct ShiftSpec {
  double bid_scale = 0.5;
  double ctr_scale = 1.0;
  std::uint64_t epoch_offset = 1;  // T2 impressions come from a later stream
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t epoch = 0;                // impression stream index; the catalog depends on seed only
  std::size_t n_impressions = 1000;
  std::size_t n_ads = 10;                 // N_ads candidates per impression
  std::size_t n_organics = 8;             // N_orgs
  std::size_t total_slots = 6;
  std::vector<std::size_t> ad_positions = {0, 2, 4};
  std::size_t n_prime = 6;
  std::size_t n_subcategories = 12;
  std::size_t ad_catalog_size = 600;
  std::size_t organic_catalog_size = 2000;
  double ad_same_subcategory_share = 0.6;      // candidates drawn from the page's subcategory
  double organic_same_subcategory_share = 0.7;
  BidSpec bid;
  CtrSpec ctr;
  std::vector<double> position_multipliers = {1.0, 0.92, 0.85, 0.78, 0.72, 0.66};
  InteractionConfig interaction{0.8, 1.0, {}};
  double gsp_exponent = 1.0;
  double floor = 0.0;
  PaymentScheme payment_scheme = PaymentScheme::kGsp;
  TuningSpec tuning;
  ShiftSpec shift;
  std::size_t threads = 0;                // 0: all cores

  std::size_t k_ads() const { return ad_positions.size(); }
  std::size_t k_orgs() const { return total_slots - ad_positions.size(); }
  PositionLayout layout() const;

  /// Throws InvalidArgument when counts or parameters are out of range.
  void validate() const;
  /// Environment after the configured distribution shift.
  SimConfig shifted() const;
};

inline constexpr int kSimConfigSchemaVersion = 1;

nlohmann::ordered_json to_json(const SimConfig& config);
/// Strict parse: unknown keys and a wrong schema_version are rejected.
SimConfig sim_config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Randomness

/// Counter-based stream derivation: a generator keyed on (seed, stream,
/// counter), so per-impression draws do not depend on evaluation order.
std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
std::uint64_t stream_id(std::string_view name);

// ---------------------------------------------------------------------------
// Environment

/// Ground-truth joint-effects model over the configured catalog.
SyntheticJointModel build_truth_model(const SimConfig& config);

/// Deterministic impression log. Ads are pre-ranked by baseline weighted
/// eCPM using the ground-truth base CTRs.
std::vector<Impression> generate_epoch(const SimConfig& config);
/// Draws `n_impressions` from the named stream (e.g. "tuning") of the same
/// environment; different labels give independent epochs.
std::vector<Impression> generate_epoch(const SimConfig& config, std::string_view label,
                                       std::size_t n_impressions);

/// Bernoulli draw per occupied slot at the given probabilities.
std::vector<bool> realize_clicks(const MixedTuple& tuple, const CtrVector& truth_ctrs, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Treatments

enum class TreatmentKind { kBaseline, kShuffle, kRandomTopX, kListwise };

struct Treatment {
  TreatmentKind kind = TreatmentKind::kBaseline;
  std::size_t top_x = 0;  // random_top_x only
  VirtualBid v;           // listwise only
  std::string name;

  static Treatment baseline();
  static Treatment shuffle();
  static Treatment random_top_x(std::size_t x);
  static Treatment listwise(double v_a, std::string name = {});
};

/// Models used by an arm. `truth` realizes clicks and supplies the expected
/// metrics; `allocation` drives the listwise ranker; `pointwise` supplies the
/// eCPM ranking and GSP CTRs.
struct Models {
  std::shared_ptr<const SyntheticJointModel> truth;
  std::shared_ptr<const CtrModel> allocation;
  std::shared_ptr<const SyntheticJointModel> pointwise;

  /// Perfect-prediction regime: every role uses the same model.
  static Models perfect(std::shared_ptr<const SyntheticJointModel> truth);
};

struct ArmOptions {
  std::size_t n_prime = 6;
  double gsp_exponent = 1.0;
  double floor = 0.0;
  PaymentScheme scheme = PaymentScheme::kGsp;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct ImpressionOutcome {
  MixedTuple tuple;
  double ad_ctr = 0.0;        // expected, ground truth
  double org_ctr = 0.0;
  double bid_revenue = 0.0;   // expected sum b_j x_j
  double paid_revenue = 0.0;  // expected sum price_j x_j
  double ad_clicks = 0.0;     // realized
  double org_clicks = 0.0;
  double realized_revenue = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double variance = 0.0;  // sample variance of the per-impression values
  std::size_t n = 0;

  static MetricSummary of(std::span<const double> values);
};

struct ArmResult {
  std::string name;
  std::vector<ImpressionOutcome> outcomes;

  MetricSummary metric(const std::string& key) const;
  std::vector<MixedTuple> tuples() const;
};

/// Metric keys recorded for every arm.
const std::vector<std::string>& metric_keys();

ArmResult run_treatment(std::span<const Impression> log, const Treatment& treatment, const Models& models,
                        const ArmOptions& options);

// ---------------------------------------------------------------------------
// Statistics and diversity

struct Comparison {
  double lift = 0.0;  // percent
  double z = 0.0;
  double p_value = 1.0;
  std::string marker;  // "**" at 0.1 %, "*" at 1 %, "" otherwise
};

/// Two-sample z-test on per-impression means plus the lift of a over b.
Comparison compare(const MetricSummary& treatment, const MetricSummary& control);
std::string significance_marker(double p_value);

/// sum over labels of (share of label)^2.
double herfindahl(std::span<const std::string> labels);

struct DiversityRow {
  double multi_subcat_rate = 0.0;  // share with >= 1 item off the page subcategory
  double mean_subcat_count = 0.0;
  double herfindahl = 0.0;
};

struct DiversityReport {
  DiversityRow ads;
  DiversityRow organics;
  DiversityRow overall;
};

/// Page subcategory of an impression: the logged field, else the top
/// organic's subcategory.
std::string page_subcategory(const Impression& impression);

DiversityReport diversity_metrics(std::span<const Impression> log, std::span<const MixedTuple> allocations);

// ---------------------------------------------------------------------------
// Scenarios

enum class Scenario { kExternality, kVbGrid, kVbConstant, kDiversity, kDistShift };

Scenario scenario_from_string(const std::string& name);
std::string to_string(Scenario scenario);

struct ArmRow {
  std::string name;
  std::size_t sample_size = 0;
  std::vector<std::pair<std::string, MetricSummary>> metrics;
  std::vector<std::pair<std::string, Comparison>> lifts;  // vs. the reference arm
};

struct TunedBid {
  double v_a = 0.0;
  double distance = 0.0;
  UtopiaPoint utopia;
  FrontierPoint frontier;
};

struct ExperimentReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string reference;             // name of the control arm
  std::vector<ArmRow> rows;
  std::vector<std::pair<std::string, DiversityReport>> diversity;
  std::vector<std::pair<std::string, DiversityReport>> diversity_lifts;  // percent lifts
  std::vector<std::pair<std::string, TunedBid>> tuned;
  std::vector<std::pair<std::string, double>> values;  // scenario-specific scalars
  /// Mean bid revenue per page subcategory and arm ("subcategory,arm,mean").
  std::vector<std::tuple<std::string, std::string, double>> category_revenue;

  const ArmRow& row(const std::string& name) const;
  double value(const std::string& key) const;
};

/// Tunes v_a on a fresh tuning epoch drawn from `config`.
TunedBid tune_on_config(const SimConfig& config, const SyntheticJointModel& model);

/// Runs one scenario. `log` is the evaluation epoch; when empty it is
/// generated from `config`.
ExperimentReport run_experiment_suite(const SimConfig& config, Scenario scenario,
                                      std::vector<Impression> log = {});

nlohmann::ordered_json to_json(const ExperimentReport& report);
std::string format_table(const ExperimentReport& report);
std::string category_revenue_csv(const ExperimentReport& report);

}  // namespace blend::sim
