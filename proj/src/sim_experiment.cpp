#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "blend/parallel.hpp"
#include "blend/simharness.hpp"

namespace blend::sim {

using nlohmann::ordered_json;

Treatment Treatment::baseline() { return {TreatmentKind::kBaseline, 0, {}, "baseline"}; }
Treatment Treatment::shuffle() { return {TreatmentKind::kShuffle, 0, {}, "shuffle"}; }
Treatment Treatment::random_top_x(std::size_t x) {
  return {TreatmentKind::kRandomTopX, x, {}, "top" + std::to_string(x)};
}
Treatment Treatment::listwise(double v_a, std::string name) {
  if (name.empty()) {
    std::ostringstream os;
    os << "v=" << v_a;
    name = os.str();
  }
  return {TreatmentKind::kListwise, 0, VirtualBid{v_a, {}}, std::move(name)};
}

Models Models::perfect(std::shared_ptr<const SyntheticJointModel> truth) {
  return {truth, std::make_shared<ListwisePredictor>(truth), truth};
}

MetricSummary MetricSummary::of(std::span<const double> values) {
  MetricSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.n - 1);
  }
  return s;
}

const std::vector<std::string>& metric_keys() {
  static const std::vector<std::string> keys = {"ad_ctr",          "ad_revenue",      "org_ctr",
                                                "paid_revenue",    "ad_ctr_realized", "org_ctr_realized",
                                                "paid_revenue_realized"};
  return keys;
}

MetricSummary ArmResult::metric(const std::string& key) const {
  double ImpressionOutcome::*field = nullptr;
  if (key == "ad_ctr") field = &ImpressionOutcome::ad_ctr;
  else if (key == "ad_revenue") field = &ImpressionOutcome::bid_revenue;
  else if (key == "org_ctr") field = &ImpressionOutcome::org_ctr;
  else if (key == "paid_revenue") field = &ImpressionOutcome::paid_revenue;
  else if (key == "ad_ctr_realized") field = &ImpressionOutcome::ad_clicks;
  else if (key == "org_ctr_realized") field = &ImpressionOutcome::org_clicks;
  else if (key == "paid_revenue_realized") field = &ImpressionOutcome::realized_revenue;
  else throw InvalidArgument("unknown metric '" + key + "'");
  std::vector<double> values;
  values.reserve(outcomes.size());
  for (const auto& o : outcomes) values.push_back(o.*field);
  return MetricSummary::of(values);
}

std::vector<MixedTuple> ArmResult::tuples() const {
  std::vector<MixedTuple> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.tuple);
  return out;
}

namespace {

MixedTuple allocate(const Impression& imp, const Treatment& treatment, const Models& models,
                    const ArmOptions& options, std::mt19937_64& rng, AllocationResult* listwise_result) {
  const std::size_t k = imp.layout.k_ads();
  switch (treatment.kind) {
    case TreatmentKind::kBaseline:
      return baseline_tuple(imp, candidate_base_ctrs(*models.pointwise, imp), options.gsp_exponent);
    case TreatmentKind::kShuffle: {
      auto order = weighted_ecpm_order(imp, candidate_base_ctrs(*models.pointwise, imp), options.gsp_exponent);
      order.resize(k);
      std::shuffle(order.begin(), order.end(), rng);
      return blend::make_tuple(imp, order);
    }
    case TreatmentKind::kRandomTopX: {
      if (treatment.top_x < k) throw InvalidArgument("random_top_x: X must be >= K_ads");
      if (treatment.top_x > imp.ads.size()) throw InvalidArgument("random_top_x: X exceeds N_ads");
      std::vector<std::size_t> pool(treatment.top_x);
      std::iota(pool.begin(), pool.end(), 0);
      // Partial Fisher-Yates: uniform ordered K-subset of the top X.
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      pool.resize(k);
      return blend::make_tuple(imp, pool);
    }
    case TreatmentKind::kListwise: {
      *listwise_result = optimize_impression(imp, *models.allocation, treatment.v, options.n_prime);
      return listwise_result->chosen;
    }
  }
  throw InvalidArgument("unknown treatment");
}

}  // namespace

ArmResult run_treatment(std::span<const Impression> log, const Treatment& treatment, const Models& models,
                        const ArmOptions& options) {
  if (!models.truth || !models.allocation || !models.pointwise) throw InvalidArgument("run_treatment: missing model");
  ArmResult arm;
  arm.name = treatment.name;
  arm.outcomes.resize(log.size());
  const std::uint64_t stream = stream_id(treatment.name);

  parallel_for(log.size(), options.threads, [&](std::size_t i) {
    const Impression& imp = log[i];
    auto rng = keyed_rng(options.seed, stream, i);
    AllocationResult listwise;
    ImpressionOutcome& out = arm.outcomes[i];
    out.tuple = allocate(imp, treatment, models, options, rng, &listwise);

    const CtrVector truth = predict_listwise(*models.truth, imp, out.tuple);
    out.ad_ctr = ad_ctr_sum(out.tuple, truth);
    out.org_ctr = organic_ctr_sum(out.tuple, truth);

    PaymentSchedule pay;
    if (treatment.kind == TreatmentKind::kListwise && options.scheme == PaymentScheme::kVcg) {
      pay = vcg_payments(imp, *models.allocation, treatment.v, options.n_prime, listwise);
    } else {
      pay = gsp_payments(imp, out.tuple, predict_pointwise(*models.pointwise, imp, out.tuple), options.gsp_exponent,
                         options.floor);
    }
    std::vector<double> price(out.tuple.slots.size(), 0.0);
    for (const auto& p : pay.ads) {
      // Without a per-click price the expected payment is booked as is.
      price[p.position] = p.price_per_click ? *p.price_per_click : 0.0;
      if (!p.price_per_click) out.paid_revenue += p.expected_payment;
    }

    const auto clicks = realize_clicks(out.tuple, truth, rng);
    for (std::size_t p = 0; p < out.tuple.slots.size(); ++p) {
      const Slot& s = out.tuple.slots[p];
      if (s.kind == SlotKind::kAd) {
        out.bid_revenue += imp.ads[s.index].bid_cpc * truth[p];
        out.paid_revenue += price[p] * truth[p];
        if (clicks[p]) {
          out.ad_clicks += 1.0;
          out.realized_revenue += price[p];
        }
      } else if (s.kind == SlotKind::kOrganic && clicks[p]) {
        out.org_clicks += 1.0;
      }
    }
  });
  return arm;
}

std::string significance_marker(double p_value) {
  if (p_value < 0.001) return "**";
  if (p_value < 0.01) return "*";
  return "";
}

Comparison compare(const MetricSummary& treatment, const MetricSummary& control) {
  Comparison c;
  c.lift = lift(treatment.mean, control.mean);
  const double diff = treatment.mean - control.mean;
  const double se = std::sqrt(treatment.variance / static_cast<double>(std::max<std::size_t>(treatment.n, 1)) +
                              control.variance / static_cast<double>(std::max<std::size_t>(control.n, 1)));
  if (se > 0.0) {
    c.z = diff / se;
  } else {
    c.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  c.p_value = std::erfc(std::abs(c.z) / std::sqrt(2.0));
  c.marker = significance_marker(c.p_value);
  return c;
}

double herfindahl(std::span<const std::string> labels) {
  if (labels.empty()) throw InvalidArgument("herfindahl: no labels");
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, count] : counts) {
    const double share = static_cast<double>(count) / n;
    h += share * share;
  }
  return h;
}

std::string page_subcategory(const Impression& impression) {
  if (!impression.page_subcategory.empty()) return impression.page_subcategory;
  if (!impression.organics.empty()) return impression.organics.front().subcategory;
  return {};
}

DiversityReport diversity_metrics(std::span<const Impression> log, std::span<const MixedTuple> allocations) {
  if (log.empty()) throw InvalidArgument("diversity_metrics: no allocations");
  if (log.size() != allocations.size()) throw InvalidArgument("diversity_metrics: one allocation per impression");

  struct Acc {
    double multi = 0.0, count = 0.0, hhi = 0.0;
    DiversityRow finish(double n) const { return {multi / n, count / n, hhi / n}; }
  };
  Acc ads, orgs, all;
  std::vector<std::string> ad_labels, org_labels, all_labels;
  auto add = [](Acc& acc, const std::vector<std::string>& labels, const std::string& page) {
    if (labels.empty()) return;
    const bool off_page = std::any_of(labels.begin(), labels.end(), [&](const auto& l) { return l != page; });
    acc.multi += off_page ? 1.0 : 0.0;
    acc.count += static_cast<double>(std::set<std::string>(labels.begin(), labels.end()).size());
    acc.hhi += herfindahl(labels);
  };
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Impression& imp = log[i];
    ad_labels.clear();
    org_labels.clear();
    all_labels.clear();
    for (const Slot& s : allocations[i].slots) {
      if (s.kind == SlotKind::kAd) {
        ad_labels.push_back(imp.ads[s.index].subcategory);
        all_labels.push_back(ad_labels.back());
      } else if (s.kind == SlotKind::kOrganic) {
        org_labels.push_back(imp.organics[s.index].subcategory);
        all_labels.push_back(org_labels.back());
      }
    }
    const std::string page = page_subcategory(imp);
    add(ads, ad_labels, page);
    add(orgs, org_labels, page);
    add(all, all_labels, page);
  }
  const double n = static_cast<double>(log.size());
  return {ads.finish(n), orgs.finish(n), all.finish(n)};
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "externality") return Scenario::kExternality;
  if (name == "vb_grid") return Scenario::kVbGrid;
  if (name == "vb_constant") return Scenario::kVbConstant;
  if (name == "diversity") return Scenario::kDiversity;
  if (name == "dist_shift") return Scenario::kDistShift;
  throw InvalidArgument("unknown scenario '" + name + "'");
}

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kExternality: return "externality";
    case Scenario::kVbGrid: return "vb_grid";
    case Scenario::kVbConstant: return "vb_constant";
    case Scenario::kDiversity: return "diversity";
    case Scenario::kDistShift: return "dist_shift";
  }
  return "unknown";
}

const ArmRow& ExperimentReport::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw InvalidArgument("report has no arm '" + name + "'");
}

double ExperimentReport::value(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw InvalidArgument("report has no value '" + key + "'");
}

namespace {

struct TuningRun {
  FrontierSolver solver;
  TuneResult result;
};

TuningRun tune_run(const SimConfig& config, const SyntheticJointModel& model) {
  const auto log = generate_epoch(config, "tuning", config.tuning.impressions);
  const ListwisePredictor predictor(std::make_shared<const SyntheticJointModel>(model));
  FrontierSolver solver(log, predictor, config.n_prime, config.threads);
  TuneOptions opts;
  opts.method = config.tuning.method;
  opts.bracket_lo = config.tuning.bracket_lo;
  if (config.tuning.bracket_hi >= 0.0) {
    opts.bracket_hi = config.tuning.bracket_hi;
  } else {
    double max_bid = 0.0;
    for (const auto& imp : log) {
      for (const auto& ad : imp.ads) max_bid = std::max(max_bid, ad.bid_cpc);
    }
    opts.bracket_hi = std::max(opts.bracket_lo, 10.0 * max_bid);
  }
  opts.tol = config.tuning.tol;
  opts.max_iter = config.tuning.max_iter;
  opts.seed = config.seed;
  auto result = tune_virtual_bid(solver, opts);
  return {std::move(solver), std::move(result)};
}

TunedBid summarize(const TuneResult& r) { return {r.v.v_a, r.distance, r.utopia, r.frontier}; }

ArmRow make_row(const ArmResult& arm, const ArmResult* reference) {
  ArmRow row;
  row.name = arm.name;
  row.sample_size = arm.outcomes.size();
  for (const auto& key : metric_keys()) {
    const MetricSummary m = arm.metric(key);
    row.metrics.emplace_back(key, m);
    if (reference != nullptr) row.lifts.emplace_back(key, compare(m, reference->metric(key)));
  }
  return row;
}

double lift_or_nan(double treatment, double control) {
  return control == 0.0 ? std::numeric_limits<double>::quiet_NaN() : lift(treatment, control);
}

DiversityReport diversity_lift(const DiversityReport& t, const DiversityReport& c) {
  auto row = [](const DiversityRow& a, const DiversityRow& b) {
    return DiversityRow{lift_or_nan(a.multi_subcat_rate, b.multi_subcat_rate),
                        lift_or_nan(a.mean_subcat_count, b.mean_subcat_count),
                        lift_or_nan(a.herfindahl, b.herfindahl)};
  };
  return {row(t.ads, c.ads), row(t.organics, c.organics), row(t.overall, c.overall)};
}

void add_category_revenue(ExperimentReport& report, std::span<const Impression> log, const ArmResult& arm,
                          const std::string& label) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < log.size(); ++i) {
    auto& [sum, n] = acc[page_subcategory(log[i])];
    sum += arm.outcomes[i].bid_revenue;
    ++n;
  }
  for (const auto& [cat, sn] : acc) {
    report.category_revenue.emplace_back(cat, label, sn.first / static_cast<double>(sn.second));
  }
}

ArmOptions arm_options(const SimConfig& config) {
  return {config.n_prime, config.gsp_exponent, config.floor, config.payment_scheme, config.seed, config.threads};
}

}  // namespace

TunedBid tune_on_config(const SimConfig& config, const SyntheticJointModel& model) {
  return summarize(tune_run(config, model).result);
}

ExperimentReport run_experiment_suite(const SimConfig& config, Scenario scenario, std::vector<Impression> log) {
  config.validate();
  if (log.empty()) log = generate_epoch(config);
  const auto truth = std::make_shared<const SyntheticJointModel>(build_truth_model(config));
  const Models models = Models::perfect(truth);
  const ArmOptions opts = arm_options(config);
  const std::size_t k = config.k_ads();

  ExperimentReport report;
  report.scenario = to_string(scenario);
  report.seed = config.seed;
  report.reference = "baseline";

  auto run_arms = [&](std::span<const Impression> epoch, const Models& m, const std::vector<Treatment>& treatments) {
    std::vector<ArmResult> arms;
    for (const auto& t : treatments) arms.push_back(run_treatment(epoch, t, m, opts));
    return arms;
  };
  auto emit_rows = [&](const std::vector<ArmResult>& arms, const std::string& prefix, std::span<const Impression> epoch) {
    for (std::size_t a = 0; a < arms.size(); ++a) {
      ArmRow row = make_row(arms[a], a == 0 ? nullptr : &arms[0]);
      row.name = prefix + row.name;
      report.rows.push_back(std::move(row));
      add_category_revenue(report, epoch, arms[a], prefix + arms[a].name);
    }
  };

  switch (scenario) {
    case Scenario::kExternality: {
      const auto arms = run_arms(log, models,
                                 {Treatment::baseline(), Treatment::shuffle(), Treatment::random_top_x(k + 1),
                                  Treatment::random_top_x(k + 2)});
      emit_rows(arms, "", log);
      break;
    }
    case Scenario::kVbGrid: {
      const auto tuned = tune_run(config, *truth);
      const double v = tuned.result.v.v_a;
      report.tuned.emplace_back("v", summarize(tuned.result));
      report.values.emplace_back("v_a", v);
      const auto arms = run_arms(log, models,
                                 {Treatment::baseline(), Treatment::listwise(v, "v"),
                                  Treatment::listwise(v - 1.0, "v-1"), Treatment::listwise(v + 1.0, "v+1")});
      emit_rows(arms, "", log);
      break;
    }
    case Scenario::kVbConstant: {
      const auto tuned = tune_run(config, *truth);
      const double v = tuned.result.v.v_a;
      report.tuned.emplace_back("v", summarize(tuned.result));
      report.values.emplace_back("v_a", v);
      const auto arms =
          run_arms(log, models, {Treatment::baseline(), Treatment::listwise(v, "v"), Treatment::listwise(1.0, "v=1")});
      emit_rows(arms, "", log);
      break;
    }
    case Scenario::kDiversity: {
      const auto tuned = tune_run(config, *truth);
      const double v = tuned.result.v.v_a;
      report.tuned.emplace_back("v", summarize(tuned.result));
      report.values.emplace_back("v_a", v);
      const auto arms = run_arms(log, models, {Treatment::baseline(), Treatment::listwise(v, "v")});
      emit_rows(arms, "", log);
      const auto base_div = diversity_metrics(log, arms[0].tuples());
      const auto vb_div = diversity_metrics(log, arms[1].tuples());
      report.diversity.emplace_back("baseline", base_div);
      report.diversity.emplace_back("v", vb_div);
      report.diversity_lifts.emplace_back("v", diversity_lift(vb_div, base_div));
      break;
    }
    case Scenario::kDistShift: {
      report.reference = "respective T1";
      const auto tuned_t1 = tune_run(config, *truth);
      const double v1 = tuned_t1.result.v.v_a;
      report.tuned.emplace_back("T1", summarize(tuned_t1.result));

      const SimConfig config_t2 = config.shifted();
      const auto truth_t2 = std::make_shared<const SyntheticJointModel>(build_truth_model(config_t2));
      const auto log_t2 = generate_epoch(config_t2);
      const auto tuned_t2 = tune_run(config_t2, *truth_t2);
      report.tuned.emplace_back("T2", summarize(tuned_t2.result));

      const std::vector<Treatment> treatments = {Treatment::baseline(), Treatment::listwise(v1, "v"),
                                                 Treatment::listwise(1.0, "v=1")};
      const auto arms_t1 = run_arms(log, models, treatments);
      const auto arms_t2 = run_arms(log_t2, Models::perfect(truth_t2), treatments);
      for (std::size_t a = 0; a < treatments.size(); ++a) {
        ArmRow r1 = make_row(arms_t1[a], nullptr);
        r1.name = "T1/" + r1.name;
        report.rows.push_back(std::move(r1));
        add_category_revenue(report, log, arms_t1[a], "T1/" + arms_t1[a].name);
      }
      for (std::size_t a = 0; a < treatments.size(); ++a) {
        ArmRow r2 = make_row(arms_t2[a], &arms_t1[a]);
        r2.name = "T2/" + r2.name;
        report.rows.push_back(std::move(r2));
        add_category_revenue(report, log_t2, arms_t2[a], "T2/" + arms_t2[a].name);
      }

      const UtopiaPoint u2 = tuned_t2.solver.utopia();
      report.values.emplace_back("v_t1", v1);
      report.values.emplace_back("v_t2", tuned_t2.result.v.v_a);
      report.values.emplace_back("t2_distance_stale_v",
                                 distance_to_utopia(tuned_t2.solver.frontier(VirtualBid{v1, {}}), u2));
      report.values.emplace_back("t2_distance_retuned_v", tuned_t2.result.distance);
      report.values.emplace_back("t2_distance_v1",
                                 distance_to_utopia(tuned_t2.solver.frontier(VirtualBid{1.0, {}}), u2));
      break;
    }
  }
  return report;
}

namespace {

ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

ordered_json to_json(const DiversityRow& r) {
  return {{"multi_subcat_rate", number(r.multi_subcat_rate)},
          {"mean_subcat_count", number(r.mean_subcat_count)},
          {"herfindahl", number(r.herfindahl)}};
}

ordered_json to_json(const DiversityReport& d) {
  return {{"ads", to_json(d.ads)}, {"organics", to_json(d.organics)}, {"overall", to_json(d.overall)}};
}

}  // namespace

ordered_json to_json(const ExperimentReport& report) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json metrics = ordered_json::object();
    for (const auto& [key, m] : r.metrics) {
      metrics[key] = {{"mean", number(m.mean)}, {"variance", number(m.variance)}};
    }
    ordered_json lifts = ordered_json::object();
    for (const auto& [key, c] : r.lifts) {
      lifts[key] = {{"lift_pct", number(c.lift)}, {"z", number(c.z)}, {"p_value", number(c.p_value)},
                    {"significance", c.marker}};
    }
    rows.push_back({{"treatment", r.name}, {"sample_size", r.sample_size}, {"metrics", metrics}, {"lifts", lifts}});
  }
  ordered_json tuned = ordered_json::object();
  for (const auto& [name, t] : report.tuned) {
    tuned[name] = {{"v_a", number(t.v_a)},
                   {"distance", number(t.distance)},
                   {"utopia", {{"u_ctr", number(t.utopia.u_ctr)}, {"u_rev", number(t.utopia.u_rev)}}},
                   {"frontier", {{"mean_ctr", number(t.frontier.mean_ctr)}, {"mean_rev", number(t.frontier.mean_rev)}}}};
  }
  ordered_json diversity = ordered_json::object();
  for (const auto& [name, d] : report.diversity) diversity[name] = to_json(d);
  ordered_json diversity_lifts = ordered_json::object();
  for (const auto& [name, d] : report.diversity_lifts) diversity_lifts[name] = to_json(d);
  ordered_json values = ordered_json::object();
  for (const auto& [key, v] : report.values) values[key] = number(v);

  return {{"scenario", report.scenario},
          {"seed", report.seed},
          {"reference", report.reference},
          {"tuned", tuned},
          {"rows", rows},
          {"diversity", diversity},
          {"diversity_lifts", diversity_lifts},
          {"values", values}};
}

std::string format_table(const ExperimentReport& report) {
  std::ostringstream os;
  os << "scenario: " << report.scenario << "  seed: " << report.seed << "  lifts vs " << report.reference << "\n";
  for (const auto& [name, t] : report.tuned) {
    os << "tuned " << name << ": v_a=" << std::setprecision(6) << t.v_a << " distance=" << t.distance
       << " utopia=(" << t.utopia.u_ctr << ", " << t.utopia.u_rev << ")\n";
  }
  const std::vector<std::string> shown = {"ad_ctr", "ad_revenue", "org_ctr", "paid_revenue"};
  os << std::left << std::setw(14) << "treatment" << std::right << std::setw(10) << "n";
  for (const auto& key : shown) os << std::setw(14) << key << std::setw(13) << "lift";
  os << "\n";
  auto cell = [&](const Comparison* c) {
    std::ostringstream s;
    if (c == nullptr) {
      s << "-";
    } else {
      s << std::fixed << std::setprecision(2) << c->lift << "%" << c->marker;
    }
    return s.str();
  };
  for (const auto& r : report.rows) {
    os << std::left << std::setw(14) << r.name << std::right << std::setw(10) << r.sample_size;
    for (const auto& key : shown) {
      const MetricSummary* m = nullptr;
      for (const auto& [k, v] : r.metrics) {
        if (k == key) m = &v;
      }
      const Comparison* c = nullptr;
      for (const auto& [k, v] : r.lifts) {
        if (k == key) c = &v;
      }
      os << std::setw(14) << std::fixed << std::setprecision(6) << (m ? m->mean : 0.0) << std::setw(13) << cell(c);
      os.unsetf(std::ios::fixed);
    }
    os << "\n";
  }
  if (!report.diversity.empty()) {
    os << "\ndiversity        multi_subcat   n_subcat   herfindahl\n";
    auto line = [&](const std::string& label, const DiversityRow& d) {
      os << std::left << std::setw(17) << label << std::right << std::fixed << std::setprecision(6) << std::setw(12)
         << d.multi_subcat_rate << std::setw(11) << d.mean_subcat_count << std::setw(13) << d.herfindahl << "\n";
      os.unsetf(std::ios::fixed);
    };
    for (const auto& [name, d] : report.diversity) {
      line(name + "/ads", d.ads);
      line(name + "/organic", d.organics);
      line(name + "/overall", d.overall);
    }
    for (const auto& [name, d] : report.diversity_lifts) {
      line(name + " lift% ads", d.ads);
      line(name + " lift% org", d.organics);
      line(name + " lift% all", d.overall);
    }
  }
  if (!report.values.empty()) {
    os << "\n";
    for (const auto& [key, v] : report.values) os << key << " = " << std::setprecision(10) << v << "\n";
  }
  return os.str();
}

std::string category_revenue_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "subcategory,treatment,mean_ad_revenue\n" << std::setprecision(12);
  for (const auto& [cat, arm, mean] : report.category_revenue) os << cat << ',' << arm << ',' << mean << '\n';
  return os.str();
}

}  // namespace blend::sim
