// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "blend/cli.hpp"
#include "blend/payments.hpp"
#include "blend/simharness.hpp"
#include "blend/tuner.hpp"
#include "test_support.hpp"

using namespace blend;

namespace {

constexpr double kOracleTol = 1e-12;
constexpr double kOracleSeconds = 10.0;
constexpr double kGridSlack = 1e-9;
constexpr double kTunerSeconds = 30.0;
constexpr double kGoldenTol = 1e-6;
constexpr double kGoldenAccuracy = 1e-5;
constexpr double kSpsaRadius = 0.05;
constexpr std::size_t kSpsaIterations = 2000;
constexpr double kVcgTol = 1e-12;
constexpr std::size_t kArmImpressions = 100000;
constexpr double kSuiteSeconds = 600.0;
constexpr double kShuffleAlpha = 0.01;

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << what << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Random instance in the shape of the oracle criteria, with a random virtual bid.
struct RandomCase {
  testing::Instance in;
  double v;
};

RandomCase random_case(std::mt19937_64& rng) {
  auto in = testing::random_instance(rng, 6, 0.6, 1.4);
  std::uniform_real_distribution<double> vdist(0.0, 2.0);
  return {std::move(in), vdist(rng)};
}

void criterion_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto c = random_case(rng);
    const auto r = optimize_impression(c.in.imp, ListwisePredictor(c.in.model), VirtualBid{c.v, {}}, c.in.imp.ads.size());
    worst = std::max(worst, std::abs(r.objective_value - testing::oracle_best_welfare(c.in, c.v, testing::all_ads(c.in))));
  }
  const double secs = seconds_since(t0);
  report(1, worst <= kOracleTol && secs < kOracleSeconds, "oracle equivalence",
         fmt("500 instances, max |objective - brute force| = %.3g (tol %.0e), %.2f s (limit %.0f s)", worst, kOracleTol,
             secs, kOracleSeconds));
}

void criterion_monotone() {
  std::mt19937_64 rng(202);
  std::size_t violations = 0, steps = 0;
  for (int i = 0; i < 100; ++i) {
    const auto c = random_case(rng);
    const ListwisePredictor pred(c.in.model);
    AllocationResult prev;
    for (int g = 0; g < 50; ++g) {
      const double v = 10.0 * g / 49.0;
      const auto r = optimize_impression(c.in.imp, pred, VirtualBid{v, {}}, c.in.imp.ads.size());
      if (g > 0) {
        ++steps;
        if (r.ad_ctr_sum < prev.ad_ctr_sum || r.v_ir > prev.v_ir) ++violations;
      }
      prev = r;
    }
  }
  report(2, violations == 0, "ad CTR / revenue exchange",
         fmt("100 instances x 50-point grid on [0, 10], %zu of %zu steps violate monotonicity", violations, steps));
}

void criterion_tuner() {
  const auto t0 = std::chrono::steady_clock::now();
  sim::SimConfig config;
  const auto log = sim::generate_epoch(config, "acceptance-tuner", 50);
  const auto model = std::make_shared<const SyntheticJointModel>(sim::build_truth_model(config));
  const FrontierSolver solver(log, ListwisePredictor(model), config.n_prime, 0);
  TuneOptions opts;
  opts.bracket_lo = 0.0;
  opts.bracket_hi = 20.0;
  opts.tol = kGoldenTol;
  const auto r = tune_virtual_bid(solver, opts);
  const auto u = solver.utopia();
  double best = std::numeric_limits<double>::infinity();
  bool dominated = true;
  for (int g = 0; g < 2000; ++g) {
    const auto p = solver.frontier(VirtualBid{opts.bracket_hi * g / 1999.0, {}});
    dominated = dominated && p.mean_ctr <= u.u_ctr && p.mean_rev <= u.u_rev;
    best = std::min(best, distance_to_utopia(p, u));
  }
  for (const auto& t : r.trace) dominated = dominated && t.mean_ctr <= u.u_ctr && t.mean_rev <= u.u_rev;
  const double secs = seconds_since(t0);
  report(3, r.distance <= best + kGridSlack && dominated && secs < kTunerSeconds, "tuner vs grid",
         fmt("v = %.6f, distance %.9g vs best grid %.9g (slack %.0e), utopia dominance %s, %.2f s (limit %.0f s)",
             r.v.v_a, r.distance, best, kGridSlack, dominated ? "holds" : "violated", secs, kTunerSeconds));
}

void criterion_optimizers() {
  const double x = golden_search([](double v) { return (v - 2.0) * (v - 2.0); }, 0.0, 5.0, kGoldenTol, 10000);
  std::size_t evals = 0;
  SpsaHyperparams h;
  h.max_iter = kSpsaIterations;
  const auto theta = spsa(
      [&](std::span<const double> t) {
        ++evals;
        return t[0] * t[0] + t[1] * t[1];
      },
      {3.0, 3.0}, h, 2024);
  const double norm = std::hypot(theta[0], theta[1]);
  const bool ok = std::abs(x - 2.0) < kGoldenAccuracy && norm < kSpsaRadius && evals == 2 * kSpsaIterations;
  report(4, ok, "optimizer suites",
         fmt("golden |x-2| = %.3g (limit %.0e); SPSA |theta| = %.4g after %zu iterations (limit %.2f), %zu evaluations",
             std::abs(x - 2.0), kGoldenAccuracy, norm, kSpsaIterations, kSpsaRadius, evals));
}

void criterion_payments() {
  std::mt19937_64 rng(505);
  std::size_t gsp_bad = 0, gsp_n = 0, neg = 0, over = 0, vcg_n = 0;
  double worst_neg = 0.0, worst_over = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto c = random_case(rng);
    const ListwisePredictor pred(c.in.model);
    const std::size_t n_prime = c.in.imp.ads.size();
    const auto alloc = optimize_impression(c.in.imp, pred, VirtualBid{c.v, {}}, n_prime);
    const auto gsp = gsp_payments(c.in.imp, alloc.chosen, predict_pointwise(*c.in.model, c.in.imp, alloc.chosen), 1.0, 0.0);
    for (const auto& p : gsp.ads) {
      ++gsp_n;
      if (*p.price_per_click > c.in.imp.ads[p.candidate_index].bid_cpc) ++gsp_bad;
    }
    const auto vcg = vcg_payments(c.in.imp, pred, VirtualBid{c.v, {}}, n_prime, alloc);
    for (const auto& p : vcg.ads) {
      ++vcg_n;
      const double value = c.in.imp.ads[p.candidate_index].bid_cpc * p.pctr;
      if (p.unreserved_payment < -kVcgTol) {
        ++neg;
        worst_neg = std::min(worst_neg, p.unreserved_payment);
      }
      if (p.unreserved_payment > value + kVcgTol) {
        ++over;
        worst_over = std::max(worst_over, p.unreserved_payment - value);
      }
    }
  }

  // Single slot, no joint effects, zero virtual bid: payment is the runner-up eCPM.
  double worst_single = 0.0;
  for (int i = 0; i < 500; ++i) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 2 + rng() % 5;
    std::vector<testing::AdSpec> ads;
    for (std::size_t a = 0; a < n; ++a) ads.push_back({0.1 + 3.0 * unit(rng), "c" + std::to_string(rng() % 3), 0.01 + 0.3 * unit(rng)});
    const auto in = testing::make_instance(ads, {{"c0", 0.2}, {"c1", 0.1}}, {rng() % 3}, {1.0, 0.8, 0.6});
    const ListwisePredictor pred(in.model);
    const auto pay = vcg_payments(in.imp, pred, VirtualBid{0.0, {}}, n);
    const std::size_t winner = pay.ads[0].candidate_index;
    std::vector<int> others;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != winner) others.push_back(static_cast<int>(a));
    }
    const double second = testing::oracle_best_welfare(in, 0.0, others);
    worst_single = std::max(worst_single, std::abs(pay.ads[0].expected_payment - second));
  }

  const bool ok = gsp_bad == 0 && neg == 0 && over == 0 && worst_single <= kVcgTol;
  report(5, ok, "payment invariants",
         fmt("GSP price > bid in %zu/%zu; VCG Clarke payment < 0 in %zu/%zu (worst %.3g), > b*x in %zu/%zu (worst %.3g); "
             "single-slot VCG vs runner-up eCPM max diff %.3g (tol %.0e)",
             gsp_bad, gsp_n, neg, vcg_n, worst_neg, over, vcg_n, worst_over, worst_single, kVcgTol));
}

double metric(const sim::ArmRow& row, const std::string& key) {
  for (const auto& [k, m] : row.metrics) {
    if (k == key) return m.mean;
  }
  throw InvalidArgument("no metric " + key);
}

const sim::Comparison& lift_of(const sim::ArmRow& row, const std::string& key) {
  for (const auto& [k, c] : row.lifts) {
    if (k == key) return c;
  }
  throw InvalidArgument("no lift " + key);
}

void criterion_signs() {
  const auto t0 = std::chrono::steady_clock::now();
  sim::SimConfig config;
  config.n_impressions = kArmImpressions;
  const auto log = sim::generate_epoch(config);
  const std::size_t k = config.k_ads();

  const auto ext = sim::run_experiment_suite(config, sim::Scenario::kExternality, log);
  const auto& shuffle = ext.row("shuffle");
  const auto& topx = ext.row("top" + std::to_string(k + 2));
  const bool a = lift_of(shuffle, "ad_ctr").lift < 0.0 && lift_of(shuffle, "ad_ctr").p_value < kShuffleAlpha &&
                 lift_of(topx, "ad_ctr").lift < 0.0 && lift_of(topx, "ad_revenue").lift < 0.0;

  const auto grid = sim::run_experiment_suite(config, sim::Scenario::kVbGrid, log);
  const auto& v = grid.row("v");
  const auto& lo = grid.row("v-1");
  const auto& hi = grid.row("v+1");
  const bool b = lift_of(v, "ad_ctr").lift > 0.0 && lift_of(v, "ad_revenue").lift > 0.0 &&
                 metric(lo, "ad_ctr") < metric(v, "ad_ctr") && metric(lo, "ad_revenue") > metric(v, "ad_revenue") &&
                 metric(hi, "ad_ctr") > metric(v, "ad_ctr") && metric(hi, "ad_revenue") < metric(v, "ad_revenue");

  const auto cons = sim::run_experiment_suite(config, sim::Scenario::kVbConstant, log);
  const double tuned_v = cons.value("v_a");
  const auto& cv = cons.row("v");
  const auto& one = cons.row("v=1");
  const bool c = tuned_v > 2.0 && metric(one, "ad_revenue") > metric(cv, "ad_revenue") &&
                 metric(one, "ad_ctr") < metric(cv, "ad_ctr");

  const auto div = sim::run_experiment_suite(config, sim::Scenario::kDiversity, log);
  const auto& db = div.diversity[0].second;
  const auto& dv = div.diversity[1].second;
  const bool d = dv.ads.herfindahl < db.ads.herfindahl && dv.organics.herfindahl == db.organics.herfindahl &&
                 dv.organics.multi_subcat_rate == db.organics.multi_subcat_rate &&
                 dv.organics.mean_subcat_count == db.organics.mean_subcat_count;

  const auto shift = sim::run_experiment_suite(config, sim::Scenario::kDistShift, log);
  const double stale = shift.value("t2_distance_stale_v");
  const double retuned = shift.value("t2_distance_retuned_v");
  const bool e = stale > retuned;

  const double secs = seconds_since(t0);
  const std::string detail = fmt(
      "%zu impressions/arm; (a) %s shuffle ad_ctr %+.2f%% p=%.2g, top%zu ad_ctr %+.2f%% revenue %+.2f%%; "
      "(b) %s v=%.3f ad_ctr %+.2f%% revenue %+.2f%%, v-1 and v+1 trade off; "
      "(c) %s tuned v %.3f, v=1 revenue %+.3f ad_ctr %+.4f vs tuned; "
      "(d) %s ad HHI %.4f vs %.4f, organic HHI %.6f vs %.6f; "
      "(e) %s T2 distance stale %.5f vs re-tuned %.5f; %.1f s (limit %.0f s)",
      kArmImpressions, a ? "ok" : "FAIL", lift_of(shuffle, "ad_ctr").lift, lift_of(shuffle, "ad_ctr").p_value, k + 2,
      lift_of(topx, "ad_ctr").lift, lift_of(topx, "ad_revenue").lift, b ? "ok" : "FAIL", grid.value("v_a"),
      lift_of(v, "ad_ctr").lift, lift_of(v, "ad_revenue").lift, c ? "ok" : "FAIL", tuned_v,
      metric(one, "ad_revenue") - metric(cv, "ad_revenue"), metric(one, "ad_ctr") - metric(cv, "ad_ctr"),
      d ? "ok" : "FAIL", dv.ads.herfindahl, db.ads.herfindahl, dv.organics.herfindahl, db.organics.herfindahl,
      e ? "ok" : "FAIL", stale, retuned, secs, kSuiteSeconds);
  report(6, a && b && c && d && e && secs < kSuiteSeconds, "experiment sign patterns", detail);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("blend_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  sim::SimConfig config;
  config.n_impressions = 20000;
  auto doc = sim::to_json(config);
  doc.erase("threads");
  std::ofstream((dir / "config.json").string()) << doc.dump(2);

  auto run = [&](const std::string& threads, const std::string& name) {
    const std::string cfg = (dir / "config.json").string();
    const std::string out = (dir / name).string();
    const char* argv[] = {"blend", "--threads", threads.c_str(), "pipeline", "--config", cfg.c_str(), "--report",
                          out.c_str()};
    std::ostringstream sink, err;
    const int code = cli::run(8, argv, sink, err);
    return std::make_pair(code, slurp(out) + sink.str());
  };
  const auto a = run("1", "a.json");
  const auto b = run("1", "b.json");
  const auto c = run("4", "c.json");
  fs::remove_all(dir);
  const bool ok = a.first == 0 && b.first == 0 && c.first == 0 && a.second == b.second && a.second == c.second;
  report(7, ok, "determinism",
         fmt("three pipeline runs (threads 1, 1, 4), %zu-byte report+table, identical: %s", a.second.size(),
             ok ? "yes" : "no"));
}

}  // namespace

int main() {
  unsetenv("BLEND_SEED");
  try {
    criterion_oracle();
    criterion_monotone();
    criterion_tuner();
    criterion_optimizers();
    criterion_payments();
    criterion_signs();
    criterion_determinism();
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
