#include "blend/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "blend/io.hpp"
#include "blend/parallel.hpp"
#include "blend/simharness.hpp"

namespace blend::cli {

using nlohmann::ordered_json;

namespace {

struct ModelSource {
  std::string model_path;
  std::string config_path;
};

void add_model_source(CLI::App* cmd, ModelSource& src) {
  auto* m = cmd->add_option("--model", src.model_path, "CTR model config (JSON)");
  auto* c = cmd->add_option("--config", src.config_path, "simulation config; its ground-truth model is used");
  m->excludes(c);
}

sim::SimConfig load_sim_config(const std::string& path) {
  sim::SimConfig config;
  if (!path.empty()) config = sim::sim_config_from_json(read_json_file(path));
  if (const char* env = std::getenv("BLEND_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      config.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("BLEND_SEED is not an unsigned integer: ") + env);
    }
  }
  config.validate();
  return config;
}

std::shared_ptr<const SyntheticJointModel> load_model(const ModelSource& src) {
  if (!src.model_path.empty()) return std::make_shared<const SyntheticJointModel>(read_model(src.model_path));
  if (!src.config_path.empty()) {
    return std::make_shared<const SyntheticJointModel>(sim::build_truth_model(load_sim_config(src.config_path)));
  }
  throw InvalidArgument("one of --model or --config is required");
}

/// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

std::vector<Impression> load_log(const std::string& path) { return read_impression_log(std::filesystem::path(path)); }

// ---------------------------------------------------------------------------

struct AllocateArgs {
  std::string log;
  ModelSource model;
  double v_a = 0.0;
  std::size_t n_prime = 0;  // 0: N_ads of each impression
  std::string scheme = "gsp";
  double gsp_exponent = 1.0;
  double floor = 0.0;
  std::string out;
};

int allocate_command(const AllocateArgs& a, std::size_t threads, std::ostream& out) {
  const PaymentScheme scheme = payment_scheme_from_string(a.scheme);
  if (a.gsp_exponent < 0.0) throw InvalidArgument("--gsp-exponent must be >= 0");
  if (a.floor < 0.0) throw InvalidArgument("--floor must be >= 0");
  const auto model = load_model(a.model);
  const ListwisePredictor predictor(model);
  const auto log = load_log(a.log);
  const VirtualBid v{a.v_a, {}};

  std::vector<std::string> lines(log.size());
  parallel_for(log.size(), threads, [&](std::size_t i) {
    const Impression& imp = log[i];
    const std::size_t n_prime = a.n_prime == 0 ? imp.ads.size() : a.n_prime;
    const AllocationResult r = optimize_impression(imp, predictor, v, n_prime);
    const PaymentSchedule pay =
        scheme == PaymentScheme::kVcg
            ? vcg_payments(imp, predictor, v, n_prime, r)
            : gsp_payments(imp, r.chosen, predict_pointwise(*model, imp, r.chosen), a.gsp_exponent, a.floor);
    ordered_json rec = {{"impression_id", imp.impression_id},
                        {"v_a", a.v_a},
                        {"allocation", to_json(r.chosen, imp)},
                        {"ctrs", r.ctrs},
                        {"objective",
                         {{"value", r.objective_value},
                          {"v_ia", r.v_ia},
                          {"v_ir", r.v_ir},
                          {"ad_ctr_sum", r.ad_ctr_sum},
                          {"org_ctr_sum", r.org_ctr_sum}}},
                        {"payments", to_json(pay)}};
    lines[i] = rec.dump() + "\n";
  });
  std::string text;
  for (const auto& l : lines) text += l;
  emit(a.out, text, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TuneArgs {
  std::string log;
  ModelSource model;
  std::size_t n_prime = 0;
  std::string method = "golden";
  std::vector<double> bracket = {0.0, 10.0};
  double tol = 1e-6;
  std::size_t max_iter = 200;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ordered_json tune_document(const TuneResult& r) {
  ordered_json trace = ordered_json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"v_a", t.v_a}, {"mean_ctr", t.mean_ctr}, {"mean_rev", t.mean_rev}, {"distance", t.distance}});
  }
  return {{"v_a", r.v.v_a},
          {"distance", r.distance},
          {"utopia", {{"u_ctr", r.utopia.u_ctr}, {"u_rev", r.utopia.u_rev}}},
          {"frontier", {{"mean_ctr", r.frontier.mean_ctr}, {"mean_rev", r.frontier.mean_rev}}},
          {"frontier_trace", std::move(trace)}};
}

int tune_command(const TuneArgs& a, std::size_t threads, std::ostream& out) {
  if (a.bracket.size() != 2) throw InvalidArgument("--bracket expects lo,hi");
  const auto model = load_model(a.model);
  const ListwisePredictor predictor(model);
  const auto log = load_log(a.log);
  if (log.empty()) throw InvalidArgument("tune-vb: the log has no impressions");
  std::size_t n_prime = a.n_prime;
  if (n_prime == 0) {
    n_prime = log.front().ads.size();
    for (const auto& imp : log) n_prime = std::min(n_prime, imp.ads.size());
  }
  TuneOptions opts;
  opts.method = tune_method_from_string(a.method);
  opts.bracket_lo = a.bracket[0];
  opts.bracket_hi = a.bracket[1];
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  opts.seed = a.seed ? *a.seed : load_sim_config("").seed;
  const TuneResult r = tune_virtual_bid(log, predictor, n_prime, opts, threads);
  emit(a.out, tune_document(r).dump(2) + "\n", out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string model_out;
  std::size_t n = 0;
};

int simulate_command(const SimulateArgs& a, std::optional<std::size_t> threads, std::ostream& out) {
  auto config = load_sim_config(a.config);
  if (threads) config.threads = *threads;
  if (a.n > 0) config.n_impressions = a.n;
  const auto log = sim::generate_epoch(config);
  std::ostringstream os;
  write_impression_log(os, log);
  emit(a.out, os.str(), out);
  if (!a.model_out.empty()) write_text_file(a.model_out, to_json(sim::build_truth_model(config)).dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::vector<std::string> scenarios;
  std::string config;
  std::string log;
  std::string report;
  std::string table;
  std::string csv;
};

std::vector<sim::Scenario> parse_scenarios(const std::vector<std::string>& names) {
  std::vector<sim::Scenario> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.insert(out.end(), {sim::Scenario::kExternality, sim::Scenario::kVbGrid, sim::Scenario::kVbConstant,
                             sim::Scenario::kDiversity, sim::Scenario::kDistShift});
    } else {
      out.push_back(sim::scenario_from_string(n));
    }
  }
  if (out.empty()) throw InvalidArgument("no scenario selected");
  return out;
}

/// Report document. The thread count is left out so output does not depend on it.
ordered_json pipeline_document(const sim::SimConfig& config, const std::vector<sim::ExperimentReport>& reports) {
  ordered_json cfg = sim::to_json(config);
  cfg.erase("threads");
  ordered_json scenarios = ordered_json::array();
  for (const auto& r : reports) scenarios.push_back(sim::to_json(r));
  return {{"schema_version", 1}, {"config", std::move(cfg)}, {"scenarios", std::move(scenarios)}};
}

void write_reports(const sim::SimConfig& config, const std::vector<sim::ExperimentReport>& reports,
                   const ExperimentArgs& a, std::ostream& out) {
  std::string table;
  std::string csv;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i > 0) table += "\n";
    table += sim::format_table(reports[i]);
    const std::string part = sim::category_revenue_csv(reports[i]);
    // Keep a single header line.
    csv += i == 0 ? part : part.substr(part.find('\n') + 1);
  }
  const std::string json = pipeline_document(config, reports).dump(2) + "\n";
  if (a.report.empty()) {
    out << table;
  } else {
    write_text_file(a.report, json);
    if (a.table.empty()) out << table;
  }
  if (!a.table.empty()) emit(a.table, table, out);
  if (!a.csv.empty()) write_text_file(a.csv, csv);
}

int experiment_command(const ExperimentArgs& a, std::optional<std::size_t> threads, std::ostream& out) {
  auto config = load_sim_config(a.config);
  if (threads) config.threads = *threads;
  const auto scenarios = parse_scenarios(a.scenarios);
  std::vector<Impression> log;
  if (!a.log.empty()) {
    log = load_log(a.log);
    if (log.empty()) throw InvalidArgument("experiment: the log has no impressions");
  }
  std::vector<sim::ExperimentReport> reports;
  for (auto s : scenarios) reports.push_back(sim::run_experiment_suite(config, s, log));
  write_reports(config, reports, a, out);
  return kExitOk;
}

/// simulate -> tune -> every scenario, one report.
int pipeline_command(const ExperimentArgs& a, const std::string& log_out, std::optional<std::size_t> threads,
                     std::ostream& out) {
  auto config = load_sim_config(a.config);
  if (threads) config.threads = *threads;
  const auto scenarios = parse_scenarios(a.scenarios);
  const auto log = sim::generate_epoch(config);
  if (!log_out.empty()) write_impression_log(std::filesystem::path(log_out), log);
  std::vector<sim::ExperimentReport> reports;
  for (auto s : scenarios) reports.push_back(sim::run_experiment_suite(config, s, log));
  write_reports(config, reports, a, out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blended ads and organic allocation with virtual bids"};
  app.require_subcommand(1);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "worker threads (default: all cores)")->check(CLI::PositiveNumber);

  AllocateArgs alloc;
  auto* c_alloc = app.add_subcommand("allocate", "listwise allocation and payments for each impression of a log");
  c_alloc->add_option("--log", alloc.log, "impression log (JSON lines)")->required();
  add_model_source(c_alloc, alloc.model);
  c_alloc->add_option("--v", alloc.v_a, "virtual bid v_a");
  c_alloc->add_option("--n-prime", alloc.n_prime, "candidate window (default: all candidates)");
  c_alloc->add_option("--scheme", alloc.scheme, "gsp or vcg");
  c_alloc->add_option("--gsp-exponent", alloc.gsp_exponent, "GSP squashing exponent t");
  c_alloc->add_option("--floor", alloc.floor, "GSP reserve price");
  c_alloc->add_option("--out", alloc.out, "output file (default: stdout)");

  TuneArgs tune;
  auto* c_tune = app.add_subcommand("tune-vb", "tune the virtual bid on a log");
  c_tune->add_option("--log", tune.log, "impression log (JSON lines)")->required();
  add_model_source(c_tune, tune.model);
  c_tune->add_option("--n-prime", tune.n_prime, "candidate window (default: smallest N_ads in the log)");
  c_tune->add_option("--method", tune.method, "golden or spsa");
  c_tune->add_option("--bracket", tune.bracket, "search interval lo,hi")->delimiter(',')->expected(2);
  c_tune->add_option("--tol", tune.tol, "golden-section tolerance");
  c_tune->add_option("--max-iter", tune.max_iter, "iteration cap");
  c_tune->add_option("--seed", tune.seed, "SPSA seed (default: BLEND_SEED or 1)");
  c_tune->add_option("--out", tune.out, "output file (default: stdout)");

  SimulateArgs simulate;
  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic impression log");
  c_sim->add_option("--config", simulate.config, "simulation config (JSON)");
  c_sim->add_option("--out", simulate.out, "log file (default: stdout)");
  c_sim->add_option("--model-out", simulate.model_out, "write the ground-truth model config");
  c_sim->add_option("--impressions", simulate.n, "override n_impressions");

  ExperimentArgs experiment;
  auto* c_exp = app.add_subcommand("experiment", "run experiment scenarios");
  c_exp->add_option("--scenario", experiment.scenarios,
                    "externality, vb_grid, vb_constant, diversity, dist_shift or all")
      ->required()
      ->delimiter(',');
  c_exp->add_option("--config", experiment.config, "simulation config (JSON)");
  c_exp->add_option("--log", experiment.log, "evaluation log (default: generated)");
  c_exp->add_option("--report", experiment.report, "JSON report file");
  c_exp->add_option("--table", experiment.table, "text table file (default: stdout)");
  c_exp->add_option("--csv", experiment.csv, "per-subcategory revenue CSV");

  ExperimentArgs pipeline;
  pipeline.scenarios = {"all"};
  std::string pipeline_log;
  auto* c_pipe = app.add_subcommand("pipeline", "simulate, tune and run the experiment suite");
  c_pipe->add_option("--config", pipeline.config, "simulation config (JSON)");
  c_pipe->add_option("--scenario", pipeline.scenarios, "scenarios (default: all)")->delimiter(',');
  c_pipe->add_option("--report", pipeline.report, "JSON report file");
  c_pipe->add_option("--table", pipeline.table, "text table file (default: stdout)");
  c_pipe->add_option("--csv", pipeline.csv, "per-subcategory revenue CSV");
  c_pipe->add_option("--log-out", pipeline_log, "also write the simulated log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const std::size_t n_threads = threads.value_or(0);
  try {
    if (*c_alloc) return allocate_command(alloc, n_threads, out);
    if (*c_tune) return tune_command(tune, n_threads, out);
    if (*c_sim) return simulate_command(simulate, threads, out);
    if (*c_exp) return experiment_command(experiment, threads, out);
    if (*c_pipe) return pipeline_command(pipeline, pipeline_log, threads, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace blend::cli
