#include "blend/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "blend/parallel.hpp"

namespace blend {

void SpsaHyperparams::validate() const {
  if (!(a > 0.0) || !(c > 0.0)) throw InvalidArgument("spsa: a and c must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0) || !(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("spsa: alpha and gamma must lie in (0, 1]");
  }
  if (!(stability >= 0.0)) throw InvalidArgument("spsa: stability constant A must be non-negative");
  if (max_iter < 1) throw InvalidArgument("spsa: K must be at least 1");
}

FrontierSolver::FrontierSolver(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime,
                               std::size_t threads) {
  if (log.empty()) throw InvalidArgument("tuner: empty impression log");
  std::vector<std::optional<TupleTable>> tables(log.size());
  parallel_for(log.size(), threads, [&](std::size_t i) {
    const auto tuples = generate_tuples(log[i], n_prime);
    const auto ctrs = model.predict_all(log[i], tuples);
    tables[i].emplace(log[i], tuples, ctrs, bid_map(log[i]));
  });
  tables_.reserve(log.size());
  double ctr = 0.0, rev = 0.0;
  for (auto& t : tables) {
    ctr += t->max_ad_ctr_sum();
    rev += t->max_revenue();
    tables_.push_back(std::move(*t));
  }
  const double n = static_cast<double>(tables_.size());
  utopia_ = {ctr / n, rev / n};
}

FrontierPoint FrontierSolver::frontier(const VirtualBid& v) const {
  double ctr = 0.0, rev = 0.0;
  for (const auto& t : tables_) {
    const std::size_t i = t.best(v.v_a);
    ctr += t.ad_ctr_sum(i);
    rev += t.revenue(i);
  }
  const double n = static_cast<double>(tables_.size());
  return {v, ctr / n, rev / n};
}

UtopiaPoint utopia_point(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime) {
  return FrontierSolver(log, model, n_prime).utopia();
}

FrontierPoint frontier_point(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime,
                             const VirtualBid& v) {
  if (log.empty()) throw InvalidArgument("tuner: empty impression log");
  double ctr = 0.0, rev = 0.0;
  for (const auto& imp : log) {
    const auto r = optimize_impression(imp, model, v, n_prime);
    ctr += r.ad_ctr_sum;
    rev += r.v_ir;
  }
  const double n = static_cast<double>(log.size());
  return {v, ctr / n, rev / n};
}

double distance_to_utopia(const FrontierPoint& p, const UtopiaPoint& u) {
  if (!(u.u_ctr > 0.0) || !(u.u_rev > 0.0)) {
    throw UndefinedValue("distance_to_utopia: utopia coordinates must be positive");
  }
  return std::hypot(p.mean_ctr / u.u_ctr - 1.0, p.mean_rev / u.u_rev - 1.0);
}

double golden_search(const std::function<double(double)>& f, double a, double b, double tol,
                     std::size_t max_iter) {
  if (!(a < b)) throw InvalidArgument("golden_search: require a < b");
  if (!(tol > 0.0)) throw InvalidArgument("golden_search: tol must be positive");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  double d = b - a;
  double l = a + d / phi;  // upper interior point
  double u = b - d / phi;  // lower interior point
  for (std::size_t k = 1; k <= max_iter; ++k) {
    if (f(u) < f(l)) {
      b = l;
    } else {
      a = u;
    }
    d = b - a;
    l = a + d / phi;
    u = b - d / phi;
    if (std::abs(b - a) < tol) break;
  }
  return a;
}

std::vector<double> spsa(const std::function<double(std::span<const double>)>& f, std::vector<double> theta0,
                         const SpsaHyperparams& h, std::uint64_t seed, std::optional<Box> box) {
  h.validate();
  if (theta0.empty()) throw InvalidArgument("spsa: theta0 must be non-empty");
  if (box && !(box->lo <= box->hi)) throw InvalidArgument("spsa: empty feasible box");
  const std::size_t p = theta0.size();
  std::mt19937_64 rng(seed);
  std::vector<double> theta = std::move(theta0);
  std::vector<double> delta(p), plus(p), minus(p);
  auto project = [&](std::vector<double>& x) {
    if (!box) return;
    for (double& xi : x) xi = std::clamp(xi, box->lo, box->hi);
  };
  project(theta);
  for (std::size_t k = 1; k <= h.max_iter; ++k) {
    const double kk = static_cast<double>(k);
    const double a_k = h.a / std::pow(kk + h.stability, h.alpha);
    const double c_k = h.c / std::pow(kk, h.gamma);
    for (std::size_t i = 0; i < p; ++i) delta[i] = (rng() >> 63) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < p; ++i) {
      plus[i] = theta[i] + c_k * delta[i];
      minus[i] = theta[i] - c_k * delta[i];
    }
    const double y_plus = f(plus);
    const double y_minus = f(minus);
    for (std::size_t i = 0; i < p; ++i) {
      const double g = (y_plus - y_minus) / (2.0 * c_k * delta[i]);
      theta[i] -= a_k * g;
    }
    project(theta);
  }
  return theta;
}

TuneMethod tune_method_from_string(const std::string& name) {
  if (name == "golden") return TuneMethod::kGolden;
  if (name == "spsa") return TuneMethod::kSpsa;
  throw InvalidArgument("unknown tuning method '" + name + "'");
}

std::string to_string(TuneMethod method) { return method == TuneMethod::kGolden ? "golden" : "spsa"; }

TuneResult tune_virtual_bid(const FrontierSolver& solver, const TuneOptions& options) {
  const double lo = options.bracket_lo, hi = options.bracket_hi;
  if (!(lo >= 0.0)) throw InvalidArgument("tune: bracket lower bound must be non-negative");
  if (!(hi >= lo)) throw InvalidArgument("tune: bracket upper bound below lower bound");

  TuneResult result;
  result.utopia = solver.utopia();

  auto evaluate = [&](double v_a) {
    const FrontierPoint p = solver.frontier(VirtualBid{v_a, {}});
    const double dist = distance_to_utopia(p, result.utopia);
    result.trace.push_back({v_a, p.mean_ctr, p.mean_rev, dist});
    return dist;
  };

  double chosen = lo;
  if (options.method == TuneMethod::kGolden) {
    if (hi > lo) {
      chosen = golden_search(evaluate, lo, hi, options.tol, options.max_iter);
      // The objective is piecewise constant in v, so the bracket end can sit
      // just past the last jump; fall back to the best evaluated point.
      double best = evaluate(chosen);
      evaluate(lo);
      evaluate(hi);
      for (const auto& e : result.trace) {
        if (e.distance < best) {
          best = e.distance;
          chosen = e.v_a;
        }
      }
    }
  } else {
    std::vector<double> theta0 = options.theta0;
    if (theta0.empty()) theta0 = {0.5 * (lo + hi)};
    if (theta0.size() != 1) throw InvalidArgument("tune: the deployed objective has a single virtual bid");
    SpsaHyperparams h = options.spsa;
    h.max_iter = options.max_iter;
    const auto theta = spsa([&](std::span<const double> x) { return evaluate(std::clamp(x[0], lo, hi)); },
                            theta0, h, options.seed, Box{lo, hi});
    chosen = theta[0];
  }

  result.v = VirtualBid{chosen, {}};
  result.frontier = solver.frontier(result.v);
  result.distance = distance_to_utopia(result.frontier, result.utopia);
  return result;
}

TuneResult tune_virtual_bid(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime,
                            const TuneOptions& options, std::size_t threads) {
  return tune_virtual_bid(FrontierSolver(log, model, n_prime, threads), options);
}

}  // namespace blend
