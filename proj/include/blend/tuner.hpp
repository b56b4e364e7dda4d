#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blend/allocator.hpp"

namespace blend {

/// Best achievable mean ad-CTR and mean revenue when each is optimized in
/// isolation over the same tuple sets.
struct UtopiaPoint {
  double u_ctr = 0.0;
  double u_rev = 0.0;
};

/// Mean optimized (ad-CTR, revenue) over a log at a fixed virtual bid.
struct FrontierPoint {
  VirtualBid v;
  double mean_ctr = 0.0;
  double mean_rev = 0.0;
};

struct SpsaHyperparams {
  double alpha = 0.602;
  double gamma = 0.101;
  double stability = 100.0;  // A
  double a = 0.5;
  double c = 0.1;
  std::size_t max_iter = 1000;  // K

  void validate() const;
};

/// Pre-scored tuple tables for every impression of a log, so the lower-level
/// problem can be re-solved at many virtual bids with one model pass.
class FrontierSolver {
 public:
  FrontierSolver(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime,
                 std::size_t threads = 1);

  std::size_t size() const { return tables_.size(); }
  UtopiaPoint utopia() const { return utopia_; }
  FrontierPoint frontier(const VirtualBid& v) const;
  const TupleTable& table(std::size_t i) const { return tables_[i]; }

 private:
  std::vector<TupleTable> tables_;
  UtopiaPoint utopia_;
};

UtopiaPoint utopia_point(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime);

/// Runs optimize_impression on every impression at v and averages.
FrontierPoint frontier_point(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime,
                             const VirtualBid& v);

/// sqrt((ctr/u_ctr - 1)^2 + (rev/u_rev - 1)^2). Throws UndefinedValue when a
/// utopia coordinate is not positive.
double distance_to_utopia(const FrontierPoint& p, const UtopiaPoint& u);

/// Golden-section line search on [a, b]. Two fresh evaluations per
/// iteration; stops once |b - a| < tol (returning the bracket's lower end) or
/// after max_iter iterations.
double golden_search(const std::function<double(double)>& f, double a, double b, double tol,
                     std::size_t max_iter);

/// Feasible box applied to SPSA iterates.
struct Box {
  double lo;
  double hi;
};

/// Simultaneous perturbation stochastic approximation. Uses exactly two
/// evaluations of f per iteration. Deterministic given `seed`.
std::vector<double> spsa(const std::function<double(std::span<const double>)>& f,
                         std::vector<double> theta0, const SpsaHyperparams& h, std::uint64_t seed,
                         std::optional<Box> box = std::nullopt);

enum class TuneMethod { kGolden, kSpsa };

TuneMethod tune_method_from_string(const std::string& name);
std::string to_string(TuneMethod method);

struct TuneOptions {
  TuneMethod method = TuneMethod::kGolden;
  double bracket_lo = 0.0;
  double bracket_hi = 10.0;
  double tol = 1e-6;
  std::size_t max_iter = 200;
  SpsaHyperparams spsa;
  std::vector<double> theta0;  // SPSA start; defaults to the bracket midpoint
  std::uint64_t seed = 0;
};

struct TraceEntry {
  double v_a = 0.0;
  double mean_ctr = 0.0;
  double mean_rev = 0.0;
  double distance = 0.0;
};

struct TuneResult {
  VirtualBid v;
  double distance = 0.0;
  UtopiaPoint utopia;
  FrontierPoint frontier;
  std::vector<TraceEntry> trace;  // upper-level evaluations in call order
};

/// Upper-level search for the virtual bid closest to the utopia point.
TuneResult tune_virtual_bid(const FrontierSolver& solver, const TuneOptions& options);
TuneResult tune_virtual_bid(std::span<const Impression> log, const CtrModel& model, std::size_t n_prime,
                            const TuneOptions& options, std::size_t threads = 1);

}  // namespace blend
