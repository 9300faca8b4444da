#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stochsweep/adjoint.hpp"
#include "stochsweep/control.hpp"
#include "stochsweep/forward.hpp"
#include "stochsweep/model.hpp"
#include "stochsweep/paths.hpp"

namespace stochsweep {

enum class AdjointBackend { pathwise, regression };

/// How the per-time control is formed from the ensemble: maximize H at the
/// ensemble-mean state and co-state, or maximize per replicate and average
/// (diagnostic).
enum class ControlAggregation { ensemble_mean, per_path_average };

const char* to_string(AdjointBackend b);
const char* to_string(CostateMode m);
const char* to_string(ControlAggregation a);

struct SweepConfig {
  std::size_t max_iterations = 100;
  /// L2 change of the control path relative to max(||u||, ||u_new||, sqrt(n_steps)).
  double control_tolerance = 1e-4;
  double relaxation = 0.5;          // u <- (1 - relaxation) u + relaxation u_new
  std::size_t replicates = 5000;
  AdjointBackend backend = AdjointBackend::pathwise;
  CostateMode costate_mode = CostateMode::terminal_condition;
  /// p(T) in terminal mode, p(t0) in shooting mode.
  Vec2 costate_boundary = Vec2::Zero();
  int basis_degree = 2;
  PositivityPolicy positivity;
  ControlAggregation aggregation = ControlAggregation::ensemble_mean;
  /// Constant initial control path; defaults to the box origin.
  std::optional<Controls> initial_guess;
  /// Worker threads, 0 for hardware concurrency. Results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

/// Per-node ensemble mean and standard error.
struct PathStatistics {
  std::vector<double> mean;
  std::vector<double> se;
};

struct CostEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t replicates = 0;
  std::size_t unhit = 0;  // time-optimal replicates charged the full horizon
};

struct HittingStatistics {
  std::size_t hits = 0;
  std::size_t misses = 0;
  double mean_time = 0.0;  // over hitting replicates
  double se_time = 0.0;

  double hit_fraction() const {
    const std::size_t n = hits + misses;
    return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
  }
};

struct IterationRecord {
  std::size_t iteration = 0;
  double control_change = 0.0;
  CostEstimate cost;  // objective under the control path entering the iteration
};

struct SweepResult {
  TimeGrid grid;
  std::vector<Controls> control_path;  // n_steps
  PathStatistics x, y, p1, p2;         // n_steps + 1 nodes
  CostEstimate cost;
  /// First time the ensemble-mean state enters the target ball, if a target
  /// was supplied.
  std::optional<double> hitting_time;
  /// Replicate-level hitting statistics (time-optimal runs).
  std::optional<HittingStatistics> hits;
  std::size_t iterations_used = 0;
  bool converged = false;
  double final_change = 0.0;
  double clamp_fraction = 0.0;
  std::size_t regression_fallbacks = 0;
  std::vector<IterationRecord> history;
};

/// Objective of one replicate: trapezoidal quadrature of the LQ running cost
/// with piecewise-constant controls, or the elapsed time to the stop node
/// for the time-optimal problem (full horizon when the replicate never hit).
double replicate_cost(const TrajectoryBundle& traj, const ProblemKind& kind);

CostEstimate evaluate_cost(std::span<const TrajectoryBundle> ensemble, const ProblemKind& kind);

/// Sample mean and standard error of the mean.
CostEstimate summarize(std::span<const double> values);

/// Stochastic forward-backward sweep. `target`, when given, is only used to
/// report when the ensemble-mean path reaches it.
SweepResult run_sweep(const State& s0, const ProblemKind& kind, const ModelParams& params,
                      const TimeGrid& grid, const AdmissibleBox& box, const SweepConfig& config,
                      std::uint64_t seed, const std::optional<StopRule>& target = std::nullopt);

/// Time-optimal sweep: co-states are shot forward from `initial_costate`,
/// each replicate stops when it enters the target ball, and the grid end acts
/// as a hard horizon cap.
SweepResult run_time_optimal(const State& s0, const State& target, double radius,
                             const ModelParams& params, const TimeGrid& grid,
                             const AdmissibleBox& box, SweepConfig config, std::uint64_t seed,
                             const Vec2& initial_costate);

}  // namespace stochsweep
