#include "stochsweep/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"

namespace stochsweep {

const char* to_string(AdjointBackend b) {
  return b == AdjointBackend::pathwise ? "pathwise" : "regression";
}

const char* to_string(CostateMode m) {
  return m == CostateMode::terminal_condition ? "terminal_condition" : "initial_shooting";
}

const char* to_string(ControlAggregation a) {
  return a == ControlAggregation::ensemble_mean ? "ensemble_mean" : "per_path_average";
}

void SweepConfig::validate() const {
  if (max_iterations == 0) throw ValidationError("sweep: max_iterations must be >= 1");
  if (!(control_tolerance > 0.0)) throw ValidationError("sweep: control_tolerance must be > 0");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw ValidationError("sweep: relaxation must lie in (0, 1]");
  }
  if (replicates == 0) throw ValidationError("sweep: replicates must be >= 1");
  if (!std::isfinite(costate_boundary[0]) || !std::isfinite(costate_boundary[1])) {
    throw ValidationError("sweep: co-state boundary value must be finite");
  }
  if (basis_degree < 0) throw ValidationError("sweep: basis_degree must be >= 0");
  if (backend == AdjointBackend::regression && costate_mode == CostateMode::initial_shooting) {
    throw ValidationError("sweep: the regression backend needs terminal_condition co-state mode");
  }
  positivity.validate();
  if (initial_guess && (!(initial_guess->alpha >= 0.0) || !(initial_guess->xi >= 0.0))) {
    throw ValidationError("sweep: initial control guess must be >= 0");
  }
}

double replicate_cost(const TrajectoryBundle& traj, const ProblemKind& kind) {
  const TimeGrid& grid = traj.grid;
  if (kind.tag == ProblemTag::time_optimal) {
    return grid.time(traj.active_steps()) - grid.t0;
  }
  const double dt = grid.dt;
  const auto state_part = [&](const State& s) {
    return -kind.weights.A1 * s.x - kind.weights.A2 * s.y;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < grid.n_steps; ++i) {
    const Controls& u = traj.controls[i];
    const double effort = kind.tag == ProblemTag::lq_quality ? u.alpha : u.xi;
    total += 0.5 * dt * (state_part(traj.states[i]) + state_part(traj.states[i + 1]));
    total += dt * 0.5 * kind.weights.A3 * effort * effort;
  }
  return total;
}

CostEstimate summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cost: empty ensemble");
  CostEstimate out;
  out.replicates = values.size();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  out.mean = mean;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

CostEstimate evaluate_cost(std::span<const TrajectoryBundle> ensemble, const ProblemKind& kind) {
  if (ensemble.empty()) throw ValidationError("cost: empty ensemble");
  std::vector<double> costs;
  costs.reserve(ensemble.size());
  std::size_t unhit = 0;
  for (const auto& traj : ensemble) {
    costs.push_back(replicate_cost(traj, kind));
    if (kind.tag == ProblemTag::time_optimal && !traj.stop_index) ++unhit;
  }
  CostEstimate out = summarize(costs);
  out.unhit = unhit;
  return out;
}

namespace {

// Replicates are reduced in fixed blocks whose layout depends only on the
// replicate count, never on the thread count.
constexpr std::size_t kMinBlock = 32;
constexpr std::size_t kMaxBlocks = 16;

std::size_t block_size_for(std::size_t reps) {
  const std::size_t blocks = std::min(kMaxBlocks, (reps + kMinBlock - 1) / kMinBlock);
  return (reps + blocks - 1) / blocks;
}

// Running sums over one block of replicates, accumulated in replicate order.
struct BlockSums {
  std::vector<double> x, xx, y, yy, p1, p1p1, p2, p2p2, q1, q4, alpha, xi;

  explicit BlockSums(std::size_t nodes)
      : x(nodes), xx(nodes), y(nodes), yy(nodes), p1(nodes), p1p1(nodes), p2(nodes),
        p2p2(nodes), q1(nodes), q4(nodes), alpha(nodes), xi(nodes) {}
};

struct ReplicateOutcome {
  double cost = 0.0;
  std::size_t clamp_events = 0;
  std::size_t active_steps = 0;
  std::optional<std::size_t> stop_index;
};

struct PassResult {
  std::vector<Controls> proposal;  // Hamiltonian-maximizing controls
  PathStatistics x, y, p1, p2;
  CostEstimate cost;
  HittingStatistics hits;
  double clamp_fraction = 0.0;
  std::size_t regression_fallbacks = 0;
};

struct SweepSetup {
  State s0;
  ProblemKind kind;
  ModelParams params;
  TimeGrid grid;
  AdmissibleBox box;
  SweepConfig config;
  std::uint64_t seed = 0;
  std::optional<StopRule> stop;  // per-replicate stopping (time-optimal)
};

BrownianPath noise_for(const SweepSetup& setup, std::size_t replicate) {
  if (!setup.params.has_noise()) return zero_brownian(setup.grid);
  return sample_brownian(setup.grid, setup.seed, replicate);
}

AdjointPath costate_for(const SweepSetup& setup, const TrajectoryBundle& traj) {
  const RunningCostGradient grad = setup.kind.cost_gradient();
  if (setup.config.costate_mode == CostateMode::initial_shooting) {
    return solve_forward_shooting(traj, setup.config.costate_boundary, setup.params, grad);
  }
  return solve_backward_pathwise(traj, setup.config.costate_boundary, setup.params, grad);
}

void accumulate(BlockSums& sums, const TrajectoryBundle& traj, const AdjointPath& adj,
                const SweepSetup& setup, bool per_path) {
  const std::size_t nodes = setup.grid.n_nodes();
  for (std::size_t i = 0; i < nodes; ++i) {
    const State& s = traj.states[i];
    const Vec2& p = adj.p[i];
    sums.x[i] += s.x;
    sums.xx[i] += s.x * s.x;
    sums.y[i] += s.y;
    sums.yy[i] += s.y * s.y;
    sums.p1[i] += p[0];
    sums.p1p1[i] += p[0] * p[0];
    sums.p2[i] += p[1];
    sums.p2p2[i] += p[1] * p[1];
    if (i < setup.grid.n_steps) {
      sums.q1[i] += adj.q[i](0, 0);
      sums.q4[i] += adj.q[i](1, 1);
      if (per_path) {
        const Controls u = maximize_hamiltonian_on_box(s, p, adj.q[i], setup.params, setup.kind,
                                                       setup.box);
        sums.alpha[i] += u.alpha;
        sums.xi[i] += u.xi;
      }
    }
  }
}

ReplicateOutcome outcome_of(const TrajectoryBundle& traj, const SweepSetup& setup) {
  ReplicateOutcome o;
  o.cost = replicate_cost(traj, setup.kind);
  o.clamp_events = traj.clamp_events;
  o.active_steps = traj.active_steps();
  o.stop_index = traj.stop_index;
  return o;
}

void finish_stats(const std::vector<double>& sum, const std::vector<double>& sumsq, double n,
                  PathStatistics& out) {
  out.mean.resize(sum.size());
  out.se.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    const double mean = sum[i] / n;
    out.mean[i] = mean;
    double se = 0.0;
    if (n > 1.0) {
      const double var = std::max(0.0, (sumsq[i] - n * mean * mean) / (n - 1.0));
      se = std::sqrt(var / n);
    }
    out.se[i] = se;
  }
}

PassResult run_pass(const SweepSetup& setup, const std::vector<Controls>& controls) {
  const std::size_t reps = setup.config.replicates;
  const std::size_t nodes = setup.grid.n_nodes();
  const std::size_t block = block_size_for(reps);
  const std::size_t n_blocks = (reps + block - 1) / block;
  const bool per_path = setup.config.aggregation == ControlAggregation::per_path_average;
  const bool regression = setup.config.backend == AdjointBackend::regression;
  const unsigned threads = setup.config.threads;

  std::vector<BlockSums> blocks(n_blocks, BlockSums(nodes));
  std::vector<ReplicateOutcome> outcomes(reps);
  PassResult pass;

  auto integrate = [&](std::size_t r) {
    return integrate_forward(setup.s0, controls, setup.params, setup.grid, noise_for(setup, r),
                             setup.config.positivity, setup.stop);
  };

  if (!regression) {
    detail::parallel_tasks(n_blocks, threads, [&](std::size_t b) {
      const std::size_t end = std::min(reps, (b + 1) * block);
      for (std::size_t r = b * block; r < end; ++r) {
        const TrajectoryBundle traj = integrate(r);
        const AdjointPath adj = costate_for(setup, traj);
        accumulate(blocks[b], traj, adj, setup, per_path);
        outcomes[r] = outcome_of(traj, setup);
      }
    });
  } else {
    std::vector<TrajectoryBundle> ensemble(reps);
    detail::parallel_tasks(n_blocks, threads, [&](std::size_t b) {
      const std::size_t end = std::min(reps, (b + 1) * block);
      for (std::size_t r = b * block; r < end; ++r) ensemble[r] = integrate(r);
    });
    RegressionDiagnostics diag;
    const auto adjoints = solve_backward_regression(ensemble, setup.config.costate_boundary,
                                                    setup.params, setup.kind.cost_gradient(),
                                                    setup.config.basis_degree, &diag);
    pass.regression_fallbacks = diag.degree_fallbacks;
    detail::parallel_tasks(n_blocks, threads, [&](std::size_t b) {
      const std::size_t end = std::min(reps, (b + 1) * block);
      for (std::size_t r = b * block; r < end; ++r) {
        accumulate(blocks[b], ensemble[r], adjoints[r], setup, per_path);
        outcomes[r] = outcome_of(ensemble[r], setup);
      }
    });
  }

  BlockSums total(nodes);
  for (const auto& blk : blocks) {
    for (std::size_t i = 0; i < nodes; ++i) {
      total.x[i] += blk.x[i];
      total.xx[i] += blk.xx[i];
      total.y[i] += blk.y[i];
      total.yy[i] += blk.yy[i];
      total.p1[i] += blk.p1[i];
      total.p1p1[i] += blk.p1p1[i];
      total.p2[i] += blk.p2[i];
      total.p2p2[i] += blk.p2p2[i];
      total.q1[i] += blk.q1[i];
      total.q4[i] += blk.q4[i];
      total.alpha[i] += blk.alpha[i];
      total.xi[i] += blk.xi[i];
    }
  }

  const double n = static_cast<double>(reps);
  finish_stats(total.x, total.xx, n, pass.x);
  finish_stats(total.y, total.yy, n, pass.y);
  finish_stats(total.p1, total.p1p1, n, pass.p1);
  finish_stats(total.p2, total.p2p2, n, pass.p2);

  pass.proposal.resize(setup.grid.n_steps);
  for (std::size_t i = 0; i < setup.grid.n_steps; ++i) {
    if (per_path) {
      pass.proposal[i] = setup.box.clamp({total.alpha[i] / n, total.xi[i] / n});
      continue;
    }
    const State s{pass.x.mean[i], pass.y.mean[i]};
    const Vec2 p(pass.p1.mean[i], pass.p2.mean[i]);
    Mat2 q = Mat2::Zero();
    q(0, 0) = total.q1[i] / n;
    q(1, 1) = total.q4[i] / n;
    pass.proposal[i] = maximize_hamiltonian_on_box(s, p, q, setup.params, setup.kind, setup.box);
  }

  std::vector<double> costs(reps);
  std::vector<double> hit_times;
  std::size_t clamps = 0;
  std::size_t steps = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    costs[r] = outcomes[r].cost;
    clamps += outcomes[r].clamp_events;
    steps += outcomes[r].active_steps;
    if (outcomes[r].stop_index) {
      hit_times.push_back(setup.grid.time(*outcomes[r].stop_index));
    }
  }
  pass.cost = summarize(costs);
  if (setup.stop) {
    pass.cost.unhit = reps - hit_times.size();
    pass.hits.hits = hit_times.size();
    pass.hits.misses = reps - hit_times.size();
    if (!hit_times.empty()) {
      const CostEstimate t = summarize(hit_times);
      pass.hits.mean_time = t.mean;
      pass.hits.se_time = t.standard_error;
    }
  }
  pass.clamp_fraction =
      steps == 0 ? 0.0 : static_cast<double>(clamps) / (2.0 * static_cast<double>(steps));
  return pass;
}

double control_change(const std::vector<Controls>& next, const std::vector<Controls>& current) {
  double diff = 0.0;
  double norm_next = 0.0;
  double norm_current = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double da = next[i].alpha - current[i].alpha;
    const double dx = next[i].xi - current[i].xi;
    diff += da * da + dx * dx;
    norm_next += next[i].alpha * next[i].alpha + next[i].xi * next[i].xi;
    norm_current += current[i].alpha * current[i].alpha + current[i].xi * current[i].xi;
  }
  // Relative once the RMS control exceeds one, absolute below that, so a
  // sweep decaying toward the zero control can still converge.
  const double floor = static_cast<double>(next.size());
  return std::sqrt(diff / std::max({norm_next, norm_current, floor}));
}

std::vector<Controls> initial_path(const SweepSetup& setup) {
  Controls guess = setup.config.initial_guess.value_or(Controls{});
  if (setup.kind.tag == ProblemTag::lq_quality) guess.xi = setup.kind.fixed_control;
  if (setup.kind.tag == ProblemTag::lq_quantity) guess.alpha = setup.kind.fixed_control;
  guess = setup.box.clamp(guess);
  return std::vector<Controls>(setup.grid.n_steps, guess);
}

SweepResult sweep(const SweepSetup& setup, const std::optional<StopRule>& report_target) {
  setup.params.validate();
  setup.kind.validate();
  setup.box.validate();
  setup.config.validate();
  validate_state(setup.s0);
  if (setup.grid.n_steps == 0) throw ValidationError("sweep: grid has no steps");

  SweepResult result;
  result.grid = setup.grid;
  std::vector<Controls> controls = initial_path(setup);
  const double lambda = setup.config.relaxation;

  PassResult pass;
  bool have_final_pass = false;
  for (std::size_t it = 1; it <= setup.config.max_iterations; ++it) {
    try {
      pass = run_pass(setup, controls);
    } catch (const NumericalError& e) {
      throw NumericalError("sweep iteration " + std::to_string(it) + ": " + e.what());
    }
    const double change = control_change(pass.proposal, controls);
    result.history.push_back({it, change, pass.cost});
    result.iterations_used = it;
    result.final_change = change;
    if (!std::isfinite(change)) {
      throw NumericalError("sweep iteration " + std::to_string(it) + ": non-finite control update");
    }
    if (change <= setup.config.control_tolerance) {
      result.converged = true;
      have_final_pass = true;
      break;
    }
    for (std::size_t i = 0; i < controls.size(); ++i) {
      const Controls blended{(1.0 - lambda) * controls[i].alpha + lambda * pass.proposal[i].alpha,
                             (1.0 - lambda) * controls[i].xi + lambda * pass.proposal[i].xi};
      controls[i] = setup.box.clamp(blended);
    }
  }
  if (!have_final_pass) {
    try {
      pass = run_pass(setup, controls);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("sweep final pass: ") + e.what());
    }
  }

  result.control_path = std::move(controls);
  result.x = std::move(pass.x);
  result.y = std::move(pass.y);
  result.p1 = std::move(pass.p1);
  result.p2 = std::move(pass.p2);
  result.cost = pass.cost;
  result.clamp_fraction = pass.clamp_fraction;
  result.regression_fallbacks = pass.regression_fallbacks;
  if (setup.stop) result.hits = pass.hits;
  if (report_target) {
    std::vector<State> mean_path(result.x.mean.size());
    for (std::size_t i = 0; i < mean_path.size(); ++i) {
      mean_path[i] = {result.x.mean[i], result.y.mean[i]};
    }
    if (const auto idx = hitting_index(mean_path, report_target->target, report_target->radius)) {
      result.hitting_time = setup.grid.time(*idx);
    }
  }
  return result;
}

}  // namespace

SweepResult run_sweep(const State& s0, const ProblemKind& kind, const ModelParams& params,
                      const TimeGrid& grid, const AdmissibleBox& box, const SweepConfig& config,
                      std::uint64_t seed, const std::optional<StopRule>& target) {
  if (target && !(target->radius > 0.0)) throw ValidationError("sweep: radius must be > 0");
  SweepSetup setup{s0, kind, params, grid, box, config, seed, std::nullopt};
  return sweep(setup, target);
}

SweepResult run_time_optimal(const State& s0, const State& target, double radius,
                             const ModelParams& params, const TimeGrid& grid,
                             const AdmissibleBox& box, SweepConfig config, std::uint64_t seed,
                             const Vec2& initial_costate) {
  if (!(radius > 0.0)) throw ValidationError("time-optimal: radius must be > 0");
  validate_state(target);
  config.costate_mode = CostateMode::initial_shooting;
  config.costate_boundary = initial_costate;
  const StopRule rule{target, radius};
  SweepSetup setup{s0, ProblemKind::time_optimal(), params, grid, box, config, seed, rule};
  return sweep(setup, rule);
}

}  // namespace stochsweep
