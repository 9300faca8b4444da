#include "stochsweep/forward.hpp"

#include <cmath>
#include <string>

namespace stochsweep {

void PositivityPolicy::validate() const {
  if (!(std::isfinite(floor) && floor > 0.0)) {
    throw ValidationError("positivity: floor must be > 0");
  }
}

namespace {

double apply_policy(double before, double after, const PositivityPolicy& policy,
                    std::size_t& clamp_events, const char* name) {
  if (before == 0.0) return 0.0;
  if (!std::isfinite(after)) {
    throw NumericalError(std::string("euler-maruyama: non-finite ") + name);
  }
  if (policy.mode == PositivityMode::reject) {
    if (after < 0.0) {
      throw NumericalError(std::string("euler-maruyama: ") + name +
                           " fell below zero under the reject policy");
    }
    return after;
  }
  if (after < policy.floor) {
    ++clamp_events;
    return policy.floor;
  }
  return after;
}

double distance(const State& a, const State& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

State euler_maruyama_step(const State& s, const Controls& u, const ModelParams& p, double dt,
                          const std::array<double, 2>& dW, const PositivityPolicy& policy,
                          std::size_t& clamp_events) {
  if (!(dt > 0.0)) throw ValidationError("euler-maruyama: dt must be > 0");
  const Vec2 b = drift(s, u, p);
  State next;
  next.x = s.x + b[0] * dt + p.sigma1 * s.x * dW[0];
  next.y = s.y + b[1] * dt + p.sigma2 * s.y * dW[1];
  next.x = apply_policy(s.x, next.x, policy, clamp_events, "x");
  next.y = apply_policy(s.y, next.y, policy, clamp_events, "y");
  return next;
}

TrajectoryBundle integrate_forward(const State& s0, std::span<const Controls> control_path,
                                   const ModelParams& p, const TimeGrid& grid,
                                   const BrownianPath& noise, const PositivityPolicy& policy,
                                   const std::optional<StopRule>& stop) {
  if (grid.n_steps == 0) throw ValidationError("integrate: grid has no steps");
  if (control_path.size() != grid.n_steps) {
    throw ValidationError("integrate: control path length " +
                          std::to_string(control_path.size()) + " != n_steps " +
                          std::to_string(grid.n_steps));
  }
  if (noise.size() != grid.n_steps) {
    throw ValidationError("integrate: noise length does not match the grid");
  }
  validate_state(s0);

  TrajectoryBundle traj;
  traj.grid = grid;
  traj.noise = noise;
  traj.controls.assign(control_path.begin(), control_path.end());
  traj.states.resize(grid.n_nodes());
  traj.states[0] = s0;

  auto inside = [&](const State& s) {
    return stop && distance(s, stop->target) <= stop->radius;
  };

  if (inside(s0)) {
    traj.stop_index = 0;
    for (auto& s : traj.states) s = s0;
    return traj;
  }
  for (std::size_t i = 0; i < grid.n_steps; ++i) {
    traj.states[i + 1] = euler_maruyama_step(traj.states[i], control_path[i], p, grid.dt,
                                             noise.increments[i], policy, traj.clamp_events);
    if (inside(traj.states[i + 1])) {
      traj.stop_index = i + 1;
      for (std::size_t k = i + 2; k < grid.n_nodes(); ++k) traj.states[k] = traj.states[i + 1];
      break;
    }
  }
  return traj;
}

std::optional<std::size_t> hitting_index(std::span<const State> states, const State& target,
                                         double radius) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (distance(states[i], target) <= radius) return i;
  }
  return std::nullopt;
}

std::optional<double> hitting_time(const TrajectoryBundle& traj, const State& target,
                                   double radius) {
  if (!(radius > 0.0)) throw ValidationError("hitting_time: radius must be > 0");
  const auto idx = hitting_index(traj.states, target, radius);
  if (!idx) return std::nullopt;
  return traj.grid.time(*idx);
}

}  // namespace stochsweep
