#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stochsweep/model.hpp"
#include "stochsweep/paths.hpp"

namespace stochsweep {

enum class PositivityMode { clamp_at_floor, reject };

/// What to do when an Euler-Maruyama step takes a positive component below
/// zero. Components that are exactly zero stay zero: each axis is invariant
/// under the dynamics.
struct PositivityPolicy {
  PositivityMode mode = PositivityMode::clamp_at_floor;
  double floor = 1e-10;

  void validate() const;
};

/// Stop integration once the state enters the closed ball of `radius`
/// around `target`; later nodes hold the hitting state.
struct StopRule {
  State target;
  double radius = 0.0;
};

struct TrajectoryBundle {
  TimeGrid grid;
  std::vector<State> states;      // n_steps + 1
  std::vector<Controls> controls; // n_steps, left-endpoint convention
  BrownianPath noise;
  std::size_t clamp_events = 0;
  std::optional<std::size_t> stop_index;  // set when a StopRule fired

  /// Number of steps actually integrated.
  std::size_t active_steps() const { return stop_index.value_or(grid.n_steps); }
};

State euler_maruyama_step(const State& s, const Controls& u, const ModelParams& p,
                          double dt, const std::array<double, 2>& dW,
                          const PositivityPolicy& policy, std::size_t& clamp_events);

TrajectoryBundle integrate_forward(const State& s0, std::span<const Controls> control_path,
                                   const ModelParams& p, const TimeGrid& grid,
                                   const BrownianPath& noise, const PositivityPolicy& policy,
                                   const std::optional<StopRule>& stop = std::nullopt);

/// First node index whose state lies within `radius` of `target`.
std::optional<std::size_t> hitting_index(std::span<const State> states, const State& target,
                                         double radius);

std::optional<double> hitting_time(const TrajectoryBundle& traj, const State& target,
                                   double radius);

}  // namespace stochsweep
