#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "stochsweep/model.hpp"

namespace stochsweep {

/// Uniform time grid on [t0, t_final] with n_steps cells.
struct TimeGrid {
  double t0 = 0.0;
  double t_final = 1.0;
  std::size_t n_steps = 1;
  double dt = 1.0;

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  std::size_t n_nodes() const { return n_steps + 1; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

TimeGrid make_grid(double t0, double t_final, std::size_t n_steps);

/// Counter-based generator: the k-th draw of a stream is a pure function of
/// (key, k), so streams can be consumed in any order.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on (0, 1].
  double uniform(std::uint64_t counter) const;
  /// Pair of independent standard normals (Box-Muller on draws 2k, 2k+1).
  std::array<double, 2> normal_pair(std::uint64_t k) const;

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
};

/// Brownian increments for one replicate, one (dW1, dW2) pair per step.
struct BrownianPath {
  std::vector<std::array<double, 2>> increments;
  std::uint64_t seed = 0;
  std::uint64_t replicate_id = 0;

  std::size_t size() const { return increments.size(); }
};

/// Increments are N(0, dt) per component, W1 independent of W2. Identical
/// (grid, seed, replicate_id) always yields a byte-identical path.
BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed,
                             std::uint64_t replicate_id);

/// All-zero increments, for deterministic runs.
BrownianPath zero_brownian(const TimeGrid& grid);

}  // namespace stochsweep
