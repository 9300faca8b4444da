#include "stochsweep/paths.hpp"

#include <cmath>
#include <numbers>

namespace stochsweep {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TimeGrid make_grid(double t0, double t_final, std::size_t n_steps) {
  if (!std::isfinite(t0) || !std::isfinite(t_final) || !(t_final > t0)) {
    throw ValidationError("grid: t_final must be > t0");
  }
  if (n_steps == 0) throw ValidationError("grid: n_steps must be >= 1");
  TimeGrid g;
  g.t0 = t0;
  g.t_final = t_final;
  g.n_steps = n_steps;
  g.dt = (t_final - t0) / static_cast<double>(n_steps);
  return g;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * 0xD1B54A32D192ED03ULL + 1))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return mix64(key_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
}

std::array<double, 2> CounterRng::normal_pair(std::uint64_t k) const {
  const double u1 = uniform(2 * k);
  const double u2 = uniform(2 * k + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed,
                             std::uint64_t replicate_id) {
  const CounterRng rng(seed, replicate_id);
  const double scale = std::sqrt(grid.dt);
  BrownianPath path;
  path.seed = seed;
  path.replicate_id = replicate_id;
  path.increments.resize(grid.n_steps);
  for (std::size_t i = 0; i < grid.n_steps; ++i) {
    const auto z = rng.normal_pair(i);
    path.increments[i] = {scale * z[0], scale * z[1]};
  }
  return path;
}

BrownianPath zero_brownian(const TimeGrid& grid) {
  BrownianPath path;
  path.increments.assign(grid.n_steps, {0.0, 0.0});
  return path;
}

}  // namespace stochsweep
