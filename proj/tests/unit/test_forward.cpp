#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "stochsweep/forward.hpp"

namespace ss = stochsweep;

namespace {

const ss::ModelParams kFig1{1.0, 7.0, 0.4, 0.37, 0.1, 0.02, 0.02};
const ss::PositivityPolicy kClamp{};

std::vector<ss::Controls> constant_controls(const ss::TimeGrid& g, ss::Controls u) {
  return std::vector<ss::Controls>(g.n_steps, u);
}

TEST(EulerMaruyamaStep, ZeroNoiseIsExplicitEuler) {
  std::size_t clamps = 0;
  const ss::State s{5.0, 1.0};
  const ss::Controls u{2.0, 0.1};
  const auto p = kFig1.deterministic();
  const auto next = ss::euler_maruyama_step(s, u, p, 0.01, {3.0, -7.0}, kClamp, clamps);
  const auto b = oracle::drift(5.0, 1.0, 2.0, 0.1, {1.0, 7.0, 0.4, 0.37, 0.1});
  EXPECT_DOUBLE_EQ(next.x, 5.0 + 0.01 * b[0]);
  EXPECT_DOUBLE_EQ(next.y, 1.0 + 0.01 * b[1]);
  EXPECT_EQ(clamps, 0u);
}

TEST(EulerMaruyamaStep, Fig1ReferenceStep) {
  std::size_t clamps = 0;
  const auto next = ss::euler_maruyama_step({5.0, 1.0}, {2.0, 0.1}, kFig1, 0.01, {0.0, 0.0},
                                            kClamp, clamps);
  EXPECT_NEAR(next.x, 5.0047437, 1e-7);
  EXPECT_NEAR(next.y, 0.9991321, 1e-7);
}

TEST(EulerMaruyamaStep, NoiseEntersMultiplicatively) {
  std::size_t clamps = 0;
  const ss::State s{2.0, 3.0};
  const ss::Controls u{1.0, 1.0};
  const auto det = ss::euler_maruyama_step(s, u, kFig1, 0.01, {0.0, 0.0}, kClamp, clamps);
  const auto sto = ss::euler_maruyama_step(s, u, kFig1, 0.01, {0.1, -0.2}, kClamp, clamps);
  EXPECT_NEAR(sto.x - det.x, 0.02 * 2.0 * 0.1, 1e-15);
  EXPECT_NEAR(sto.y - det.y, 0.02 * 3.0 * -0.2, 1e-15);
}

TEST(EulerMaruyamaStep, ClampsAtFloorAndCounts) {
  std::size_t clamps = 0;
  const ss::State s{kClamp.floor, 1.0};
  const auto next =
      ss::euler_maruyama_step(s, {2.0, 0.1}, kFig1, 0.01, {-1000.0, 0.0}, kClamp, clamps);
  EXPECT_EQ(next.x, kClamp.floor);
  EXPECT_EQ(clamps, 1u);
}

TEST(EulerMaruyamaStep, RejectModeThrows) {
  std::size_t clamps = 0;
  const ss::PositivityPolicy reject{ss::PositivityMode::reject, 1e-10};
  EXPECT_THROW(
      ss::euler_maruyama_step({0.5, 1.0}, {2.0, 0.1}, kFig1, 0.01, {-1000.0, 0.0}, reject, clamps),
      ss::NumericalError);
}

TEST(EulerMaruyamaStep, ZeroComponentStaysZero) {
  std::size_t clamps = 0;
  const auto next =
      ss::euler_maruyama_step({3.0, 0.0}, {2.0, 0.1}, kFig1, 0.01, {0.3, -5.0}, kClamp, clamps);
  EXPECT_EQ(next.y, 0.0);
  EXPECT_EQ(clamps, 0u);
}

TEST(PositivityPolicy, FloorMustBePositive) {
  EXPECT_THROW((ss::PositivityPolicy{ss::PositivityMode::clamp_at_floor, 0.0}.validate()),
               ss::ValidationError);
}

TEST(IntegrateForward, DeterministicLimitMatchesHighOrderOracle) {
  const auto g = ss::make_grid(0.0, 50.0, 50000);
  const auto p = kFig1.deterministic();
  const auto traj = ss::integrate_forward({5.0, 1.0}, constant_controls(g, {2.0, 0.1}), p, g,
                                          ss::zero_brownian(g), kClamp);
  const auto ref = oracle::integrate_state({5.0, 1.0}, 2.0, 0.1, {1.0, 7.0, 0.4, 0.37, 0.1}, 50.0);
  EXPECT_LE(std::abs(traj.states.back().x - ref.x) / std::abs(ref.x), 1e-3);
  EXPECT_LE(std::abs(traj.states.back().y - ref.y) / std::abs(ref.y), 1e-3);
  EXPECT_EQ(traj.states.front(), (ss::State{5.0, 1.0}));
  EXPECT_EQ(traj.states.size(), g.n_nodes());
  EXPECT_EQ(traj.controls.size(), g.n_steps);
}

TEST(IntegrateForward, GbmStrongOrderIsOneHalf) {
  // gamma -> infinity and y0 = 0 reduce the prey equation to dx = r x dt + s x dW.
  ss::ModelParams p{2.0, 1e12, 0.4, 0.37, 0.1, 1.0, 0.0};
  const double T = 1.0, x0 = 1.0;
  const int fine_exp = 9;
  const std::size_t n_fine = std::size_t{1} << fine_exp;
  const auto fine = ss::make_grid(0.0, T, n_fine);
  const std::size_t paths = 1000;

  std::vector<double> dts, errs;
  std::vector<double> sum_err(fine_exp - 3, 0.0);
  for (std::size_t rep = 0; rep < paths; ++rep) {
    const auto noise = ss::sample_brownian(fine, 314, rep);
    double W = 0.0;
    for (const auto& inc : noise.increments) W += inc[0];
    const double exact = x0 * std::exp((p.r - 0.5 * p.sigma1 * p.sigma1) * T + p.sigma1 * W);
    for (int level = 4; level <= fine_exp; ++level) {
      const std::size_t n = std::size_t{1} << level;
      const std::size_t stride = n_fine / n;
      const auto grid = ss::make_grid(0.0, T, n);
      ss::BrownianPath coarse;
      coarse.increments.assign(n, {0.0, 0.0});
      for (std::size_t i = 0; i < n_fine; ++i) coarse.increments[i / stride][0] += noise.increments[i][0];
      const auto traj = ss::integrate_forward({x0, 0.0}, constant_controls(grid, {0.0, 0.0}), p,
                                              grid, coarse, kClamp);
      sum_err[level - 4] += std::abs(traj.states.back().x - exact);
    }
  }
  for (int level = 4; level <= fine_exp; ++level) {
    dts.push_back(std::ldexp(1.0, -level));
    errs.push_back(sum_err[level - 4] / double(paths));
  }
  const double order = oracle::fitted_order(dts, errs);
  RecordProperty("fitted_order", std::to_string(order));
  EXPECT_GE(order, 0.4);
  EXPECT_LE(order, 0.6);
}

TEST(IntegrateForward, RejectsZeroStepGridAndLengthMismatch) {
  ss::TimeGrid empty{0.0, 1.0, 0, 1.0};
  EXPECT_THROW(ss::integrate_forward({1.0, 1.0}, {}, kFig1, empty, ss::BrownianPath{}, kClamp),
               ss::ValidationError);
  const auto g = ss::make_grid(0.0, 1.0, 10);
  EXPECT_THROW(ss::integrate_forward({1.0, 1.0}, std::vector<ss::Controls>(9), kFig1, g,
                                     ss::zero_brownian(g), kClamp),
               ss::ValidationError);
}

TEST(IntegrateForward, PropertyZeroNoiseIgnoresBrownianPath) {
  const auto g = ss::make_grid(0.0, 10.0, 1000);
  const auto p = kFig1.deterministic();
  const auto u = constant_controls(g, {2.0, 0.1});
  const auto a = ss::integrate_forward({5.0, 1.0}, u, p, g, ss::sample_brownian(g, 1, 0), kClamp);
  const auto b = ss::integrate_forward({5.0, 1.0}, u, p, g, ss::sample_brownian(g, 2, 9), kClamp);
  EXPECT_EQ(a.states, b.states);
}

TEST(IntegrateForward, PropertyClampKeepsStatesAboveFloor) {
  ss::ModelParams p = kFig1;
  p.sigma1 = 1.5;
  p.sigma2 = 1.5;
  const auto g = ss::make_grid(0.0, 20.0, 200);
  std::size_t total_clamps = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const auto traj = ss::integrate_forward({0.5, 0.5}, constant_controls(g, {2.0, 0.1}), p, g,
                                            ss::sample_brownian(g, 5, rep), kClamp);
    for (const auto& s : traj.states) {
      ASSERT_GE(s.x, kClamp.floor * (1 - 1e-12));
      ASSERT_GE(s.y, kClamp.floor * (1 - 1e-12));
    }
    total_clamps += traj.clamp_events;
  }
  EXPECT_GT(total_clamps, 0u);
}

TEST(IntegrateForward, PropertyEnsembleMeanTracksDeterministicPath) {
  const auto g = ss::make_grid(0.0, 20.0, 2000);
  const auto u = constant_controls(g, {2.0, 0.1});
  const auto det = ss::integrate_forward({5.0, 1.0}, u, kFig1.deterministic(), g,
                                         ss::zero_brownian(g), kClamp);
  const std::size_t reps = 2000;
  std::vector<double> sx(g.n_nodes(), 0), sxx(g.n_nodes(), 0), sy(g.n_nodes(), 0),
      syy(g.n_nodes(), 0);
  for (std::uint64_t rep = 0; rep < reps; ++rep) {
    const auto t = ss::integrate_forward({5.0, 1.0}, u, kFig1, g, ss::sample_brownian(g, 77, rep),
                                         kClamp);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
      sx[i] += t.states[i].x;
      sxx[i] += t.states[i].x * t.states[i].x;
      sy[i] += t.states[i].y;
      syy[i] += t.states[i].y * t.states[i].y;
    }
  }
  const double n = double(reps);
  for (std::size_t k = 1; k <= 10; ++k) {
    const std::size_t i = k * g.n_steps / 10;
    const double mx = sx[i] / n, my = sy[i] / n;
    const double sex = std::sqrt((sxx[i] / n - mx * mx) / (n - 1));
    const double sey = std::sqrt((syy[i] / n - my * my) / (n - 1));
    EXPECT_LE(std::abs(mx - det.states[i].x), 5 * sex) << "checkpoint " << k;
    EXPECT_LE(std::abs(my - det.states[i].y), 5 * sey) << "checkpoint " << k;
  }
}

TEST(IntegrateForward, StopRuleHoldsStateAfterHit) {
  const auto g = ss::make_grid(0.0, 10.0, 1000);
  const ss::StopRule stop{{5.0, 1.0}, 0.1};
  const auto traj = ss::integrate_forward({5.0, 1.0}, constant_controls(g, {2.0, 0.1}), kFig1, g,
                                          ss::sample_brownian(g, 1, 0), kClamp, stop);
  ASSERT_TRUE(traj.stop_index.has_value());
  EXPECT_EQ(*traj.stop_index, 0u);
  EXPECT_EQ(traj.active_steps(), 0u);
  for (const auto& s : traj.states) EXPECT_EQ(s, (ss::State{5.0, 1.0}));
}

TEST(HittingTime, TargetAtStartIsT0) {
  const auto g = ss::make_grid(2.0, 5.0, 30);
  const auto traj = ss::integrate_forward({5.0, 1.0}, constant_controls(g, {2.0, 0.1}), kFig1, g,
                                          ss::sample_brownian(g, 1, 0), kClamp);
  EXPECT_EQ(ss::hitting_time(traj, {5.0, 1.0}, 1e-9), 2.0);
}

TEST(HittingTime, NeverEnteringBallIsAbsent) {
  const auto g = ss::make_grid(0.0, 5.0, 500);
  const auto traj = ss::integrate_forward({5.0, 1.0}, constant_controls(g, {2.0, 0.1}), kFig1, g,
                                          ss::zero_brownian(g), kClamp);
  EXPECT_FALSE(ss::hitting_time(traj, {100.0, 100.0}, 1.0).has_value());
  EXPECT_THROW(ss::hitting_time(traj, {5.0, 1.0}, 0.0), ss::ValidationError);
}

TEST(HittingTime, DeterministicFig1RunReachesTargetInsideHorizon) {
  const auto g = ss::make_grid(0.0, 87.0, 8700);
  const auto traj = ss::integrate_forward({5.0, 1.0}, constant_controls(g, {2.0, 0.1}),
                                          kFig1.deterministic(), g, ss::zero_brownian(g), kClamp);
  const auto t = ss::hitting_time(traj, {7.0, 0.25}, 0.25);
  ASSERT_TRUE(t.has_value());
  EXPECT_GT(*t, 0.0);
  EXPECT_LT(*t, 87.0);
}

}  // namespace
