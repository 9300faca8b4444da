#include <benchmark/benchmark.h>

#include <vector>

#include "stochsweep/sweep.hpp"

namespace ss = stochsweep;

namespace {

const ss::ModelParams kParams{1.0, 7.0, 0.4, 0.37, 0.1, 0.02, 0.02};

void BM_Drift(benchmark::State& state) {
  ss::State s{5.0, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ss::drift(s, {2.0, 0.1}, kParams));
    s.x += 1e-9;
  }
}
BENCHMARK(BM_Drift);

void BM_IntegrateForward(benchmark::State& state) {
  const auto g = ss::make_grid(0.0, 87.0, static_cast<std::size_t>(state.range(0)));
  const std::vector<ss::Controls> u(g.n_steps, {2.0, 0.1});
  const auto noise = ss::sample_brownian(g, 1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ss::integrate_forward({5.0, 1.0}, u, kParams, g, noise, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntegrateForward)->Arg(1000)->Arg(8700);

void BM_CubicRoot(benchmark::State& state) {
  double c0 = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ss::solve_cubic_positive_root({1.0, 2.0, 1.0, c0}));
    c0 -= 1e-9;
  }
}
BENCHMARK(BM_CubicRoot);

void BM_RegressionBackward(benchmark::State& state) {
  const auto g = ss::make_grid(0.0, 1.0, 100);
  const std::vector<ss::Controls> u(g.n_steps, {2.0, 0.1});
  std::vector<ss::TrajectoryBundle> ensemble;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    ensemble.push_back(
        ss::integrate_forward({5.0, 1.0}, u, kParams, g, ss::sample_brownian(g, 2, i), {}));
  }
  const auto grad = ss::RunningCostGradient::linear_quadratic({});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ss::solve_backward_regression(ensemble, ss::Vec2(0.0, 0.0), kParams, grad, 2));
  }
}
BENCHMARK(BM_RegressionBackward)->Arg(500)->Arg(2000);

void BM_SmallSweep(benchmark::State& state) {
  const auto g = ss::make_grid(0.0, 20.0, 2000);
  ss::SweepConfig cfg;
  cfg.replicates = 100;
  cfg.max_iterations = 10;
  cfg.initial_guess = ss::Controls{2.0, 0.1};
  cfg.threads = static_cast<unsigned>(state.range(0));
  const auto kind = ss::ProblemKind::lq_quality({}, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ss::run_sweep({5.0, 1.0}, kind, kParams, g, ss::AdmissibleBox{}, cfg, 7));
  }
}
BENCHMARK(BM_SmallSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
