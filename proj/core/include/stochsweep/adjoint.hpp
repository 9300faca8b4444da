#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stochsweep/forward.hpp"
#include "stochsweep/model.hpp"
#include "stochsweep/paths.hpp"

namespace stochsweep {

/// Weights of the running cost -A1 x - A2 y + A3 u^2 / 2.
struct CostWeights {
  double A1 = 1.0;
  double A2 = 1.0;
  double A3 = 1.0;

  void validate() const;
};

/// State gradient of the running cost, (df/dx, df/dy).
struct RunningCostGradient {
  double df_dx = 0.0;
  double df_dy = 0.0;

  static RunningCostGradient linear_quadratic(const CostWeights& w) { return {-w.A1, -w.A2}; }
  static RunningCostGradient time_optimal() { return {0.0, 0.0}; }
};

/// Co-state path and the diffusion coefficients q of the backward equation
///   dp = -[ b_X^T p + sum_j (sigma_X^j)^T q_j - f_X ] dt + q dW.
/// q[i] is stored as (q1 q3; q2 q4): column j multiplies dW_j.
struct AdjointPath {
  TimeGrid grid;
  std::vector<Vec2> p;  // n_steps + 1
  std::vector<Mat2> q;  // n_steps
};

enum class CostateMode { terminal_condition, initial_shooting };

/// Rate dp/dt of the adjoint drift, i.e. the negated bracket above. Only the
/// diagonal entries q1 and q4 reach the drift because both diffusion
/// Jacobians are diagonal.
Vec2 adjoint_driver(const State& s, const Controls& u, const Vec2& p, const Mat2& q,
                    const ModelParams& params, const RunningCostGradient& grad);

/// Implicit backward Euler from p(T) = terminal_p with q = 0 along one path.
/// The step is affine in p, so each node is a closed-form 2x2 solve. When
/// the trajectory stopped early the terminal value is imposed at the stop
/// node and held afterwards.
AdjointPath solve_backward_pathwise(const TrajectoryBundle& traj, const Vec2& terminal_p,
                                    const ModelParams& params, const RunningCostGradient& grad);

/// Explicit forward integration of the same equation (q = 0) from a given
/// initial co-state p(t0).
AdjointPath solve_forward_shooting(const TrajectoryBundle& traj, const Vec2& initial_p,
                                   const ModelParams& params, const RunningCostGradient& grad);

using TerminalCondition = std::function<Vec2(const State&)>;

inline TerminalCondition constant_terminal(const Vec2& value) {
  return [value](const State&) { return value; };
}

struct RegressionDiagnostics {
  std::size_t degree_fallbacks = 0;  // rank-deficient fits retried at lower degree
  std::size_t steps = 0;
};

/// Number of monomials x^i y^j with i + j <= degree.
std::size_t basis_size(int degree);

/// Least-squares Monte Carlo backward scheme. At each step the conditional
/// expectations E[p_{i+1} | X_i] and E[p_{i+1} dW_i^T | X_i] / dt are fitted
/// by regressing the ensemble onto polynomials in the state, then the
/// implicit step is applied per replicate. Requires at least
/// 10 * basis_size(basis_degree) replicates on a shared grid. Without noise
/// the conditional expectation is the value itself and the result equals the
/// pathwise solve.
std::vector<AdjointPath> solve_backward_regression(std::span<const TrajectoryBundle> ensemble,
                                                   const TerminalCondition& terminal,
                                                   const ModelParams& params,
                                                   const RunningCostGradient& grad,
                                                   int basis_degree,
                                                   RegressionDiagnostics* diagnostics = nullptr);

std::vector<AdjointPath> solve_backward_regression(std::span<const TrajectoryBundle> ensemble,
                                                   const Vec2& terminal_p,
                                                   const ModelParams& params,
                                                   const RunningCostGradient& grad,
                                                   int basis_degree,
                                                   RegressionDiagnostics* diagnostics = nullptr);

}  // namespace stochsweep
