#include "stochsweep/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stochsweep {

void CostWeights::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(A1) || !ok(A2) || !ok(A3)) {
    throw ValidationError("cost weights: A1, A2, A3 must be > 0");
  }
}

namespace {

Vec2 noise_feedback(const Mat2& q, const ModelParams& params) {
  return {params.sigma1 * q(0, 0), params.sigma2 * q(1, 1)};
}

Vec2 cost_gradient(const RunningCostGradient& grad) { return {grad.df_dx, grad.df_dy}; }

void require_finite(const Vec2& v, std::size_t step, const char* where) {
  if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
    throw NumericalError(std::string(where) + ": non-finite co-state at step " +
                         std::to_string(step));
  }
}

// Solves (I - dt J^T) p = rhs.
Vec2 implicit_step(const Mat2& J, double dt, const Vec2& rhs, std::size_t step) {
  const double m00 = 1.0 - dt * J(0, 0);
  const double m01 = -dt * J(1, 0);
  const double m10 = -dt * J(0, 1);
  const double m11 = 1.0 - dt * J(1, 1);
  const double det = m00 * m11 - m01 * m10;
  if (!std::isfinite(det) || std::abs(det) < 1e-300) {
    throw NumericalError("adjoint: singular implicit step at step " + std::to_string(step));
  }
  Vec2 p((m11 * rhs[0] - m01 * rhs[1]) / det, (m00 * rhs[1] - m10 * rhs[0]) / det);
  require_finite(p, step, "adjoint");
  return p;
}

AdjointPath empty_path(const TimeGrid& grid) {
  AdjointPath out;
  out.grid = grid;
  out.p.assign(grid.n_nodes(), Vec2::Zero());
  out.q.assign(grid.n_steps, Mat2::Zero());
  return out;
}

void require_complete(const TrajectoryBundle& traj) {
  if (traj.states.size() != traj.grid.n_nodes() || traj.controls.size() != traj.grid.n_steps) {
    throw ValidationError("adjoint: trajectory is incomplete for its grid");
  }
}

}  // namespace

Vec2 adjoint_driver(const State& s, const Controls& u, const Vec2& p, const Mat2& q,
                    const ModelParams& params, const RunningCostGradient& grad) {
  const Mat2 J = drift_jacobian(s, u, params);
  return -(J.transpose() * p + noise_feedback(q, params) - cost_gradient(grad));
}

AdjointPath solve_backward_pathwise(const TrajectoryBundle& traj, const Vec2& terminal_p,
                                    const ModelParams& params, const RunningCostGradient& grad) {
  require_complete(traj);
  AdjointPath out = empty_path(traj.grid);
  const std::size_t last = traj.active_steps();
  for (std::size_t k = last; k < out.p.size(); ++k) out.p[k] = terminal_p;

  const double dt = traj.grid.dt;
  const Vec2 forcing = -dt * cost_gradient(grad);
  for (std::size_t i = last; i-- > 0;) {
    const Mat2 J = drift_jacobian(traj.states[i], traj.controls[i], params);
    out.p[i] = implicit_step(J, dt, out.p[i + 1] + forcing, i);
  }
  return out;
}

AdjointPath solve_forward_shooting(const TrajectoryBundle& traj, const Vec2& initial_p,
                                   const ModelParams& params, const RunningCostGradient& grad) {
  require_complete(traj);
  AdjointPath out = empty_path(traj.grid);
  const std::size_t last = traj.active_steps();
  const double dt = traj.grid.dt;
  const Mat2 no_q = Mat2::Zero();
  out.p[0] = initial_p;
  for (std::size_t i = 0; i < last; ++i) {
    out.p[i + 1] =
        out.p[i] + dt * adjoint_driver(traj.states[i], traj.controls[i], out.p[i], no_q, params, grad);
    require_finite(out.p[i + 1], i + 1, "forward shooting");
  }
  for (std::size_t k = last + 1; k < out.p.size(); ++k) out.p[k] = out.p[last];
  return out;
}

std::size_t basis_size(int degree) {
  if (degree < 0) throw ValidationError("regression: basis degree must be >= 0");
  const auto d = static_cast<std::size_t>(degree);
  return (d + 1) * (d + 2) / 2;
}

namespace {

struct Standardizer {
  bool active = false;
  double mean = 0.0;
  double scale = 1.0;
};

Standardizer standardize(const std::vector<double>& values) {
  Standardizer s;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  s.mean = mean;
  if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
    s.active = true;
    s.scale = sd;
  }
  return s;
}

// Monomials z1^i z2^j, i + j <= degree, over the coordinates that vary.
Eigen::MatrixXd design_matrix(const std::vector<double>& xs, const std::vector<double>& ys,
                              const Standardizer& sx, const Standardizer& sy, int degree) {
  std::vector<std::pair<int, int>> powers;
  for (int total = 0; total <= degree; ++total) {
    for (int i = total; i >= 0; --i) {
      const int j = total - i;
      if ((i > 0 && !sx.active) || (j > 0 && !sy.active)) continue;
      powers.emplace_back(i, j);
    }
  }
  const auto rows = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd phi(rows, static_cast<Eigen::Index>(powers.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double zx = sx.active ? (xs[r] - sx.mean) / sx.scale : 0.0;
    const double zy = sy.active ? (ys[r] - sy.mean) / sy.scale : 0.0;
    for (std::size_t c = 0; c < powers.size(); ++c) {
      phi(r, static_cast<Eigen::Index>(c)) =
          std::pow(zx, powers[c].first) * std::pow(zy, powers[c].second);
    }
  }
  return phi;
}

}  // namespace

std::vector<AdjointPath> solve_backward_regression(std::span<const TrajectoryBundle> ensemble,
                                                   const TerminalCondition& terminal,
                                                   const ModelParams& params,
                                                   const RunningCostGradient& grad,
                                                   int basis_degree,
                                                   RegressionDiagnostics* diagnostics) {
  const std::size_t nbasis = basis_size(basis_degree);
  if (ensemble.size() < 10 * nbasis) {
    throw ValidationError("regression: ensemble of " + std::to_string(ensemble.size()) +
                          " is below 10x the " + std::to_string(nbasis) + " basis functions");
  }
  const TimeGrid& grid = ensemble.front().grid;
  for (const auto& traj : ensemble) {
    require_complete(traj);
    if (!(traj.grid == grid)) throw ValidationError("regression: ensemble grids differ");
  }

  std::vector<AdjointPath> out;
  out.reserve(ensemble.size());

  if (!params.has_noise()) {
    for (const auto& traj : ensemble) {
      out.push_back(solve_backward_pathwise(traj, terminal(traj.states[traj.active_steps()]),
                                            params, grad));
    }
    return out;
  }

  for (const auto& traj : ensemble) {
    AdjointPath path = empty_path(grid);
    const std::size_t last = traj.active_steps();
    const Vec2 pT = terminal(traj.states[last]);
    for (std::size_t k = last; k < path.p.size(); ++k) path.p[k] = pT;
    out.push_back(std::move(path));
  }

  const double dt = grid.dt;
  const Vec2 forcing = -cost_gradient(grad);
  std::vector<std::size_t> active;
  std::vector<double> xs, ys;
  RegressionDiagnostics local;

  for (std::size_t i = grid.n_steps; i-- > 0;) {
    active.clear();
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
      if (i < ensemble[r].active_steps()) active.push_back(r);
    }
    if (active.empty()) continue;
    ++local.steps;

    xs.resize(active.size());
    ys.resize(active.size());
    Eigen::MatrixXd targets(static_cast<Eigen::Index>(active.size()), 6);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto& traj = ensemble[active[k]];
      xs[k] = traj.states[i].x;
      ys[k] = traj.states[i].y;
      const Vec2& next = out[active[k]].p[i + 1];
      const auto& dW = traj.noise.increments[i];
      const auto row = static_cast<Eigen::Index>(k);
      targets(row, 0) = next[0];
      targets(row, 1) = next[1];
      targets(row, 2) = next[0] * dW[0] / dt;
      targets(row, 3) = next[0] * dW[1] / dt;
      targets(row, 4) = next[1] * dW[0] / dt;
      targets(row, 5) = next[1] * dW[1] / dt;
    }

    const Standardizer sx = standardize(xs);
    const Standardizer sy = standardize(ys);
    int degree = basis_degree;
    while (degree > 0 && active.size() < 10 * basis_size(degree)) {
      --degree;
      ++local.degree_fallbacks;
    }
    Eigen::MatrixXd fitted;
    for (;;) {
      const Eigen::MatrixXd phi = design_matrix(xs, ys, sx, sy, degree);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
      qr.setThreshold(1e-10);
      if (qr.rank() < phi.cols() && degree > 0) {
        --degree;
        ++local.degree_fallbacks;
        continue;
      }
      fitted = phi * qr.solve(targets);
      break;
    }

    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t r = active[k];
      const auto row = static_cast<Eigen::Index>(k);
      const Vec2 expected(fitted(row, 0), fitted(row, 1));
      Mat2 q;
      q << fitted(row, 2), fitted(row, 3), fitted(row, 4), fitted(row, 5);
      const auto& traj = ensemble[r];
      const Mat2 J = drift_jacobian(traj.states[i], traj.controls[i], params);
      out[r].q[i] = q;
      out[r].p[i] = implicit_step(J, dt, expected + dt * (noise_feedback(q, params) + forcing), i);
    }
  }

  if (diagnostics) *diagnostics = local;
  return out;
}

std::vector<AdjointPath> solve_backward_regression(std::span<const TrajectoryBundle> ensemble,
                                                   const Vec2& terminal_p,
                                                   const ModelParams& params,
                                                   const RunningCostGradient& grad,
                                                   int basis_degree,
                                                   RegressionDiagnostics* diagnostics) {
  return solve_backward_regression(ensemble, constant_terminal(terminal_p), params, grad,
                                   basis_degree, diagnostics);
}

}  // namespace stochsweep
