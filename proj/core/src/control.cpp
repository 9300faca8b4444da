#include "stochsweep/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace stochsweep {

void AdmissibleBox::validate() const {
  if (!(alpha_max > 0.0) || !(xi_max > 0.0) || std::isnan(alpha_max) || std::isnan(xi_max)) {
    throw ValidationError("box: alpha_max and xi_max must be > 0");
  }
}

Controls AdmissibleBox::clamp(const Controls& u) const {
  return {std::clamp(u.alpha, 0.0, alpha_max), std::clamp(u.xi, 0.0, xi_max)};
}

bool AdmissibleBox::contains(const Controls& u) const {
  return u.alpha >= 0.0 && u.alpha <= alpha_max && u.xi >= 0.0 && u.xi <= xi_max;
}

void ProblemKind::validate() const {
  if (is_lq()) {
    weights.validate();
    if (!(std::isfinite(fixed_control) && fixed_control >= 0.0)) {
      throw ValidationError("problem: fixed control must be >= 0");
    }
  }
}

RunningCostGradient ProblemKind::cost_gradient() const {
  return is_lq() ? RunningCostGradient::linear_quadratic(weights)
                 : RunningCostGradient::time_optimal();
}

double ProblemKind::running_cost(const State& s, const Controls& u) const {
  switch (tag) {
    case ProblemTag::lq_quality:
      return -weights.A1 * s.x - weights.A2 * s.y + 0.5 * weights.A3 * u.alpha * u.alpha;
    case ProblemTag::lq_quantity:
      return -weights.A1 * s.x - weights.A2 * s.y + 0.5 * weights.A3 * u.xi * u.xi;
    case ProblemTag::time_optimal:
      return 1.0;
  }
  return 0.0;
}

const char* to_string(ProblemTag tag) {
  switch (tag) {
    case ProblemTag::lq_quality: return "lq_quality";
    case ProblemTag::lq_quantity: return "lq_quantity";
    case ProblemTag::time_optimal: return "time_optimal";
  }
  return "unknown";
}

double hamiltonian(const State& s, const Controls& u, const Vec2& p, const Mat2& q,
                   const ModelParams& params, const ProblemKind& kind) {
  const Vec2 b = drift(s, u, params);
  const double trace = q(0, 0) * params.sigma1 * s.x + q(1, 1) * params.sigma2 * s.y;
  return p.dot(b) + trace - kind.running_cost(s, u);
}

Cubic quality_cubic_coeffs(const State& s, const Vec2& p, const ModelParams& params,
                           double xi_fixed, double A3) {
  const double x2 = s.x * s.x;
  const double base = 1.0 + x2;
  const double xi = xi_fixed;
  Cubic c;
  c.c3 = A3 * xi * xi;
  c.c2 = 2.0 * A3 * xi * base;
  c.c1 = A3 * base * base;
  c.c0 = xi * params.g * s.y * p[1] * (x2 + xi) - xi * x2 * s.y * p[0];
  return c;
}

Cubic quantity_cubic_coeffs(const State& s, const Vec2& p, const ModelParams& params,
                            double alpha_fixed, double A3) {
  const double x2 = s.x * s.x;
  const double base = 1.0 + x2;
  const double a = alpha_fixed;
  Cubic c;
  c.c3 = A3 * a * a;
  c.c2 = 2.0 * A3 * a * base;
  c.c1 = A3 * base * base;
  c.c0 = -(x2 * s.y * p[0] * a + params.g * s.y * p[1] * (1.0 + (1.0 - a) * x2));
  return c;
}

std::optional<double> solve_cubic_positive_root(const Cubic& cubic) {
  std::array<double, 4> coeffs{cubic.c0, cubic.c1, cubic.c2, cubic.c3};
  if (std::all_of(coeffs.begin(), coeffs.end(), [](double v) { return v == 0.0; })) {
    throw ValidationError("cubic: all coefficients are zero");
  }
  // Factor out u = 0 roots; they are not positive.
  std::size_t shift = 0;
  while (coeffs[shift] == 0.0) ++shift;
  std::vector<double> poly(coeffs.begin() + static_cast<std::ptrdiff_t>(shift), coeffs.end());
  while (poly.back() == 0.0) poly.pop_back();
  if (poly.size() < 2) return std::nullopt;

  int changes = 0;
  double last = poly.front();
  for (std::size_t k = 1; k < poly.size(); ++k) {
    if (poly[k] == 0.0) continue;
    if ((poly[k] > 0.0) != (last > 0.0)) ++changes;
    last = poly[k];
  }
  if (changes != 1) return std::nullopt;

  auto value = [&](double u) {
    double acc = 0.0;
    for (std::size_t k = poly.size(); k-- > 0;) acc = acc * u + poly[k];
    return acc;
  };
  auto slope = [&](double u) {
    double acc = 0.0;
    for (std::size_t k = poly.size(); k-- > 1;) acc = acc * u + static_cast<double>(k) * poly[k];
    return acc;
  };

  // Cauchy bound on root magnitude.
  const double lead = poly.back();
  double bound = 0.0;
  for (std::size_t k = 0; k + 1 < poly.size(); ++k) bound = std::max(bound, std::abs(poly[k] / lead));
  double lo = 0.0;
  double hi = 1.0 + bound;
  const bool rising = value(lo) < 0.0;

  double u = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    const double f = value(u);
    if (f == 0.0) break;
    if ((f < 0.0) == rising) {
      lo = u;
    } else {
      hi = u;
    }
    const double df = slope(u);
    double next = (df != 0.0) ? u - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      u = next;
      break;
    }
    u = next;
  }
  if (!(u > 0.0)) return std::nullopt;
  return u;
}

std::optional<double> closed_form_quality_alpha(const State& s, const Vec2& p,
                                                const ModelParams& params, double xi_fixed,
                                                double A3) {
  const double x2 = s.x * s.x;
  const double base = 1.0 + x2;
  const double xi = xi_fixed;
  const double y = s.y;
  if (!(xi > 0.0)) return std::nullopt;
  const double c1 = params.g * p[1] * (x2 + xi) - x2 * y;
  const double radicand = -108.0 * c1 * y * base * base / (A3 * std::pow(xi, 4)) +
                          729.0 * y * y * c1 * c1 / (A3 * A3 * xi * xi);
  if (radicand < 0.0) return std::nullopt;
  const double inner = -10.0 * std::pow(base, 3) / std::pow(xi, 3) +
                       27.0 * y * c1 / (2.0 * A3 * xi) + 0.5 * std::sqrt(radicand);
  const double c0 = std::cbrt(inner);
  if (c0 == 0.0) return std::nullopt;
  const double alpha = (base - c0 * xi) * (base - c0 * xi) / (3.0 * c0 * xi * xi);
  if (!std::isfinite(alpha)) return std::nullopt;
  return alpha;
}

StationaryPair time_optimal_stationary_pair(const State& s, const Vec2& p,
                                            const ModelParams& params) {
  const double gp2 = params.g * p[1];
  if (gp2 == 0.0) {
    throw SingularStationaryPair(SingularityKind::p2_zero,
                                 "stationary pair: g p2 = 0, both controls undefined");
  }
  if (p[0] == gp2) {
    throw SingularStationaryPair(SingularityKind::p1_equals_g_p2,
                                 "stationary pair: p1 = g p2, alpha* undefined");
  }
  if (s.x == 0.0) {
    throw SingularStationaryPair(SingularityKind::prey_zero,
                                 "stationary pair: x = 0, alpha* undefined");
  }
  const double x2 = s.x * s.x;
  StationaryPair out;
  out.alpha = gp2 * (1.0 + x2) / (x2 * (gp2 - p[0]));
  out.xi = (p[0] - gp2) / gp2;
  return out;
}

namespace {

template <typename MakeControls>
Controls best_scalar(std::vector<double> candidates, MakeControls make, const State& s,
                     const Vec2& p, const Mat2& q, const ModelParams& params,
                     const ProblemKind& kind) {
  std::sort(candidates.begin(), candidates.end());
  Controls best = make(candidates.front());
  double best_h = hamiltonian(s, best, p, q, params, kind);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const Controls u = make(candidates[k]);
    const double h = hamiltonian(s, u, p, q, params, kind);
    if (h > best_h) {
      best = u;
      best_h = h;
    }
  }
  return best;
}

}  // namespace

Controls maximize_hamiltonian_on_box(const State& s, const Vec2& p, const Mat2& q,
                                     const ModelParams& params, const ProblemKind& kind,
                                     const AdmissibleBox& box) {
  switch (kind.tag) {
    case ProblemTag::lq_quality: {
      const double xi = kind.fixed_control;
      std::vector<double> cands{0.0, box.alpha_max};
      const Cubic cubic = quality_cubic_coeffs(s, p, params, xi, kind.weights.A3);
      if (const auto root = solve_cubic_positive_root(cubic); root && *root < box.alpha_max) {
        cands.push_back(*root);
      }
      return best_scalar(
          cands, [xi](double a) { return Controls{a, xi}; }, s, p, q, params, kind);
    }
    case ProblemTag::lq_quantity: {
      const double alpha = kind.fixed_control;
      std::vector<double> cands{0.0, box.xi_max};
      const Cubic cubic = quantity_cubic_coeffs(s, p, params, alpha, kind.weights.A3);
      if (const auto root = solve_cubic_positive_root(cubic); root && *root < box.xi_max) {
        cands.push_back(*root);
      }
      return best_scalar(
          cands, [alpha](double xi) { return Controls{alpha, xi}; }, s, p, q, params, kind);
    }
    case ProblemTag::time_optimal: {
      std::vector<Controls> cands{{0.0, 0.0},
                                  {box.alpha_max, 0.0},
                                  {0.0, box.xi_max},
                                  {box.alpha_max, box.xi_max}};
      if (s.x > 0.0 && params.g * p[1] != 0.0 && p[0] != params.g * p[1]) {
        const StationaryPair pair = time_optimal_stationary_pair(s, p, params);
        if (std::isfinite(pair.alpha) && std::isfinite(pair.xi)) {
          const Controls c = box.clamp({pair.alpha, pair.xi});
          cands.push_back(c);
          cands.push_back({c.alpha, 0.0});
          cands.push_back({c.alpha, box.xi_max});
          cands.push_back({0.0, c.xi});
          cands.push_back({box.alpha_max, c.xi});
        }
      }
      std::sort(cands.begin(), cands.end(), [](const Controls& a, const Controls& b) {
        const double sa = a.alpha + a.xi;
        const double sb = b.alpha + b.xi;
        if (sa != sb) return sa < sb;
        return a.alpha < b.alpha;
      });
      Controls best = cands.front();
      double best_h = hamiltonian(s, best, p, q, params, kind);
      for (std::size_t k = 1; k < cands.size(); ++k) {
        const double h = hamiltonian(s, cands[k], p, q, params, kind);
        if (h > best_h) {
          best = cands[k];
          best_h = h;
        }
      }
      return best;
    }
  }
  return {};
}

}  // namespace stochsweep
