#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "stochsweep/adjoint.hpp"
#include "stochsweep/model.hpp"

namespace stochsweep {

/// [0, alpha_max] x [0, xi_max].
struct AdmissibleBox {
  double alpha_max = 10.0;
  double xi_max = 10.0;

  void validate() const;
  Controls clamp(const Controls& u) const;
  bool contains(const Controls& u) const;
};

enum class ProblemTag { lq_quality, lq_quantity, time_optimal };

/// Which objective is optimized. For the LQ kinds one food attribute is the
/// control and the other stays at `fixed_control`.
struct ProblemKind {
  ProblemTag tag = ProblemTag::time_optimal;
  CostWeights weights;
  double fixed_control = 0.0;

  static ProblemKind lq_quality(const CostWeights& w, double xi_fixed) {
    return {ProblemTag::lq_quality, w, xi_fixed};
  }
  static ProblemKind lq_quantity(const CostWeights& w, double alpha_fixed) {
    return {ProblemTag::lq_quantity, w, alpha_fixed};
  }
  static ProblemKind time_optimal() { return {ProblemTag::time_optimal, CostWeights{}, 0.0}; }

  bool is_lq() const { return tag != ProblemTag::time_optimal; }
  void validate() const;
  RunningCostGradient cost_gradient() const;
  /// Running cost f(x, y, u).
  double running_cost(const State& s, const Controls& u) const;
};

const char* to_string(ProblemTag tag);

/// H = <p, b> + tr(q^T sigma) - f.
double hamiltonian(const State& s, const Controls& u, const Vec2& p, const Mat2& q,
                   const ModelParams& params, const ProblemKind& kind);

/// c3 u^3 + c2 u^2 + c1 u + c0.
struct Cubic {
  double c3 = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double operator()(double u) const { return ((c3 * u + c2) * u + c1) * u + c0; }
  double derivative(double u) const { return (3.0 * c3 * u + 2.0 * c2) * u + c1; }
};

/// Stationarity dH/dalpha = 0 of the quality problem, multiplied through by
/// the squared response denominator.
Cubic quality_cubic_coeffs(const State& s, const Vec2& p, const ModelParams& params,
                           double xi_fixed, double A3);

/// Stationarity dH/dxi = 0 of the quantity problem.
Cubic quantity_cubic_coeffs(const State& s, const Vec2& p, const ModelParams& params,
                            double alpha_fixed, double A3);

/// Unique positive real root when the coefficient sequence has exactly one
/// sign change (Descartes), found by bracketing plus safeguarded Newton.
/// Throws ValidationError for the zero polynomial.
std::optional<double> solve_cubic_positive_root(const Cubic& cubic);

/// The printed closed-form quality law, kept only to cross-check the
/// numerical root. Returns nullopt when it is not a finite real number.
std::optional<double> closed_form_quality_alpha(const State& s, const Vec2& p,
                                                const ModelParams& params, double xi_fixed,
                                                double A3);

enum class SingularityKind { prey_zero, p1_equals_g_p2, p2_zero };

class SingularStationaryPair : public std::domain_error {
public:
  SingularStationaryPair(SingularityKind kind, const std::string& what)
      : std::domain_error(what), kind_(kind) {}
  SingularityKind kind() const { return kind_; }

private:
  SingularityKind kind_;
};

struct StationaryPair {
  double alpha = 0.0;
  double xi = 0.0;
};

/// Unclamped stationary point of the time-optimal Hamiltonian:
///   alpha* = g p2 (1 + x^2) / (x^2 (g p2 - p1)),  xi* = (p1 - g p2) / (g p2).
StationaryPair time_optimal_stationary_pair(const State& s, const Vec2& p,
                                            const ModelParams& params);

/// Pointwise argmax of H over the admissible box. Candidates are the box
/// endpoints or corners plus any finite interior stationary point; exact ties
/// go to the smaller control.
Controls maximize_hamiltonian_on_box(const State& s, const Vec2& p, const Mat2& q,
                                     const ModelParams& params, const ProblemKind& kind,
                                     const AdmissibleBox& box);

}  // namespace stochsweep
