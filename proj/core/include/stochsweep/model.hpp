#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace stochsweep {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Raised when a value violates a documented invariant (bad parameters,
/// malformed grids, inconsistent lengths). Configuration errors in the CLI
/// surface as this type.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a solver produces a non-finite value or a state leaves the
/// admissible region under a rejecting policy.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parameters of the dimensional prey-predator model with additional food.
/// Units follow the ecology: rates in 1/time, densities in biomass.
struct DimensionalParams {
  double r = 0.0;      // prey growth rate
  double K = 0.0;      // carrying capacity
  double c = 0.0;      // predation rate
  double a = 0.0;      // half-saturation value
  double g = 0.0;      // conversion efficiency
  double m = 0.0;      // predator death rate
  double d = 0.0;      // intra-specific predator competition
  double alpha = 0.0;  // additional food quality
  double eta = 0.0;    // food amount descriptor, xi = eta * (A / a)^2
  double A = 0.0;      // additional food biomass
};

/// Nondimensional rates of the reduced model plus the environmental noise
/// intensities on the prey growth rate (sigma1) and predator death rate
/// (sigma2).
struct ModelParams {
  double r = 1.0;
  double gamma = 1.0;
  double g = 1.0;
  double m = 1.0;
  double delta = 1.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  ModelParams deterministic() const {
    ModelParams p = *this;
    p.sigma1 = 0.0;
    p.sigma2 = 0.0;
    return p;
  }

  bool has_noise() const { return sigma1 != 0.0 || sigma2 != 0.0; }
};

/// Scaled prey (x) and predator (y) densities.
struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

/// Additional-food quality (alpha) and quantity (xi).
struct Controls {
  double alpha = 0.0;
  double xi = 0.0;

  friend bool operator==(const Controls&, const Controls&) = default;
};

/// Components may dip to -kStateSlack to absorb rounding at the positivity
/// boundary; anything lower is rejected.
inline constexpr double kStateSlack = 1e-12;

void validate_state(const State& s);

struct NondimensionalModel {
  ModelParams params;  // noise intensities left at zero
  Controls controls;
};

/// Maps the dimensional model onto the reduced one via N = a x, P = a y / c:
/// gamma = K / a, delta = d a / c, xi = eta (A / a)^2.
NondimensionalModel nondimensionalize(const DimensionalParams& p);

/// Drift of the controlled SDE (equal to the right-hand side of the
/// deterministic reduced model).
Vec2 drift(const State& s, const Controls& u, const ModelParams& p);

/// diag(sigma1 x, sigma2 y).
Mat2 diffusion(const State& s, const ModelParams& p);

/// State Jacobian of the drift, entry (i, j) = d b_i / d X_j with X = (x, y).
Mat2 drift_jacobian(const State& s, const Controls& u, const ModelParams& p);

/// State Jacobians of the two diffusion columns. Both are constant and do not
/// depend on the controls.
std::pair<Mat2, Mat2> diffusion_jacobians(const ModelParams& p);

}  // namespace stochsweep
