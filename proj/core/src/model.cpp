#include "stochsweep/model.hpp"

#include <cmath>

namespace stochsweep {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void ModelParams::validate() const {
  require(positive(r), "model: r must be > 0");
  require(positive(gamma), "model: gamma must be > 0");
  require(positive(g), "model: g must be > 0");
  require(positive(m), "model: m must be > 0");
  require(positive(delta), "model: delta must be > 0");
  require(nonnegative(sigma1), "model: sigma1 must be >= 0");
  require(nonnegative(sigma2), "model: sigma2 must be >= 0");
}

void validate_state(const State& s) {
  require(std::isfinite(s.x) && s.x >= -kStateSlack, "state: x must be >= 0");
  require(std::isfinite(s.y) && s.y >= -kStateSlack, "state: y must be >= 0");
}

NondimensionalModel nondimensionalize(const DimensionalParams& p) {
  require(positive(p.a), "dimensional: half-saturation a must be > 0");
  require(positive(p.c), "dimensional: predation rate c must be > 0");
  require(positive(p.r), "dimensional: r must be > 0");
  require(positive(p.K), "dimensional: K must be > 0");
  require(positive(p.g), "dimensional: g must be > 0");
  require(positive(p.m), "dimensional: m must be > 0");
  require(positive(p.d), "dimensional: d must be > 0");
  require(nonnegative(p.alpha), "dimensional: alpha must be >= 0");
  require(nonnegative(p.eta), "dimensional: eta must be >= 0");
  require(nonnegative(p.A), "dimensional: A must be >= 0");

  NondimensionalModel out;
  out.params.r = p.r;
  out.params.gamma = p.K / p.a;
  out.params.g = p.g;
  out.params.m = p.m;
  out.params.delta = p.d * p.a / p.c;
  const double ratio = p.A / p.a;
  out.controls.alpha = p.alpha;
  out.controls.xi = p.eta * ratio * ratio;
  return out;
}

Vec2 drift(const State& s, const Controls& u, const ModelParams& p) {
  const double x = s.x;
  const double y = s.y;
  const double x2 = x * x;
  const double denom = 1.0 + x2 + u.alpha * u.xi;
  const double b1 = p.r * x * (1.0 - x / p.gamma) - x2 * y / denom;
  const double b2 = p.g * y * (x2 + u.xi) / denom - p.m * y - p.delta * y * y;
  return {b1, b2};
}

Mat2 diffusion(const State& s, const ModelParams& p) {
  Mat2 out = Mat2::Zero();
  out(0, 0) = p.sigma1 * s.x;
  out(1, 1) = p.sigma2 * s.y;
  return out;
}

Mat2 drift_jacobian(const State& s, const Controls& u, const ModelParams& p) {
  const double x = s.x;
  const double y = s.y;
  const double x2 = x * x;
  const double ax = u.alpha * u.xi;
  const double denom = 1.0 + x2 + ax;
  const double denom2 = denom * denom;

  Mat2 J;
  J(0, 0) = p.r * (1.0 - 2.0 * x / p.gamma) - 2.0 * x * y * (1.0 + ax) / denom2;
  J(0, 1) = -x2 / denom;
  J(1, 0) = 2.0 * p.g * x * y * (1.0 + (u.alpha - 1.0) * u.xi) / denom2;
  J(1, 1) = p.g * (x2 + u.xi) / denom - p.m - 2.0 * p.delta * y;
  return J;
}

std::pair<Mat2, Mat2> diffusion_jacobians(const ModelParams& p) {
  Mat2 first = Mat2::Zero();
  Mat2 second = Mat2::Zero();
  first(0, 0) = p.sigma1;
  second(1, 1) = p.sigma2;
  return {first, second};
}

}  // namespace stochsweep
