#include "nodal/kac_rice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "nodal/error.hpp"

namespace nodal {

namespace {

// Multi-indices of the jet entries.
constexpr int kOrder[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E|N(mean, sd^2)|.
double folded_normal_mean(double mean, double sd) {
  if (sd <= 0.0) return std::abs(mean);
  return sd * std::sqrt(2.0 / kPi) * std::exp(-0.5 * mean * mean / (sd * sd)) +
         mean * (1.0 - 2.0 * normal_cdf(-mean / sd));
}

double simpson(const std::function<double(double)>& fn, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = fn(lm), frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& fn, double a, double b, double tol) {
  const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
  return simpson(fn, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

}  // namespace

double JetCovariance::cross(const Vector& a, const Vector& b) const {
  double s = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) s += a[i] * m[i][j] * b[j];
  }
  return s;
}

JetCovariance build_jet_covariance(const SpectralMeasure& rho) {
  // cov(d^a f, d^b f) = (-1)^|b| (-1)^((|a|+|b|)/2) kappa^(|a|+|b|) m_{a+b}
  // for |a|+|b| even, and 0 otherwise.
  JetCovariance c;
  const double kappa = rho.kappa();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const int px = kOrder[i][0] + kOrder[j][0], py = kOrder[i][1] + kOrder[j][1];
      const int total = px + py, nb = kOrder[j][0] + kOrder[j][1];
      if (total % 2 != 0) continue;
      const double sign = ((nb + total / 2) % 2 == 0) ? 1.0 : -1.0;
      c.m[i][j] = sign * std::pow(kappa, total) * moment(rho, px, py);
    }
  }
  return c;
}

JetCovariance::Vector jet_value() { return {1, 0, 0, 0, 0, 0}; }

JetCovariance::Vector jet_first(Vec2 u) { return {0, u.x, u.y, 0, 0, 0}; }

JetCovariance::Vector jet_second(Vec2 u, Vec2 v) {
  return {0, 0, 0, u.x * v.x, u.x * v.y + u.y * v.x, u.y * v.y};
}

double expected_abs_product(double s1, double s2, double r) {
  if (s1 < 0.0 || s2 < 0.0) throw Error(ErrorCode::InvalidParameter, "standard deviations must be nonnegative");
  r = std::clamp(r, -1.0, 1.0);
  const double v = 2.0 * s1 * s2 / kPi * (std::sqrt(1.0 - r * r) + r * std::asin(r));
  if (std::isfinite(v)) return v;
  return expected_abs_product_quadrature(s1, s2, r);
}

double expected_abs_product_quadrature(double s1, double s2, double r, double tol) {
  if (s1 < 0.0 || s2 < 0.0) throw Error(ErrorCode::InvalidParameter, "standard deviations must be nonnegative");
  if (s1 == 0.0 || s2 == 0.0) return 0.0;
  r = std::clamp(r, -1.0, 1.0);
  const double cond_sd = std::sqrt(1.0 - r * r);
  // X = s1 z, Y | z ~ N(s2 r z, s2^2 (1 - r^2))
  auto integrand = [&](double z) {
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
    return std::abs(z) * folded_normal_mean(r * z, cond_sd) * phi;
  };
  // integrand is smooth on each half line
  const double scaled_tol = tol / (s1 * s2);
  const double value = integrate(integrand, -12.0, 0.0, 0.5 * scaled_tol) + integrate(integrand, 0.0, 12.0, 0.5 * scaled_tol);
  return s1 * s2 * value;
}

FlipDensityDetail flip_density_detail(const SpectralMeasure& rho, Vec2 u) {
  const double len = norm(u);
  if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::InvalidParameter, "direction must be nonzero");
  u = u * (1.0 / len);
  const Vec2 v{-u.y, u.x};
  const JetCovariance c = build_jet_covariance(rho);
  const auto y0 = jet_value(), y1 = jet_first(u), w1 = jet_first(v), w2 = jet_second(u, u);

  FlipDensityDetail d;
  d.u = u;
  const double var_f = c.cross(y0, y0);
  d.var_du = c.cross(y1, y1);
  if (d.var_du < kDegeneracyThreshold) {
    throw Error(ErrorCode::DegenerateConditioning, "variance of the directional derivative vanishes");
  }
  // f and d_u f are uncorrelated, so the Schur complement splits.
  auto conditioned = [&](const JetCovariance::Vector& a, const JetCovariance::Vector& b) {
    return c.cross(a, b) - c.cross(a, y0) * c.cross(y0, b) / var_f - c.cross(a, y1) * c.cross(y1, b) / d.var_du;
  };
  d.uncond_var_w1 = c.cross(w1, w1);
  d.uncond_var_w2 = c.cross(w2, w2);
  d.var_w1 = conditioned(w1, w1);
  d.var_w2 = conditioned(w2, w2);
  if (d.var_w1 < kDegeneracyThreshold * std::max(1.0, d.uncond_var_w1)) d.var_w1 = 0.0;
  if (d.var_w2 < kDegeneracyThreshold * std::max(1.0, d.uncond_var_w2)) d.var_w2 = 0.0;
  const double s1 = std::sqrt(d.var_w1), s2 = std::sqrt(d.var_w2);
  d.correlation = (s1 > 0.0 && s2 > 0.0) ? std::clamp(conditioned(w1, w2) / (s1 * s2), -1.0, 1.0) : 0.0;
  d.expected_abs_det = expected_abs_product(s1, s2, d.correlation);
  d.density_at_zero = 1.0 / (kTwoPi * std::sqrt(var_f * d.var_du));
  d.density = d.density_at_zero * d.expected_abs_det;
  return d;
}

double flip_density(const SpectralMeasure& rho, int axis) {
  if (axis != 1 && axis != 2) throw Error(ErrorCode::InvalidParameter, "axis must be 1 or 2");
  return flip_density_detail(rho, axis == 1 ? Vec2{1, 0} : Vec2{0, 1}).density;
}

double diagonal_flip_density(const SpectralMeasure& rho) { return flip_density_detail(rho, {1, 1}).density; }

double curve_intersection_density(const SpectralMeasure& rho, Vec2 u) {
  const double len = norm(u);
  if (!(len > 0.0) || !std::isfinite(len)) throw Error(ErrorCode::InvalidParameter, "direction must be nonzero");
  u = u * (1.0 / len);
  return rho.kappa() / kPi * std::sqrt(std::max(0.0, directional_moment(rho, u, 2)));
}

}  // namespace nodal
