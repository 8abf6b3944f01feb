#pragma once

#include <array>

#include "nodal/geometry.hpp"
#include "nodal/spectral_measure.hpp"

namespace nodal {

// Covariance of the 6-jet (f, f1, f2, f11, f12, f22) at a point.
struct JetCovariance {
  enum Index { F = 0, F1, F2, F11, F12, F22 };
  using Vector = std::array<double, 6>;
  std::array<std::array<double, 6>, 6> m{};

  double operator()(int i, int j) const { return m[i][j]; }
  // Covariance of two linear functionals of the jet.
  double cross(const Vector& a, const Vector& b) const;
};

JetCovariance build_jet_covariance(const SpectralMeasure& rho);

// Jet coefficient vectors of f, the first derivative along u and the second
// derivative along (u, v).
JetCovariance::Vector jet_value();
JetCovariance::Vector jet_first(Vec2 u);
JetCovariance::Vector jet_second(Vec2 u, Vec2 v);

// E|XY| for a centred Gaussian pair with standard deviations s1, s2 and
// correlation r.
double expected_abs_product(double s1, double s2, double r);
// Same quantity by adaptive quadrature over X.
double expected_abs_product_quadrature(double s1, double s2, double r, double tol = 1e-10);

// Intermediate quantities of a flip intensity along a unit direction u.
struct FlipDensityDetail {
  Vec2 u;
  double density_at_zero = 0.0;  // density of (f, d_u f) at (0, 0)
  double var_du = 0.0;           // var(d_u f)
  double var_w1 = 0.0;           // var(d_v f | f = d_u f = 0), v = u rotated by pi/2
  double var_w2 = 0.0;           // var(d_uu f | f = d_u f = 0)
  double uncond_var_w1 = 0.0;
  double uncond_var_w2 = 0.0;
  double correlation = 0.0;
  double expected_abs_det = 0.0;
  double density = 0.0;
};

// Conditioning variances below this threshold are treated as zero.
inline constexpr double kDegeneracyThreshold = 1e-12;

// Expected number per unit area of points with f = d_u f = 0.
FlipDensityDetail flip_density_detail(const SpectralMeasure& rho, Vec2 u);
double flip_density(const SpectralMeasure& rho, int axis);
// Flips of (f, f1 + f2).
double diagonal_flip_density(const SpectralMeasure& rho);
// Expected zeros per unit length along a line in direction u.
double curve_intersection_density(const SpectralMeasure& rho, Vec2 u);

}  // namespace nodal
