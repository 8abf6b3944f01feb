#include <gtest/gtest.h>

#include <cmath>

#include "nodal/error.hpp"
#include "nodal/gaussian_field.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/rng.hpp"

using namespace nodal;

namespace {

std::vector<SpectralMeasure> presets_on_circle() {
  return {preset("cilleruelo"), preset("tilted_cilleruelo"), preset("uniform_circle", {{"K", 64}}),
          preset("arc_nu_a", {{"a", 0.3}, {"K", 32}}), preset("section7_monochromatic_six_point")};
}

// Empirical flips per unit area over `seeds` samples on D_R.
MeanStderr empirical_flip_density(const SpectralMeasure& rho, Vec2 u, double R, std::size_t seeds,
                                  std::uint64_t seed) {
  std::vector<double> xs;
  const Domain d = Domain::square(R);
  for (std::size_t k = 0; k < seeds; ++k) {
    const auto s = sample(rho, StreamId{seed, k});
    xs.push_back(double(find_flips(s, d, default_spacing(s), u).size()) / d.area());
  }
  return mean_stderr(xs);
}

}  // namespace

TEST(JetCovariance, Structure) {
  for (const auto& rho : presets_on_circle()) {
    const auto c = build_jet_covariance(rho);
    const double k2 = rho.kappa() * rho.kappa();
    EXPECT_NEAR(c(JetCovariance::F, JetCovariance::F), 1.0, 1e-12);
    EXPECT_EQ(c(JetCovariance::F, JetCovariance::F1), 0.0);
    EXPECT_EQ(c(JetCovariance::F, JetCovariance::F2), 0.0);
    EXPECT_NEAR(c(JetCovariance::F, JetCovariance::F11), -k2 * moment(rho, 2, 0), 1e-12);
    EXPECT_NEAR(c(JetCovariance::F1, JetCovariance::F1), k2 * moment(rho, 2, 0), 1e-12);
    EXPECT_NEAR(c(JetCovariance::F11, JetCovariance::F11), k2 * k2 * moment(rho, 4, 0), 1e-9);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) EXPECT_EQ(c(i, j), c(j, i));
    }
    // on the circle the Laplacian identity holds: f11 + f22 = -kappa^2 f
    const JetCovariance::Vector lap{k2, 0, 0, 1, 0, 1};
    EXPECT_NEAR(c.cross(lap, lap), 0.0, 1e-9 * k2 * k2);
  }
}

TEST(JetCovariance, PositiveSemidefinite) {
  for (const auto& rho : presets_on_circle()) {
    const auto c = build_jet_covariance(rho);
    for (std::uint64_t t = 0; t < 200; ++t) {
      JetCovariance::Vector a;
      for (int i = 0; i < 6; ++i) a[i] = normal_pair({5, t}, i).first;
      EXPECT_GE(c.cross(a, a), -1e-10);
    }
  }
}

TEST(JetCovariance, Examples) {
  const auto c = build_jet_covariance(preset("cilleruelo", {{"kappa", 1}}));
  EXPECT_EQ(c(JetCovariance::F12, JetCovariance::F12), 0.0);
  for (const auto& rho : presets_on_circle()) {
    const auto j = build_jet_covariance(rho);
    const double k2 = rho.kappa() * rho.kappa();
    if (j(JetCovariance::F1, JetCovariance::F1) > 0) {
      EXPECT_LE(j(JetCovariance::F11, JetCovariance::F11) / j(JetCovariance::F1, JetCovariance::F1), k2 * (1 + 1e-12));
    }
  }
  const auto z = build_jet_covariance(preset("delta_zero"));
  for (int i = 0; i < 6; ++i) {
    for (int k = 0; k < 6; ++k) {
      if (i != 0 || k != 0) EXPECT_EQ(z(i, k), 0.0);
    }
  }
}

TEST(JetCovariance, InvariantUnderRelabeling) {
  const auto rho = preset("arc_nu_a", {{"a", 0.4}, {"K", 16}});
  std::vector<Atom> atoms(rho.atoms().rbegin(), rho.atoms().rend());
  const auto rev = SpectralMeasure::make_atomic(atoms, rho.kappa());
  const auto a = build_jet_covariance(rho), b = build_jet_covariance(rev);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_EQ(a(i, j), b(i, j));
  }
}

TEST(JetCovariance, MatchesSamples) {
  const auto rho = preset("arc_nu_a", {{"a", 0.5}, {"K", 16}});
  const auto c = build_jet_covariance(rho);
  const int M = 20000;
  double f_f11 = 0, f1_f1 = 0, f11_f22 = 0;
  for (int k = 0; k < M; ++k) {
    const Jet j = evaluate(sample(rho, StreamId{8, std::uint64_t(k)}), {0.3, -0.2});
    f_f11 += j.f * j.hess.xx;
    f1_f1 += j.grad.x * j.grad.x;
    f11_f22 += j.hess.xx * j.hess.yy;
  }
  const double k4 = std::pow(rho.kappa(), 4);
  EXPECT_NEAR(f_f11 / M, c(JetCovariance::F, JetCovariance::F11), 0.05 * rho.kappa() * rho.kappa());
  EXPECT_NEAR(f1_f1 / M, c(JetCovariance::F1, JetCovariance::F1), 0.05 * rho.kappa() * rho.kappa());
  EXPECT_NEAR(f11_f22 / M, c(JetCovariance::F11, JetCovariance::F22), 0.05 * k4);
}

TEST(ExpectedAbsProduct, ClosedFormMatchesQuadrature) {
  for (double r : {-1.0, -0.9, -0.5, 0.0, 0.3, 0.77, 0.999, 1.0}) {
    for (auto [s1, s2] : {std::pair{1.0, 1.0}, {0.3, 2.0}, {5.0, 0.01}}) {
      EXPECT_NEAR(expected_abs_product(s1, s2, r), expected_abs_product_quadrature(s1, s2, r), 1e-9)
          << r << " " << s1 << " " << s2;
    }
  }
  EXPECT_NEAR(expected_abs_product(1, 1, 0), 2 / kPi, 1e-15);
  EXPECT_NEAR(expected_abs_product(1, 1, 1), 1.0, 1e-15);
  EXPECT_EQ(expected_abs_product(0, 1, 0.5), 0.0);
  EXPECT_THROW(expected_abs_product(-1, 1, 0), Error);
}

TEST(ExpectedAbsProduct, ClosedFormMatchesMonteCarlo) {
  const std::uint64_t n = 10000000;
  for (double r : {-0.6, 0.2, 0.9}) {
    double sum = 0, sq = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto [a, b] = normal_pair({77, std::uint64_t(r * 100 + 100)}, i);
      const double x = 1.5 * a, y = 0.5 * (r * a + std::sqrt(1 - r * r) * b);
      const double v = std::abs(x * y);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
    EXPECT_NEAR(mean, expected_abs_product(1.5, 0.5, r), 4 * se);
  }
}

TEST(FlipDensity, TwoPointAxisOneIsZero) {
  const auto rho = preset("two_point", {{"theta", 0}});
  EXPECT_EQ(flip_density(rho, 1), 0.0);
  EXPECT_THROW(flip_density(rho, 2), Error);
  try {
    flip_density(rho, 2);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConditioning);
  }
  EXPECT_THROW(flip_density(rho, 3), Error);
  EXPECT_THROW(flip_density(preset("delta_zero"), 1), Error);
}

TEST(FlipDensity, DiagonalVanishesForCilleruelo) {
  EXPECT_NEAR(diagonal_flip_density(preset("cilleruelo", {{"kappa", 1}})), 0.0, 1e-12);
  EXPECT_NEAR(diagonal_flip_density(preset("cilleruelo")), 0.0, 1e-12);
  EXPECT_NEAR(flip_density(preset("tilted_cilleruelo", {{"kappa", 1}}), 1), 0.0, 1e-12);
  EXPECT_NEAR(flip_density(preset("tilted_cilleruelo"), 1), 0.0, 1e-12);
  EXPECT_GT(diagonal_flip_density(preset("uniform_circle", {{"K", 64}})), 0.01);
}

TEST(FlipDensity, ConditioningShrinksVariance) {
  for (const auto& rho : presets_on_circle()) {
    for (Vec2 u : {Vec2{1, 0}, Vec2{0, 1}, Vec2{1, 1}, Vec2{0.3, -0.8}}) {
      const auto d = flip_density_detail(rho, u);
      EXPECT_LE(d.var_w1, d.uncond_var_w1 + 1e-12);
      EXPECT_LE(d.var_w2, d.uncond_var_w2 + 1e-12);
      EXPECT_GE(d.density, 0.0);
    }
  }
}

TEST(FlipDensity, CauchySchwarzBound) {
  // density <= kappa / (2 pi) * sqrt(var d2 f)
  for (const auto& rho : presets_on_circle()) {
    const auto g = gradient_covariance(rho).matrix;
    EXPECT_LE(flip_density(rho, 1), rho.kappa() / kTwoPi * std::sqrt(g.yy) + 1e-12);
    EXPECT_LE(flip_density(rho, 2), rho.kappa() / kTwoPi * std::sqrt(g.xx) + 1e-12);
  }
}

TEST(FlipDensity, MatchesEmpiricalCountsCilleruelo) {
  const auto rho = preset("cilleruelo", {{"kappa", 1}});
  const auto e = empirical_flip_density(rho, {1, 0}, 20, 200, 31);
  const double k = flip_density(rho, 1);
  EXPECT_GT(e.se, 0.0);
  EXPECT_NEAR(e.mean, k, 3 * e.se) << "closed form " << k;
}

TEST(FlipDensity, MatchesEmpiricalCountsUniform) {
  const auto rho = preset("uniform_circle", {{"K", 64}});
  for (Vec2 u : {Vec2{1, 0}, Vec2{1, 1}}) {
    const auto e = empirical_flip_density(rho, u, 5, 100, 32);
    const double k = flip_density_detail(rho, u).density;
    EXPECT_NEAR(e.mean, k, 3 * e.se) << "closed form " << k;
  }
}

TEST(CurveIntersection, Examples) {
  EXPECT_NEAR(curve_intersection_density(preset("uniform_circle", {{"K", 256}}), {0.6, 0.8}), std::sqrt(2.0), 1e-6);
  EXPECT_EQ(curve_intersection_density(preset("two_point", {{"theta", 0}}), {0, 1}), 0.0);
  EXPECT_NEAR(curve_intersection_density(preset("cilleruelo", {{"kappa", 1}}), {1, 0}), std::sqrt(0.5) / kPi, 1e-12);
  EXPECT_THROW(curve_intersection_density(preset("cilleruelo"), {0, 0}), Error);
}

TEST(CurveIntersection, MatchesEmpiricalCounts) {
  const auto rho = preset("uniform_circle", {{"K", 64}});
  const Vec2 u{0.6, 0.8};
  std::vector<double> xs;
  for (std::uint64_t k = 0; k < 400; ++k) {
    const auto s = sample(rho, StreamId{41, k});
    xs.push_back(double(count_curve_intersections(s, {0, 0}, u * 3.0)));
  }
  const auto m = mean_stderr(xs);
  EXPECT_NEAR(m.mean, 3.0 * curve_intersection_density(rho, u), 3 * m.se);
}

TEST(CurveIntersection, UniformBound) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    std::vector<Atom> atoms;
    for (int i = 0; i < 4; ++i) {
      const double r = std::sqrt(uniform01({6, t}, i, 0)), th = kTwoPi * uniform01({6, t}, i, 1);
      const Vec2 xi{r * std::cos(th), r * std::sin(th)};
      atoms.push_back({xi, 0.125});
      atoms.push_back({-xi, 0.125});
    }
    const auto rho = SpectralMeasure::make_atomic(atoms);
    for (int k = 0; k < 8; ++k) {
      const double th = kPi * k / 8;
      EXPECT_LE(curve_intersection_density(rho, {std::cos(th), std::sin(th)}), rho.kappa() / kPi + 1e-12);
    }
  }
}
