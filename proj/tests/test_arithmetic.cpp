#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "nodal/arithmetic.hpp"
#include "nodal/error.hpp"
#include "nodal/nodal_topology.hpp"

using namespace nodal;

namespace {

// r2(n) = 4 (d1(n) - d3(n)).
std::size_t r2_divisor_formula(std::int64_t n) {
  std::int64_t d1 = 0, d3 = 0;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    for (std::int64_t e : {d, n / d}) {
      if (e % 4 == 1) ++d1;
      if (e % 4 == 3) ++d3;
      if (d * d == n) break;
    }
  }
  return static_cast<std::size_t>(4 * (d1 - d3));
}

bool has_atom(const SpectralMeasure& rho, Vec2 p) {
  for (const Atom& a : rho.atoms()) {
    if (norm(a.xi - p) < 1e-12) return true;
  }
  return false;
}

}  // namespace

TEST(Lattice, Examples) {
  EXPECT_EQ(r2(5), 8u);
  EXPECT_EQ(r2(25), 12u);
  EXPECT_EQ(r2(3), 0u);
  EXPECT_EQ(r2(65), 16u);
  EXPECT_EQ(r2(1), 4u);
  const auto c = lattice_points(5);
  EXPECT_EQ(c.points.front(), (LatticePoint{-2, -1}));
  for (LatticePoint p : c.points) EXPECT_EQ(p.x * p.x + p.y * p.y, 5);
}

TEST(Lattice, Errors) {
  EXPECT_THROW(lattice_points(0), Error);
  try {
    lattice_points(kLatticeLimit + 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
  try {
    mu_n(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSumOfTwoSquares);
  }
  EXPECT_EQ(r2(kLatticeLimit), r2_divisor_formula(kLatticeLimit));
}

TEST(Lattice, DivisorOracleAndSymmetry) {
  for (std::int64_t n = 1; n <= 10000; ++n) {
    const auto c = lattice_points(n);
    ASSERT_EQ(c.r2, r2_divisor_formula(n)) << n;
    EXPECT_EQ(c.r2 % 4, 0u);
    for (LatticePoint p : c.points) {
      for (LatticePoint q : {LatticePoint{-p.x, -p.y}, LatticePoint{-p.y, p.x}, LatticePoint{p.x, -p.y}}) {
        EXPECT_TRUE(std::binary_search(c.points.begin(), c.points.end(), q, [](LatticePoint a, LatticePoint b) {
          return a.x != b.x ? a.x < b.x : a.y < b.y;
        }));
      }
    }
  }
}

TEST(MuN, Examples) {
  const auto m1 = mu_n(1);
  EXPECT_EQ(m1.atoms().size(), 4u);
  EXPECT_EQ(weak_star_distance(m1, preset("cilleruelo")), 0.0);
  const auto m2 = mu_n(2);
  EXPECT_TRUE(has_atom(m2, {std::sqrt(0.5), std::sqrt(0.5)}));
  EXPECT_LT(weak_star_distance(m2, preset("tilted_cilleruelo")), 1e-12);
  const auto m = mu_n(2917);
  EXPECT_EQ(m.atoms().size(), 8u);
  for (const Atom& a : m.atoms()) EXPECT_LT(std::min(std::abs(a.xi.x), std::abs(a.xi.y)), 0.02);
  EXPECT_EQ(m.kappa(), kKappaTwoPi);
}

TEST(MuN, TorusSymmetriesUpTo10000) {
  for (std::int64_t n = 1; n <= 10000; ++n) {
    if (r2(n) == 0) continue;
    const auto m = mu_n(n);
    ASSERT_TRUE(m.torus_tag()) << n;
    EXPECT_TRUE(m.on_unit_circle());
    for (const Atom& a : m.atoms()) {
      EXPECT_TRUE(has_atom(m, {-a.xi.y, a.xi.x}));
      EXPECT_TRUE(has_atom(m, {a.xi.x, -a.xi.y}));
    }
  }
}

TEST(TorusWave, PeriodicAndEigenfunction) {
  for (std::int64_t n : {5, 65, 2917}) {
    const auto f = sample_torus_wave(n, 3);
    const double scale = 4 * kPi * kPi * double(n);
    double worst = 0;
    for (std::size_t j = 0; j < 512; j += 3) {
      for (std::size_t i = 0; i < 512; i += 5) {
        const Vec2 x{i / 512.0, j / 512.0};
        const Jet jet = evaluate(f, x);
        worst = std::max(worst, std::abs(jet.hess.xx + jet.hess.yy + scale * jet.f) / scale);
        EXPECT_NEAR(evaluate_value(f, x + Vec2{1, 0}), jet.f, 1e-10);
      }
    }
    EXPECT_LT(worst, 1e-8) << n;
    for (const Wave& w : f.waves()) {
      EXPECT_EQ(w.k.x / kTwoPi, std::round(w.k.x / kTwoPi));
      EXPECT_NEAR(dot(w.k, w.k), scale, 1e-9 * scale);
    }
  }
}

TEST(TorusWave, FiniteDifferenceLaplacian) {
  const auto f = sample_torus_wave(5, 11);
  const double h = 1.0 / 512;
  const auto g = evaluate_grid(f, Domain::torus(), h);
  double worst = 0;
  for (std::size_t j = 1; j + 1 < g.ny; j += 7) {
    for (std::size_t i = 1; i + 1 < g.nx; i += 7) {
      const double lap = (g.at(i + 1, j) + g.at(i - 1, j) + g.at(i, j + 1) + g.at(i, j - 1) - 4 * g.at(i, j)) / (h * h);
      worst = std::max(worst, std::abs(lap + 4 * kPi * kPi * 5 * g.at(i, j)));
    }
  }
  // truncation error h^2 / 12 (|k1|^4 + |k2|^4) sum |coefficient|
  EXPECT_LT(worst, 0.05);
}

TEST(TorusWave, UnitVarianceAndLaw) {
  std::vector<double> sq;
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double v = evaluate_value(sample_torus_wave(65, StreamId{4, k}), {0.3, 0.7});
    sq.push_back(v * v);
  }
  const auto m = mean_stderr(sq);
  EXPECT_NEAR(m.mean, 1.0, 3 * m.se);
  // f_1 and the kappa = 2 pi Cilleruelo field share coefficients
  const auto f1 = sample_torus_wave(1, 9), c = sample(preset("cilleruelo"), 9);
  for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{0.7, 0.45}}) EXPECT_NEAR(evaluate_value(f1, x), evaluate_value(c, x), 1e-12);
}

TEST(TorusWave, ScaledFieldCovariance) {
  const std::int64_t n = 65;
  const auto rho = mu_n(n);
  for (Vec2 x : {Vec2{0.3, 0.0}, Vec2{0.2, 0.5}}) {
    std::vector<double> prod;
    for (std::uint64_t k = 0; k < 20000; ++k) {
      const auto g = scaled_torus_wave(sample_torus_wave(n, StreamId{6, k}), n);
      prod.push_back(evaluate_value(g, {0, 0}) * evaluate_value(g, x));
    }
    const auto m = mean_stderr(prod);
    EXPECT_NEAR(m.mean, covariance(rho, x), 3 * m.se);
  }
}

TEST(TorusWave, CillerueloTypeHasOnlyWrappingComponents) {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto s = cilleruelo_torus_wave(5, StreamId{12, k});
    const auto c = count_components_torus(evaluate_grid(s, Domain::torus(), 1.0 / 256));
    EXPECT_EQ(c.interior_components, 0u);
    EXPECT_GE(c.wrapping_components, 2u);
    EXPECT_LE(c.wrapping_components, 20u);
  }
  EXPECT_THROW(cilleruelo_torus_wave(0, {}), Error);
}

TEST(Candidates, Examples) {
  const auto small = cilleruelo_candidates(3000);
  EXPECT_TRUE(std::find(small.begin(), small.end(), 2917) != small.end());
  EXPECT_TRUE(cilleruelo_candidates(1).empty());
  const auto big = cilleruelo_candidates(20000);
  for (std::int64_t a = 1; a * a + 1 <= 20000; ++a) {
    const std::int64_t n = a * a + 1;
    EXPECT_EQ(std::binary_search(big.begin(), big.end(), n), r2(n) == 8) << n;
  }
  EXPECT_EQ(cilleruelo_candidates(30), (std::vector<std::int64_t>{5, 10, 17, 26}));
}

TEST(Candidates, LargeLimitAgreesWithEnumeration) {
  const auto big = cilleruelo_candidates(1'000'000'000'000);
  EXPECT_GT(big.size(), 1000u);
  for (std::size_t i = big.size() - 5; i < big.size(); ++i) EXPECT_EQ(r2(big[i]), 8u) << big[i];
  EXPECT_THROW(cilleruelo_candidates(kLatticeLimit + 1), Error);
}

TEST(Discrepancy, Examples) {
  EXPECT_EQ(angular_discrepancy(1), 0.0);
  EXPECT_NEAR(angular_discrepancy(2), weak_star_distance(preset("tilted_cilleruelo"), preset("cilleruelo")), 1e-12);
  EXPECT_GT(angular_discrepancy(2), 0.0);
  EXPECT_LT(angular_discrepancy(2917), angular_discrepancy(65));
}

TEST(Lattice, Json) {
  const auto j = nlohmann::json::parse(lattice_to_json(lattice_points(65), true));
  EXPECT_EQ(j["r2"], 16);
  EXPECT_EQ(j["points"].size(), 16u);
  EXPECT_EQ(j["measure"]["atoms"].size(), 16u);
}
