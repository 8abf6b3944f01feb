#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <deque>

#include "nodal/error.hpp"
#include "nodal/nodal_topology.hpp"

using namespace nodal;

namespace {

// Independent flood fill with the same adjacency (4-neighbours plus the
// saddle diagonal picked by the cell mean).
std::pair<std::size_t, std::size_t> flood_fill_census(const ScalarGrid& g) {
  const std::size_t nx = g.nx, ny = g.ny;
  auto sign = [&](std::size_t i, std::size_t j) { return g.at(i, j) > -1e-14; };
  std::vector<int> label(nx * ny, -1);
  std::size_t interior = 0, total = 0;
  for (std::size_t j0 = 0; j0 < ny; ++j0) {
    for (std::size_t i0 = 0; i0 < nx; ++i0) {
      if (label[j0 * nx + i0] >= 0) continue;
      bool boundary = false;
      std::deque<std::pair<std::size_t, std::size_t>> queue{{i0, j0}};
      label[j0 * nx + i0] = static_cast<int>(total);
      while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) boundary = true;
        auto visit = [&](long a, long b) {
          if (a < 0 || b < 0 || a >= long(nx) || b >= long(ny)) return;
          const std::size_t k = std::size_t(b) * nx + std::size_t(a);
          if (label[k] >= 0 || sign(a, b) != sign(i, j)) return;
          label[k] = static_cast<int>(total);
          queue.emplace_back(a, b);
        };
        const long li = long(i), lj = long(j);
        visit(li + 1, lj);
        visit(li - 1, lj);
        visit(li, lj + 1);
        visit(li, lj - 1);
        // diagonal neighbours through the four cells around (i, j)
        for (int dx : {-1, 1}) {
          for (int dy : {-1, 1}) {
            const long ci = dx > 0 ? li : li - 1, cj = dy > 0 ? lj : lj - 1;
            if (ci < 0 || cj < 0 || ci + 1 >= long(nx) || cj + 1 >= long(ny)) continue;
            const double v00 = g.at(ci, cj), v10 = g.at(ci + 1, cj), v11 = g.at(ci + 1, cj + 1),
                         v01 = g.at(ci, cj + 1);
            const bool s00 = v00 > -1e-14, s10 = v10 > -1e-14, s11 = v11 > -1e-14, s01 = v01 > -1e-14;
            if (!(s00 == s11 && s10 == s01 && s00 != s10)) continue;
            const double mean = 0.25 * (v00 + v10 + v11 + v01);
            const bool main = (mean > -1e-14) == s00;
            const bool on_main = (dx == dy);
            if (main == on_main) visit(li + dx, lj + dy);
          }
        }
      }
      if (!boundary) ++interior;
      ++total;
    }
  }
  return {interior, total};
}

// Damped Newton from the centre of every half-size cell: an unfiltered
// oracle for the flip finder.
std::vector<Vec2> brute_force_flips(const FieldSample& s, const Domain& d, double h, Vec2 u) {
  std::vector<Vec2> roots;
  const double step = h / 2;
  const auto n = static_cast<std::size_t>(std::floor(2 * d.half_side / step + 1e-9));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 p = d.center - Vec2{d.half_side, d.half_side} + Vec2{(i + 0.5) * step, (j + 0.5) * step};
      for (int it = 0; it < 60; ++it) {
        const Jet jet = evaluate(s, p, 2);
        const double f = jet.f, g = dot(jet.grad, u);
        const Vec2 hu{jet.hess.xx * u.x + jet.hess.xy * u.y, jet.hess.xy * u.x + jet.hess.yy * u.y};
        if (std::abs(f) < 1e-12 && std::abs(g) < 1e-9) {
          if (d.contains(p, 1e-9)) {
            bool dup = false;
            for (Vec2 r : roots) dup = dup || norm(r - p) < 1e-6;
            if (!dup) roots.push_back(p);
          }
          break;
        }
        const double det = jet.grad.x * hu.y - jet.grad.y * hu.x;
        if (det == 0) break;
        Vec2 dp{-(hu.y * f - jet.grad.y * g) / det, -(-hu.x * f + jet.grad.x * g) / det};
        if (norm(dp) > step) dp = dp * (step / norm(dp));
        p = p + dp;
      }
    }
  }
  return roots;
}

}  // namespace

TEST(PlaneCensus, SingleCircle) {
  const auto g = tabulate([](Vec2 x) { return x.x * x.x + x.y * x.y - 1.0; }, Domain::square(2), 0.01);
  const auto c = count_components_plane(g);
  EXPECT_EQ(c.interior_components, 1u);
  EXPECT_EQ(c.closed_curves, 1u);
  EXPECT_EQ(c.boundary_components, 0u);
  ASSERT_EQ(c.interior_domain_areas.size(), 1u);
  EXPECT_NEAR(c.interior_domain_areas[0], kPi, 0.05);
}

TEST(PlaneCensus, NineLoops) {
  const auto g =
      tabulate([](Vec2 x) { return std::cos(x.x) + std::cos(x.y) - 1.5; }, Domain::square(3 * kPi), 0.02);
  const auto c = count_components_plane(g);
  EXPECT_EQ(c.interior_components, 9u);
  EXPECT_EQ(c.closed_curves, 9u);
}

TEST(PlaneCensus, HorizontalVerticalStrandsHaveNoLoops) {
  const auto s = FieldSample::from_waves({{{1, 0}, 2, 0}, {{0, 1}, 1, 0}});
  const auto c = count_components_plane(evaluate_grid(s, Domain::square(20), 0.02));
  EXPECT_EQ(c.interior_components, 0u);
  EXPECT_EQ(c.closed_curves, 0u);
  EXPECT_GT(c.boundary_components, 0u);
}

TEST(PlaneCensus, Errors) {
  ScalarGrid empty;
  EXPECT_THROW(count_components_plane(empty), Error);
  const auto t = evaluate_grid(FieldSample::from_waves({}, 1.0), Domain::torus(), 0.1);
  EXPECT_THROW(count_components_plane(t), Error);
  EXPECT_THROW(count_components_torus(tabulate([](Vec2) { return 1.0; }, Domain::square(1), 0.5)), Error);
}

TEST(PlaneCensus, MatchesFloodFillOracle) {
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::size_t side = 8 + static_cast<std::size_t>(uniform01({17, k}, 0) * 56);
    ScalarGrid g;
    if (k % 2 == 0) {
      // white noise: saddle cells everywhere
      g = tabulate([&](Vec2 x) { return uniform01({18, k}, std::uint64_t(x.x * 1000 + x.y * 1e6)) - 0.5; },
                   Domain::square(double(side - 1) / 2, {double(side - 1) / 2, double(side - 1) / 2}), 1.0);
    } else {
      const auto s = sample(preset("uniform_circle", {{"K", 32}}), StreamId{19, k});
      g = evaluate_grid(s, Domain::square(double(side - 1) * 0.05), 0.1);
    }
    const auto c = count_components_plane(g);
    const auto [interior, total] = flood_fill_census(g);
    EXPECT_EQ(c.interior_components, interior) << k;
    EXPECT_EQ(c.total_domains, total) << k;
    EXPECT_EQ(c.closed_curves, c.interior_components) << k;
    EXPECT_EQ(c.small_domains(1e300) + c.boundary_domains, c.total_domains);
  }
}

TEST(SmallDomains, DiscArea) {
  const auto g = tabulate([](Vec2 x) { return x.x * x.x + x.y * x.y - 0.01; }, Domain::square(1), 0.005);
  EXPECT_EQ(count_small_domains(g, 0.05), 1u);
  EXPECT_EQ(count_small_domains(g, 0.01), 0u);
  const auto flat = tabulate([](Vec2 x) { return x.x; }, Domain::square(1), 0.1);
  EXPECT_EQ(count_small_domains(flat, 1e9), 0u);
}

TEST(SmallDomains, MonotoneInDelta) {
  const auto s = sample(preset("uniform_circle", {{"K", 64}}), 8);
  const auto c = count_components_plane(evaluate_grid(s, Domain::square(6), 1.0 / 16));
  std::size_t prev = 0;
  for (double d : {0.01, 0.05, 0.1, 0.5, 1.0, 10.0}) {
    EXPECT_GE(c.small_domains(d), prev);
    prev = c.small_domains(d);
  }
  EXPECT_EQ(prev, c.interior_components);
}

TEST(TorusCensus, TwoVerticalCircles) {
  const auto s = FieldSample::from_waves({{{kTwoPi, 0}, 0, 1}});
  const auto c = count_components_torus(evaluate_grid(s, Domain::torus(), 1.0 / 256));
  EXPECT_EQ(c.wrapping_components, 2u);
  EXPECT_EQ(c.interior_components, 0u);
}

TEST(TorusCensus, ConstantHasNoComponents) {
  const auto c = count_components_torus(evaluate_grid(FieldSample::from_waves({}, 1.0), Domain::torus(), 1.0 / 32));
  EXPECT_EQ(c.total_components(), 0u);
}

TEST(TorusCensus, ContractibleLoop) {
  const auto g = tabulate(
      [](Vec2 x) {
        const double dx = x.x - 0.95, dy = x.y - 0.02;  // straddles both seams
        const double wx = dx - std::round(dx), wy = dy - std::round(dy);
        return wx * wx + wy * wy - 0.01;
      },
      Domain::torus(), 1.0 / 200);
  const auto c = count_components_torus(g);
  EXPECT_EQ(c.interior_components, 1u);
  EXPECT_EQ(c.wrapping_components, 0u);
}

TEST(TorusCensus, CillerueloTypeFieldWraps) {
  const int m = 5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = sample(preset("cilleruelo"), seed).rescaled(m);
    const auto c = count_components_torus(evaluate_grid(s, Domain::torus(), 1.0 / 512));
    EXPECT_EQ(c.interior_components, 0u);
    EXPECT_GE(c.wrapping_components, std::size_t(m / 2));
    EXPECT_LE(c.wrapping_components, std::size_t(4 * m));
  }
}

TEST(TorusCensus, DiagonalWrap) {
  // zero set {x + y = 1/4 mod 1} and {x + y = 3/4}: two diagonal circles
  const auto s = FieldSample::from_waves({{{kTwoPi, kTwoPi}, 1, 0}});
  const auto c = count_components_torus(evaluate_grid(s, Domain::torus(), 1.0 / 128));
  EXPECT_EQ(c.wrapping_components, 2u);
  EXPECT_EQ(c.interior_components, 0u);
}

TEST(Flips, CosineSumOnSquare) {
  const auto s = FieldSample::from_waves({{{1, 0}, 1 / std::sqrt(2.0), 0}, {{0, 1}, 1 / std::sqrt(2.0), 0}});
  EXPECT_EQ(count_flips(s, Domain::square(kPi), kTwoPi / 16, 1), 4u);
  EXPECT_EQ(count_flips(s, Domain::square(kPi), kTwoPi / 16, 2), 4u);
}

TEST(Flips, ConstantSignAndDegenerate) {
  const auto c = FieldSample::from_waves({{{1, 0}, 0.1, 0}}, 1.0);
  EXPECT_EQ(count_flips(c, Domain::square(10), 0.1, 1), 0u);
  EXPECT_EQ(count_flips(c, Domain::square(10), 0.1, 2), 0u);
  const auto two = preset("two_point");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(count_flips(sample(two, seed), Domain::square(5), 1.0 / 16, 2), 0u);
  }
  EXPECT_THROW(count_flips(c, Domain::square(1), 0.1, 3), Error);
}

TEST(Flips, MatchBruteForceNewton) {
  const auto m = preset("uniform_circle", {{"K", 16}});
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto s = sample(m, seed);
    const Domain d = Domain::square(2.0, {0.3, -0.1});
    for (Vec2 u : {Vec2{1, 0}, Vec2{0, 1}, Vec2{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}}) {
      const auto fast = find_flips(s, d, 1.0 / 16, u);
      const auto slow = brute_force_flips(s, d, 1.0 / 16, u);
      EXPECT_EQ(fast.size(), slow.size()) << seed;
      for (Vec2 p : slow) {
        bool found = false;
        for (Vec2 q : fast) found = found || norm(p - q) < 1e-6;
        EXPECT_TRUE(found) << p.x << "," << p.y;
      }
    }
  }
}

TEST(Flips, RootsAreFlips) {
  const auto s = sample(preset("uniform_circle", {{"K", 64}}), 21);
  for (Vec2 p : find_flips(s, Domain::square(3), 1.0 / 16, {1, 0})) {
    const Jet j = evaluate(s, p, 1);
    EXPECT_NEAR(j.f, 0.0, 1e-9);
    EXPECT_NEAR(j.grad.x, 0.0, 1e-6);
  }
}

TEST(CurveIntersections, SineExamples) {
  const auto s = FieldSample::from_waves({{{1, 0}, 0, 1}});
  EXPECT_EQ(count_curve_intersections(s, {0.1, 0.3}, {kTwoPi - 0.1, 0.3}), 1u);
  EXPECT_EQ(count_curve_intersections(s, {-0.1, 0}, {3 * kPi + 0.1, 0}), 4u);
  EXPECT_EQ(count_curve_intersections(s, {0.5, 0}, {2.5, 1}), 0u);
  // endpoints on zeros count (closed segment)
  EXPECT_EQ(count_curve_intersections(s, {0, 0}, {kPi / 2, 0}, 0.01), 1u);
  const auto roots = find_curve_intersections(s, {0.1, 0.3}, {kTwoPi - 0.1, 0.3});
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0].x, kPi, 1e-12);
  EXPECT_THROW(count_curve_intersections(s, {1, 1}, {1, 1}), Error);
}

TEST(Tiling, InequalityAndDeficitBound) {
  const auto m = preset("uniform_circle", {{"K", 64}});
  const double h = 1.0 / 16, R2 = 8.0;
  const int k = 4;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = sample(m, seed);
    const auto g = evaluate_grid(s, Domain::square(R2), h);
    const std::size_t whole = count_components_plane(g).interior_components;
    const std::size_t step = (g.nx - 1) / k;
    std::size_t tiles = 0;
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        tiles += count_components_plane(g.window(a * step, b * step, step + 1, step + 1)).interior_components;
      }
    }
    std::size_t crossings = 0;
    for (int t = 1; t < k; ++t) {
      const double c = -R2 + t * (2 * R2 / k);
      crossings += count_curve_intersections(s, {c, -R2}, {c, R2}, h / 4);
      crossings += count_curve_intersections(s, {-R2, c}, {R2, c}, h / 4);
    }
    EXPECT_GE(whole, tiles);
    EXPECT_LE(whole - tiles, crossings);
  }
}

TEST(Census, JsonRecord) {
  auto c = count_components_plane(tabulate([](Vec2 x) { return x.x * x.x + x.y * x.y - 1; }, Domain::square(2), 0.1));
  c.s1_flips = 3;
  const std::string j = census_to_json(c);
  EXPECT_NE(j.find("\"interior_components\":1"), std::string::npos);
  EXPECT_NE(j.find("\"s1_flips\":3"), std::string::npos);
  EXPECT_NE(j.find("\"s2_flips\":null"), std::string::npos);
}
