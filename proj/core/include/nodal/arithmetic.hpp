#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nodal/gaussian_field.hpp"
#include "nodal/spectral_measure.hpp"

namespace nodal {

inline constexpr std::int64_t kLatticeLimit = 1'000'000'000'000;

struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const LatticePoint&) const = default;
};

// Integer points on the circle x^2 + y^2 = n, sorted lexicographically.
struct LatticeCircle {
  std::int64_t n = 0;
  std::vector<LatticePoint> points;
  std::size_t r2 = 0;
};

LatticeCircle lattice_points(std::int64_t n);
std::size_t r2(std::int64_t n);

// Uniform probability on lambda / sqrt(n), kappa = 2 pi.
SpectralMeasure mu_n(std::int64_t n);

// Arithmetic wave f_n on the unit torus with unit pointwise variance; wave
// vectors are exactly 2 pi lambda.  Coefficients follow sample(mu_n(n), stream).
FieldSample sample_torus_wave(std::int64_t n, StreamId stream);
inline FieldSample sample_torus_wave(std::int64_t n, std::uint64_t seed) {
  return sample_torus_wave(n, StreamId{seed, 0});
}
// g_n(y) = f_n(y / sqrt n); its spectral measure is mu_n(n).
FieldSample scaled_torus_wave(const FieldSample& fn, std::int64_t n);

// f(x) = (a1 cos(2 pi m x1 + eta1) + a2 cos(2 pi m x2 + eta2)) / sqrt 2 on the
// torus: the axis part of f_{m^2}.
FieldSample cilleruelo_torus_wave(std::int64_t m, StreamId stream);

// n = a^2 + 1 <= limit with r2(n) = 8, increasing.
std::vector<std::int64_t> cilleruelo_candidates(std::int64_t limit);

// weak_star_distance(mu_n(n), cilleruelo).
double angular_discrepancy(std::int64_t n);

std::string lattice_to_json(const LatticeCircle& c, bool with_measure);

}  // namespace nodal
