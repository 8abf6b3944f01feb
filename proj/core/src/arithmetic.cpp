#include "nodal/arithmetic.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "nodal/error.hpp"

namespace nodal {

namespace {

std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

void check_range(std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "n must be a positive integer");
  if (n > kLatticeLimit) throw Error(ErrorCode::TooLarge, "n exceeds the enumeration cap 1e12");
}

std::int64_t power_mod(std::int64_t b, std::int64_t e, std::int64_t p) {
  std::int64_t r = 1;
  b %= p;
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

// Square root of -1 modulo a prime p = 1 mod 4.
std::int64_t sqrt_minus_one(std::int64_t p) {
  for (std::int64_t c = 2;; ++c) {
    const std::int64_t t = power_mod(c, (p - 1) / 4, p);
    if (t * t % p == p - 1) return t;
  }
}

}  // namespace

LatticeCircle lattice_points(std::int64_t n) {
  check_range(n);
  LatticeCircle c;
  c.n = n;
  const std::int64_t top = isqrt(n);
  for (std::int64_t x = 0; x <= top; ++x) {
    const std::int64_t rem = n - x * x;
    const std::int64_t y = isqrt(rem);
    if (y * y != rem) continue;
    for (std::int64_t sx : {1, -1}) {
      if (x == 0 && sx < 0) continue;
      for (std::int64_t sy : {1, -1}) {
        if (y == 0 && sy < 0) continue;
        c.points.push_back({sx * x, sy * y});
      }
    }
  }
  std::sort(c.points.begin(), c.points.end(),
            [](LatticePoint a, LatticePoint b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  c.r2 = c.points.size();
  return c;
}

std::size_t r2(std::int64_t n) { return lattice_points(n).r2; }

SpectralMeasure mu_n(std::int64_t n) {
  const LatticeCircle c = lattice_points(n);
  if (c.r2 == 0) throw Error(ErrorCode::NotSumOfTwoSquares, std::to_string(n) + " is not a sum of two squares");
  const double root = std::sqrt(static_cast<double>(n));
  const double w = 1.0 / static_cast<double>(c.r2);
  std::vector<Atom> atoms;
  atoms.reserve(c.r2);
  for (LatticePoint p : c.points) atoms.push_back({{static_cast<double>(p.x) / root, static_cast<double>(p.y) / root}, w});
  return SpectralMeasure::make_atomic(std::move(atoms), kKappaTwoPi, {.auto_normalize = true})
      .with_provenance({"mu_n", {{"n", static_cast<double>(n)}}});
}

FieldSample sample_torus_wave(std::int64_t n, StreamId stream) {
  const FieldSample s = sample(mu_n(n), stream);
  const double root = std::sqrt(static_cast<double>(n));
  std::vector<Vec2> ks;
  ks.reserve(s.waves().size());
  for (const Wave& w : s.waves()) {
    // recover the integer frequency from 2 pi lambda / sqrt n
    const double lx = std::round(w.k.x * root / kTwoPi), ly = std::round(w.k.y * root / kTwoPi);
    ks.push_back({kTwoPi * lx, kTwoPi * ly});
  }
  return s.with_wave_vectors(ks);
}

FieldSample scaled_torus_wave(const FieldSample& fn, std::int64_t n) {
  check_range(n);
  return fn.rescaled(1.0 / std::sqrt(static_cast<double>(n)));
}

FieldSample cilleruelo_torus_wave(std::int64_t m, StreamId stream) {
  if (m < 1) throw Error(ErrorCode::InvalidParameter, "m must be a positive integer");
  return sample(preset("cilleruelo"), stream).rescaled(static_cast<double>(m));
}

std::vector<std::int64_t> cilleruelo_candidates(std::int64_t limit) {
  if (limit > kLatticeLimit) throw Error(ErrorCode::TooLarge, "limit exceeds the enumeration cap 1e12");
  if (limit < 2) return {};
  const std::int64_t top = isqrt(limit - 1);
  // rest[a] holds a^2 + 1 with the sieved primes divided out; odd[a] counts
  // odd prime factors and bad[a] marks a repeated one.
  std::vector<std::int64_t> rest(static_cast<std::size_t>(top) + 1);
  std::vector<int> odd(rest.size(), 0);
  std::vector<bool> bad(rest.size(), false);
  for (std::int64_t a = 1; a <= top; ++a) {
    rest[a] = a * a + 1;
    if (a % 2 == 1) rest[a] /= 2;
  }
  std::vector<bool> composite(static_cast<std::size_t>(top) + 1, false);
  for (std::int64_t p = 3; p <= top; p += 2) {
    if (composite[p]) continue;
    for (std::int64_t q = p * p; q <= top; q += 2 * p) composite[q] = true;
    if (p % 4 != 1) continue;
    const std::int64_t r = sqrt_minus_one(p);
    for (std::int64_t start : {r, p - r}) {
      for (std::int64_t a = start; a <= top; a += p) {
        int e = 0;
        while (rest[a] % p == 0) {
          rest[a] /= p;
          ++e;
        }
        ++odd[a];
        if (e > 1) bad[a] = true;
      }
    }
  }
  std::vector<std::int64_t> out;
  for (std::int64_t a = 1; a <= top; ++a) {
    // a leftover factor above sqrt(a^2 + 1) is a single prime
    const int factors = odd[a] + (rest[a] > 1 ? 1 : 0);
    // r2 = 4 prod (e + 1) over primes 1 mod 4; a^2 + 1 has no primes 3 mod 4
    if (factors == 1 && !bad[a]) out.push_back(a * a + 1);
  }
  return out;
}

double angular_discrepancy(std::int64_t n) { return weak_star_distance(mu_n(n), preset("cilleruelo")); }

std::string lattice_to_json(const LatticeCircle& c, bool with_measure) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["r2"] = c.r2;
  j["points"] = nlohmann::ordered_json::array();
  for (LatticePoint p : c.points) j["points"].push_back({p.x, p.y});
  if (with_measure && c.r2 > 0) j["measure"] = nlohmann::ordered_json::parse(to_json(mu_n(c.n)));
  return j.dump(2);
}

}  // namespace nodal
