#pragma once

#include <cmath>

namespace nodal {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Symmetric 2x2 matrix, used for Hessians and gradient covariances.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double trace() const { return xx + yy; }
  double min_eigenvalue() const {
    const double half_gap = std::hypot(0.5 * (xx - yy), xy);
    return 0.5 * (xx + yy) - half_gap;
  }
  double max_eigenvalue() const {
    const double half_gap = std::hypot(0.5 * (xx - yy), xy);
    return 0.5 * (xx + yy) + half_gap;
  }
};

inline double quadratic_form(const Sym2& m, Vec2 u) {
  return m.xx * u.x * u.x + 2.0 * m.xy * u.x * u.y + m.yy * u.y * u.y;
}

}  // namespace nodal
