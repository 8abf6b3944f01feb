#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nodal/gaussian_field.hpp"

namespace nodal {

// Node values above -kTieEpsilon count as positive.
inline constexpr double kTieEpsilon = 1e-14;

inline bool positive_sign(double v) { return v > -kTieEpsilon; }

struct NodalCensus {
  Domain domain;
  double h = 0.0;
  std::uint64_t seed = 0;

  // Plane: bounded sign domains away from the boundary (one per compact
  // nodal component).  Torus: contractible zero-set components.
  std::size_t interior_components = 0;
  // Zero-set components reaching the square boundary (plane only).
  std::size_t boundary_components = 0;
  // Non-contractible zero-set components (torus only).
  std::size_t wrapping_components = 0;
  // Closed zero curves found by tracing crossing edges; equals
  // interior_components on a square grid.
  std::size_t closed_curves = 0;

  std::size_t total_domains = 0;
  std::size_t boundary_domains = 0;
  std::vector<double> interior_domain_areas;  // node count times h^2, sorted

  std::optional<std::size_t> s1_flips;
  std::optional<std::size_t> s2_flips;

  std::size_t small_domains(double delta) const;
  std::size_t total_components() const { return interior_components + wrapping_components; }
};

NodalCensus count_components_plane(const ScalarGrid& g);
NodalCensus count_components_torus(const ScalarGrid& g);
std::size_t count_small_domains(const ScalarGrid& g, double delta);

// Sign-domain labels for a square grid (node index -> label in [0, count)).
struct DomainLabels {
  std::vector<std::uint32_t> label;
  std::size_t count = 0;
};
DomainLabels label_sign_domains(const ScalarGrid& g);

// Saddle cells: the diagonal whose corner sign matches the cell mean is the
// connected one.  Shared by domain labeling, curve tracing and rendering.
bool saddle_joins_main_diagonal(double v00, double v10, double v11, double v01);

// Common zeros of f and <grad f, u> in the closed domain.  Candidates are cells
// of a grid with spacing min(h, shortest wavelength / 32) where f and <grad f, u>
// may both vanish; each is refined by damped Newton and roots are merged.

std::vector<Vec2> find_flips(const FieldSample& s, const Domain& domain, double h, Vec2 u);
std::size_t count_flips(const FieldSample& s, const Domain& domain, double h, int axis);

// Zeros of f on the closed segment [a, b], sampled at spacing h (0 picks a
// quarter of the default grid spacing) and refined by bisection.
std::vector<Vec2> find_curve_intersections(const FieldSample& s, Vec2 a, Vec2 b, double h = 0.0);
std::size_t count_curve_intersections(const FieldSample& s, Vec2 a, Vec2 b, double h = 0.0);

std::string census_to_json(const NodalCensus& c);

}  // namespace nodal
