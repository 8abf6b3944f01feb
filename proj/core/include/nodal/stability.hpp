#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "nodal/gaussian_field.hpp"
#include "nodal/spectral_measure.hpp"

namespace nodal {

struct StabilityProfile {
  Domain domain;
  double h = 0.0;
  // min over grid nodes of max(|f|, |grad f|)
  double min_max = 0.0;
  // min_max lowered by the values |f| at critical points of f inside the
  // domain and by local refinement around the smallest grid minima
  double refined_min_max = 0.0;
  Vec2 argmin;
  // max over grid nodes of |f| and all first and second partials
  double c2_norm = 0.0;
  std::size_t critical_points = 0;
};

StabilityProfile stability_profile(const FieldSample& s, const Domain& domain, double h);

// min max(|f|, |grad f|) > beta, judged on the refined value.
inline bool is_stable(const StabilityProfile& p, double beta) { return p.refined_min_max > beta; }

// Grid max of |f1 - f2| and of the differences of both first partials.
double c1_distance(const FieldSample& s1, const FieldSample& s2, const Domain& domain, double h);
double c1_distance(const ScalarGrid& g1, const ScalarGrid& g2);

// Realizations of f_rho0 and f_rhoj sharing Gaussian coefficients along a
// monotone angular transport plan between the antipodal pairs of the two
// measures.  Each plan segment carries one coefficient pair.
std::pair<FieldSample, FieldSample> coupled_sample(const SpectralMeasure& rho0, const SpectralMeasure& rhoj,
                                                   StreamId stream);

struct SandwichReport {
  double R = 0.0;
  double beta = 0.0;
  double h = 0.0;
  std::size_t draws = 0;
  std::size_t passed_stability = 0;
  std::size_t passed_closeness = 0;
  std::size_t filtered = 0;  // passed both filters
  std::size_t violations = 0;
  std::size_t violations_unfiltered = 0;
  double violation_rate() const { return filtered ? double(violations) / double(filtered) : 0.0; }
};

inline constexpr double kFilterOff = std::numeric_limits<double>::infinity();

// Checks N(f_j; R - 1) <= N(f_0; R) <= N(f_j; R + 1) over M coupled draws.
// A draw is filtered when f_0 is 2 beta stable on D_{R+1} and the C1 distance
// there is below beta; beta = kFilterOff admits every draw.  h = 0 picks the
// default spacing.
SandwichReport sandwich_check(const SpectralMeasure& rho0, const SpectralMeasure& rhoj, double R, std::size_t M,
                              double beta, std::uint64_t seed, double h = 0.0);

std::string stability_to_json(const StabilityProfile& p);
std::string sandwich_to_json(const SandwichReport& r);

// Explicit fields with kappa = 1:
//   f = sin x + 0.8 sin 3x + sin y
//   g = sin x + 0.8 sin 3x + 0.2 sin y
//   monochromatic_g = 2 cos x + cos y
enum class Section7Field { F, G, MonochromaticG };
Section7Field parse_section7_field(const std::string& name);
// eps perturbs the cos and sin coefficients of the three frequencies in
// order (x-frequency 1, x-frequency 3 or the diagonal, y-frequency 1).
FieldSample section7_field(Section7Field which, const std::array<double, 6>& eps = {});
// Underlying measures: the three antipodal pairs scaled into the unit disc
// (kappa = 3) or the six-point circle measure (kappa = 1).
SpectralMeasure section7_measure(Section7Field which);

}  // namespace nodal
