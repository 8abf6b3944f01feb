#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nodal/geometry.hpp"

namespace nodal {

struct Atom {
  Vec2 xi;
  double weight = 0.0;
};

// Named frequency conventions.  `two_pi` matches r(x) = sum w e^{2 pi i <x,xi>},
// `one` matches the plain cos(<x,xi>) form used for explicit trigonometric
// fields.  Other positive multipliers are allowed for rescaled supports.
inline constexpr double kKappaTwoPi = kTwoPi;
inline constexpr double kKappaOne = 1.0;

struct Provenance {
  std::string name;
  std::map<std::string, double> params;
};

struct MakeOptions {
  bool auto_normalize = false;
  bool symmetrize = false;
};

// Gradient covariance C(rho) together with its smallest eigenvalue.
struct CovarianceMatrix {
  Sym2 matrix;
  double lambda_min = 0.0;

  bool degenerate(double eps) const { return lambda_min < eps; }
};

// Atomic probability measure on the closed unit disc, invariant under x -> -x.
// Immutable after construction.
class SpectralMeasure {
 public:
  static SpectralMeasure make_atomic(std::vector<Atom> atoms, double kappa = kKappaTwoPi,
                                     MakeOptions options = {});

  const std::vector<Atom>& atoms() const { return atoms_; }
  double kappa() const { return kappa_; }
  const std::optional<Provenance>& provenance() const { return provenance_; }
  bool torus_tag() const { return torus_tag_; }
  bool on_unit_circle() const { return on_circle_; }

  SpectralMeasure with_provenance(Provenance p) const;
  SpectralMeasure with_kappa(double kappa) const;

  // Index of the antipodal partner of every atom (self for an origin atom).
  const std::vector<std::size_t>& antipode() const { return antipode_; }

 private:
  SpectralMeasure() = default;

  std::vector<Atom> atoms_;
  std::vector<std::size_t> antipode_;
  double kappa_ = kKappaTwoPi;
  std::optional<Provenance> provenance_;
  bool torus_tag_ = false;
  bool on_circle_ = false;
};

// Preset names: cilleruelo, tilted_cilleruelo, uniform_circle, arc_nu_a,
// two_point, delta_zero, section7_three_pair, section7_monochromatic_six_point.
// Params: K (atom count), a (arc half-width), theta (two_point angle), kappa.
SpectralMeasure preset(const std::string& name, const std::map<std::string, double>& params = {});

// Short preset strings used by the CLI, e.g. "uniform:64", "arc:0.3927:128",
// "two_point:0", "cilleruelo".
SpectralMeasure parse_preset_string(const std::string& spec, std::optional<double> kappa = {});

double covariance(const SpectralMeasure& rho, Vec2 x);
CovarianceMatrix gradient_covariance(const SpectralMeasure& rho);
double moment(const SpectralMeasure& rho, int a, int b);
// Integral of <u, y>^power against rho.
double directional_moment(const SpectralMeasure& rho, Vec2 u, int power);
std::complex<double> fourier_coefficient(const SpectralMeasure& mu, int k);
SpectralMeasure convolve(const SpectralMeasure& mu1, const SpectralMeasure& mu2);

// Maximum discrepancy over the fixed test dictionary {cos, sin}(2 pi (a x1 + b x2)),
// |a|, |b| <= kWeakStarDegree.
inline constexpr int kWeakStarDegree = 3;
double weak_star_distance(const SpectralMeasure& rho1, const SpectralMeasure& rho2);

// Measure file format (JSON).
std::string to_json(const SpectralMeasure& rho);
SpectralMeasure measure_from_json(const std::string& text);
SpectralMeasure load_measure(const std::string& path);
void save_measure(const SpectralMeasure& rho, const std::string& path);
// FNV-1a 64-bit digest of the canonical JSON, as 16 hex digits.
std::string measure_digest(const SpectralMeasure& rho);

}  // namespace nodal
