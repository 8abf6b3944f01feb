#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nodal/geometry.hpp"
#include "nodal/rng.hpp"
#include "nodal/spectral_measure.hpp"

namespace nodal {

// One plane wave  c cos(<k,x>) + s sin(<k,x>).
struct Wave {
  Vec2 k;
  double c = 0.0;
  double s = 0.0;
};

// One antipodal pair of the measure with its drawn coefficients.
struct PairTerm {
  Vec2 xi;                 // representative atom
  double pair_weight = 0;  // 2 w
  double a = 0.0;
  double b = 0.0;
};

struct Jet {
  double f = 0.0;
  Vec2 grad;
  Sym2 hess;
};

// A realization of f_rho as a finite trigonometric sum.  Immutable.
class FieldSample {
 public:
  // Raw trigonometric polynomial; `kappa` only labels reports.
  static FieldSample from_waves(std::vector<Wave> waves, double constant = 0.0, double kappa = kKappaOne);
  // Coefficient injection: one (a, b) per antipodal pair in representative order.
  static FieldSample inject(const SpectralMeasure& rho, const std::vector<std::pair<double, double>>& coeffs,
                            double origin_coeff = 0.0);

  const std::vector<Wave>& waves() const { return waves_; }
  const std::vector<PairTerm>& pairs() const { return pairs_; }
  double constant() const { return constant_; }
  std::optional<double> origin_coeff() const { return origin_coeff_; }
  double kappa() const { return kappa_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t sample_index() const { return sample_index_; }
  double max_wavenumber() const;

  // x -> f(s x): every wave vector scaled by s.
  FieldSample rescaled(double s) const;
  // Replace wave vectors (same count and order), keeping coefficients.
  FieldSample with_wave_vectors(const std::vector<Vec2>& ks) const;
  // f + other as one polynomial.
  FieldSample plus(const FieldSample& other, double factor = 1.0) const;

 private:
  friend FieldSample sample(const SpectralMeasure&, StreamId);
  static FieldSample build(const SpectralMeasure& rho, const std::vector<std::pair<double, double>>& coeffs,
                           double origin_coeff, StreamId stream);

  std::vector<Wave> waves_;
  std::vector<PairTerm> pairs_;
  double constant_ = 0.0;
  std::optional<double> origin_coeff_;
  double kappa_ = kKappaOne;
  std::uint64_t seed_ = 0;
  std::uint64_t sample_index_ = 0;
};

// Indices of pair representatives (lexicographic max of {xi, -xi}) and of the
// origin atom, in atom order.
struct PairSplit {
  std::vector<std::size_t> representatives;
  std::optional<std::size_t> origin;
};
PairSplit split_pairs(const SpectralMeasure& rho);

// Coefficients for pair p come from normal_pair(stream, p); the origin
// coefficient from normal_pair(stream, pair count).first.
FieldSample sample(const SpectralMeasure& rho, StreamId stream);
inline FieldSample sample(const SpectralMeasure& rho, std::uint64_t seed) { return sample(rho, StreamId{seed, 0}); }

Jet evaluate(const FieldSample& s, Vec2 x, int order = 2);
double evaluate_value(const FieldSample& s, Vec2 x);

// Square [cx-R, cx+R] x [cy-R, cy+R] or the torus fundamental domain [0,1)^2.
struct Domain {
  enum class Kind { Square, Torus };
  Kind kind = Kind::Square;
  Vec2 center;
  double half_side = 1.0;

  static Domain square(double R, Vec2 center = {}) { return {Kind::Square, center, R}; }
  static Domain torus() { return {Kind::Torus, {0.5, 0.5}, 0.5}; }
  bool is_torus() const { return kind == Kind::Torus; }
  double area() const { return 4.0 * half_side * half_side; }
  bool contains(Vec2 p, double tol = 0.0) const;
};

struct ScalarGrid {
  Domain domain;
  double h = 0.0;
  std::size_t nx = 0, ny = 0;
  Vec2 origin;
  int order = 0;
  // Row-major, index j * nx + i with node (origin.x + i h, origin.y + j h).
  std::vector<double> f, fx, fy, fxx, fxy, fyy;
  std::uint64_t seed = 0;
  double kappa = kKappaOne;
  bool too_coarse = false;

  double at(std::size_t i, std::size_t j) const { return f[j * nx + i]; }
  Vec2 node(std::size_t i, std::size_t j) const {
    return {origin.x + static_cast<double>(i) * h, origin.y + static_cast<double>(j) * h};
  }
  bool periodic() const { return domain.is_torus(); }
  // Index window [i0, i0+w) x [j0, j0+hgt) as a square grid.
  ScalarGrid window(std::size_t i0, std::size_t j0, std::size_t w, std::size_t hgt) const;
  // Centered square of half-side R; R must sit on the lattice.
  ScalarGrid crop(double R) const;
};

// 16 points per shortest wavelength 2 pi / max|k|.
double default_spacing(const FieldSample& s);
// Coarse means fewer than 12 points per shortest wavelength.
bool grid_too_coarse(const FieldSample& s, double h);

std::size_t square_grid_dim(double R, double h);
// Values of an arbitrary function on the lattice of `domain` (order 0).
ScalarGrid tabulate(const std::function<double(Vec2)>& fn, const Domain& domain, double h);
ScalarGrid evaluate_grid(const FieldSample& s, const Domain& domain, double h, int order = 0);

// The explicit Cilleruelo field f0 = (a1 cos(x1+eta1) + a2 cos(x2+eta2)) / sqrt 2.
struct CillerueloField {
  FieldSample field;
  double a1 = 0, a2 = 0, eta1 = 0, eta2 = 0;
};
CillerueloField cilleruelo_field(std::uint64_t seed, std::uint64_t sample_index = 0);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

// Empirical E[f(0) f(x)] over M samples with streams (seed, 0..M-1).
MeanStderr covariance_mc(const SpectralMeasure& rho, Vec2 x, std::size_t M, std::uint64_t seed);

// E[f(0) f(x)] read off the coefficient structure (coefficients i.i.d. N(0,1)).
double representation_covariance(const SpectralMeasure& rho, Vec2 x);

// CSV dump with a one-line header.
void write_grid_csv(const ScalarGrid& g, const std::string& path);

}  // namespace nodal
