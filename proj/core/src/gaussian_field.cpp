#include "nodal/gaussian_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "nodal/error.hpp"
#include "nodal/parallel.hpp"

namespace nodal {

namespace {

constexpr double kPairTol = 2e-12;
constexpr std::size_t kMaxGridNodes = 200'000'000;

bool is_representative(const std::vector<Atom>& atoms, std::size_t i, std::size_t j) {
  const Vec2 a = atoms[i].xi;
  const Vec2 b = atoms[j].xi;
  if (a.x - b.x > kPairTol) return true;
  if (b.x - a.x > kPairTol) return false;
  if (a.y != b.y) return a.y > b.y;
  return i > j;
}

}  // namespace

PairSplit split_pairs(const SpectralMeasure& rho) {
  PairSplit split;
  const auto& atoms = rho.atoms();
  const auto& anti = rho.antipode();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (anti[i] == i) {
      split.origin = i;
    } else if (is_representative(atoms, i, anti[i])) {
      split.representatives.push_back(i);
    }
  }
  return split;
}

FieldSample FieldSample::build(const SpectralMeasure& rho, const std::vector<std::pair<double, double>>& coeffs,
                               double origin_coeff, StreamId stream) {
  const PairSplit split = split_pairs(rho);
  if (coeffs.size() != split.representatives.size()) {
    throw Error(ErrorCode::InvalidParameter, "expected " + std::to_string(split.representatives.size()) +
                                                 " coefficient pairs, got " + std::to_string(coeffs.size()));
  }
  const auto& atoms = rho.atoms();
  FieldSample s;
  s.kappa_ = rho.kappa();
  s.seed_ = stream.seed;
  s.sample_index_ = stream.sample;
  for (std::size_t p = 0; p < split.representatives.size(); ++p) {
    const std::size_t i = split.representatives[p];
    const double w = 0.5 * (atoms[i].weight + atoms[rho.antipode()[i]].weight);
    const double amp = std::sqrt(2.0 * w);
    const auto [a, b] = coeffs[p];
    s.pairs_.push_back({atoms[i].xi, 2.0 * w, a, b});
    s.waves_.push_back({rho.kappa() * atoms[i].xi, amp * a, amp * b});
  }
  if (split.origin) {
    s.origin_coeff_ = origin_coeff;
    s.constant_ = std::sqrt(atoms[*split.origin].weight) * origin_coeff;
  }
  return s;
}

FieldSample FieldSample::from_waves(std::vector<Wave> waves, double constant, double kappa) {
  FieldSample s;
  s.waves_ = std::move(waves);
  s.constant_ = constant;
  s.kappa_ = kappa;
  return s;
}

FieldSample FieldSample::inject(const SpectralMeasure& rho, const std::vector<std::pair<double, double>>& coeffs,
                                double origin_coeff) {
  return build(rho, coeffs, origin_coeff, {});
}

double FieldSample::max_wavenumber() const {
  double m = 0.0;
  for (const Wave& w : waves_) m = std::max(m, norm(w.k));
  return m;
}

FieldSample FieldSample::rescaled(double factor) const {
  FieldSample s = *this;
  for (Wave& w : s.waves_) w.k = w.k * factor;
  return s;
}

FieldSample FieldSample::with_wave_vectors(const std::vector<Vec2>& ks) const {
  if (ks.size() != waves_.size()) throw Error(ErrorCode::InvalidParameter, "wave vector count mismatch");
  FieldSample s = *this;
  for (std::size_t i = 0; i < ks.size(); ++i) s.waves_[i].k = ks[i];
  return s;
}

FieldSample FieldSample::plus(const FieldSample& other, double factor) const {
  FieldSample s = *this;
  for (const Wave& w : other.waves_) s.waves_.push_back({w.k, factor * w.c, factor * w.s});
  s.constant_ += factor * other.constant_;
  return s;
}

FieldSample sample(const SpectralMeasure& rho, StreamId stream) {
  const PairSplit split = split_pairs(rho);
  std::vector<std::pair<double, double>> coeffs;
  coeffs.reserve(split.representatives.size());
  for (std::size_t p = 0; p < split.representatives.size(); ++p) coeffs.push_back(normal_pair(stream, p));
  const double origin = split.origin ? normal_pair(stream, split.representatives.size()).first : 0.0;
  return FieldSample::build(rho, coeffs, origin, stream);
}

// Separable form per wave: with U = c cx + s sx, V = s cx - c sx,
// the term is T = cy U + sy V and both first partials are k_i (cy V - sy U).
// evaluate_grid uses exactly the same operation order.
Jet evaluate(const FieldSample& s, Vec2 x, int order) {
  Jet jet;
  jet.f = s.constant();
  for (const Wave& w : s.waves()) {
    const double ax = w.k.x * x.x;
    const double ay = w.k.y * x.y;
    const double cx = std::cos(ax), sx = std::sin(ax);
    const double cy = std::cos(ay), sy = std::sin(ay);
    const double u = w.c * cx + w.s * sx;
    const double v = w.s * cx - w.c * sx;
    const double t = cy * u + sy * v;
    jet.f += t;
    if (order >= 1) {
      const double q = cy * v - sy * u;
      jet.grad.x += w.k.x * q;
      jet.grad.y += w.k.y * q;
    }
    if (order >= 2) {
      jet.hess.xx -= (w.k.x * w.k.x) * t;
      jet.hess.xy -= (w.k.x * w.k.y) * t;
      jet.hess.yy -= (w.k.y * w.k.y) * t;
    }
  }
  return jet;
}

double evaluate_value(const FieldSample& s, Vec2 x) { return evaluate(s, x, 0).f; }

bool Domain::contains(Vec2 p, double tol) const {
  if (is_torus()) return true;
  return std::abs(p.x - center.x) <= half_side + tol && std::abs(p.y - center.y) <= half_side + tol;
}

std::size_t square_grid_dim(double R, double h) {
  if (!(R > 0.0) || !(h > 0.0)) throw Error(ErrorCode::InvalidParameter, "R and h must be positive");
  return static_cast<std::size_t>(std::floor(2.0 * R / h + 1e-9)) + 1;
}

double default_spacing(const FieldSample& s) {
  const double kmax = s.max_wavenumber();
  const double k = kmax > 0.0 ? kmax : s.kappa();
  return kTwoPi / k / 16.0;
}

bool grid_too_coarse(const FieldSample& s, double h) {
  const double kmax = s.max_wavenumber();
  return kmax > 0.0 && h > kTwoPi / kmax / 12.0 * (1.0 + 1e-12);
}

ScalarGrid evaluate_grid(const FieldSample& s, const Domain& domain, double h, int order) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid spacing must be positive");
  if (order < 0 || order > 2) throw Error(ErrorCode::InvalidParameter, "order must be 0, 1 or 2");
  ScalarGrid g;
  g.domain = domain;
  g.order = order;
  g.seed = s.seed();
  g.kappa = s.kappa();
  if (domain.is_torus()) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / h)));
    g.h = 1.0 / static_cast<double>(n);
    g.nx = g.ny = n;
    g.origin = {0.0, 0.0};
  } else {
    g.h = h;
    g.nx = g.ny = square_grid_dim(domain.half_side, h);
    g.origin = {domain.center.x - domain.half_side, domain.center.y - domain.half_side};
  }
  if (g.nx * g.ny > kMaxGridNodes) throw Error(ErrorCode::TooLarge, "grid has too many nodes");
  g.too_coarse = grid_too_coarse(s, g.h);

  const std::size_t nx = g.nx, ny = g.ny, total = nx * ny;
  g.f.assign(total, s.constant());
  if (order >= 1) {
    g.fx.assign(total, 0.0);
    g.fy.assign(total, 0.0);
  }
  if (order >= 2) {
    g.fxx.assign(total, 0.0);
    g.fxy.assign(total, 0.0);
    g.fyy.assign(total, 0.0);
  }

  const auto& waves = s.waves();
  const std::size_t nw = waves.size();
  std::vector<double> us(nw * nx), vs(nw * nx);
  for (std::size_t w = 0; w < nw; ++w) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double ax = waves[w].k.x * (g.origin.x + static_cast<double>(i) * g.h);
      const double cx = std::cos(ax), sx = std::sin(ax);
      us[w * nx + i] = waves[w].c * cx + waves[w].s * sx;
      vs[w * nx + i] = waves[w].s * cx - waves[w].c * sx;
    }
  }

  parallel_for(ny, [&](std::size_t j) {
    const double y = g.origin.y + static_cast<double>(j) * g.h;
    double* f = g.f.data() + j * nx;
    for (std::size_t w = 0; w < nw; ++w) {
      const Wave& wave = waves[w];
      const double ay = wave.k.y * y;
      const double cy = std::cos(ay), sy = std::sin(ay);
      const double* u = us.data() + w * nx;
      const double* v = vs.data() + w * nx;
      if (order == 0) {
        for (std::size_t i = 0; i < nx; ++i) f[i] += cy * u[i] + sy * v[i];
        continue;
      }
      double* fx = g.fx.data() + j * nx;
      double* fy = g.fy.data() + j * nx;
      const double kxx = wave.k.x * wave.k.x, kxy = wave.k.x * wave.k.y, kyy = wave.k.y * wave.k.y;
      for (std::size_t i = 0; i < nx; ++i) {
        const double t = cy * u[i] + sy * v[i];
        const double q = cy * v[i] - sy * u[i];
        f[i] += t;
        fx[i] += wave.k.x * q;
        fy[i] += wave.k.y * q;
        if (order >= 2) {
          g.fxx[j * nx + i] -= kxx * t;
          g.fxy[j * nx + i] -= kxy * t;
          g.fyy[j * nx + i] -= kyy * t;
        }
      }
    }
  });
  return g;
}

ScalarGrid tabulate(const std::function<double(Vec2)>& fn, const Domain& domain, double h) {
  // Zero-wave sample gives the lattice layout; values are then overwritten.
  ScalarGrid g = evaluate_grid(FieldSample::from_waves({}), domain, h, 0);
  g.too_coarse = false;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) g.f[j * g.nx + i] = fn(g.node(i, j));
  }
  return g;
}

ScalarGrid ScalarGrid::window(std::size_t i0, std::size_t j0, std::size_t w, std::size_t hgt) const {
  if (w == 0 || hgt == 0 || i0 + w > nx || j0 + hgt > ny) {
    throw Error(ErrorCode::InvalidParameter, "grid window out of range");
  }
  ScalarGrid out;
  out.h = h;
  out.nx = w;
  out.ny = hgt;
  out.order = order;
  out.seed = seed;
  out.kappa = kappa;
  out.too_coarse = too_coarse;
  out.origin = node(i0, j0);
  const double half = 0.5 * static_cast<double>(w - 1) * h;
  out.domain = Domain::square(half, {out.origin.x + half, out.origin.y + 0.5 * static_cast<double>(hgt - 1) * h});
  auto copy = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (src.empty()) return;
    dst.resize(w * hgt);
    for (std::size_t j = 0; j < hgt; ++j) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>((j0 + j) * nx + i0), w,
                  dst.begin() + static_cast<std::ptrdiff_t>(j * w));
    }
  };
  copy(f, out.f);
  copy(fx, out.fx);
  copy(fy, out.fy);
  copy(fxx, out.fxx);
  copy(fxy, out.fxy);
  copy(fyy, out.fyy);
  return out;
}

ScalarGrid ScalarGrid::crop(double R) const {
  if (domain.is_torus()) throw Error(ErrorCode::DomainMismatch, "cannot crop a torus grid");
  const std::size_t m = square_grid_dim(R, h);
  if (m > nx || m > ny || (nx - m) % 2 != 0 || (ny - m) % 2 != 0) {
    throw Error(ErrorCode::InvalidParameter, "crop radius does not sit on the grid lattice");
  }
  ScalarGrid out = window((nx - m) / 2, (ny - m) / 2, m, m);
  out.domain = Domain::square(R, domain.center);
  return out;
}

CillerueloField cilleruelo_field(std::uint64_t seed, std::uint64_t sample_index) {
  static const SpectralMeasure nu0 = preset("cilleruelo", {{"kappa", kKappaOne}});
  CillerueloField out{sample(nu0, StreamId{seed, sample_index})};
  for (const PairTerm& p : out.field.pairs()) {
    const double amplitude = std::hypot(p.a, p.b);
    const double phase = std::atan2(-p.b, p.a);
    if (std::abs(p.xi.x) > 0.5) {
      out.a1 = amplitude;
      out.eta1 = phase;
    } else {
      out.a2 = amplitude;
      out.eta2 = phase;
    }
  }
  return out;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return r;
}

MeanStderr covariance_mc(const SpectralMeasure& rho, Vec2 x, std::size_t M, std::uint64_t seed) {
  if (M < 100) throw Error(ErrorCode::InvalidParameter, "covariance_mc needs M >= 100");
  std::vector<double> products(M);
  parallel_for(M, [&](std::size_t i) {
    const FieldSample s = sample(rho, StreamId{seed, i});
    products[i] = evaluate_value(s, {0.0, 0.0}) * evaluate_value(s, x);
  });
  return mean_stderr(products);
}

double representation_covariance(const SpectralMeasure& rho, Vec2 x) {
  // Coefficients are i.i.d. N(0,1): E[a_p a_q] = delta_pq, E[a b] = 0, so
  // E[f(0) f(x)] = w0 + sum_p amp_p^2 (cos(0) cos(k x) + sin(0) sin(k x)).
  std::vector<std::pair<double, double>> unit;
  const PairSplit split = split_pairs(rho);
  unit.assign(split.representatives.size(), {1.0, 0.0});
  const FieldSample s = FieldSample::inject(rho, unit, 1.0);
  double r = s.constant() * s.constant();
  for (const Wave& w : s.waves()) r += w.c * w.c * std::cos(dot(w.k, x));
  return r;
}

void write_grid_csv(const ScalarGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write grid file " + path);
  out << std::setprecision(17);
  out << "# domain=" << (g.periodic() ? "torus" : "square");
  if (!g.periodic()) out << " R=" << g.domain.half_side;
  out << " h=" << g.h << " seed=" << g.seed << " kappa=" << g.kappa << " nx=" << g.nx << " ny=" << g.ny << '\n';
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (i) out << ',';
      out << g.at(i, j);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace nodal
