#include "nodal/spectral_measure.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "nodal/error.hpp"

namespace nodal {

namespace {

constexpr double kCoordTol = 1e-12;
constexpr double kWeightTol = 1e-12;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool lex_less(const Atom& a, const Atom& b) {
  if (a.xi.x != b.xi.x) return a.xi.x < b.xi.x;
  return a.xi.y < b.xi.y;
}

// Atoms sorted by x; returns the index of an atom within kCoordTol of p.
std::size_t find_atom(const std::vector<Atom>& sorted, Vec2 p) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), p.x - 4 * kCoordTol,
                             [](const Atom& a, double x) { return a.xi.x < x; });
  for (; it != sorted.end() && it->xi.x <= p.x + 4 * kCoordTol; ++it) {
    if (std::abs(it->xi.x - p.x) <= kCoordTol && std::abs(it->xi.y - p.y) <= kCoordTol)
      return static_cast<std::size_t>(it - sorted.begin());
  }
  return kNone;
}

std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
  std::stable_sort(atoms.begin(), atoms.end(), lex_less);
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const Atom& a : atoms) {
    bool found = false;
    for (auto it = merged.rbegin(); it != merged.rend() && it->xi.x >= a.xi.x - kCoordTol; ++it) {
      if (std::abs(it->xi.y - a.xi.y) <= kCoordTol) {
        it->weight += a.weight;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(a);
  }
  std::stable_sort(merged.begin(), merged.end(), lex_less);
  // canonical order: runs of atoms with x equal up to rounding are ordered by y
  for (std::size_t i = 0; i < merged.size();) {
    std::size_t j = i + 1;
    while (j < merged.size() && merged[j].xi.x - merged[j - 1].xi.x <= kCoordTol) ++j;
    std::stable_sort(merged.begin() + i, merged.begin() + j,
                     [](const Atom& a, const Atom& b) { return a.xi.y < b.xi.y; });
    i = j;
  }
  return merged;
}

bool has_symmetry(const std::vector<Atom>& atoms, Vec2 (*map)(Vec2)) {
  for (const Atom& a : atoms) {
    const std::size_t j = find_atom(atoms, map(a.xi));
    if (j == kNone || std::abs(atoms[j].weight - a.weight) > kWeightTol) return false;
  }
  return true;
}

// Snap coordinates that are within rounding of 0 or +-1.
double snap(double v) {
  if (std::abs(v) < 1e-14) return 0.0;
  if (std::abs(v - 1.0) < 1e-14) return 1.0;
  if (std::abs(v + 1.0) < 1e-14) return -1.0;
  return v;
}

Vec2 unit_at(double theta) {
  theta = std::remainder(theta, kTwoPi);
  return {snap(std::cos(theta)), snap(std::sin(theta))};
}

int as_count(const std::map<std::string, double>& params, const std::string& key, int fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw Error(ErrorCode::InvalidParameter, key + " must be a nonnegative integer");
  }
  return static_cast<int>(v);
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

SpectralMeasure SpectralMeasure::make_atomic(std::vector<Atom> atoms, double kappa, MakeOptions options) {
  if (atoms.empty()) throw Error(ErrorCode::InvalidParameter, "measure needs at least one atom");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::InvalidParameter, "kappa must be positive");
  }
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.weight) || a.weight < 0.0 || !std::isfinite(a.xi.x) || !std::isfinite(a.xi.y)) {
      throw Error(ErrorCode::InvalidParameter, "atom weights must be finite and nonnegative");
    }
    if (norm(a.xi) > 1.0 + kCoordTol) {
      throw Error(ErrorCode::SupportOutsideDisc, "atom outside the closed unit disc");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightTol) {
    if (!options.auto_normalize || !(total > 0.0)) {
      throw Error(ErrorCode::NotProbability, "weights sum to " + std::to_string(total));
    }
    for (Atom& a : atoms) a.weight /= total;
  }
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });

  std::vector<Atom> merged = merge_atoms(std::move(atoms));
  if (!has_symmetry(merged, [](Vec2 v) { return -v; })) {
    if (!options.symmetrize) throw Error(ErrorCode::NotPiInvariant, "measure is not invariant under x -> -x");
    std::vector<Atom> both;
    both.reserve(2 * merged.size());
    for (const Atom& a : merged) {
      both.push_back({a.xi, 0.5 * a.weight});
      both.push_back({-a.xi, 0.5 * a.weight});
    }
    merged = merge_atoms(std::move(both));
  }

  SpectralMeasure m;
  m.atoms_ = std::move(merged);
  m.kappa_ = kappa;
  m.antipode_.resize(m.atoms_.size());
  for (std::size_t i = 0; i < m.atoms_.size(); ++i) m.antipode_[i] = find_atom(m.atoms_, -m.atoms_[i].xi);
  m.on_circle_ = std::all_of(m.atoms_.begin(), m.atoms_.end(),
                             [](const Atom& a) { return std::abs(norm(a.xi) - 1.0) <= kCoordTol; });
  m.torus_tag_ = m.on_circle_ && has_symmetry(m.atoms_, [](Vec2 v) { return Vec2{-v.y, v.x}; }) &&
                 has_symmetry(m.atoms_, [](Vec2 v) { return Vec2{v.x, -v.y}; });
  return m;
}

SpectralMeasure SpectralMeasure::with_provenance(Provenance p) const {
  SpectralMeasure copy = *this;
  copy.provenance_ = std::move(p);
  return copy;
}

SpectralMeasure SpectralMeasure::with_kappa(double kappa) const {
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidParameter, "kappa must be positive");
  SpectralMeasure copy = *this;
  copy.kappa_ = kappa;
  return copy;
}

SpectralMeasure preset(const std::string& name, const std::map<std::string, double>& params) {
  std::vector<Atom> atoms;
  double kappa = param_or(params, "kappa", kKappaTwoPi);
  auto discretized_count = [&] {
    const int k = as_count(params, "K", 64);
    if (k < 4) throw Error(ErrorCode::InvalidParameter, "K must be at least 4");
    return k;
  };

  if (name == "cilleruelo") {
    for (int k = 0; k < 4; ++k) atoms.push_back({unit_at(k * kPi / 2.0), 0.25});
  } else if (name == "tilted_cilleruelo") {
    for (int k = 0; k < 4; ++k) atoms.push_back({unit_at(kPi / 4.0 + k * kPi / 2.0), 0.25});
  } else if (name == "uniform_circle") {
    const int count = discretized_count();
    if (count % 2 != 0) throw Error(ErrorCode::InvalidParameter, "uniform_circle needs an even K");
    for (int k = 0; k < count; ++k) atoms.push_back({unit_at(kTwoPi * k / count), 1.0 / count});
  } else if (name == "arc_nu_a") {
    const int count = discretized_count();
    if (count % 4 != 0) throw Error(ErrorCode::InvalidParameter, "arc_nu_a needs K divisible by 4");
    const double a = param_or(params, "a", kPi / 4.0);
    if (!(a >= 0.0 && a <= kPi / 4.0 + 1e-15)) {
      throw Error(ErrorCode::InvalidParameter, "arc half-width must lie in [0, pi/4]");
    }
    const int per_arc = count / 4;
    for (int q = 0; q < 4; ++q) {
      for (int j = 0; j < per_arc; ++j) {
        const double theta = q * kPi / 2.0 - a + (j + 0.5) * (2.0 * a / per_arc);
        atoms.push_back({unit_at(theta), 1.0 / count});
      }
    }
  } else if (name == "two_point") {
    const double theta = param_or(params, "theta", 0.0);
    atoms.push_back({unit_at(theta), 0.5});
    atoms.push_back({-unit_at(theta), 0.5});
  } else if (name == "delta_zero") {
    atoms.push_back({{0.0, 0.0}, 1.0});
  } else if (name == "section7_three_pair") {
    // Support {+-(1,0), +-(3,0), +-(0,1)} scaled by 1/3 into the disc; kappa = 3
    // restores the integer frequencies.
    kappa = param_or(params, "kappa", 3.0);
    const double third = 1.0 / 3.0;
    for (Vec2 v : {Vec2{third, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, third}}) {
      atoms.push_back({v, 1.0 / 6.0});
      atoms.push_back({-v, 1.0 / 6.0});
    }
  } else if (name == "section7_monochromatic_six_point") {
    kappa = param_or(params, "kappa", kKappaOne);
    const double s = 1.0 / std::sqrt(2.0);
    for (Vec2 v : {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{s, s}}) {
      atoms.push_back({v, 1.0 / 6.0});
      atoms.push_back({-v, 1.0 / 6.0});
    }
  } else {
    throw Error(ErrorCode::UnknownPreset, name);
  }
  return SpectralMeasure::make_atomic(std::move(atoms), kappa, {.auto_normalize = true})
      .with_provenance({name, params});
}

SpectralMeasure parse_preset_string(const std::string& spec, std::optional<double> kappa) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw Error(ErrorCode::UnknownPreset, spec);

  auto number = [&](std::size_t i) {
    if (i >= parts.size()) throw Error(ErrorCode::InvalidParameter, "missing parameter in '" + spec + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidParameter, "bad number '" + parts[i] + "' in '" + spec + "'");
    }
  };

  std::map<std::string, double> params;
  std::string name = parts[0];
  if (name == "uniform" || name == "uniform_circle") {
    name = "uniform_circle";
    params["K"] = parts.size() > 1 ? number(1) : 64;
  } else if (name == "arc" || name == "arc_nu_a") {
    name = "arc_nu_a";
    params["a"] = number(1);
    params["K"] = parts.size() > 2 ? number(2) : 128;
  } else if (name == "two_point") {
    params["theta"] = parts.size() > 1 ? number(1) : 0.0;
  } else if (name == "tilted" ) {
    name = "tilted_cilleruelo";
  } else if (name == "section7" || name == "three_pair") {
    name = "section7_three_pair";
  } else if (name == "six_point") {
    name = "section7_monochromatic_six_point";
  }
  if (kappa) params["kappa"] = *kappa;
  return preset(name, params);
}

double covariance(const SpectralMeasure& rho, Vec2 x) {
  double r = 0.0;
  for (const Atom& a : rho.atoms()) r += a.weight * std::cos(rho.kappa() * dot(x, a.xi));
  return r;
}

double moment(const SpectralMeasure& rho, int a, int b) {
  if (a < 0 || b < 0 || a + b > 4) throw Error(ErrorCode::InvalidParameter, "moment order must be <= 4");
  double m = 0.0;
  for (const Atom& at : rho.atoms()) m += at.weight * std::pow(at.xi.x, a) * std::pow(at.xi.y, b);
  return m;
}

double directional_moment(const SpectralMeasure& rho, Vec2 u, int power) {
  double m = 0.0;
  for (const Atom& at : rho.atoms()) m += at.weight * std::pow(dot(u, at.xi), power);
  return m;
}

CovarianceMatrix gradient_covariance(const SpectralMeasure& rho) {
  const double k2 = rho.kappa() * rho.kappa();
  CovarianceMatrix c;
  c.matrix = {k2 * moment(rho, 2, 0), k2 * moment(rho, 1, 1), k2 * moment(rho, 0, 2)};
  c.lambda_min = std::max(0.0, c.matrix.min_eigenvalue());
  return c;
}

std::complex<double> fourier_coefficient(const SpectralMeasure& mu, int k) {
  if (!mu.on_unit_circle()) throw Error(ErrorCode::NotOnCircle, "fourier_coefficient needs a measure on S^1");
  std::complex<double> sum = 0.0;
  for (const Atom& a : mu.atoms()) {
    const double theta = std::atan2(a.xi.y, a.xi.x);
    sum += a.weight * std::polar(1.0, -k * theta);
  }
  return sum;
}

SpectralMeasure convolve(const SpectralMeasure& mu1, const SpectralMeasure& mu2) {
  if (!mu1.on_unit_circle() || !mu2.on_unit_circle()) {
    throw Error(ErrorCode::NotOnCircle, "convolution is defined for measures on S^1");
  }
  if (mu1.kappa() != mu2.kappa()) throw Error(ErrorCode::InvalidParameter, "kappa mismatch in convolve");
  std::vector<Atom> atoms;
  atoms.reserve(mu1.atoms().size() * mu2.atoms().size());
  for (const Atom& a : mu1.atoms()) {
    const double ta = std::atan2(a.xi.y, a.xi.x);
    for (const Atom& b : mu2.atoms()) {
      atoms.push_back({unit_at(ta + std::atan2(b.xi.y, b.xi.x)), a.weight * b.weight});
    }
  }
  return SpectralMeasure::make_atomic(std::move(atoms), mu1.kappa(), {.auto_normalize = true});
}

double weak_star_distance(const SpectralMeasure& rho1, const SpectralMeasure& rho2) {
  double worst = 0.0;
  for (int a = -kWeakStarDegree; a <= kWeakStarDegree; ++a) {
    for (int b = -kWeakStarDegree; b <= kWeakStarDegree; ++b) {
      double c1 = 0.0, s1 = 0.0, c2 = 0.0, s2 = 0.0;
      for (const Atom& at : rho1.atoms()) {
        const double phase = kTwoPi * (a * at.xi.x + b * at.xi.y);
        c1 += at.weight * std::cos(phase);
        s1 += at.weight * std::sin(phase);
      }
      for (const Atom& at : rho2.atoms()) {
        const double phase = kTwoPi * (a * at.xi.x + b * at.xi.y);
        c2 += at.weight * std::cos(phase);
        s2 += at.weight * std::sin(phase);
      }
      worst = std::max({worst, std::abs(c1 - c2), std::abs(s1 - s2)});
    }
  }
  return worst;
}

// ---- measure files --------------------------------------------------------

std::string to_json(const SpectralMeasure& rho) {
  nlohmann::ordered_json j;
  j["kind"] = "atomic";
  if (rho.kappa() == kKappaTwoPi) {
    j["kappa"] = "two_pi";
  } else if (rho.kappa() == kKappaOne) {
    j["kappa"] = "one";
  } else {
    j["kappa"] = rho.kappa();
  }
  auto atoms = nlohmann::ordered_json::array();
  for (const Atom& a : rho.atoms()) atoms.push_back({{"x", a.xi.x}, {"y", a.xi.y}, {"w", a.weight}});
  j["atoms"] = std::move(atoms);
  if (rho.provenance()) {
    nlohmann::ordered_json p;
    p["name"] = rho.provenance()->name;
    p["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rho.provenance()->params) p["params"][k] = v;
    j["provenance"] = std::move(p);
  }
  return j.dump(2);
}

SpectralMeasure measure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParameter, std::string("measure JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "preset") {
      std::map<std::string, double> params;
      if (j.contains("params")) {
        for (const auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();
      }
      return preset(j.at("name").get<std::string>(), params);
    }
    if (kind != "atomic") throw Error(ErrorCode::InvalidParameter, "unknown measure kind '" + kind + "'");
    double kappa = kKappaTwoPi;
    if (j.contains("kappa")) {
      const auto& k = j.at("kappa");
      if (k.is_string()) {
        const std::string s = k.get<std::string>();
        if (s == "two_pi") {
          kappa = kKappaTwoPi;
        } else if (s == "one") {
          kappa = kKappaOne;
        } else {
          throw Error(ErrorCode::InvalidParameter, "kappa must be two_pi, one or a number");
        }
      } else {
        kappa = k.get<double>();
      }
    }
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      atoms.push_back({{a.at("x").get<double>(), a.at("y").get<double>()}, a.at("w").get<double>()});
    }
    SpectralMeasure m = SpectralMeasure::make_atomic(std::move(atoms), kappa);
    if (j.contains("provenance")) {
      Provenance p;
      p.name = j["provenance"].value("name", "");
      if (j["provenance"].contains("params")) {
        for (const auto& [k, v] : j["provenance"]["params"].items()) p.params[k] = v.get<double>();
      }
      m = m.with_provenance(std::move(p));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParameter, std::string("measure JSON: ") + e.what());
  }
}

SpectralMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open measure file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return measure_from_json(buf.str());
}

void save_measure(const SpectralMeasure& rho, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write measure file " + path);
  out << to_json(rho) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string measure_digest(const SpectralMeasure& rho) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_json(rho)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nodal
