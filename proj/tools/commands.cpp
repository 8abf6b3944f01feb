#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodal/arithmetic.hpp"
#include "nodal/error.hpp"
#include "nodal/estimators.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/parallel.hpp"
#include "nodal/stability.hpp"
#include "render.hpp"

#ifndef NODAL_VERSION
#define NODAL_VERSION "0.0.0"
#endif

namespace nodal::cli {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct MeasureSource {
  std::string preset;
  std::string file;
  double kappa = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--preset", preset, "preset string, e.g. uniform:64, arc:0.39:128, cilleruelo");
    app->add_option("--measure", file, "measure file (JSON)");
    app->add_option("--kappa", kappa, "frequency multiplier override")->check(CLI::PositiveNumber);
  }
  bool given() const { return !preset.empty() || !file.empty(); }
  SpectralMeasure resolve() const {
    if (preset.empty() == file.empty()) {
      throw Error(ErrorCode::InvalidParameter, "give exactly one of --preset and --measure");
    }
    std::optional<double> k;
    if (kappa > 0.0) k = kappa;
    if (!preset.empty()) return parse_preset_string(preset, k);
    const SpectralMeasure rho = load_measure(file);
    return k ? rho.with_kappa(*k) : rho;
  }
};

ojson envelope(const std::string& command) {
  ojson j;
  j["command"] = command;
  j["version"] = NODAL_VERSION;
  return j;
}

void merge(ojson& j, const std::string& report) {
  const ojson parsed = ojson::parse(report);
  for (const auto& [k, v] : parsed.items()) j[k] = v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path);
}

void emit(const ojson& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_text(path, j.dump(2) + "\n");
  }
}

void report_time(std::ostream& err, const std::string& command, Clock::time_point t0) {
  err << command << ": " << std::chrono::duration<double>(Clock::now() - t0).count() << " s on " << worker_count()
      << " workers\n";
}

ojson vec_json(Vec2 v) { return ojson::array({v.x, v.y}); }

struct Common {
  std::uint64_t seed = kDefaultSeed;
  double h = 0.0;
  std::string json_path;

  void add_to(CLI::App* app, bool with_h = true) {
    app->set_help_flag("--help", "print this help and exit");
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    if (with_h) app->add_option("--h", h, "grid spacing (default: 16 nodes per shortest wavelength)")
                    ->check(CLI::PositiveNumber);
    app->add_option("--json", json_path, "write the JSON report here instead of stdout");
  }
};

// portrait

struct PortraitArgs {
  MeasureSource measure;
  Common common;
  std::string section7;
  std::int64_t torus_n = 0;
  double R = 10.0;
  int size = 800;
  std::string prefix = "portrait";
  bool ppm = false;
};

void cmd_portrait(const PortraitArgs& a, std::ostream& out) {
  const int sources = int(a.measure.given()) + int(!a.section7.empty()) + int(a.torus_n > 0);
  if (sources != 1) throw Error(ErrorCode::InvalidParameter, "give exactly one of --preset, --measure, --section7, --torus-n");
  ojson j = envelope("portrait");
  FieldSample s = FieldSample::from_waves({});
  Domain domain = Domain::square(a.R);
  if (!a.section7.empty()) {
    s = section7_field(parse_section7_field(a.section7));
    j["source"] = {{"section7", a.section7}};
  } else if (a.torus_n > 0) {
    s = sample_torus_wave(a.torus_n, StreamId{a.common.seed, 0});
    domain = Domain::torus();
    j["source"] = {{"torus_n", a.torus_n}};
  } else {
    const SpectralMeasure rho = a.measure.resolve();
    s = sample(rho, StreamId{a.common.seed, 0});
    j["source"] = {{"measure_digest", measure_digest(rho)}, {"kappa", rho.kappa()}};
  }
  const double h = a.common.h > 0.0 ? a.common.h : default_spacing(s);
  const ScalarGrid g = evaluate_grid(s, domain, h);
  const auto lines = nodal_polylines(g);
  const PortraitStats st = portrait_stats(lines);
  const NodalCensus census = domain.is_torus() ? count_components_torus(g) : count_components_plane(g);

  ojson files = ojson::array();
  write_text(a.prefix + ".svg", render_svg(lines, g, a.size));
  files.push_back(a.prefix + ".svg");
  write_grid_csv(g, a.prefix + ".csv");
  files.push_back(a.prefix + ".csv");
  if (a.ppm) {
    write_text(a.prefix + ".ppm", render_ppm(g, a.size));
    files.push_back(a.prefix + ".ppm");
  }
  j["seed"] = a.common.seed;
  j["domain"] = domain.is_torus() ? ojson("torus") : ojson({{"R", a.R}});
  j["h"] = g.h;
  j["closed_loops"] = st.closed_loops;
  j["open_strands"] = st.open_strands;
  j["total_length"] = st.total_length;
  j["axis_alignment"] = st.axis_alignment;
  j["interior_components"] = census.interior_components;
  j["wrapping_components"] = census.wrapping_components;
  j["files"] = files;
  emit(j, a.common.json_path, out);
}

// cns

struct CnsArgs {
  MeasureSource measure;
  Common common;
  std::vector<double> schedule;
  std::size_t M = 200;
  std::string csv_path;
};

void cmd_cns(const CnsArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const SpectralMeasure rho = a.measure.resolve();
  const EstimatorReport rep = estimate_cns(rho, a.schedule, a.M, a.common.seed, a.common.h);
  ojson j = envelope("cns");
  merge(j, report_to_json(rep));
  emit(j, a.common.json_path, out);
  if (!a.csv_path.empty()) write_text(a.csv_path, report_to_csv(rep));
  report_time(err, "cns", t0);
}

// dns

struct DnsArgs {
  MeasureSource measure;
  Common common;
  double R = 0.0;
  std::size_t M = 200;
  std::optional<double> cns;
  std::vector<double> schedule;
};

void cmd_dns(const DnsArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const SpectralMeasure rho = a.measure.resolve();
  const double h = a.common.h > 0.0 ? a.common.h : default_spacing(rho);
  ojson j = envelope("dns");
  j["measure_digest"] = measure_digest(rho);
  j["R"] = a.R;
  j["M"] = a.M;
  j["h"] = h;
  j["seed"] = a.common.seed;
  double cns = 0.0;
  if (a.cns) {
    cns = *a.cns;
    j["cns_source"] = "given";
  } else {
    if (a.schedule.empty()) throw Error(ErrorCode::InvalidParameter, "give --cns or a --schedule to estimate it");
    const EstimatorReport rep = estimate_cns(rho, a.schedule, a.M, a.common.seed, h);
    cns = rep.cns_estimate;
    j["cns_source"] = "estimated";
    j["schedule"] = a.schedule;
    j["cns_stderr"] = rep.cns_stderr;
  }
  j["cns"] = cns;
  const MeanStderr d = estimate_dns(rho, a.R, a.M, a.common.seed, cns, h);
  j["dns_estimate"] = d.mean;
  j["dns_stderr"] = d.se;
  emit(j, a.common.json_path, out);
  report_time(err, "dns", t0);
}

// torus

struct TorusArgs {
  Common common;
  std::int64_t n = 0;
  std::size_t M = 100;
  std::optional<double> cns;
  double cns_se = 0.0;
  std::vector<double> cns_schedule;
  std::size_t cns_M = 100;
};

void cmd_torus(const TorusArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  TorusReport rep = torus_count_report(a.n, a.M, a.common.h, a.common.seed);
  ojson extra;
  if (a.cns) {
    attach_cns(rep, *a.cns, a.cns_se);
  } else if (!a.cns_schedule.empty()) {
    const EstimatorReport e = estimate_cns(mu_n(a.n), a.cns_schedule, a.cns_M, a.common.seed);
    attach_cns(rep, e.cns_estimate, e.cns_stderr);
    extra["cns_schedule"] = a.cns_schedule;
    extra["cns_M"] = a.cns_M;
  }
  ojson j = envelope("torus");
  merge(j, torus_to_json(rep));
  for (auto& [k, v] : extra.items()) j[k] = v;
  emit(j, a.common.json_path, out);
  report_time(err, "torus", t0);
}

// lattice

struct LatticeArgs {
  Common common;
  std::int64_t n = 0;
  bool no_measure = false;
};

void cmd_lattice(const LatticeArgs& a, std::ostream& out) {
  ojson j = envelope("lattice");
  merge(j, lattice_to_json(lattice_points(a.n), !a.no_measure));
  emit(j, a.common.json_path, out);
}

// flips

struct FlipsArgs {
  MeasureSource measure;
  Common common;
  int axis = 0;
  bool diagonal = false;
  std::vector<double> direction;
  std::size_t M = 0;
  double R = 10.0;
};

void cmd_flips(const FlipsArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const SpectralMeasure rho = a.measure.resolve();
  const int modes = int(a.axis != 0) + int(a.diagonal) + int(!a.direction.empty());
  if (modes > 1) throw Error(ErrorCode::InvalidParameter, "give at most one of --axis, --diagonal, --direction");
  Vec2 u{1.0, 0.0};
  if (a.axis == 2) u = {0.0, 1.0};
  if (a.diagonal) u = {1.0, 1.0};
  if (!a.direction.empty()) {
    if (a.direction.size() != 2) throw Error(ErrorCode::InvalidParameter, "--direction takes two numbers");
    u = {a.direction[0], a.direction[1]};
  }
  const FlipDensityDetail d = flip_density_detail(rho, u);
  ojson j = envelope("flips");
  j["measure_digest"] = measure_digest(rho);
  j["kappa"] = rho.kappa();
  j["u"] = vec_json(d.u);
  j["density"] = d.density;
  j["density_at_zero"] = d.density_at_zero;
  j["var_du"] = d.var_du;
  j["var_w1"] = d.var_w1;
  j["var_w2"] = d.var_w2;
  j["correlation"] = d.correlation;
  j["expected_abs_det"] = d.expected_abs_det;
  j["curve_intersection_density"] = curve_intersection_density(rho, u);
  if (a.M > 0) {
    const double h = a.common.h > 0.0 ? a.common.h : default_spacing(rho);
    std::vector<double> per_area(a.M);
    parallel_for(a.M, [&](std::size_t k) {
      const FieldSample s = sample(rho, StreamId{a.common.seed, k});
      per_area[k] = double(find_flips(s, Domain::square(a.R), h, u).size()) / (4.0 * a.R * a.R);
    });
    const MeanStderr m = mean_stderr(per_area);
    j["empirical"] = {{"M", a.M}, {"R", a.R}, {"h", h}, {"seed", a.common.seed}, {"density", m.mean},
                      {"stderr", m.se}};
  }
  emit(j, a.common.json_path, out);
  report_time(err, "flips", t0);
}

// stability

struct StabilityArgs {
  MeasureSource measure;
  Common common;
  std::string section7;
  double R = 10.0;
  std::optional<double> beta;
  std::string target;
  std::size_t M = 100;
  bool no_filter = false;
};

void cmd_stability(const StabilityArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  ojson j = envelope("stability");
  if (!a.target.empty()) {
    if (!a.section7.empty()) throw Error(ErrorCode::InvalidParameter, "--section7 has no sandwich mode");
    const SpectralMeasure rho0 = a.measure.resolve();
    MeasureSource t;
    t.preset = a.target;
    t.kappa = a.measure.kappa;
    const SpectralMeasure rhoj = t.resolve();
    const double beta = a.no_filter ? kFilterOff : a.beta.value_or(0.05);
    j["mode"] = "sandwich";
    j["measure_digest"] = measure_digest(rho0);
    j["target_digest"] = measure_digest(rhoj);
    j["seed"] = a.common.seed;
    j["M"] = a.M;
    merge(j, sandwich_to_json(sandwich_check(rho0, rhoj, a.R, a.M, beta, a.common.seed, a.common.h)));
  } else {
    FieldSample s = FieldSample::from_waves({});
    if (!a.section7.empty()) {
      if (a.measure.given()) throw Error(ErrorCode::InvalidParameter, "give either --section7 or a measure");
      s = section7_field(parse_section7_field(a.section7));
      j["source"] = {{"section7", a.section7}};
    } else {
      const SpectralMeasure rho = a.measure.resolve();
      s = sample(rho, StreamId{a.common.seed, 0});
      j["source"] = {{"measure_digest", measure_digest(rho)}, {"seed", a.common.seed}};
    }
    j["mode"] = "profile";
    const double h = a.common.h > 0.0 ? a.common.h : default_spacing(s);
    const StabilityProfile p = stability_profile(s, Domain::square(a.R), h);
    merge(j, stability_to_json(p));
    if (a.beta) {
      j["beta"] = *a.beta;
      j["stable"] = is_stable(p, *a.beta);
    }
  }
  emit(j, a.common.json_path, out);
  report_time(err, "stability", t0);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nodal component statistics of planar Gaussian fields", "nodal"};
  app.set_version_flag("--version", NODAL_VERSION);
  app.require_subcommand(1);
  // --h is the grid spacing
  app.set_help_flag("--help", "print this help and exit");

  PortraitArgs portrait;
  auto* p = app.add_subcommand("portrait", "render the zero set as SVG (and PPM) with a grid dump");
  portrait.measure.add_to(p);
  portrait.common.add_to(p);
  p->add_option("--section7", portrait.section7, "explicit field: f, g or monochromatic_g");
  p->add_option("--torus-n", portrait.torus_n, "toral eigenfunction f_n")->check(CLI::PositiveNumber);
  p->add_option("--R", portrait.R, "half side of the square")->check(CLI::PositiveNumber)->capture_default_str();
  p->add_option("--size", portrait.size, "image side in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  p->add_option("--out", portrait.prefix, "output path prefix")->capture_default_str();
  p->add_flag("--ppm", portrait.ppm, "also write a binary PPM raster");

  CnsArgs cns;
  auto* c = app.add_subcommand("cns", "estimate c_NS by extrapolation over a radius schedule");
  cns.measure.add_to(c);
  cns.common.add_to(c);
  c->add_option("--schedule", cns.schedule, "radii, comma separated")->delimiter(',')->required()
      ->check(CLI::PositiveNumber);
  c->add_option("--M", cns.M, "samples per radius")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--csv", cns.csv_path, "also write a CSV table");

  DnsArgs dns;
  auto* d = app.add_subcommand("dns", "estimate d_NS by the plug-in at one radius");
  dns.measure.add_to(d);
  dns.common.add_to(d);
  d->add_option("--R", dns.R, "half side of the square")->required()->check(CLI::PositiveNumber);
  d->add_option("--M", dns.M, "samples")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--cns", dns.cns, "value of c_NS to compare against");
  d->add_option("--schedule", dns.schedule, "estimate c_NS first over these radii")->delimiter(',')
      ->check(CLI::PositiveNumber);

  TorusArgs torus;
  auto* t = app.add_subcommand("torus", "nodal census of toral eigenfunctions f_n");
  torus.common.add_to(t);
  t->add_option("--n", torus.n, "eigenvalue index")->required()->check(CLI::PositiveNumber);
  t->add_option("--M", torus.M, "samples")->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--cns", torus.cns, "planar c_NS(mu_n) to compare against");
  t->add_option("--cns-stderr", torus.cns_se, "its standard error")->check(CLI::NonNegativeNumber);
  t->add_option("--cns-schedule", torus.cns_schedule, "estimate c_NS(mu_n) over these radii")->delimiter(',')
      ->check(CLI::PositiveNumber);
  t->add_option("--cns-M", torus.cns_M, "samples for that estimate")->check(CLI::PositiveNumber);

  LatticeArgs lattice;
  auto* l = app.add_subcommand("lattice", "lattice points on x^2 + y^2 = n, r2(n) and mu_n");
  lattice.common.add_to(l, false);
  l->add_option("--n", lattice.n, "radius squared")->required()->check(CLI::PositiveNumber);
  l->add_flag("--no-measure", lattice.no_measure, "omit mu_n");

  FlipsArgs flips;
  auto* f = app.add_subcommand("flips", "Kac-Rice flip density, optionally against sampled counts");
  flips.measure.add_to(f);
  flips.common.add_to(f);
  f->add_option("--axis", flips.axis, "1 or 2")->check(CLI::IsMember({1, 2}));
  f->add_flag("--diagonal", flips.diagonal, "direction (1, 1)");
  f->add_option("--direction", flips.direction, "direction x,y")->delimiter(',');
  f->add_option("--M", flips.M, "samples for the empirical count (0 skips it)");
  f->add_option("--R", flips.R, "half side of the square for the empirical count")->check(CLI::PositiveNumber)
      ->capture_default_str();

  StabilityArgs stab;
  auto* s = app.add_subcommand("stability", "stability profile of one sample, or the coupled sandwich check");
  stab.measure.add_to(s);
  stab.common.add_to(s);
  s->add_option("--section7", stab.section7, "explicit field: f, g or monochromatic_g");
  s->add_option("--R", stab.R, "half side of the square")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--beta", stab.beta, "stability threshold")->check(CLI::PositiveNumber);
  s->add_option("--target", stab.target, "second preset: run the sandwich check against it");
  s->add_option("--M", stab.M, "coupled draws")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_flag("--no-filter", stab.no_filter, "admit every draw");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*p) cmd_portrait(portrait, out);
    if (*c) cmd_cns(cns, out, err);
    if (*d) cmd_dns(dns, out, err);
    if (*t) cmd_torus(torus, out, err);
    if (*l) cmd_lattice(lattice, out);
    if (*f) cmd_flips(flips, out, err);
    if (*s) cmd_stability(stab, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Io ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace nodal::cli
