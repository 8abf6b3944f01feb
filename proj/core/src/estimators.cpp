#include "nodal/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "nodal/arithmetic.hpp"
#include "nodal/error.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/parallel.hpp"

namespace nodal {

namespace {

using ojson = nlohmann::ordered_json;

bool on_lattice(double offset, double h) {
  const double q = offset / h;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double default_spacing(const SpectralMeasure& rho) {
  double r = 0.0;
  for (const Atom& a : rho.atoms()) r = std::max(r, norm(a.xi));
  const double kmax = rho.kappa() * r;
  return kTwoPi / (kmax > 0.0 ? kmax : rho.kappa()) / 16.0;
}

std::vector<std::vector<std::size_t>> sample_counts(const SpectralMeasure& rho, const std::vector<double>& radii,
                                                    std::size_t M, double h, std::uint64_t seed) {
  if (radii.empty()) throw Error(ErrorCode::ScheduleTooShort, "no radii given");
  for (double R : radii) {
    if (!(R > 0.0)) throw Error(ErrorCode::InvalidParameter, "radii must be positive");
  }
  if (h <= 0.0) h = default_spacing(rho);
  const double rmax = *std::max_element(radii.begin(), radii.end());
  bool crop = true;
  for (double R : radii) crop = crop && on_lattice(rmax - R, h);
  std::vector<std::vector<std::size_t>> counts(radii.size(), std::vector<std::size_t>(M, 0));
  parallel_for(M, [&](std::size_t k) {
    const FieldSample s = sample(rho, StreamId{seed, k});
    if (crop) {
      const ScalarGrid g = evaluate_grid(s, Domain::square(rmax), h);
      for (std::size_t r = 0; r < radii.size(); ++r) {
        counts[r][k] = count_components_plane(radii[r] == rmax ? g : g.crop(radii[r])).interior_components;
      }
    } else {
      for (std::size_t r = 0; r < radii.size(); ++r) {
        counts[r][k] = count_components_plane(evaluate_grid(s, Domain::square(radii[r]), h)).interior_components;
      }
    }
  });
  return counts;
}

CountEstimate estimate_mean_count(const SpectralMeasure& rho, double R, std::size_t M, double h, std::uint64_t seed) {
  if (M < 10) throw Error(ErrorCode::InvalidParameter, "need at least 10 samples");
  if (!(R >= 1.0)) throw Error(ErrorCode::InvalidParameter, "R must be at least 1");
  if (h <= 0.0) h = default_spacing(rho);
  const auto counts = sample_counts(rho, {R}, M, h, seed);
  std::vector<double> xs(counts[0].begin(), counts[0].end());
  const MeanStderr m = mean_stderr(xs);
  CountEstimate e{R, m.mean, m.se, M, h, false};
  e.grid_too_coarse = h > default_spacing(rho) * 16.0 / 12.0 * (1.0 + 1e-12);
  return e;
}

CnsFit fit_cns(const std::vector<double>& radii, const std::vector<double>& means, const std::vector<double>& ses) {
  const std::size_t n = radii.size();
  if (n < 2 || means.size() != n || ses.size() != n) {
    throw Error(ErrorCode::ScheduleTooShort, "fit needs at least two radii with matching means and errors");
  }
  CnsFit fit;
  fit.weighted = std::all_of(ses.begin(), ses.end(), [](double s) { return s > 0.0; });
  std::vector<double> x(n), y(n), sy(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double area = 4.0 * radii[i] * radii[i];
    x[i] = 1.0 / radii[i];
    y[i] = means[i] / area;
    sy[i] = ses[i] / area;
    w[i] = fit.weighted ? 1.0 / (sy[i] * sy[i]) : 1.0;
  }
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s0 += w[i];
    s1 += w[i] * x[i];
    s2 += w[i] * x[i] * x[i];
    t0 += w[i] * y[i];
    t1 += w[i] * x[i] * y[i];
  }
  const double det = s0 * s2 - s1 * s1;
  if (!(std::abs(det) > 0.0)) throw Error(ErrorCode::ScheduleTooShort, "radii must be distinct");
  const double i00 = s2 / det, i01 = -s1 / det, i11 = s0 / det;
  fit.c = i00 * t0 + i01 * t1;
  fit.b = i01 * t0 + i11 * t1;
  fit.c_weights.resize(n);
  double var_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.c_weights[i] = w[i] * (i00 + i01 * x[i]);
    var_c += fit.c_weights[i] * fit.c_weights[i] * sy[i] * sy[i];
    const double r = y[i] - fit.c - fit.b * x[i];
    fit.residuals.push_back(r);
    fit.chi2 += w[i] * r * r;
  }
  fit.c_se = std::sqrt(var_c);
  return fit;
}

EstimatorReport estimate_cns(const SpectralMeasure& rho, const std::vector<double>& schedule, std::size_t M,
                             std::uint64_t seed, double h) {
  if (schedule.size() < 3) throw Error(ErrorCode::ScheduleTooShort, "c_NS extrapolation needs at least 3 radii");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) throw Error(ErrorCode::InvalidParameter, "schedule must be increasing");
  }
  if (M < 10) throw Error(ErrorCode::InvalidParameter, "need at least 10 samples");
  const auto t0 = std::chrono::steady_clock::now();
  if (h <= 0.0) h = default_spacing(rho);
  EstimatorReport rep;
  rep.measure_json = to_json(rho);
  rep.measure_digest = measure_digest(rho);
  rep.schedule = schedule;
  rep.M = M;
  rep.h = h;
  rep.seed = seed;
  rep.counts = sample_counts(rho, schedule, M, h, seed);
  const bool coarse = h > default_spacing(rho) * 16.0 / 12.0 * (1.0 + 1e-12);
  std::vector<double> means, ses;
  for (std::size_t r = 0; r < schedule.size(); ++r) {
    const MeanStderr m = mean_stderr(std::vector<double>(rep.counts[r].begin(), rep.counts[r].end()));
    rep.per_radius.push_back({schedule[r], m.mean, m.se, M, h, coarse});
    means.push_back(m.mean);
    ses.push_back(m.se);
  }
  const CnsFit fit = fit_cns(schedule, means, ses);
  rep.cns_estimate = fit.c;
  rep.cns_slope = fit.b;
  rep.residuals = fit.residuals;
  rep.weighted_fit = fit.weighted;
  // per-sample values of the linear estimator carry the shared-sample correlation
  std::vector<double> ck(M, 0.0);
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t r = 0; r < schedule.size(); ++r) {
      ck[k] += fit.c_weights[r] * double(rep.counts[r][k]) / (4.0 * schedule[r] * schedule[r]);
    }
  }
  double se = mean_stderr(ck).se;
  const std::size_t dof = schedule.size() - 2;
  if (fit.weighted && dof > 0) se *= std::sqrt(std::max(1.0, fit.chi2 / double(dof)));
  rep.cns_stderr = se;

  const double rmax = schedule.back();
  std::vector<double> dev;
  for (std::size_t k = 0; k < M; ++k) dev.push_back(std::abs(double(rep.counts.back()[k]) / (4.0 * rmax * rmax) - fit.c));
  const MeanStderr d = mean_stderr(dev);
  rep.dns_estimate = d.mean;
  rep.dns_stderr = d.se;
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

MeanStderr estimate_dns(const SpectralMeasure& rho, double R, std::size_t M, std::uint64_t seed, double cns, double h) {
  const auto counts = sample_counts(rho, {R}, M, h, seed);
  std::vector<double> dev;
  for (std::size_t c : counts[0]) dev.push_back(std::abs(double(c) / (4.0 * R * R) - cns));
  return mean_stderr(dev);
}

TorusReport torus_count_report(std::int64_t n, std::size_t M, double h, std::uint64_t seed) {
  if (M < 1) throw Error(ErrorCode::InvalidParameter, "need at least one sample");
  TorusReport rep;
  rep.n = n;
  rep.r2 = mu_n(n).atoms().size();
  rep.M = M;
  rep.seed = seed;
  if (h <= 0.0) h = default_spacing(sample_torus_wave(n, StreamId{seed, 0}));
  std::vector<double> total(M), contractible(M), wrapping(M);
  std::vector<double> grid_h(M);
  parallel_for(M, [&](std::size_t k) {
    const ScalarGrid g = evaluate_grid(sample_torus_wave(n, StreamId{seed, k}), Domain::torus(), h);
    const NodalCensus c = count_components_torus(g);
    total[k] = double(c.total_components());
    contractible[k] = double(c.interior_components);
    wrapping[k] = double(c.wrapping_components);
    grid_h[k] = g.h;
  });
  rep.h = grid_h[0];
  const MeanStderr t = mean_stderr(total);
  rep.mean_total = t.mean;
  rep.se_total = t.se;
  rep.mean_contractible = mean_stderr(contractible).mean;
  rep.mean_wrapping = mean_stderr(wrapping).mean;
  return rep;
}

void attach_cns(TorusReport& report, double cns, double cns_se) {
  const double n = double(report.n), root = std::sqrt(n);
  report.has_cns = true;
  report.cns = cns;
  report.cns_se = cns_se;
  report.residual = (report.mean_total - cns * n) / root;
  report.residual_se = std::hypot(report.se_total, n * cns_se) / root;
}

ContinuityReport continuity_experiment(const std::vector<SpectralMeasure>& path, const std::vector<double>& schedule,
                                       std::size_t M, std::uint64_t seed, double h) {
  if (path.size() < 3) throw Error(ErrorCode::InvalidParameter, "path needs at least 3 measures");
  if (schedule.size() != 1 && schedule.size() < 3) {
    throw Error(ErrorCode::ScheduleTooShort, "use one radius (plug-in) or at least three (extrapolation)");
  }
  ContinuityReport rep;
  for (const SpectralMeasure& rho : path) {
    ContinuityRow row;
    row.distance_to_end = weak_star_distance(rho, path.back());
    if (schedule.size() == 1) {
      const double R = schedule[0];
      const CountEstimate e = estimate_mean_count(rho, R, M, h, seed);
      row.cns = e.mean / (4.0 * R * R);
      row.cns_se = e.se / (4.0 * R * R);
    } else {
      const EstimatorReport e = estimate_cns(rho, schedule, M, seed, h);
      row.cns = e.cns_estimate;
      row.cns_se = e.cns_stderr;
    }
    rep.rows.push_back(row);
  }
  for (std::size_t j = path.size() / 2; j < path.size(); ++j) {
    rep.tail_spread = std::max(rep.tail_spread, std::abs(rep.rows[j].cns - rep.rows.back().cns));
  }
  return rep;
}

SmallDomainReport small_domain_report(const SpectralMeasure& rho, double R, std::size_t M,
                                      const std::vector<double>& deltas, std::uint64_t seed, double h) {
  if (gradient_covariance(rho).degenerate(1e-12)) {
    throw Error(ErrorCode::DegenerateMeasure, "small-domain bounds need a nondegenerate measure");
  }
  if (M < 1 || deltas.empty()) throw Error(ErrorCode::InvalidParameter, "need samples and thresholds");
  if (h <= 0.0) h = default_spacing(rho);
  std::vector<std::vector<double>> per(deltas.size(), std::vector<double>(M, 0.0));
  parallel_for(M, [&](std::size_t k) {
    const NodalCensus c = count_components_plane(evaluate_grid(sample(rho, StreamId{seed, k}), Domain::square(R), h));
    for (std::size_t d = 0; d < deltas.size(); ++d) per[d][k] = double(c.small_domains(deltas[d])) / (R * R);
  });
  SmallDomainReport rep;
  rep.R = R;
  rep.M = M;
  std::vector<double> lx, ly;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    const MeanStderr m = mean_stderr(per[d]);
    rep.rows.push_back({deltas[d], m.mean, m.se});
    if (m.mean > 0.0 && std::isfinite(deltas[d]) && deltas[d] > 0.0) {
      lx.push_back(std::log(deltas[d]));
      ly.push_back(std::log(m.mean));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= double(lx.size());
    my /= double(lx.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx > 0.0) rep.log_slope = sxy / sxx;
  }
  return rep;
}

std::string report_to_json(const EstimatorReport& r) {
  ojson j;
  j["measure"] = ojson::parse(r.measure_json);
  j["measure_digest"] = r.measure_digest;
  j["schedule"] = r.schedule;
  j["M"] = r.M;
  j["h"] = r.h;
  j["seed"] = r.seed;
  j["per_radius"] = ojson::array();
  for (const CountEstimate& e : r.per_radius) {
    j["per_radius"].push_back(
        {{"R", e.R}, {"mean", e.mean}, {"stderr", e.se}, {"M", e.M}, {"h", e.h}, {"grid_too_coarse", e.grid_too_coarse}});
  }
  j["cns_estimate"] = r.cns_estimate;
  j["cns_stderr"] = r.cns_stderr;
  j["cns_slope"] = r.cns_slope;
  j["weighted_fit"] = r.weighted_fit;
  j["residuals"] = r.residuals;
  j["dns_estimate"] = r.dns_estimate;
  j["dns_stderr"] = r.dns_stderr;
  return j.dump(2);
}

std::string report_to_csv(const EstimatorReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# measure_digest=" << r.measure_digest << " seed=" << r.seed << " M=" << r.M << " h=" << r.h
      << " cns_estimate=" << r.cns_estimate << " cns_stderr=" << r.cns_stderr << " dns_estimate=" << r.dns_estimate
      << "\n";
  out << "R,mean,stderr,M,h,grid_too_coarse\n";
  for (const CountEstimate& e : r.per_radius) {
    out << e.R << ',' << e.mean << ',' << e.se << ',' << e.M << ',' << e.h << ',' << (e.grid_too_coarse ? 1 : 0)
        << "\n";
  }
  return out.str();
}

std::string torus_to_json(const TorusReport& r) {
  ojson j;
  j["n"] = r.n;
  j["r2"] = r.r2;
  j["M"] = r.M;
  j["h"] = r.h;
  j["seed"] = r.seed;
  j["mean_total"] = r.mean_total;
  j["stderr_total"] = r.se_total;
  j["mean_contractible"] = r.mean_contractible;
  j["mean_wrapping"] = r.mean_wrapping;
  if (r.has_cns) {
    j["cns"] = r.cns;
    j["cns_stderr"] = r.cns_se;
    j["residual"] = r.residual;
    j["residual_stderr"] = r.residual_se;
  }
  return j.dump(2);
}

std::string continuity_to_json(const ContinuityReport& r) {
  ojson j;
  j["rows"] = ojson::array();
  for (const ContinuityRow& row : r.rows) {
    j["rows"].push_back({{"distance_to_end", row.distance_to_end}, {"cns", row.cns}, {"cns_stderr", row.cns_se}});
  }
  j["tail_spread"] = r.tail_spread;
  return j.dump(2);
}

std::string small_domains_to_json(const SmallDomainReport& r) {
  ojson j;
  j["R"] = r.R;
  j["M"] = r.M;
  j["rows"] = ojson::array();
  for (const SmallDomainRow& row : r.rows) {
    ojson e;
    e["delta"] = std::isfinite(row.delta) ? ojson(row.delta) : ojson("inf");
    e["mean_per_area"] = row.mean_per_area;
    e["stderr"] = row.se;
    j["rows"].push_back(e);
  }
  j["log_slope"] = r.log_slope;
  return j.dump(2);
}

}  // namespace nodal
