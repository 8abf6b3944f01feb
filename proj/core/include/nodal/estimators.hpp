#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nodal/gaussian_field.hpp"
#include "nodal/spectral_measure.hpp"

namespace nodal {

// 16 nodes per shortest wavelength of the measure's support.
double default_spacing(const SpectralMeasure& rho);

struct CountEstimate {
  double R = 0.0;
  double mean = 0.0;
  double se = 0.0;
  std::size_t M = 0;
  double h = 0.0;
  bool grid_too_coarse = false;
};

// Mean and standard error of interior_components on D_R over samples
// (seed, 0..M-1).  h = 0 picks the default spacing.
CountEstimate estimate_mean_count(const SpectralMeasure& rho, double R, std::size_t M, double h, std::uint64_t seed);

// Interior component counts of samples (seed, 0..M-1) on every radius of the
// schedule, each sample cropped from one grid on the largest square when the
// radii share the lattice.  Result is indexed [radius][sample].
std::vector<std::vector<std::size_t>> sample_counts(const SpectralMeasure& rho, const std::vector<double>& radii,
                                                    std::size_t M, double h, std::uint64_t seed);

// Fit of mean / (4 R^2) = c + b / R.  Weighted by 1 / se^2 when every se is
// positive, ordinary least squares otherwise.
struct CnsFit {
  double c = 0.0;
  double b = 0.0;
  double c_se = 0.0;  // from the weights alone
  std::vector<double> residuals;
  double chi2 = 0.0;
  bool weighted = false;
  // c as a linear functional of the per-radius densities
  std::vector<double> c_weights;
};
CnsFit fit_cns(const std::vector<double>& radii, const std::vector<double>& means, const std::vector<double>& ses);

struct EstimatorReport {
  std::string measure_json;
  std::string measure_digest;
  std::vector<double> schedule;
  std::size_t M = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::vector<CountEstimate> per_radius;
  double cns_estimate = 0.0;
  double cns_stderr = 0.0;
  double cns_slope = 0.0;
  std::vector<double> residuals;
  bool weighted_fit = false;
  double dns_estimate = 0.0;
  double dns_stderr = 0.0;
  double wall_seconds = 0.0;
  // Interior counts per radius and sample, kept for paired statistics.
  std::vector<std::vector<std::size_t>> counts;
};

// c_NS by extrapolation in 1/R.  Samples are shared across radii, so the
// standard error comes from the per-sample values of the linear estimator.
// d_NS is the plug-in at the largest radius.
EstimatorReport estimate_cns(const SpectralMeasure& rho, const std::vector<double>& schedule, std::size_t M,
                             std::uint64_t seed, double h = 0.0);

// Mean of |count / (4 R^2) - cns| over samples.
MeanStderr estimate_dns(const SpectralMeasure& rho, double R, std::size_t M, std::uint64_t seed, double cns,
                        double h = 0.0);

struct TorusReport {
  std::int64_t n = 0;
  std::size_t r2 = 0;
  std::size_t M = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  double mean_total = 0.0;
  double se_total = 0.0;
  double mean_contractible = 0.0;
  double mean_wrapping = 0.0;
  // comparison with a planar estimate of c_NS(mu_n), set by attach_cns
  bool has_cns = false;
  double cns = 0.0;
  double cns_se = 0.0;
  double residual = 0.0;  // (mean_total - cns n) / sqrt n
  double residual_se = 0.0;
};

// Census of f_n on the torus over M samples.  h = 0 picks the default spacing.
TorusReport torus_count_report(std::int64_t n, std::size_t M, double h, std::uint64_t seed);
// Adds the planar comparison from an estimate of c_NS(mu_n).
void attach_cns(TorusReport& report, double cns, double cns_se);

struct ContinuityRow {
  double distance_to_end = 0.0;
  double cns = 0.0;
  double cns_se = 0.0;
};
struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  // max |c(rho_j) - c(rho_end)| over the second half of the path
  double tail_spread = 0.0;
};
// With one radius c is the plug-in mean / (4 R^2); with three or more it is
// the extrapolated estimate.
ContinuityReport continuity_experiment(const std::vector<SpectralMeasure>& path, const std::vector<double>& schedule,
                                       std::size_t M, std::uint64_t seed, double h = 0.0);

struct SmallDomainRow {
  double delta = 0.0;
  double mean_per_area = 0.0;  // E[N_delta] / R^2
  double se = 0.0;
};
struct SmallDomainReport {
  double R = 0.0;
  std::size_t M = 0;
  std::vector<SmallDomainRow> rows;
  double log_slope = 0.0;  // least squares slope of log count against log delta
};
SmallDomainReport small_domain_report(const SpectralMeasure& rho, double R, std::size_t M,
                                      const std::vector<double>& deltas, std::uint64_t seed, double h = 0.0);

std::string report_to_json(const EstimatorReport& r);
std::string report_to_csv(const EstimatorReport& r);
std::string torus_to_json(const TorusReport& r);
std::string continuity_to_json(const ContinuityReport& r);
std::string small_domains_to_json(const SmallDomainReport& r);

}  // namespace nodal
