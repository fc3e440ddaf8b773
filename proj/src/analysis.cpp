#include "bellsim/analysis.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <string>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

// eta F^2 R_c^2 / (2 L d^2 lambda): the threshold times sqrt(tau T).
double sed_prefactor(const SedGeometry& g) {
  const double d2 = g.distance * g.distance;
  return g.eta * g.focal_length * g.focal_length * g.source_radius * g.source_radius /
         (2.0 * g.detector_depth * d2 * g.wavelength);
}

constexpr double kSeriesCutoff = 1e-16;

}  // namespace

void SedGeometry::validate() const {
  require_positive(eta, "eta");
  if (eta > 1.0) throw InvalidArgument("eta must be <= 1");
  require_positive(focal_length, "focal length F");
  require_positive(source_radius, "source radius R_c");
  require_positive(coherence_time, "coherence time tau");
  require_positive(distance, "distance d");
  require_positive(wavelength, "wavelength lambda");
  require_positive(detector_depth, "detector depth L");
}

void SedParams::validate() const {
  geometry.validate();
  require_positive(absorption_time, "absorption time T");
}

double sed_rate_threshold(const SedParams& p) {
  p.validate();
  return sed_prefactor(p.geometry) / std::sqrt(p.geometry.coherence_time * p.absorption_time);
}

double sed_implied_T(const SedGeometry& g, double observed_rate) {
  g.validate();
  require_positive(observed_rate, "observed rate");
  const double root = sed_prefactor(g) / observed_rate;
  return root * root / g.coherence_time;
}

SedVerdict sed_verdict(const SedGeometry& g, double observed_rate, bool violation_observed, double t_max) {
  require_positive(t_max, "T_max");
  SedVerdict v;
  v.observed_rate = observed_rate;
  v.t_max = t_max;
  v.threshold_rate = sed_rate_threshold(SedParams{g, t_max});
  v.implied_T_min = sed_implied_T(g, observed_rate);
  v.consistent = v.implied_T_min <= t_max;
  v.falsified = violation_observed && !v.consistent;
  return v;
}

double spuc_bound(double n_spuc_upper, double n_pdc, double power_spuc, double power_pdc) {
  if (!(n_spuc_upper >= 0.0)) throw InvalidArgument("spuc_bound: SPUC upper count must be >= 0");
  require_positive(n_pdc, "PDC count");
  require_positive(power_spuc, "SPUC pump power");
  require_positive(power_pdc, "PDC pump power");
  return (n_spuc_upper / power_spuc) / (n_pdc / power_pdc);
}

double spuc_suppression_factor(double ratio) {
  if (!(ratio >= 0.0)) throw InvalidArgument("spuc_suppression_factor: ratio must be >= 0");
  return ratio == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / ratio;
}

double poisson_upper_tail_log(std::uint64_t observed, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgument("Poisson mean must be finite and >= 0");
  if (observed == 0) return 0.0;
  if (mean == 0.0) return -std::numeric_limits<double>::infinity();

  const double k = double(observed);
  const double log_mean = std::log(mean);
  auto log_pmf = [&](double j) { return -mean + j * log_mean - std::lgamma(j + 1.0); };

  if (k > mean) {
    // Upper series: terms relative to pmf(k) shrink by mean / (j + 1) < 1.
    double sum = 1.0;
    double term = 1.0;
    for (double j = k;; j += 1.0) {
      term *= mean / (j + 1.0);
      sum += term;
      if (term < kSeriesCutoff * sum) break;
    }
    return log_pmf(k) + std::log(sum);
  }

  // 1 - P(X < k), with the CDF accumulated as a log-sum-exp.
  double log_cdf = log_pmf(0.0);
  for (double j = 1.0; j < k; j += 1.0) {
    const double lt = log_pmf(j);
    const double hi = std::max(log_cdf, lt);
    log_cdf = hi + std::log1p(std::exp(std::min(log_cdf, lt) - hi));
  }
  return std::log(-std::expm1(std::min(log_cdf, 0.0)));
}

double dbb_semiplane_pvalue(std::uint64_t observed, double background_mean) {
  return std::exp(poisson_upper_tail_log(observed, background_mean));
}

}  // namespace bellsim
