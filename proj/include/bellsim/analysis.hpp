#pragma once

// Falsification analyses for two alternatives to standard quantum optics:
//  * stochastic optics, which forbids CH violation below a singles rate
//    R_S = eta F^2 R_c^2 / (2 L d^2 lambda sqrt(tau T)), and predicts
//    spontaneous up-conversion comparable to down-conversion;
//  * the de Broglie-Bohm prediction that identical bosons leaving a double
//    slit never reach the same semiplane.
// All SedParams fields are SI units.

#include <cstdint>

namespace bellsim {

/// Everything in the stochastic-optics rate bound except the absorption time T.
struct SedGeometry {
  double eta = 0.0;             // detection quantum efficiency, (0, 1]
  double focal_length = 0.0;    // F: lens in front of the detectors, m
  double source_radius = 0.0;   // R_c: active radius of the non-linear medium, m
  double coherence_time = 0.0;  // tau, s
  double distance = 0.0;        // d: medium to detectors, m
  double wavelength = 0.0;      // lambda: mean detected wavelength, m
  double detector_depth = 0.0;  // L: active depth of the detector, m

  void validate() const;
};

struct SedParams {
  SedGeometry geometry;
  double absorption_time = 0.0;  // T, s

  void validate() const;
};

/// Default ceiling on the absorption time T.
inline constexpr double kSedMaxAbsorptionTime = 10e-9;

/// Singles rate below which stochastic optics allows no CH violation.
double sed_rate_threshold(const SedParams& p);

/// Absorption time at which `observed_rate` sits exactly on the threshold.
/// Any violation seen at that rate requires T >= this value.
double sed_implied_T(const SedGeometry& g, double observed_rate);

struct SedVerdict {
  double threshold_rate = 0.0;  // threshold at T = t_max, counts/s
  double observed_rate = 0.0;
  double implied_T_min = 0.0;   // s
  double t_max = 0.0;
  bool consistent = false;      // implied_T_min <= t_max
  bool falsified = false;       // violation observed and not consistent
};

SedVerdict sed_verdict(const SedGeometry& g, double observed_rate, bool violation_observed,
                       double t_max = kSedMaxAbsorptionTime);

/// Power-normalized up-conversion to down-conversion ratio:
/// (n_spuc_upper / power_spuc) / (n_pdc / power_pdc).
double spuc_bound(double n_spuc_upper, double n_pdc, double power_spuc, double power_pdc);

/// Reciprocal of the ratio; +inf when no up-conversion was allowed at all.
double spuc_suppression_factor(double ratio);

/// log P(X >= observed) for X ~ Poisson(mean).
double poisson_upper_tail_log(std::uint64_t observed, double mean);

/// P(X >= observed | background_mean): the chance of at least `observed`
/// same-semiplane coincidences if only background reaches that region.
double dbb_semiplane_pvalue(std::uint64_t observed, double background_mean);

}  // namespace bellsim
