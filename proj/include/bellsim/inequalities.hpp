#pragma once

// Clauser-Horne quantity
//
//   CH = N(t1,t2) - N(t1,t2') + N(t1',t2) + N(t1',t2') - N(t1',inf) - N(inf,t2)
//
// evaluated on predicted probabilities or on measured counts. Every local
// realistic model gives CH <= 0; only strictly positive totals are violations.

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellsim/errors.hpp"
#include "bellsim/state_model.hpp"

namespace bellsim {

/// The four analyzer angles, each reduced into [0, pi).
template <typename Scalar>
struct SettingsQuad {
  Scalar theta1{};
  Scalar theta1_prime{};
  Scalar theta2{};
  Scalar theta2_prime{};

  static SettingsQuad radians(Scalar t1, Scalar t1p, Scalar t2, Scalar t2p) {
    return {canonical_angle(t1), canonical_angle(t1p), canonical_angle(t2), canonical_angle(t2p)};
  }
  static SettingsQuad degrees(Scalar t1, Scalar t1p, Scalar t2, Scalar t2p) {
    return radians(deg_to_rad(t1), deg_to_rad(t1p), deg_to_rad(t2), deg_to_rad(t2p));
  }

  Eigen::Matrix<Scalar, 4, 1> as_vector() const { return {theta1, theta1_prime, theta2, theta2_prime}; }
  static SettingsQuad from_vector(const Eigen::Matrix<Scalar, 4, 1>& v) { return radians(v[0], v[1], v[2], v[3]); }
};

using Quad = SettingsQuad<double>;

/// Index of each CH term, in the order the terms appear in the inequality.
enum class CHTerm : int { T1T2 = 0, T1T2p, T1pT2, T1pT2p, T1pAbsent, AbsentT2 };

inline constexpr std::array<int, 6> kCHSigns = {+1, -1, +1, +1, -1, -1};

/// The (arm 1, arm 2) settings for each of the six CH terms.
template <typename Scalar>
std::array<std::pair<PolarizerSetting<Scalar>, PolarizerSetting<Scalar>>, 6> ch_term_settings(
    const SettingsQuad<Scalar>& q) {
  using S = PolarizerSetting<Scalar>;
  return {{{S::angle(q.theta1), S::angle(q.theta2)},
           {S::angle(q.theta1), S::angle(q.theta2_prime)},
           {S::angle(q.theta1_prime), S::angle(q.theta2)},
           {S::angle(q.theta1_prime), S::angle(q.theta2_prime)},
           {S::angle(q.theta1_prime), S::absent()},
           {S::absent(), S::angle(q.theta2)}}};
}

/// Unsigned term magnitudes; the sign of term i is kCHSigns[i].
template <typename T>
struct CHDecomposition {
  std::array<T, 6> terms{};
  T total{};

  T signed_term(CHTerm t) const { return T(kCHSigns[int(t)]) * terms[int(t)]; }
  bool violates() const { return total > T(0); }
};

template <typename T>
CHDecomposition<T> make_ch_decomposition(const std::array<T, 6>& terms) {
  CHDecomposition<T> out{terms, T(0)};
  for (int i = 0; i < 6; ++i) out.total += T(kCHSigns[i]) * terms[i];
  return out;
}

/// Quantum CH with detectors of efficiency eta on both arms: coincidence
/// terms scale as eta^2, singles terms as eta.
template <typename Scalar>
CHDecomposition<Scalar> ch_quantum(const EntangledState<Scalar>& state, const SettingsQuad<Scalar>& quad,
                                   Scalar eta = Scalar(1)) {
  if (!(eta > Scalar(0) && eta <= Scalar(1))) throw InvalidArgument("ch_quantum: eta must lie in (0, 1]");
  const auto settings = ch_term_settings(quad);
  std::array<Scalar, 6> terms;
  for (int i = 0; i < 4; ++i) {
    terms[i] = eta * eta * coincidence_probability(state, settings[i].first, settings[i].second);
  }
  for (int i = 4; i < 6; ++i) {
    terms[i] = eta * coincidence_probability(state, settings[i].first, settings[i].second);
  }
  return make_ch_decomposition(terms);
}

struct CountsCH {
  CHDecomposition<std::int64_t> decomposition;
  double sigma = 0.0;         // sqrt of the summed counts (independent Poisson runs)
  double significance = 0.0;  // total / sigma, 0 when sigma is 0
};

/// Counts in CHTerm order. All six runs must share one acquisition time.
CountsCH ch_from_counts(const std::array<std::int64_t, 6>& counts);

// ---------------------------------------------------------------------------
// Angle optimization

struct AngleSearchConfig {
  int restarts = 16;                 // best grid points refined by Nelder-Mead
  double grid_pitch_deg = 15.0;      // seed grid spacing on each angle
  double angle_tolerance = 1e-4;     // radians
  int max_iterations = 10000;
  int threads = 1;
  bool canonicalize = true;          // slide along the flat optimum to theta2' = 0
  std::vector<Quad> seeds;           // extra user starting points
};

struct AngleOptimum {
  Quad quad;
  double ch = 0.0;
};

struct AngleSearchResult {
  Quad quad;
  double ch_max = 0.0;
  int converged_restarts = 0;
  std::vector<AngleOptimum> distinct_optima;  // canonicalized, best first
};

/// Folds a quad into a representative of its symmetry class: angles mod pi,
/// and the reflection theta -> pi - theta on all four angles (which leaves
/// every probability unchanged) applied so that theta2 <= pi/2.
Quad canonical_quad(const Quad& q);

/// Multi-start maximization of ch_quantum(f, ., eta).total over the four
/// angles. Throws ConvergenceError if no restart converges.
AngleSearchResult optimize_angles(double f, double eta = 1.0, const AngleSearchConfig& config = {});

struct EfficiencyThresholdResult {
  double eta_crit = 0.0;
  Quad witness_quad;
  double witness_eta = 0.0;  // upper end of the final bracket, where witness_quad violates
  double witness_ch = 0.0;
  std::array<double, 2> bracket{};
  int bisection_steps = 0;
};

struct ThresholdConfig {
  AngleSearchConfig search{};
  double tolerance = 1e-3;   // final bracket width in eta
  double lower_eta = 0.5;    // must not violate here
};

/// Smallest detection efficiency at which the state with ratio f violates
/// CH for some settings, found by bisection on "optimize_angles gives > 0".
EfficiencyThresholdResult critical_efficiency(double f, const ThresholdConfig& config = {});

}  // namespace bellsim
