#pragma once

// Local hidden variable models for the CH inequality.
//
// A deterministic strategy fixes, for every hidden-variable value, whether
// each photon is detected behind each polarizer setting. Any LHV model is a
// mixture of the 16 strategies over the four CH settings, so checking those
// 16 bounds every local model. With no polarizer in an arm the photon is
// always detected.

#include <array>
#include <cstdint>

#include "bellsim/inequalities.hpp"
#include "bellsim/state_model.hpp"

namespace bellsim {

struct DeterministicStrategy {
  bool a1 = false;   // arm 1 detects behind theta1
  bool a1p = false;  // arm 1 detects behind theta1'
  bool b2 = false;   // arm 2 detects behind theta2
  bool b2p = false;  // arm 2 detects behind theta2'

  /// Bit i of `code` is, in order, a1, a1p, b2, b2p.
  static DeterministicStrategy from_code(unsigned code);
  unsigned code() const;
};

inline constexpr int kStrategyCount = 16;

std::array<DeterministicStrategy, kStrategyCount> all_strategies();

int ch_deterministic(const DeterministicStrategy& s);

/// CH with the polarizer-absent outcomes as free bits. Without the
/// no-enhancement constraint (absent >= present on each arm) these can
/// exceed zero.
int ch_deterministic_extended(const DeterministicStrategy& s, bool a_absent, bool b_absent);

bool satisfies_no_enhancement(const DeterministicStrategy& s, bool a_absent, bool b_absent);

class LhvMixture {
 public:
  /// Throws InvalidArgument unless the weights are nonnegative and sum to 1
  /// within 1e-12. weights[k] belongs to DeterministicStrategy::from_code(k).
  explicit LhvMixture(const std::array<double, kStrategyCount>& weights);

  static LhvMixture point_mass(const DeterministicStrategy& s);
  static LhvMixture uniform();

  const std::array<double, kStrategyCount>& weights() const { return weights_; }

 private:
  std::array<double, kStrategyCount> weights_;
};

double ch_mixture(const LhvMixture& mix);

/// Classical-wave model: every pair carries one shared polarization angle
/// lambda, uniform on [0, pi); each photon passes its polarizer with
/// probability cos^2(theta - lambda), independently given lambda.
struct MalusModel {};

JointPass malus_joint_pass(const MalusModel& model, const Setting& s1, const Setting& s2);

/// Draws a hidden polarization angle in [0, pi) from a uniform variate.
inline double malus_hidden_angle(double u01) { return u01 * kPi<double>; }

/// Pass probability of one photon with hidden angle lambda.
double malus_pass_probability(const Setting& s, double lambda);

}  // namespace bellsim
