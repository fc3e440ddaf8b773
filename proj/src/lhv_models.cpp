#include "bellsim/lhv_models.hpp"

#include <cmath>

namespace bellsim {

DeterministicStrategy DeterministicStrategy::from_code(unsigned code) {
  return {(code & 1u) != 0, (code & 2u) != 0, (code & 4u) != 0, (code & 8u) != 0};
}

unsigned DeterministicStrategy::code() const {
  return unsigned(a1) | unsigned(a1p) << 1 | unsigned(b2) << 2 | unsigned(b2p) << 3;
}

std::array<DeterministicStrategy, kStrategyCount> all_strategies() {
  std::array<DeterministicStrategy, kStrategyCount> out;
  for (unsigned k = 0; k < kStrategyCount; ++k) out[k] = DeterministicStrategy::from_code(k);
  return out;
}

int ch_deterministic_extended(const DeterministicStrategy& s, bool a_absent, bool b_absent) {
  const int a1 = s.a1, a1p = s.a1p, b2 = s.b2, b2p = s.b2p;
  return a1 * b2 - a1 * b2p + a1p * b2 + a1p * b2p - a1p * int(b_absent) - int(a_absent) * b2;
}

int ch_deterministic(const DeterministicStrategy& s) { return ch_deterministic_extended(s, true, true); }

bool satisfies_no_enhancement(const DeterministicStrategy& s, bool a_absent, bool b_absent) {
  return (a_absent || !(s.a1 || s.a1p)) && (b_absent || !(s.b2 || s.b2p));
}

LhvMixture::LhvMixture(const std::array<double, kStrategyCount>& weights) : weights_(weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("LhvMixture: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("LhvMixture: weights must sum to 1");
}

LhvMixture LhvMixture::point_mass(const DeterministicStrategy& s) {
  std::array<double, kStrategyCount> w{};
  w[s.code()] = 1.0;
  return LhvMixture(w);
}

LhvMixture LhvMixture::uniform() {
  std::array<double, kStrategyCount> w;
  w.fill(1.0 / kStrategyCount);
  return LhvMixture(w);
}

double ch_mixture(const LhvMixture& mix) {
  double total = 0.0;
  for (unsigned k = 0; k < kStrategyCount; ++k) {
    total += mix.weights()[k] * ch_deterministic(DeterministicStrategy::from_code(k));
  }
  return total;
}

double malus_pass_probability(const Setting& s, double lambda) {
  if (s.is_absent()) return 1.0;
  const double c = std::cos(s.theta() - lambda);
  return c * c;
}

JointPass malus_joint_pass(const MalusModel&, const Setting& s1, const Setting& s2) {
  // Averages over lambda: <cos^2> = 1/2, <cos^2(t1-l) cos^2(t2-l)> = (2 + cos 2(t1-t2)) / 8.
  const double q1 = s1.is_absent() ? 1.0 : 0.5;
  const double q2 = s2.is_absent() ? 1.0 : 0.5;
  double q12;
  if (s1.is_absent() || s2.is_absent()) {
    q12 = q1 * q2;
  } else {
    q12 = (2.0 + std::cos(2.0 * (s1.theta() - s2.theta()))) / 8.0;
  }
  return {q12, q1, q2};
}

}  // namespace bellsim
