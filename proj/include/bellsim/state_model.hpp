#pragma once

// Two-photon polarization state (|HH> + f|VV>)/sqrt(1 + f^2) and the
// detection probabilities it predicts behind linear polarizers.
//
// Probabilities are conditional on a pair having been created; the vacuum
// component of the down-conversion state never reaches the detectors.
// Horizontal polarization is angle 0; all angles are radians.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "bellsim/errors.hpp"

namespace bellsim {

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

template <typename Scalar>
Scalar deg_to_rad(Scalar deg) {
  return deg * kPi<Scalar> / Scalar(180);
}

template <typename Scalar>
Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / kPi<Scalar>;
}

/// Reduces an angle into [0, pi). A polarizer at theta and theta + pi is the
/// same physical setting.
template <typename Scalar>
Scalar canonical_angle(Scalar theta) {
  using std::fmod;
  Scalar r = fmod(theta, kPi<Scalar>);
  if (r < Scalar(0)) r += kPi<Scalar>;
  // fmod of a value just below a multiple of pi can round up to pi itself.
  if (r >= kPi<Scalar>) r = Scalar(0);
  return r;
}

template <typename Scalar>
class EntangledState {
 public:
  explicit EntangledState(Scalar f) : f_(f) {
    using std::isfinite;
    if (!isfinite(f) || f < Scalar(0)) {
      throw InvalidArgument("EntangledState: amplitude ratio f must be finite and >= 0");
    }
  }

  Scalar f() const { return f_; }
  Scalar normalization() const { return Scalar(1) / (Scalar(1) + f_ * f_); }
  bool is_maximal() const { return f_ == Scalar(1); }

 private:
  Scalar f_;
};

/// Polarizer angle, or no polarizer in the arm at all.
template <typename Scalar>
class PolarizerSetting {
 public:
  static PolarizerSetting angle(Scalar theta) { return PolarizerSetting(canonical_angle(theta)); }
  static PolarizerSetting absent() { return PolarizerSetting(); }
  static PolarizerSetting degrees(Scalar deg) { return angle(deg_to_rad(deg)); }

  bool is_absent() const { return !theta_.has_value(); }
  Scalar theta() const {
    if (!theta_) throw InvalidArgument("PolarizerSetting: absent setting has no angle");
    return *theta_;
  }

  friend bool operator==(const PolarizerSetting&, const PolarizerSetting&) = default;

 private:
  PolarizerSetting() = default;
  explicit PolarizerSetting(Scalar theta) : theta_(theta) {}

  std::optional<Scalar> theta_;
};

template <typename Scalar>
struct JointPassProbabilities {
  Scalar q12;  // both photons pass
  Scalar q1;   // photon 1 passes
  Scalar q2;   // photon 2 passes

  /// Probability that neither photon passes.
  Scalar q_none() const { return Scalar(1) - q1 - q2 + q12; }

  bool is_consistent(Scalar tol = Scalar(0)) const {
    using std::min;
    return q12 >= -tol && q12 <= min(q1, q2) + tol && q_none() >= -tol && q1 <= Scalar(1) + tol &&
           q2 <= Scalar(1) + tol;
  }
};

template <typename Scalar>
Scalar coincidence_probability(const EntangledState<Scalar>& state, const PolarizerSetting<Scalar>& s1,
                               const PolarizerSetting<Scalar>& s2) {
  using std::cos;
  using std::sin;
  const Scalar f = state.f();
  if (s1.is_absent() && s2.is_absent()) return Scalar(1);
  if (s1.is_absent() || s2.is_absent()) {
    const Scalar t = s1.is_absent() ? s2.theta() : s1.theta();
    const Scalar c = cos(t);
    const Scalar s = sin(t);
    return (c * c + f * f * s * s) * state.normalization();
  }
  const Scalar t1 = s1.theta();
  const Scalar t2 = s2.theta();
  const Scalar amp = cos(t1) * cos(t2) + f * sin(t1) * sin(t2);
  return amp * amp * state.normalization();
}

enum class Arm { One = 1, Two = 2 };

/// The reduced state is the same on both arms, so `arm` only documents intent.
template <typename Scalar>
Scalar single_pass_probability(const EntangledState<Scalar>& state, const PolarizerSetting<Scalar>& s,
                               Arm arm = Arm::One) {
  const auto none = PolarizerSetting<Scalar>::absent();
  return arm == Arm::One ? coincidence_probability(state, s, none) : coincidence_probability(state, none, s);
}

template <typename Scalar>
JointPassProbabilities<Scalar> joint_pass_probabilities(const EntangledState<Scalar>& state,
                                                        const PolarizerSetting<Scalar>& s1,
                                                        const PolarizerSetting<Scalar>& s2) {
  return {coincidence_probability(state, s1, s2), single_pass_probability(state, s1, Arm::One),
          single_pass_probability(state, s2, Arm::Two)};
}

using State = EntangledState<double>;
using Setting = PolarizerSetting<double>;
using JointPass = JointPassProbabilities<double>;

}  // namespace bellsim
