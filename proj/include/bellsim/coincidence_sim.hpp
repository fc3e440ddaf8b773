#pragma once

// Monte Carlo coincidence-counting experiment.
//
// A pair source emits pairs as a homogeneous Poisson process. Each pair's
// joint polarizer outcome is drawn from the source model's joint pass
// probabilities; every passing photon is detected with its arm's efficiency,
// timestamped with Gaussian jitter, and mixed with Poisson dark counts.
// Coincidences are then tallied by a greedy start-stop matcher.

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "bellsim/inequalities.hpp"
#include "bellsim/lhv_models.hpp"
#include "bellsim/state_model.hpp"

namespace bellsim {

using PairModel = std::variant<State, MalusModel>;

JointPass joint_pass(const PairModel& model, const Setting& s1, const Setting& s2);

/// Longest run accepted. Keeps the spacing of representable timestamps
/// (about 2e-12 s at 1e4 s) far below any coincidence window.
inline constexpr double kMaxDuration = 1e4;

struct SourceConfig {
  double pair_rate = 1e4;  // pairs per second
  PairModel model = State(1.0);
  double duration = 1.0;   // seconds per run

  void validate() const;
};

struct DetectorModel {
  double eta1 = 1.0;
  double eta2 = 1.0;
  double dark1 = 0.0;         // counts per second
  double dark2 = 0.0;
  double jitter_sigma = 0.0;  // seconds
  double dead_time = 0.0;     // seconds, non-paralyzable; 0 disables

  void validate() const;
};

struct EventLog {
  std::vector<double> arm1;  // sorted timestamps, seconds in [0, duration]
  std::vector<double> arm2;
  std::uint64_t seed = 0;
  Setting s1 = Setting::absent();
  Setting s2 = Setting::absent();
  SourceConfig source;
  DetectorModel detector;

  double duration() const { return source.duration; }
  bool is_sorted() const;
};

struct CoincidenceCounts {
  std::int64_t n_coinc = 0;
  std::int64_t singles1 = 0;
  std::int64_t singles2 = 0;
  double window = 0.0;
  double duration = 0.0;
  Setting s1 = Setting::absent();
  Setting s2 = Setting::absent();
};

/// Deterministic for a fixed seed. Draw order per run: for each pair, the
/// gap to the next pair, the joint outcome, then for arm 1 and arm 2 in turn
/// the detection draw and (if jitter_sigma > 0 and detected) the jitter;
/// after all pairs, the arm 1 dark counts and then the arm 2 dark counts.
EventLog simulate_run(const SourceConfig& source, const DetectorModel& det, const Setting& s1, const Setting& s2,
                      std::uint64_t seed);

/// Greedy earliest-first matching: walk both arms in time order; the current
/// arm 1 and arm 2 events form a coincidence when |dt| <= window / 2,
/// otherwise the earlier of the two is discarded. Each event is used at most
/// once. Throws InvalidArgument on unsorted logs or window <= 0.
CoincidenceCounts count_coincidences(const EventLog& log, double window);

/// Expected rate of chance coincidences between uncorrelated streams.
inline double accidental_rate(double singles1_rate, double singles2_rate, double window) {
  return singles1_rate * singles2_rate * window;
}

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of CH sub-run k (0..5, in CHTerm order): splitmix64(master + (k + 1) * 0x9E3779B97F4A7C15).
std::uint64_t derive_run_seed(std::uint64_t master, int k);

struct ChExperimentResult {
  std::array<CoincidenceCounts, 6> runs;  // CHTerm order
  CountsCH ch;
  std::vector<EventLog> logs;             // filled only when keep_logs is set
};

struct ChExperimentOptions {
  int threads = 1;
  bool keep_logs = false;
};

/// Six runs, one per CH term; the two singles terms are coincidence counts
/// with one polarizer removed.
ChExperimentResult run_ch_experiment(const SourceConfig& source, const DetectorModel& det, const Quad& quad,
                                     double window, std::uint64_t seed, const ChExperimentOptions& options = {});

}  // namespace bellsim
