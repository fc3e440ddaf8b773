#include "bellsim/coincidence_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bellsim/parallel.hpp"

namespace bellsim {

JointPass joint_pass(const PairModel& model, const Setting& s1, const Setting& s2) {
  return std::visit(
      [&](const auto& m) -> JointPass {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, State>) {
          return joint_pass_probabilities(m, s1, s2);
        } else {
          return malus_joint_pass(m, s1, s2);
        }
      },
      model);
}

void SourceConfig::validate() const {
  if (!(pair_rate > 0.0) || !std::isfinite(pair_rate)) throw InvalidArgument("pair_rate must be > 0");
  if (!(duration > 0.0)) throw InvalidArgument("duration must be > 0");
  if (duration > kMaxDuration) throw InvalidArgument("duration exceeds the 1e4 s timestamp precision cap");
}

void DetectorModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  auto nonneg = [](double x) { return x >= 0.0 && std::isfinite(x); };
  if (!prob(eta1) || !prob(eta2)) throw InvalidArgument("detector efficiencies must lie in [0, 1]");
  if (!nonneg(dark1) || !nonneg(dark2)) throw InvalidArgument("dark-count rates must be >= 0");
  if (!nonneg(jitter_sigma)) throw InvalidArgument("jitter_sigma must be >= 0");
  if (!nonneg(dead_time)) throw InvalidArgument("dead_time must be >= 0");
}

bool EventLog::is_sorted() const {
  return std::is_sorted(arm1.begin(), arm1.end()) && std::is_sorted(arm2.begin(), arm2.end());
}

namespace {

void apply_dead_time(std::vector<double>& stream, double dead_time) {
  if (dead_time <= 0.0 || stream.empty()) return;
  std::vector<double> kept;
  kept.reserve(stream.size());
  for (double t : stream) {
    if (kept.empty() || t - kept.back() >= dead_time) kept.push_back(t);
  }
  stream = std::move(kept);
}

}  // namespace

EventLog simulate_run(const SourceConfig& source, const DetectorModel& det, const Setting& s1, const Setting& s2,
                      std::uint64_t seed) {
  source.validate();
  det.validate();
  const JointPass p = joint_pass(source.model, s1, s2);
  constexpr double kSlack = 1e-12;
  if (!p.is_consistent(kSlack)) {
    throw InvalidArgument("simulate_run: pair model gives inconsistent joint pass probabilities");
  }
  // Cumulative thresholds for (both, only 1, only 2); the rest is neither.
  const double c_both = p.q12;
  const double c_one = c_both + std::max(0.0, p.q1 - p.q12);
  const double c_two = c_one + std::max(0.0, p.q2 - p.q12);

  EventLog log;
  log.seed = seed;
  log.s1 = s1;
  log.s2 = s2;
  log.source = source;
  log.detector = det;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> gap(source.pair_rate);
  std::normal_distribution<double> jitter(0.0, det.jitter_sigma > 0.0 ? det.jitter_sigma : 1.0);
  const double duration = source.duration;

  auto stamp = [&](double t) {
    if (det.jitter_sigma > 0.0) t += jitter(rng);
    return std::clamp(t, 0.0, duration);
  };

  for (double t = gap(rng); t <= duration; t += gap(rng)) {
    const double u = uniform(rng);
    const bool pass1 = u < c_one;
    const bool pass2 = u < c_both || (u >= c_one && u < c_two);
    if (pass1 && uniform(rng) < det.eta1) log.arm1.push_back(stamp(t));
    if (pass2 && uniform(rng) < det.eta2) log.arm2.push_back(stamp(t));
  }

  auto add_darks = [&](std::vector<double>& stream, double rate) {
    if (rate <= 0.0) return;
    std::poisson_distribution<long long> count(rate * duration);
    const long long n = count(rng);
    for (long long i = 0; i < n; ++i) stream.push_back(uniform(rng) * duration);
  };
  add_darks(log.arm1, det.dark1);
  add_darks(log.arm2, det.dark2);

  std::sort(log.arm1.begin(), log.arm1.end());
  std::sort(log.arm2.begin(), log.arm2.end());
  apply_dead_time(log.arm1, det.dead_time);
  apply_dead_time(log.arm2, det.dead_time);
  return log;
}

CoincidenceCounts count_coincidences(const EventLog& log, double window) {
  if (!(window > 0.0)) throw InvalidArgument("count_coincidences: window must be > 0");
  if (!log.is_sorted()) throw InvalidArgument("count_coincidences: event streams must be time-sorted");

  CoincidenceCounts out;
  out.window = window;
  out.duration = log.duration();
  out.s1 = log.s1;
  out.s2 = log.s2;
  out.singles1 = std::int64_t(log.arm1.size());
  out.singles2 = std::int64_t(log.arm2.size());

  const double half = 0.5 * window;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < log.arm1.size() && j < log.arm2.size()) {
    const double t1 = log.arm1[i];
    const double t2 = log.arm2[j];
    if (std::abs(t2 - t1) <= half) {
      ++out.n_coinc;
      ++i;
      ++j;
    } else if (t1 < t2) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_run_seed(std::uint64_t master, int k) {
  return splitmix64(master + std::uint64_t(k + 1) * 0x9E3779B97F4A7C15ULL);
}

ChExperimentResult run_ch_experiment(const SourceConfig& source, const DetectorModel& det, const Quad& quad,
                                     double window, std::uint64_t seed, const ChExperimentOptions& options) {
  source.validate();
  det.validate();
  if (!(window > 0.0)) throw InvalidArgument("run_ch_experiment: window must be > 0");

  const auto settings = ch_term_settings(quad);
  ChExperimentResult out;
  std::vector<EventLog> logs(6);
  parallel_for(6, options.threads, [&](std::size_t k) {
    logs[k] = simulate_run(source, det, settings[k].first, settings[k].second, derive_run_seed(seed, int(k)));
    out.runs[k] = count_coincidences(logs[k], window);
  });

  std::array<std::int64_t, 6> counts;
  for (int k = 0; k < 6; ++k) counts[k] = out.runs[k].n_coinc;
  out.ch = ch_from_counts(counts);
  if (options.keep_logs) out.logs = std::move(logs);
  return out;
}

}  // namespace bellsim
