#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bellsim/coincidence_sim.hpp"
#include "bellsim/event_io.hpp"

using namespace bellsim;

namespace {

EventLog make_log(std::vector<double> a1, std::vector<double> a2, double duration = 10.0) {
  EventLog log;
  log.arm1 = std::move(a1);
  log.arm2 = std::move(a2);
  log.source.duration = duration;
  return log;
}

}  // namespace

TEST_SUITE("coincidence_sim") {

TEST_CASE("window matching examples") {
  const double w = 1e-8;
  CHECK(count_coincidences(make_log({1.0}, {1.0 + w / 4}), w).n_coinc == 1);
  CHECK(count_coincidences(make_log({1.0}, {1.0 + w}), w).n_coinc == 0);
  CHECK(count_coincidences(make_log({1.0}, {1.0 + w / 2}), w).n_coinc == 1);
  // Single-use rule: three arm-1 events around one arm-2 event.
  const auto c = count_coincidences(make_log({1.0 - w / 8, 1.0, 1.0 + w / 8}, {1.0}), w);
  CHECK(c.n_coinc == 1);
  CHECK(c.singles1 == 3);
  CHECK(c.singles2 == 1);
}

TEST_CASE("count_coincidences rejects bad input") {
  CHECK_THROWS_AS(count_coincidences(make_log({2.0, 1.0}, {}), 1e-8), InvalidArgument);
  CHECK_THROWS_AS(count_coincidences(make_log({1.0}, {1.0}), 0.0), InvalidArgument);
}

TEST_CASE("matching properties on random logs") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a, b;
    const int na = int(u(rng) * 200), nb = int(u(rng) * 200);
    for (int i = 0; i < na; ++i) a.push_back(u(rng));
    for (int i = 0; i < nb; ++i) b.push_back(u(rng));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto log = make_log(a, b, 1.0);
    std::int64_t previous = -1;
    for (double w = 0.1; w > 1e-5; w *= 0.5) {
      const auto c = count_coincidences(log, w);
      REQUIRE(c.n_coinc <= std::min(c.singles1, c.singles2));
      if (previous >= 0) REQUIRE(c.n_coinc <= previous);
      previous = c.n_coinc;
    }
  }
}

TEST_CASE("accidental rate arithmetic") {
  CHECK(accidental_rate(0.0, 1234.0, 1e-8) == 0.0);
  CHECK(accidental_rate(1e3, 1e3, 1e-8) == doctest::Approx(1e-2));
}

TEST_CASE("detector with zero efficiency records only dark counts") {
  SourceConfig src;
  src.pair_rate = 1e4;
  src.model = State(1.0);
  src.duration = 1.0;
  DetectorModel det;
  det.eta1 = det.eta2 = 0.0;
  det.dark1 = 500.0;
  det.dark2 = 800.0;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto log = simulate_run(src, det, Setting::degrees(0), Setting::degrees(0), seed);
    const bool ok1 = std::abs(double(log.arm1.size()) - 500.0) <= 3 * std::sqrt(500.0);
    const bool ok2 = std::abs(double(log.arm2.size()) - 800.0) <= 3 * std::sqrt(800.0);
    within += ok1 && ok2;
  }
  CHECK(within >= 95);
}

TEST_CASE("singles of the maximal state behind equal polarizers") {
  SourceConfig src;
  src.pair_rate = 1e4;
  src.model = State(1.0);
  const auto log = simulate_run(src, DetectorModel{}, Setting::degrees(0), Setting::degrees(0), 17);
  CHECK(std::abs(double(log.arm1.size()) - 5000.0) <= 3 * std::sqrt(5000.0));
  CHECK(std::abs(double(log.arm2.size()) - 5000.0) <= 3 * std::sqrt(5000.0));
  // Perfect correlation at equal angles: every arm-1 detection has a partner.
  const auto c = count_coincidences(log, 1e-9);
  CHECK(c.n_coinc == c.singles1);
  CHECK(c.n_coinc == c.singles2);
}

TEST_CASE("simulate_run is deterministic for a fixed seed") {
  SourceConfig src;
  src.model = State(0.4);
  DetectorModel det;
  det.eta1 = 0.7;
  det.eta2 = 0.6;
  det.dark1 = 100;
  det.dark2 = 50;
  det.jitter_sigma = 3e-10;
  const auto a = simulate_run(src, det, Setting::degrees(10), Setting::degrees(70), 5);
  const auto b = simulate_run(src, det, Setting::degrees(10), Setting::degrees(70), 5);
  const auto c = simulate_run(src, det, Setting::degrees(10), Setting::degrees(70), 6);
  std::ostringstream sa, sb;
  write_event_csv(sa, a);
  write_event_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a.arm1 == b.arm1);
  CHECK(a.arm1 != c.arm1);
}

TEST_CASE("generated logs are sorted and inside the run") {
  SourceConfig src;
  src.model = State(0.4);
  src.pair_rate = 5e4;
  src.duration = 0.2;
  DetectorModel det;
  det.dark1 = det.dark2 = 1e3;
  det.jitter_sigma = 1e-3;
  const auto log = simulate_run(src, det, Setting::degrees(0), Setting::absent(), 3);
  CHECK(log.is_sorted());
  for (double t : log.arm1) REQUIRE((t >= 0.0 && t <= src.duration));
  for (double t : log.arm2) REQUIRE((t >= 0.0 && t <= src.duration));
}

TEST_CASE("dead time spaces out detections") {
  SourceConfig src;
  src.pair_rate = 1e5;
  DetectorModel det;
  det.dead_time = 1e-4;
  const auto log = simulate_run(src, det, Setting::absent(), Setting::absent(), 8);
  for (std::size_t i = 1; i < log.arm1.size(); ++i) REQUIRE(log.arm1[i] - log.arm1[i - 1] >= det.dead_time);
  // Non-paralyzable: rate / (1 + rate * dead_time) = 1e5 / 11.
  CHECK(std::abs(double(log.arm1.size()) - 1e5 / 11.0) < 5 * std::sqrt(1e5 / 11.0));
}

TEST_CASE("configuration validation") {
  SourceConfig src;
  src.pair_rate = 0.0;
  CHECK_THROWS_AS(src.validate(), InvalidArgument);
  src.pair_rate = 1.0;
  src.duration = 2e4;
  CHECK_THROWS_AS(src.validate(), InvalidArgument);
  DetectorModel det;
  det.eta1 = 1.2;
  CHECK_THROWS_AS(det.validate(), InvalidArgument);
  det.eta1 = 1.0;
  det.dark2 = -1.0;
  CHECK_THROWS_AS(det.validate(), InvalidArgument);
}

TEST_CASE("empirical coincidence frequency converges to eta1 eta2 q12") {
  SourceConfig src;
  src.model = State(0.4);
  src.pair_rate = 1e5;
  DetectorModel det;
  det.eta1 = 0.8;
  det.eta2 = 0.6;
  const auto s1 = Setting::degrees(72.24);
  const auto s2 = Setting::degrees(45);
  const auto log = simulate_run(src, det, s1, s2, 2024);
  const auto c = count_coincidences(log, 1e-9);
  const double expected = det.eta1 * det.eta2 * coincidence_probability(State(0.4), s1, s2) * src.pair_rate;
  CHECK(std::abs(double(c.n_coinc) - expected) <= 3 * std::sqrt(expected));
}

TEST_CASE("run seeds follow the counter scheme") {
  CHECK(derive_run_seed(0, 0) == splitmix64(0x9E3779B97F4A7C15ULL));
  CHECK(derive_run_seed(7, 2) == splitmix64(7 + 3 * 0x9E3779B97F4A7C15ULL));
  CHECK(derive_run_seed(7, 2) != derive_run_seed(7, 3));
}

TEST_CASE("run_ch_experiment with a vanishing pair rate") {
  SourceConfig src;
  src.pair_rate = 1e-9;
  src.model = State(0.4);
  const auto r = run_ch_experiment(src, DetectorModel{}, Quad::degrees(72.24, 17.76, 45, 0), 1e-8, 1);
  for (const auto& run : r.runs) CHECK(run.n_coinc == 0);
  CHECK(r.ch.decomposition.total == 0);
}

TEST_CASE("run_ch_experiment reproduces N * ch_quantum") {
  SourceConfig src;
  src.model = State(0.4);
  src.pair_rate = 1e6;
  const Quad quad = Quad::degrees(72.24, 17.76, 45, 0);
  const auto r = run_ch_experiment(src, DetectorModel{}, quad, 1e-9, 77, {.threads = 3});
  std::int64_t sum = 0;
  for (const auto& run : r.runs) sum += run.n_coinc;
  CHECK(sum >= 100000);
  const double expected = ch_quantum(State(0.4), quad).total * src.pair_rate * src.duration;
  CHECK(std::abs(double(r.ch.decomposition.total) - expected) <= 4 * r.ch.sigma);
}

TEST_CASE("run_ch_experiment does not depend on the thread count") {
  SourceConfig src;
  src.model = State(0.4);
  DetectorModel det;
  det.eta1 = 0.9;
  det.dark1 = 200;
  det.jitter_sigma = 1e-9;
  const Quad quad = Quad::degrees(72.24, 17.76, 45, 0);
  const auto a = run_ch_experiment(src, det, quad, 5e-9, 31, {.threads = 1, .keep_logs = true});
  const auto b = run_ch_experiment(src, det, quad, 5e-9, 31, {.threads = 6, .keep_logs = true});
  for (int k = 0; k < 6; ++k) {
    CHECK(a.runs[k].n_coinc == b.runs[k].n_coinc);
    CHECK(a.logs[k].arm1 == b.logs[k].arm1);
    CHECK(a.logs[k].arm2 == b.logs[k].arm2);
  }
  CHECK(a.ch.decomposition.total == b.ch.decomposition.total);
}

TEST_CASE("Malus source never shows a significant violation at 1e5 pairs") {
  SourceConfig src;
  src.model = MalusModel{};
  src.pair_rate = 1e5;
  const Quad quad = Quad::degrees(72.24, 17.76, 45, 0);
  int exceed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = run_ch_experiment(src, DetectorModel{}, quad, 1e-9, seed);
    exceed += double(r.ch.decomposition.total) > 3 * r.ch.sigma;
  }
  CHECK(exceed == 0);
}

}
