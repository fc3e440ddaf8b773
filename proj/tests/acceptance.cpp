// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bellsim/analysis.hpp"
#include "bellsim/coincidence_sim.hpp"
#include "bellsim/inequalities.hpp"
#include "bellsim/lhv_models.hpp"
#include "oracles.hpp"

using namespace bellsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const Quad kReferenceQuad = Quad::degrees(72.24, 17.76, 45, 0);

double angular_gap_deg(double a_rad, double b_deg) {
  double d = std::fmod(std::abs(rad_to_deg(a_rad) - b_deg), 180.0);
  return std::min(d, 180.0 - d);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// 1. CH at the f = 0.4 settings against the 50-digit oracle.
Outcome ch_at_reference_settings() {
  const double reference = double(oracle::ch(oracle::hp("0.4"), oracle::hp("72.24"), oracle::hp("17.76"), 45, 0));
  const double got = ch_quantum(State(0.4), kReferenceQuad).total;
  const bool pass = std::abs(got - 0.1073) <= 0.0005 && std::abs(got - reference) < 1e-12;
  return {pass, fmt("ch=%.10f oracle=%.10f target 0.1073+-0.0005", got, reference)};
}

// 2. Optimized angles within 0.5 deg of the reference quad, ch_max >= value there.
Outcome angle_optimization() {
  const auto r = optimize_angles(0.4);
  const auto& q = r.quad;
  const double gaps[4] = {angular_gap_deg(q.theta1, 72.24), angular_gap_deg(q.theta1_prime, 17.76),
                          angular_gap_deg(q.theta2, 45.0), angular_gap_deg(q.theta2_prime, 0.0)};
  const double worst = *std::max_element(gaps, gaps + 4);
  const double at_reference = ch_quantum(State(0.4), kReferenceQuad).total;
  return {worst <= 0.5 && r.ch_max >= at_reference,
          fmt("quad=(%.3f, %.3f, %.3f, %.3f) deg, max gap %.3f deg, ch_max=%.8f >= %.8f", rad_to_deg(q.theta1),
              rad_to_deg(q.theta1_prime), rad_to_deg(q.theta2), rad_to_deg(q.theta2_prime), worst, r.ch_max, at_reference)};
}

// 3. Critical efficiencies: f = 1 against the dense grid and 2(sqrt2 - 1),
//    f = 0.01 below 0.70, monotone decrease toward 2/3.
Outcome efficiency_thresholds() {
  const double grid = oracle::grid_critical_efficiency(1.0, 0.5, true);
  const std::array<double, 5> fs = {1.0, 0.7, 0.4, 0.1, 0.01};
  std::array<double, 5> eta{};
  for (std::size_t i = 0; i < fs.size(); ++i) eta[i] = critical_efficiency(fs[i]).eta_crit;
  bool monotone = true;
  for (std::size_t i = 1; i < fs.size(); ++i) monotone = monotone && eta[i] < eta[i - 1];
  const bool f1 = std::abs(eta[0] - 0.8284) <= 0.005 && std::abs(grid - 0.8284) <= 0.005 && std::abs(eta[0] - grid) <= 0.005;
  const bool low = eta[4] < 0.70 && eta[4] > 2.0 / 3.0 - 1e-3;
  return {f1 && low && monotone,
          fmt("eta_crit f=1:%.4f (grid %.4f) 0.7:%.4f 0.4:%.4f 0.1:%.4f 0.01:%.4f", eta[0], grid, eta[1], eta[2], eta[3], eta[4])};
}

// 4. LHV bound: 16 strategies max 0, 1e5 random mixtures <= 1e-12.
Outcome lhv_bound() {
  int best = -100;
  for (const auto& s : all_strategies()) best = std::max(best, ch_deterministic(s));
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> expo(1.0);
  double worst = -10.0;
  for (int trial = 0; trial < 100000; ++trial) {
    std::array<double, 16> w;
    double sum = 0.0;
    for (auto& x : w) sum += (x = expo(rng));
    for (auto& x : w) x /= sum;
    worst = std::max(worst, ch_mixture(LhvMixture(w)));
  }
  return {best == 0 && worst <= 1e-12, fmt("max deterministic CH=%d, max mixture CH=%.3e", best, worst)};
}

// 5. Simulated violation at 1e4 pairs/s x 1 s per setting, seeds 0..99.
Outcome simulated_violation() {
  SourceConfig quantum;
  quantum.model = State(0.4);
  quantum.pair_rate = 1e4;
  quantum.duration = 1.0;
  SourceConfig malus = quantum;
  malus.model = MalusModel{};
  const double window = 1e-9;

  int significant = 0;
  int malus_ok = 0;
  bool error_law = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto q = run_ch_experiment(quantum, DetectorModel{}, kReferenceQuad, window, seed);
    std::int64_t sum = 0;
    for (const auto& run : q.runs) sum += run.n_coinc;
    error_law = error_law && q.ch.sigma == std::sqrt(double(sum));
    significant += q.ch.decomposition.total > 0 && q.ch.significance > 5.0;
    const auto m = run_ch_experiment(malus, DetectorModel{}, kReferenceQuad, window, seed);
    malus_ok += double(m.ch.decomposition.total) <= 3.0 * m.ch.sigma;
  }
  return {significant >= 95 && malus_ok == 100 && error_law,
          fmt("quantum: %d/100 seeds > 5 sigma (need >= 95); Malus: %d/100 seeds <= +3 sigma (need 100)", significant, malus_ok)};
}

// 6. Dark-only accidental coincidences against S1 S2 window, pooled over 100 seeds.
Outcome accidental_coincidences() {
  SourceConfig src;
  src.pair_rate = 1e-9;  // effectively no pairs
  src.duration = 2.0;
  DetectorModel det;
  det.dark1 = 5e4;
  det.dark2 = 5e4;
  const double window = 1e-8;
  double observed = 0.0;
  double expected = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto log = simulate_run(src, det, Setting::degrees(0), Setting::degrees(0), seed);
    const auto c = count_coincidences(log, window);
    observed += double(c.n_coinc);
    expected += accidental_rate(double(c.singles1) / src.duration, double(c.singles2) / src.duration, window) * src.duration;
  }
  const double nominal = 100 * accidental_rate(det.dark1, det.dark2, window) * src.duration;
  const double sigma = std::sqrt(expected);
  return {std::abs(observed - expected) <= 3.0 * sigma && std::abs(observed - nominal) <= 3.0 * std::sqrt(nominal),
          fmt("coincidences %.0f vs S1*S2*w*T %.1f (nominal %.1f), 3 sigma = %.1f", observed, expected, nominal, 3 * sigma)};
}

// 7. SED: round trip on 1e3 random sets, eight monotonicity directions, verdict.
Outcome sed_analysis() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_u(-1.0, 1.0);
  std::uniform_real_distribution<double> eff(0.01, 0.99);
  std::uniform_real_distribution<double> grow(1.01, 3.0);
  auto spread = [&](double x) { return x * std::pow(10.0, log_u(rng)); };
  double worst_rel = 0.0;
  int monotone_failures = 0;
  int verdict_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SedParams p;
    p.geometry = {eff(rng), spread(0.12), spread(2.5e-3), spread(1e-12), spread(1.0), spread(700e-9), spread(1e-5)};
    p.absorption_time = spread(1e-8);
    const double rate = sed_rate_threshold(p);
    worst_rel = std::max(worst_rel, std::abs(sed_implied_T(p.geometry, rate) - p.absorption_time) / p.absorption_time);

    const double base = rate;
    auto bumped = [&](auto mutate) {
      SedParams q = p;
      mutate(q);
      return sed_rate_threshold(q);
    };
    const double k = grow(rng);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.eta = std::min(1.0, q.geometry.eta * k); }) > base);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.focal_length *= k; }) > base);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.source_radius *= k; }) > base);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.detector_depth *= k; }) < base);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.distance *= k; }) < base);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.wavelength *= k; }) < base);
    monotone_failures += !(bumped([&](SedParams& q) { q.geometry.coherence_time *= k; }) < base);
    monotone_failures += !(bumped([&](SedParams& q) { q.absorption_time *= k; }) < base);

    std::uniform_real_distribution<double> decades(-6.0, 6.0);
    const double observed = sed_rate_threshold(SedParams{p.geometry, kSedMaxAbsorptionTime}) * std::pow(10.0, decades(rng));
    const auto v = sed_verdict(p.geometry, observed, true);
    verdict_failures += v.falsified != (v.implied_T_min > kSedMaxAbsorptionTime);
  }
  return {worst_rel <= 1e-12 && monotone_failures == 0 && verdict_failures == 0,
          fmt("round-trip max rel err %.2e, monotonicity failures %d, verdict failures %d", worst_rel, monotone_failures,
              verdict_failures)};
}

// 8. dBB: P(X >= 78 | 1) < 1e-50; (2, 3) against 50-digit summation.
Outcome dbb_significance() {
  const double p78 = dbb_semiplane_pvalue(78, 1.0);
  const double p23 = dbb_semiplane_pvalue(2, 3.0);
  const double exact23 = double(oracle::poisson_upper_tail(2, 3));
  const double exact78 = double(oracle::poisson_upper_tail_direct(78, 1));
  return {p78 < 1e-50 && std::abs(p23 - exact23) <= 1e-4 && std::abs(p23 - 0.8009) <= 1e-4 &&
              std::abs(p78 - exact78) <= 1e-12 * exact78,
          fmt("p(78|1)=%.6e (exact %.6e), p(2|3)=%.6f (exact %.6f)", p78, exact78, p23, exact23)};
}

std::string run_command(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  pclose(pipe);
  return out;
}

// 9. Seeded CLI invocations are byte-identical across runs and thread counts.
Outcome cli_determinism() {
  const std::string cli = BELLSIM_CLI_PATH;
  const std::string cfg = std::string(BELLSIM_SOURCE_DIR) + "/configs/";
  const std::vector<std::string> commands = {
      "simulate --config " + cfg + "reference_quad.json --seed 42",
      "simulate --config " + cfg + "realistic_detectors.json --seed 7",
      "simulate --config " + cfg + "malus.json --seed 3",
      "optimize --f 0.4",
      "threshold --f 0.7",
  };
  int mismatches = 0;
  for (const auto& c : commands) {
    const auto a = run_command(cli + " " + c + " --threads 1");
    const auto b = run_command(cli + " " + c + " --threads 1");
    const auto t = run_command(cli + " " + c + " --threads 4");
    if (a.empty() || a != b || a != t) ++mismatches;
  }
  return {mismatches == 0, fmt("%d of %zu seeded commands differed across runs/thread counts", mismatches, commands.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 CH value at f=0.4 settings", ch_at_reference_settings},
      {"2 angle optimization", angle_optimization},
      {"3 efficiency thresholds", efficiency_thresholds},
      {"4 LHV bound", lhv_bound},
      {"5 simulated violation", simulated_violation},
      {"6 accidental coincidences", accidental_coincidences},
      {"7 SED analysis", sed_analysis},
      {"8 dBB significance", dbb_significance},
      {"9 CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt("%.2f s", secs) << "] " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed;
}
