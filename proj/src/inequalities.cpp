#include "bellsim/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "bellsim/nelder_mead.hpp"
#include "bellsim/parallel.hpp"

namespace bellsim {

CountsCH ch_from_counts(const std::array<std::int64_t, 6>& counts) {
  std::int64_t sum = 0;
  for (auto n : counts) {
    if (n < 0) throw InvalidArgument("ch_from_counts: counts must be nonnegative");
    sum += n;
  }
  CountsCH out;
  out.decomposition = make_ch_decomposition(counts);
  out.sigma = std::sqrt(double(sum));
  out.significance = out.sigma > 0.0 ? double(out.decomposition.total) / out.sigma : 0.0;
  return out;
}

namespace {

constexpr double kPiD = std::numbers::pi;
// Gauge-fixed optimum accepted if within this of the free optimum.
constexpr double kGaugeValueTolerance = 1e-9;
constexpr double kDistinctAngleTolerance = 1e-3;
constexpr double kDistinctValueTolerance = 1e-9;

double circular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kPiD);
  return std::min(d, kPiD - d);
}

bool same_quad(const Quad& a, const Quad& b, double tol) {
  return circular_distance(a.theta1, b.theta1) < tol && circular_distance(a.theta1_prime, b.theta1_prime) < tol &&
         circular_distance(a.theta2, b.theta2) < tol && circular_distance(a.theta2_prime, b.theta2_prime) < tol;
}

double ch_total(const State& state, double eta, double t1, double t1p, double t2, double t2p) {
  return ch_quantum(state, Quad{t1, t1p, t2, t2p}, eta).total;
}

std::vector<double> grid_axis(double pitch_deg) {
  if (!(pitch_deg > 0.0 && pitch_deg <= 180.0)) throw InvalidArgument("grid pitch must lie in (0, 180] degrees");
  const int n = std::max(1, int(std::lround(180.0 / pitch_deg)));
  std::vector<double> axis(n);
  for (int i = 0; i < n; ++i) axis[i] = deg_to_rad(pitch_deg * i);
  return axis;
}

// Indices of the k largest values, ties broken by lower index.
std::vector<std::size_t> top_k(const std::vector<double>& values, std::size_t k) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + std::ptrdiff_t(k), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  });
  idx.resize(k);
  return idx;
}

template <int N>
std::vector<NelderMeadResult<N>> refine_all(const std::vector<Eigen::Matrix<double, N, 1>>& starts,
                                            const std::function<double(const Eigen::Matrix<double, N, 1>&)>& objective,
                                            const AngleSearchConfig& config) {
  NelderMeadOptions opts;
  opts.x_tolerance = config.angle_tolerance;
  opts.max_iterations = config.max_iterations;
  std::vector<NelderMeadResult<N>> results(starts.size());
  parallel_for(starts.size(), config.threads,
               [&](std::size_t i) { results[i] = nelder_mead_maximize<N>(objective, starts[i], opts); });
  return results;
}

void validate_config(const AngleSearchConfig& config) {
  if (config.restarts < 0) throw InvalidArgument("restarts must be >= 0");
  if (!(config.angle_tolerance > 0.0)) throw InvalidArgument("angle tolerance must be > 0");
  if (config.max_iterations <= 0) throw InvalidArgument("max_iterations must be > 0");
}

// Best quad on the slice theta2' = 0. For f != 1 the CH maximum is a
// one-parameter family of quads and this slice picks one member of it.
std::optional<AngleOptimum> gauge_fixed_optimum(const State& state, double eta, const Quad& free_best,
                                                const AngleSearchConfig& config) {
  using Vec3 = Eigen::Vector3d;
  const auto axis = grid_axis(config.grid_pitch_deg);
  const std::size_t n = axis.size();
  std::vector<double> values(n * n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) values[(i * n + j) * n + k] = ch_total(state, eta, axis[i], axis[j], axis[k], 0.0);

  std::vector<Vec3> starts;
  starts.emplace_back(free_best.theta1 - free_best.theta2_prime, free_best.theta1_prime - free_best.theta2_prime,
                      free_best.theta2 - free_best.theta2_prime);
  for (std::size_t idx : top_k(values, std::size_t(std::max(config.restarts, 1)))) {
    starts.emplace_back(axis[idx / (n * n)], axis[(idx / n) % n], axis[idx % n]);
  }
  const std::function<double(const Vec3&)> objective = [&](const Vec3& x) {
    return ch_total(state, eta, x[0], x[1], x[2], 0.0);
  };
  const auto results = refine_all<3>(starts, objective, config);

  std::optional<AngleOptimum> best;
  for (const auto& r : results) {
    if (!r.converged) continue;
    if (!best || r.value > best->ch) best = AngleOptimum{canonical_quad(Quad::radians(r.x[0], r.x[1], r.x[2], 0.0)), r.value};
  }
  return best;
}

}  // namespace

Quad canonical_quad(const Quad& q) {
  Quad c = Quad::radians(q.theta1, q.theta1_prime, q.theta2, q.theta2_prime);
  if (c.theta2 > kPiD / 2) {
    c = Quad::radians(kPiD - c.theta1, kPiD - c.theta1_prime, kPiD - c.theta2, kPiD - c.theta2_prime);
  }
  return c;
}

AngleSearchResult optimize_angles(double f, double eta, const AngleSearchConfig& config) {
  const State state(f);
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("optimize_angles: eta must lie in (0, 1]");
  validate_config(config);

  using Vec4 = Eigen::Vector4d;
  const auto axis = grid_axis(config.grid_pitch_deg);
  const std::size_t n = axis.size();
  std::vector<double> values(n * n * n * n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          values[((i * n + j) * n + k) * n + l] = ch_total(state, eta, axis[i], axis[j], axis[k], axis[l]);
  });

  std::vector<Vec4> starts;
  double best_seed_value = -std::numeric_limits<double>::infinity();
  for (const auto& seed : config.seeds) {
    starts.push_back(seed.as_vector());
    best_seed_value = std::max(best_seed_value, ch_quantum(state, seed, eta).total);
  }
  for (std::size_t idx : top_k(values, std::size_t(config.restarts))) {
    starts.emplace_back(axis[idx / (n * n * n)], axis[(idx / (n * n)) % n], axis[(idx / n) % n], axis[idx % n]);
  }
  if (starts.empty()) throw InvalidArgument("optimize_angles: no restarts and no seeds");

  const std::function<double(const Vec4&)> objective = [&](const Vec4& x) {
    return ch_total(state, eta, x[0], x[1], x[2], x[3]);
  };
  const auto results = refine_all<4>(starts, objective, config);

  AngleSearchResult out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].converged) ++out.converged_restarts;
    if (results[i].value > results[best].value) best = i;
  }
  if (out.converged_restarts == 0) {
    throw ConvergenceError("optimize_angles: no restart met the angle tolerance within the iteration limit");
  }
  out.quad = canonical_quad(Quad::from_vector(results[best].x));
  out.ch_max = results[best].value;

  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].value > results[b].value; });
  for (std::size_t i : order) {
    if (!results[i].converged) continue;
    const AngleOptimum candidate{canonical_quad(Quad::from_vector(results[i].x)), results[i].value};
    const bool seen = std::any_of(out.distinct_optima.begin(), out.distinct_optima.end(), [&](const AngleOptimum& o) {
      return std::abs(o.ch - candidate.ch) < kDistinctValueTolerance &&
             same_quad(o.quad, candidate.quad, kDistinctAngleTolerance);
    });
    if (!seen) out.distinct_optima.push_back(candidate);
  }

  if (config.canonicalize) {
    const auto gauge = gauge_fixed_optimum(state, eta, out.quad, config);
    if (gauge && gauge->ch >= out.ch_max - kGaugeValueTolerance && gauge->ch >= best_seed_value) {
      out.quad = gauge->quad;
      out.ch_max = gauge->ch;
    }
  }
  return out;
}

EfficiencyThresholdResult critical_efficiency(double f, const ThresholdConfig& config) {
  if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("critical_efficiency: f must lie in (0, 1]");
  if (!(config.tolerance > 0.0)) throw InvalidArgument("critical_efficiency: tolerance must be > 0");
  if (!(config.lower_eta > 0.0 && config.lower_eta < 1.0)) {
    throw InvalidArgument("critical_efficiency: lower_eta must lie in (0, 1)");
  }

  AngleSearchConfig search = config.search;
  search.canonicalize = false;
  auto run = [&](double eta) { return optimize_angles(f, eta, search); };

  EfficiencyThresholdResult out;
  auto upper = run(1.0);
  if (!(upper.ch_max > 0.0)) throw BracketError("critical_efficiency: no violation at eta = 1");
  // The lower end gets the eta = 1 optimum as an extra seed.
  search.seeds.push_back(upper.quad);
  const auto lower = run(config.lower_eta);
  if (lower.ch_max > 0.0) throw BracketError("critical_efficiency: violation already at the lower bracket end");

  double lo = config.lower_eta;
  double hi = 1.0;
  AngleSearchResult witness = upper;
  while (hi - lo > config.tolerance) {
    const double mid = 0.5 * (lo + hi);
    search.seeds = config.search.seeds;
    search.seeds.push_back(witness.quad);
    auto r = run(mid);
    if (r.ch_max > 0.0) {
      hi = mid;
      witness = std::move(r);
    } else {
      lo = mid;
    }
    ++out.bisection_steps;
  }
  out.eta_crit = 0.5 * (lo + hi);
  out.bracket = {lo, hi};
  out.witness_eta = hi;
  out.witness_quad = witness.quad;
  out.witness_ch = witness.ch_max;
  return out;
}

}  // namespace bellsim
