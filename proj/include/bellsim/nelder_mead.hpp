#pragma once

// Derivative-free Nelder-Mead maximizer over fixed-size Eigen vectors.

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace bellsim {

struct NelderMeadOptions {
  double initial_step = 0.1;      // simplex edge along each axis
  double x_tolerance = 1e-4;      // max vertex distance from the best vertex
  double f_tolerance = 1e-15;     // spread of objective values, relative to 1 + |best|
  int max_iterations = 10000;
};

template <int N>
struct NelderMeadResult {
  Eigen::Matrix<double, N, 1> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximizes `objective` starting from a simplex spanned by `start` and
/// `start + step * e_i`. The start vertex is kept until something better is
/// found, so the returned value is never below objective(start).
template <int N, typename Objective>
NelderMeadResult<N> nelder_mead_maximize(Objective&& objective, const Eigen::Matrix<double, N, 1>& start,
                                         const NelderMeadOptions& opts = {}) {
  using Vec = Eigen::Matrix<double, N, 1>;
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  std::array<Vec, N + 1> vertex;
  std::array<double, N + 1> value;
  vertex[0] = start;
  value[0] = objective(start);
  for (int i = 0; i < N; ++i) {
    vertex[i + 1] = start;
    vertex[i + 1][i] += opts.initial_step;
    value[i + 1] = objective(vertex[i + 1]);
  }

  std::array<int, N + 1> order;
  NelderMeadResult<N> result;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    // Descending by value; ties keep the lower index so runs are reproducible.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return value[a] > value[b]; });
    const int best = order[0];
    const int worst = order[N];
    const int second_worst = order[N - 1];

    double spread = 0.0;
    for (int i = 1; i <= N; ++i) {
      spread = std::max(spread, (vertex[order[i]] - vertex[best]).template lpNorm<Eigen::Infinity>());
    }
    const double f_spread = value[best] - value[worst];
    if (spread <= opts.x_tolerance && f_spread <= opts.f_tolerance * (1.0 + std::abs(value[best]))) {
      result.converged = true;
      break;
    }

    Vec centroid = Vec::Zero();
    for (int i = 0; i < N; ++i) centroid += vertex[order[i]];
    centroid /= double(N);

    const Vec reflected = centroid + kReflect * (centroid - vertex[worst]);
    const double f_reflected = objective(reflected);
    if (f_reflected > value[best]) {
      const Vec expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = objective(expanded);
      if (f_expanded > f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected > value[second_worst]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected > value[worst];
    const Vec contracted = outside ? Vec(centroid + kContract * (reflected - centroid))
                                   : Vec(centroid + kContract * (vertex[worst] - centroid));
    const double f_contracted = objective(contracted);
    if (f_contracted > (outside ? f_reflected : value[worst])) {
      vertex[worst] = contracted;
      value[worst] = f_contracted;
      continue;
    }
    for (int i = 1; i <= N; ++i) {
      const int k = order[i];
      vertex[k] = vertex[best] + kShrink * (vertex[k] - vertex[best]);
      value[k] = objective(vertex[k]);
    }
  }

  int best = 0;
  for (int i = 1; i <= N; ++i) {
    if (value[i] > value[best]) best = i;
  }
  result.x = vertex[best];
  result.value = value[best];
  result.iterations = iter;
  return result;
}

}  // namespace bellsim
