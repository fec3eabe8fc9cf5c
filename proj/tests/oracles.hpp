// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used only by the tests. Each one is written
// independently of the library code it checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Hodgkin-Huxley sodium rates, written with expm1 and long double.
inline double a_m(double v) {
  const long double w = 2.5L - 0.1L * v;
  if (w == 0.0L) return 1.0;
  return static_cast<double>(w / std::expm1(w));
}
inline double b_m(double v) { return static_cast<double>(4.0L * std::exp(-static_cast<long double>(v) / 18.0L)); }
inline double a_h(double v) { return static_cast<double>(0.07L * std::exp(-static_cast<long double>(v) / 20.0L)); }
inline double b_h(double v) { return static_cast<double>(1.0L / (std::exp(3.0L - 0.1L * v) + 1.0L)); }

// Stationary law of the m-gate birth-death ladder: Binomial(3, a/(a+b)).
inline std::vector<double> m_ladder_law(double v) {
  const double p = a_m(v) / (a_m(v) + b_m(v));
  const double q = 1.0 - p;
  return {q * q * q, 3.0 * p * q * q, 3.0 * p * p * q, p * p * p};
}

// Markov-chain-tree theorem: mu(k) is proportional to the total weight of
// spanning trees directed towards k. Rates are given as a dense n x n
// row-major matrix of off-diagonal intensities. Exponential in n; meant for n <= 5.
inline std::vector<double> tree_stationary(const std::vector<double>& rates, std::size_t n) {
  std::vector<double> weight(n, 0.0);
  std::vector<std::size_t> parent(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    std::function<void(std::size_t)> assign = [&](std::size_t node) {
      if (node == n) {
        // Every node must reach the root through its parent chain.
        for (std::size_t s = 0; s < n; ++s) {
          std::size_t cur = s;
          for (std::size_t steps = 0; steps <= n && cur != root; ++steps) cur = parent[cur];
          if (cur != root) return;
        }
        double w = 1.0;
        for (std::size_t s = 0; s < n; ++s) {
          if (s != root) w *= rates[s * n + parent[s]];
        }
        weight[root] += w;
        return;
      }
      if (node == root) {
        assign(node + 1);
        return;
      }
      for (std::size_t p = 0; p < n; ++p) {
        if (p == node || rates[node * n + p] <= 0.0) continue;
        parent[node] = p;
        assign(node + 1);
      }
    };
    assign(0);
  }
  double total = 0.0;
  for (double w : weight) total += w;
  for (double& w : weight) w /= total;
  return weight;
}

// Exact heat-equation eigenmode on [0, 1] with Dirichlet ends.
inline double heat_mode(int k, double k_diff, double t, double x) {
  const double w = k * std::numbers::pi;
  return std::exp(-k_diff * w * w * t) * std::sin(w * x);
}

}  // namespace oracle
