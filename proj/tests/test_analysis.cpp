// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "pdmpaxon/analysis.hpp"
#include "pdmpaxon/error.hpp"

using namespace pdmpaxon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Runtime;
}

SimConfig small_config(const std::string& scheme, std::uint64_t seed) {
  SimConfig cfg;
  cfg.scheme = scheme;
  cfg.N = 5;
  cfg.M = 10;
  cfg.k_diff = 0.05;
  cfg.T = 1.0;
  cfg.dt = 0.01;
  cfg.u0 = "sine:1";
  cfg.seed = seed;
  return cfg;
}

// Joint fast generator built entry by entry from the scheme's rate functions.
std::vector<double> joint_generator(const KineticScheme& s, const Field& u) {
  const std::size_t channels = u.grid().num_channels();
  const std::size_t e = s.num_states();
  std::size_t dim = 1;
  for (std::size_t c = 0; c < channels; ++c) dim *= e;
  std::vector<double> b(dim * dim, 0.0);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t rest = idx;
    std::size_t stride = 1;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t from = rest % e;
      rest /= e;
      for (std::size_t to = 0; to < e; ++to) {
        if (to == from || s.class_of(to) != s.class_of(from)) continue;
        const RateFunction* rate = s.rate(from, to);
        if (rate == nullptr) continue;
        const std::size_t target = idx - from * stride + to * stride;
        const double r = (*rate)(u.at_channel(c));
        b[idx * dim + target] += r;
        b[idx * dim + idx] -= r;
      }
      stride *= e;
    }
  }
  return b;
}

}  // namespace

TEST_CASE("defect vanishes when every state carries the same current", "[analysis]") {
  const auto flat = flat2_scheme();
  auto cfg = small_config("flat2", 3);
  const auto traj = simulate_full(flat, cfg);
  REQUIRE(!traj.jumps.empty());
  const auto d = defect_series(traj, TestFunction::sine(1), flat);
  REQUIRE(d.values.size() == traj.snapshots.size());
  // Zero up to round-off in the quasi-stationary average.
  for (double x : d.values) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("defect starts at zero and is zero for a zero test function", "[analysis]") {
  const auto na = na8_scheme();
  auto cfg = small_config("na8", 4);
  cfg.u0 = "sine:40";
  cfg.k_diff = kCableDiffusion;
  cfg.dt = admissible_dt(cfg, na);
  cfg.snapshot_stride = 1;
  const auto traj = simulate_full(na, cfg);
  const auto d = defect_series(traj, TestFunction::sine(1), na);
  CHECK(d.times.front() == 0.0);
  CHECK(d.values.front() == 0.0);
  for (double x : defect_series(traj, TestFunction::zero(), na).values) CHECK(x == 0.0);
}

TEST_CASE("defect of a frozen two-state channel equals the occupation excess", "[analysis]") {
  // One channel at 1/2, frozen u = 0: the integrand is (1/2) (1_open - 1/2) phi(1/2).
  const auto toy = toy2_scheme();
  SimConfig cfg;
  cfg.scheme = "toy2";
  cfg.N = 2;
  cfg.M = 2;
  cfg.dt = 0.5;
  cfg.T = 50.0;
  cfg.frozen_voltage = 0.0;
  cfg.snapshot_stride = 1;
  cfg.seed = 8;
  const auto traj = simulate_full(toy, cfg);
  REQUIRE(traj.jumps.size() > 20);

  std::size_t state = traj.initial[0];
  double since = 0.0;
  double open_time = 0.0;
  for (const auto& j : traj.jumps) {
    if (state == 1) open_time += j.time - since;
    since = j.time;
    state = j.to;
  }
  if (state == 1) open_time += cfg.T - since;
  const double expected = 0.5 * (open_time - 0.5 * cfg.T);
  const auto d = defect_series(traj, TestFunction::sine(1), toy);
  CHECK_THAT(d.values.back(), WithinAbs(expected, 1e-10));
}

TEST_CASE("time-averaged defect vanishes for an ergodic fast process", "[analysis][property]") {
  // For the frozen two-state chain the time average of the integrand tends to zero.
  const auto toy = toy2_scheme();
  SimConfig cfg;
  cfg.scheme = "toy2";
  cfg.N = 2;
  cfg.M = 2;
  cfg.dt = 1.0;
  cfg.T = 20000.0;
  cfg.frozen_voltage = 0.0;
  cfg.snapshot_stride = 100000;
  cfg.seed = 10;
  const auto d = defect_series(simulate_full(toy, cfg), TestFunction::sine(1), toy);
  CHECK(std::abs(d.values.back()) / cfg.T < 0.01);
}

TEST_CASE("defect_series rejects averaged paths", "[analysis]") {
  auto cfg = small_config("toy2", 1);
  cfg.model = ModelKind::Averaged;
  const auto toy = toy2_scheme();
  const auto traj = simulate_averaged(toy, cfg);
  CHECK(kind_of([&] { defect_series(traj, TestFunction::sine(1), toy); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("sweep reports a degenerate zero defect", "[analysis]") {
  const auto flat = flat2_scheme();
  const std::vector<double> ladder{0.5, 0.1};
  const auto report = epsilon_sweep(flat, small_config("flat2", 2), ladder, 10, TestFunction::sine(1), 1);
  CHECK(report.degenerate);
  CHECK(std::isnan(report.slope));
  REQUIRE(report.rows.size() == 2);
  for (const auto& r : report.rows) CHECK(r.mean_sq < 1e-20);
  CHECK(report.seeds.size() == 10);
  CHECK(report.seeds[3] == member_seed(2, 3));
}

TEST_CASE("sweep input validation", "[analysis]") {
  const auto toy = toy2_scheme();
  const auto cfg = small_config("toy2", 1);
  const auto phi = TestFunction::sine(1);
  const std::vector<double> ok{0.5, 0.1};
  const std::vector<double> rising{0.1, 0.5};
  const std::vector<double> too_small{0.5, 1e-4};
  CHECK(kind_of([&] { epsilon_sweep(toy, cfg, ok, 9, phi, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { epsilon_sweep(toy, cfg, rising, 10, phi, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { epsilon_sweep(toy, cfg, too_small, 10, phi, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { epsilon_sweep(toy, cfg, std::vector<double>{}, 10, phi, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("sweep results do not depend on the thread count", "[analysis]") {
  const auto toy = toy2_scheme();
  const std::vector<double> ladder{0.5, 0.2};
  const auto a = epsilon_sweep(toy, small_config("toy2", 5), ladder, 12, TestFunction::sine(1), 1);
  const auto b = epsilon_sweep(toy, small_config("toy2", 5), ladder, 12, TestFunction::sine(1), 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) CHECK(a.rows[k].mean_sq == b.rows[k].mean_sq);
  CHECK(a.slope == b.slope);
}

TEST_CASE("sweep ordering helpers", "[analysis]") {
  SweepReport r{};
  r.rows = {{0.5, 1.0, 0.1, 10}, {0.1, 0.5, 0.1, 10}, {0.02, 0.55, 0.1, 10}};
  CHECK_FALSE(r.strictly_decreasing());
  CHECK(r.non_increasing_within(1.0));
  CHECK_FALSE(r.non_increasing_within(0.1));
  r.rows[2].mean_sq = 0.1;
  CHECK(r.strictly_decreasing());
}

TEST_CASE("occupation of a single-state class is exact", "[analysis]") {
  const KineticScheme split("split", {{"a", 0, 0.0, 0.0}, {"b", 1, 0.0, 0.0}, {"c", 1, 0.0, 0.0}},
                            {{0, 1, RateFunction::constant(1.0)},
                             {1, 0, RateFunction::constant(1.0)},
                             {1, 2, RateFunction::constant(2.0)},
                             {2, 1, RateFunction::constant(1.0)}});
  const auto rep = occupation_error(split, 0.0, 0.1, 200.0, 4, 3);
  REQUIRE(rep.tv.size() == 2);
  CHECK(rep.tv[0] == 0.0);
  CHECK(rep.tv[1] < 0.05);
  CHECK_THAT(rep.class_time[0] + rep.class_time[1], WithinRel(600.0, 1e-12));
}

TEST_CASE("occupation error shrinks with eps", "[analysis][property]") {
  const auto na = na8_scheme();
  const auto coarse = occupation_error(na, 0.0, 0.5, 100.0, 1, 19);
  const auto fine = occupation_error(na, 0.0, 0.01, 100.0, 1, 19);
  CHECK(fine.jumps > coarse.jumps);
  for (std::size_t j = 0; j < 2; ++j) CHECK(fine.tv[j] < coarse.tv[j]);
}

TEST_CASE("weak comparison validation and the single-class case", "[analysis]") {
  const auto na4 = na4m_scheme();
  auto full = small_config("na4m", 6);
  full.k_diff = kCableDiffusion;
  full.u0 = "sine:30";
  full.N = 4;
  full.M = 8;
  full.dt = admissible_dt(full, na4);
  full.T = 0.5;
  full.snapshot_stride = 1;
  auto avg = full;
  avg.model = ModelKind::Averaged;
  const std::vector<double> ladder{0.5, 0.05};
  const auto phi = TestFunction::sine(1);

  auto other = avg;
  other.M = 16;
  CHECK(kind_of([&] { weak_compare(na4, full, ladder, other, phi, 0.5, 10, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { weak_compare(na4, full, ladder, avg, phi, 0.75, 10, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { weak_compare(na4, full, ladder, avg, phi, 0.123456, 10, 1); }) == ErrorKind::InvalidArgument);

  // The averaged model is deterministic for a single class.
  const auto rep = weak_compare(na4, full, ladder, avg, phi, full.T, 20, 1);
  CHECK(rep.std_error_avg == 0.0);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) CHECK_THAT(r.diff, WithinAbs(std::abs(r.mean - rep.mean_avg), 1e-15));
}

TEST_CASE("Poisson solution for a single two-state channel", "[analysis]") {
  // Hand solution: mu = (1/2, 1/2), rhs = (-1/4, 1/4), f = (1/8, -1/8).
  const Grid g(2, 2);
  const auto sol = poisson_solve(toy2_scheme(), Field::zero(g), TestFunction::sine(1));
  REQUIRE(sol.f.size() == 2);
  CHECK_THAT(sol.rhs[0], WithinAbs(-0.25, 1e-15));
  CHECK_THAT(sol.rhs[1], WithinAbs(0.25, 1e-15));
  CHECK_THAT(sol.f[0], WithinAbs(0.125, 1e-12));
  CHECK_THAT(sol.f[1], WithinAbs(-0.125, 1e-12));
  CHECK(sol.kernel_dim == 1);
  CHECK(sol.residual < 1e-12);
}

TEST_CASE("Poisson solution with a zero test function is zero", "[analysis]") {
  const Grid g(6, 3);
  const auto u = Field::sample(g, [](double x) { return 20.0 * x * (1 - x); });
  const auto sol = poisson_solve(na8_scheme(), u, TestFunction::zero());
  for (double f : sol.f) CHECK(f == 0.0);
}

TEST_CASE("Poisson solution solves the joint fast generator system", "[analysis][property]") {
  const Grid g(6, 3);
  const auto u = Field::sample(g, [](double x) { return 80.0 * std::sin(std::numbers::pi * x); });
  for (const auto& scheme : {na4m_scheme(), na8_scheme()}) {
    const auto sol = poisson_solve(scheme, u, TestFunction::sine(1));
    const auto b = joint_generator(scheme, u);
    const std::size_t dim = sol.f.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += b[i * dim + j] * sol.f[j];
      worst = std::max(worst, std::abs(acc - sol.rhs[i]));
    }
    CHECK(worst < 1e-10);
    CHECK(sol.residual < 1e-10);
    for (double c : sol.centerings) CHECK(std::abs(c) < 1e-10);
    CHECK(sol.uniqueness_gap < 1e-8);
    CHECK(sol.kernel_dim == std::pow(scheme.num_classes(), 2));
  }
}

TEST_CASE("Fredholm condition holds on random instances", "[analysis][property]") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> amp(-20.0, 130.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const int which = pick(gen);
    const KineticScheme s = which == 0 ? na8_scheme() : which == 1 ? na4m_scheme() : toy2_scheme(0.3, 2.5);
    const std::size_t n = which == 2 ? 6 : 3;
    const Grid g(2 * n, n);
    std::vector<double> v(g.nodes(), 0.0);
    for (std::size_t q = 1; q + 1 < v.size(); ++q) v[q] = amp(gen);
    const Field u(g, v);
    const int k = 1 + trial % 3;
    for (double p : fredholm_products(s, u, TestFunction::sine(k))) CHECK(std::abs(p) < 1e-12);
  }
}

TEST_CASE("Poisson solver refuses oversized joint spaces", "[analysis]") {
  const Grid g(6, 6);
  CHECK(kind_of([&] { poisson_solve(na8_scheme(), Field::zero(g), TestFunction::sine(1)); }) ==
        ErrorKind::InvalidArgument);
}
