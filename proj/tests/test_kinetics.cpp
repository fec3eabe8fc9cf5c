// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "pdmpaxon/error.hpp"
#include "pdmpaxon/kinetics.hpp"
#include "pdmpaxon/scheme_file.hpp"

using namespace pdmpaxon;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> random_voltages(std::size_t count, double lo, double hi, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(count);
  for (auto& v : out) v = dist(gen);
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Runtime;
}

}  // namespace

TEST_CASE("eval_rate reproduces the sodium rate formulas", "[kinetics]") {
  CHECK(eval_rate(RateFunction::standard(RateKind::BetaM), 0.0) == 4.0);
  CHECK(eval_rate(RateFunction::standard(RateKind::AlphaH), 0.0) == Approx(0.07).epsilon(1e-15));
  // Frozen from the closed form 2.5 / (e^2.5 - 1).
  CHECK_THAT(eval_rate(RateFunction::standard(RateKind::AlphaM), 0.0), WithinRel(0.22356372458463003, 1e-14));
  CHECK_THAT(eval_rate(RateFunction::standard(RateKind::BetaH), 0.0), WithinRel(0.04742587317756678, 1e-14));

  for (double v : random_voltages(200, -50.0, 200.0, 1)) {
    CHECK_THAT(alpha_m(v), WithinRel(oracle::a_m(v), 1e-12));
    CHECK_THAT(beta_m(v), WithinRel(oracle::b_m(v), 1e-13));
    CHECK_THAT(alpha_h(v), WithinRel(oracle::a_h(v), 1e-13));
    CHECK_THAT(beta_h(v), WithinRel(oracle::b_h(v), 1e-13));
  }
}

TEST_CASE("a_m takes its limit at the removable singularity", "[kinetics]") {
  CHECK(alpha_m(25.0) == 1.0);
  for (double dv : {1e-12, 1e-9, 1e-6, 1e-4, 1e-3}) {
    CHECK_THAT(alpha_m(25.0 + dv), WithinRel(oracle::a_m(25.0 + dv), 1e-12));
    CHECK_THAT(alpha_m(25.0 - dv), WithinRel(oracle::a_m(25.0 - dv), 1e-12));
  }
  // Continuity across the series branch boundary.
  CHECK_THAT(alpha_m(25.0 + 1e-3 - 1e-12), WithinAbs(alpha_m(25.0 + 1e-3 + 1e-12), 1e-12));
}

TEST_CASE("rate functions are positive and finite on the voltage box", "[kinetics][property]") {
  for (auto kind : {RateKind::AlphaM, RateKind::BetaM, RateKind::AlphaH, RateKind::BetaH}) {
    const auto f = RateFunction::standard(kind);
    for (int k = 0; k <= 25000; ++k) {
      const double v = kVoltageBoxLow + (kVoltageBoxHigh - kVoltageBoxLow) * k / 25000.0;
      const double r = f(v);
      REQUIRE(std::isfinite(r));
      REQUIRE(r >= 0.0);
    }
  }
}

TEST_CASE("rate expressions parse and print", "[kinetics]") {
  CHECK(RateFunction::parse("3*a_m")(0.0) == Approx(3.0 * alpha_m(0.0)));
  CHECK(RateFunction::parse("b_h")(10.0) == Approx(beta_h(10.0)));
  CHECK(RateFunction::parse("0.5")(123.0) == 0.5);
  CHECK(RateFunction::parse(RateFunction::parse("2*b_m").to_string())(7.0) == Approx(2.0 * beta_m(7.0)));
  CHECK(kind_of([] { RateFunction::parse("c_q"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { RateFunction::parse("-1"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("full_generator on the sodium scheme", "[kinetics]") {
  const auto na = na8_scheme();
  const auto m0h0 = *na.find_state("m0h0");
  const auto m1h0 = *na.find_state("m1h0");
  const auto m0h1 = *na.find_state("m0h1");

  const auto g1 = full_generator(na, 0.0, 1.0);
  REQUIRE(g1.dim() == 8);
  CHECK_THAT(g1(m0h0, m1h0), WithinRel(3.0 * oracle::a_m(0.0), 1e-13));
  // Value quoted to six digits for the same entry.
  CHECK_THAT(g1(m0h0, m1h0), WithinAbs(0.670684, 1e-5));
  CHECK(g1.max_abs_row_sum() < 1e-12);
  CHECK(g1.is_generator());

  const auto g01 = full_generator(na, 0.0, 0.1);
  CHECK_THAT(g01(m0h0, m1h0), WithinRel(10.0 * g1(m0h0, m1h0), 1e-14));
  CHECK(g01(m0h0, m0h1) == Approx(0.07).epsilon(1e-14));
  CHECK(g01(m0h0, m0h1) == g1(m0h0, m0h1));

  CHECK(kind_of([&] { full_generator(na, 0.0, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { full_generator(na, 0.0, -1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("every produced generator has zero row sums", "[kinetics][property]") {
  for (const auto& name : builtin_scheme_names()) {
    const auto s = *builtin_scheme(name);
    for (double v : random_voltages(50, -20.0, 140.0, 2)) {
      for (double eps : {1.0, 0.3, 0.01}) {
        const auto g = full_generator(s, v, eps);
        CHECK(g.is_generator(1e-12));
      }
      for (std::size_t j = 0; j < s.num_classes(); ++j) CHECK(class_generator(s, j, v).is_generator(1e-12));
      CHECK(aggregated_generator(s, v).is_generator(1e-12));
    }
  }
}

TEST_CASE("class_generator is the m-gate ladder for both sodium classes", "[kinetics]") {
  const auto na = na8_scheme();
  for (double v : {0.0, 20.0, 60.0}) {
    const double a = oracle::a_m(v);
    const double b = oracle::b_m(v);
    const double expected[4][4] = {{-3 * a, 3 * a, 0, 0},
                                   {b, -b - 2 * a, 2 * a, 0},
                                   {0, 2 * b, -2 * b - a, a},
                                   {0, 0, 3 * b, -3 * b}};
    const auto g0 = class_generator(na, 0, v);
    const auto g1 = class_generator(na, 1, v);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK_THAT(g1(i, j), WithinAbs(expected[i][j], 1e-12));
        CHECK(g0(i, j) == g1(i, j));
      }
    }
  }
  CHECK(kind_of([&] { class_generator(na, 2, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("singleton classes give a 1x1 zero generator and a point mass", "[kinetics]") {
  const KineticScheme s("single", {{"a", 0, 1.0, 1.0}, {"b", 1, 0.0, 0.0}},
                        {{0, 1, RateFunction::constant(1.0)}, {1, 0, RateFunction::constant(2.0)}});
  const auto g = class_generator(s, 1, 0.0);
  REQUIRE(g.dim() == 1);
  CHECK(g(0, 0) == 0.0);
  const auto mu = quasi_stationary(s, 1, 0.0);
  REQUIRE(mu.dim() == 1);
  CHECK(mu[0] == 1.0);
}

TEST_CASE("stationary_distribution matches closed forms", "[kinetics]") {
  GeneratorMatrix g(2);
  g(0, 1) = 0.3;
  g(1, 0) = 1.7;
  g.fill_diagonal();
  const auto mu = stationary_distribution(g);
  CHECK_THAT(mu[0], WithinRel(1.7 / 2.0, 1e-14));
  CHECK_THAT(mu[1], WithinRel(0.3 / 2.0, 1e-14));

  const auto na4 = na4m_scheme();
  const auto law = stationary_distribution(class_generator(na4, 0, 0.0));
  const auto binom = oracle::m_ladder_law(0.0);
  for (int k = 0; k < 4; ++k) CHECK_THAT(law[k], WithinRel(binom[k], 1e-12));
  // Frozen: p^3 with p = a_m(0) / (a_m(0) + b_m(0)).
  CHECK_THAT(law[3], WithinRel(1.4830877771533144e-4, 1e-11));
  // Values quoted to six digits, p ~ 0.0529281 and mu(m3) ~ 1.48278e-4.
  CHECK_THAT(oracle::a_m(0.0) / (oracle::a_m(0.0) + 4.0), WithinRel(0.0529281, 2e-4));
  CHECK_THAT(law[3], WithinRel(1.48278e-4, 5e-4));
}

TEST_CASE("m3 mass equals the cubed steady-state activation", "[kinetics]") {
  const auto na4 = na4m_scheme();
  for (double v : random_voltages(100, -20.0, 140.0, 3)) {
    const auto law = stationary_distribution(class_generator(na4, 0, v));
    const double closed = 1.0 / std::pow(1.0 + oracle::b_m(v) / oracle::a_m(v), 3);
    CHECK_THAT(law[3], WithinAbs(closed, 1e-10));
  }
}

TEST_CASE("stationary_distribution residual is below 1e-10", "[kinetics][property]") {
  const auto na = na8_scheme();
  for (double v : random_voltages(100, -20.0, 140.0, 4)) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto g = class_generator(na, j, v);
      const auto mu = stationary_distribution(g);
      for (std::size_t c = 0; c < g.dim(); ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < g.dim(); ++r) acc += mu[r] * g(r, c);
        CHECK(std::abs(acc) < 1e-10);
      }
    }
  }
}

TEST_CASE("stationary_distribution agrees with the Markov-chain-tree formula", "[kinetics][property]") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> rate(0.01, 5.0);
  std::bernoulli_distribution present(0.7);
  int tested = 0;
  while (tested < 200) {
    const std::size_t n = 2 + tested % 3;
    GeneratorMatrix g(n);
    std::vector<double> rates(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && present(gen)) g(i, j) = rates[i * n + j] = rate(gen);
      }
    }
    g.fill_diagonal();
    if (communicating_classes(g).size() != 1) continue;
    const auto mu = stationary_distribution(g);
    const auto tree = oracle::tree_stationary(rates, n);
    for (std::size_t k = 0; k < n; ++k) CHECK_THAT(mu[k], WithinAbs(tree[k], 1e-10));
    ++tested;
  }
  // Sodium classes at random voltages.
  const auto na = na8_scheme();
  for (double v : random_voltages(30, -20.0, 140.0, 6)) {
    const auto g = class_generator(na, 1, v);
    std::vector<double> rates(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) rates[i * 4 + j] = i == j ? 0.0 : g(i, j);
    }
    const auto tree = oracle::tree_stationary(rates, 4);
    const auto mu = quasi_stationary(na, 1, v);
    for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(mu[k], WithinAbs(tree[k], 1e-10));
  }
}

TEST_CASE("reducible generators are rejected with their blocks named", "[kinetics]") {
  GeneratorMatrix g(3);
  g(0, 1) = 1.0;
  g(1, 0) = 1.0;
  g(2, 0) = 1.0;
  g.fill_diagonal();
  try {
    stationary_distribution(g);
    FAIL("expected a reducibility error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Reducible);
    const std::string msg = e.what();
    CHECK(msg.find("{0,1}") != std::string::npos);
    CHECK(msg.find("{2}") != std::string::npos);
  }
}

TEST_CASE("quasi_stationary on the sodium open class", "[kinetics]") {
  const auto na = na8_scheme();
  const auto m3h1 = *na.find_state("m3h1");
  REQUIRE(na.class_of(m3h1) == 1);
  for (double v : random_voltages(50, -20.0, 140.0, 7)) {
    const auto mu = quasi_stationary(na, 1, v);
    const double closed = 1.0 / std::pow(1.0 + oracle::b_m(v) / oracle::a_m(v), 3);
    CHECK_THAT(mu[na.index_in_class(m3h1)], WithinAbs(closed, 1e-12));
  }
  CHECK_THAT(quasi_stationary(na, 1, 0.0)[na.index_in_class(m3h1)], WithinRel(1.4830877771533144e-4, 1e-11));
}

TEST_CASE("aggregated sodium generator is the h-gate chain", "[kinetics]") {
  const auto na = na8_scheme();
  for (double v : random_voltages(100, -20.0, 140.0, 8)) {
    const auto g = aggregated_generator(na, v);
    REQUIRE(g.dim() == 2);
    CHECK_THAT(g(0, 0), WithinAbs(-oracle::a_h(v), 1e-12));
    CHECK_THAT(g(0, 1), WithinAbs(oracle::a_h(v), 1e-12));
    CHECK_THAT(g(1, 0), WithinAbs(oracle::b_h(v), 1e-12));
    CHECK_THAT(g(1, 1), WithinAbs(-oracle::b_h(v), 1e-12));
  }
  const auto g0 = aggregated_generator(na, 0.0);
  CHECK_THAT(g0(0, 1), WithinAbs(0.07, 1e-15));
  CHECK_THAT(g0(1, 0), WithinRel(1.0 / (std::exp(3.0) + 1.0), 1e-14));
  CHECK_THAT(g0(1, 0), WithinAbs(0.0474259, 1e-7));

  const auto toy = aggregated_generator(toy2_scheme(), 3.0);
  REQUIRE(toy.dim() == 1);
  CHECK(toy(0, 0) == 0.0);
}

TEST_CASE("quasi-stationary laws vary with a finite Lipschitz constant", "[kinetics][property]") {
  const auto na = na8_scheme();
  double fitted = 0.0;
  for (double v : random_voltages(200, -20.0, 140.0, 9)) {
    const double dv = 0.01;
    const auto a = quasi_stationary(na, 1, v);
    const auto b = quasi_stationary(na, 1, v + dv);
    double l1 = 0.0;
    for (std::size_t k = 0; k < 4; ++k) l1 += std::abs(a[k] - b[k]);
    fitted = std::max(fitted, l1 / dv);
  }
  CHECK(std::isfinite(fitted));
  CHECK(fitted < 1.0);
  // The fitted constant bounds well-separated pairs too.
  const auto vs = random_voltages(100, -20.0, 140.0, 10);
  for (std::size_t k = 0; k + 1 < vs.size(); ++k) {
    const auto a = quasi_stationary(na, 1, vs[k]);
    const auto b = quasi_stationary(na, 1, vs[k + 1]);
    double l1 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) l1 += std::abs(a[i] - b[i]);
    CHECK(l1 <= 1.05 * fitted * std::abs(vs[k] - vs[k + 1]) + 1e-12);
  }
}

TEST_CASE("scheme invariants and derived diagnostics", "[kinetics]") {
  const auto na = na8_scheme();
  CHECK(na.num_states() == 8);
  CHECK(na.num_classes() == 2);
  CHECK(na.rate_floor() > 0.0);
  CHECK(na.rate_bound() > na.rate_floor());
  CHECK(na.max_out_degree() == 3);
  CHECK(na.max_conductance() == kNaConductance);
  // alpha^+ is 1.05 x the sampled maximum, here 3 b_m at the bottom of the box.
  CHECK_THAT(na.rate_bound(), WithinRel(1.05 * 3.0 * oracle::b_m(kVoltageBoxLow), 1e-12));
  for (std::size_t s = 0; s < na.num_states(); ++s) CHECK(na.state(s).conductance >= 0.0);
}

TEST_CASE("malformed schemes are rejected", "[kinetics]") {
  const auto c1 = RateFunction::constant(1.0);
  CHECK(kind_of([&] { KineticScheme("x", {{"a", 0, -1.0, 0.0}, {"b", 0, 0.0, 0.0}}, {{0, 1, c1}, {1, 0, c1}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { KineticScheme("x", {{"a", 0, 0.0, 0.0}, {"a", 0, 0.0, 0.0}}, {{0, 1, c1}, {1, 0, c1}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { KineticScheme("x", {{"a", 0, 0.0, 0.0}, {"b", 0, 0.0, 0.0}}, {{0, 0, c1}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { KineticScheme("x", {{"a", 0, 0.0, 0.0}, {"b", 2, 0.0, 0.0}}, {{0, 1, c1}, {1, 0, c1}}); }) ==
        ErrorKind::InvalidArgument);
  // Class {a, b} only reachable one way: not irreducible.
  CHECK(kind_of([&] { KineticScheme("x", {{"a", 0, 0.0, 0.0}, {"b", 0, 0.0, 0.0}}, {{0, 1, c1}}); }) ==
        ErrorKind::Reducible);
}

TEST_CASE("scheme text round-trips and the shipped na8 file matches the built-in", "[kinetics][io]") {
  const auto na = na8_scheme();
  const auto again = parse_scheme_text(format_scheme_text(na));
  REQUIRE(again.num_states() == na.num_states());
  for (double v : {-10.0, 0.0, 37.5, 110.0}) {
    const auto a = full_generator(na, v, 0.3);
    const auto b = full_generator(again, v, 0.3);
    for (std::size_t k = 0; k < a.entries().size(); ++k) CHECK(a.entries()[k] == b.entries()[k]);
  }

  const auto shipped = read_scheme_file(PDMPAXON_SOURCE_DIR "/data/na8.scheme");
  CHECK(shipped.id() == "na8");
  REQUIRE(shipped.num_states() == na.num_states());
  for (std::size_t s = 0; s < na.num_states(); ++s) {
    CHECK(shipped.state(s).name == na.state(s).name);
    CHECK(shipped.class_of(s) == na.class_of(s));
    CHECK(shipped.state(s).conductance == na.state(s).conductance);
    CHECK(shipped.state(s).reversal == na.state(s).reversal);
  }
  for (double v : {-10.0, 0.0, 25.0, 110.0}) {
    const auto a = full_generator(na, v, 1.0);
    const auto b = full_generator(shipped, v, 1.0);
    for (std::size_t k = 0; k < a.entries().size(); ++k) CHECK(a.entries()[k] == b.entries()[k]);
  }
  CHECK(kind_of([] { read_scheme_file("/nonexistent/na.scheme"); }) == ErrorKind::Io);
  CHECK(kind_of([] { parse_scheme_text("[states]\na 0 0 0\n[rates]\na b 1\n"); }) == ErrorKind::InvalidArgument);
}
