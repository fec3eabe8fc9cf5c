// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pdmpaxon {

/// Membrane voltage in mV.
using Voltage = double;

/// Voltage box on which scheme invariants (rate bounds, positivity) are sampled.
inline constexpr Voltage kVoltageBoxLow = -50.0;
inline constexpr Voltage kVoltageBoxHigh = 200.0;

// Hodgkin-Huxley sodium gating rates (ms^-1), u in mV relative to rest.
double alpha_m(Voltage u);
double beta_m(Voltage u);
double alpha_h(Voltage u);
double beta_h(Voltage u);

enum class RateKind { AlphaM, BetaM, AlphaH, BetaH, Constant, Custom };

/// A voltage-dependent jump intensity: multiplier * base(v), or a constant.
class RateFunction {
 public:
  static RateFunction standard(RateKind kind, double multiplier = 1.0);
  static RateFunction constant(double value);
  static RateFunction custom(std::string name, std::function<double(Voltage)> fn, double multiplier = 1.0);

  /// Parses "a_m", "3*a_m", "0.25", "2.5*b_h".
  static RateFunction parse(std::string_view text);

  double operator()(Voltage v) const;

  RateKind kind() const noexcept { return kind_; }
  double multiplier() const noexcept { return multiplier_; }
  std::string to_string() const;

 private:
  RateFunction(RateKind kind, double multiplier) : kind_(kind), multiplier_(multiplier) {}

  RateKind kind_;
  double multiplier_;
  std::string custom_name_;
  std::function<double(Voltage)> custom_;
};

double eval_rate(const RateFunction& f, Voltage v);

/// Dense square rate matrix, row-major. Off-diagonals are jump intensities and
/// the diagonal makes each row sum to zero.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;
  explicit GeneratorMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

  /// Sets each diagonal entry to minus the sum of the off-diagonals of its row.
  void fill_diagonal();

  double max_abs_row_sum() const;
  bool is_generator(double tol = 1e-12) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

/// Probability vector over a finite set.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  std::size_t dim() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

struct StateSpec {
  std::string name;
  std::size_t cls = 0;
  double conductance = 0.0;  // c_xi, mS/cm^2
  double reversal = 0.0;     // v_xi, mV
};

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  RateFunction rate;
};

/// Channel kinetics: states, their partition into fast classes, the rate
/// graph and the per-state conductance/reversal potential. Immutable.
class KineticScheme {
 public:
  KineticScheme(std::string id, std::vector<StateSpec> states, std::vector<Transition> transitions);

  const std::string& id() const noexcept { return id_; }
  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t num_classes() const noexcept { return class_members_.size(); }

  const StateSpec& state(std::size_t s) const { return states_.at(s); }
  std::size_t class_of(std::size_t s) const { return states_.at(s).cls; }
  std::span<const std::size_t> class_members(std::size_t cls) const;
  /// Position of state s inside its class member list.
  std::size_t index_in_class(std::size_t s) const { return index_in_class_.at(s); }
  std::optional<std::size_t> find_state(std::string_view name) const;

  std::span<const Transition> transitions() const noexcept { return transitions_; }
  /// Transitions leaving state s (indices into transitions()).
  std::span<const std::size_t> outgoing(std::size_t s) const { return outgoing_.at(s); }
  /// nullptr when the rate is structurally zero.
  const RateFunction* rate(std::size_t from, std::size_t to) const;
  bool is_fast(const Transition& t) const { return class_of(t.from) == class_of(t.to); }

  /// alpha^+: 1.05 x the largest sampled rate on the voltage box.
  double rate_bound() const noexcept { return rate_bound_; }
  /// alpha_-: smallest sampled non-zero rate on the voltage box.
  double rate_floor() const noexcept { return rate_floor_; }
  std::size_t max_out_degree() const noexcept { return max_out_degree_; }
  double max_conductance() const noexcept { return max_conductance_; }

 private:
  std::string id_;
  std::vector<StateSpec> states_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> class_members_;
  std::vector<std::size_t> index_in_class_;
  double rate_bound_ = 0.0;
  double rate_floor_ = 0.0;
  std::size_t max_out_degree_ = 0;
  double max_conductance_ = 0.0;
};

/// Single-channel generator with within-class rates scaled by 1/eps.
GeneratorMatrix full_generator(const KineticScheme& s, Voltage v, double eps);

/// Within-class generator B_j(v) on the members of class `cls`, unscaled.
GeneratorMatrix class_generator(const KineticScheme& s, std::size_t cls, Voltage v);

/// Unique mu with mu^T g = 0, sum mu = 1. Throws ErrorKind::Reducible when the
/// rate digraph is not strongly connected.
Distribution stationary_distribution(const GeneratorMatrix& g);

/// Quasi-stationary law of class `cls` at frozen voltage v, indexed like class_members(cls).
Distribution quasi_stationary(const KineticScheme& s, std::size_t cls, Voltage v);

/// Limit generator of the class-label process at frozen voltage v.
GeneratorMatrix aggregated_generator(const KineticScheme& s, Voltage v);

/// Strongly connected components of the off-diagonal non-zero pattern.
std::vector<std::vector<std::size_t>> communicating_classes(const GeneratorMatrix& g);

// Built-in schemes.
//   na8       sodium channel m0h0..m3h1, classes by h-gate, m3h1 open
//   na4m      the m-gate ladder alone (one class), m3 open
//   toy2      closed/open with constant rates, one class
//   flat2     two states sharing conductance and reversal, one class
KineticScheme na8_scheme();
KineticScheme na4m_scheme();
KineticScheme toy2_scheme(double open_rate = 1.0, double close_rate = 1.0);
KineticScheme flat2_scheme();
std::vector<std::string> builtin_scheme_names();
std::optional<KineticScheme> builtin_scheme(std::string_view name);

/// Resolves a built-in name first, then falls back to reading a scheme file.
KineticScheme load_scheme(const std::string& name_or_path);

// Sodium constants.
inline constexpr double kNaConductance = 120.0;  // mS/cm^2
inline constexpr double kNaReversal = 115.0;     // mV
inline constexpr double kAxonRadius = 0.0238;    // cm
inline constexpr double kAxonResistance = 34.5;  // Ohm cm
inline constexpr double kCableDiffusion = kAxonRadius / (2.0 * kAxonResistance);

}  // namespace pdmpaxon
