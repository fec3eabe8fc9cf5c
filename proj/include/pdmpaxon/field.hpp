// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdmpaxon/kinetics.hpp"

namespace pdmpaxon {

/// Uniform grid x_q = q/M, q = 0..M, on the axon [0, 1], carrying channels
/// at i/N for i = 1..N-1. M must be a multiple of N so that every channel
/// sits on a node.
class Grid {
 public:
  Grid(std::size_t cells, std::size_t channel_param);

  std::size_t cells() const noexcept { return cells_; }
  std::size_t nodes() const noexcept { return cells_ + 1; }
  /// N: channels sit at i/N.
  std::size_t channel_param() const noexcept { return channel_param_; }
  /// N - 1.
  std::size_t num_channels() const noexcept { return channel_param_ - 1; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(cells_); }
  double position(std::size_t q) const { return static_cast<double>(q) / static_cast<double>(cells_); }
  /// Grid node of channel c (0-based; the channel sits at (c+1)/N).
  std::size_t channel_node(std::size_t c) const { return (c + 1) * (cells_ / channel_param_); }
  double channel_position(std::size_t c) const { return static_cast<double>(c + 1) / static_cast<double>(channel_param_); }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t cells_;
  std::size_t channel_param_;
};

/// Membrane potential on a grid, Dirichlet zero at both ends.
class Field {
 public:
  Field(Grid grid, std::vector<double> values, double time = 0.0);

  static Field zero(const Grid& grid, double time = 0.0);
  /// Samples f at the interior nodes; the boundary nodes are set to 0.
  static Field sample(const Grid& grid, const std::function<double(double)>& f, double time = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t q) const { return values_[q]; }
  double at_channel(std::size_t c) const { return values_[grid_.channel_node(c)]; }
  double time() const noexcept { return time_; }

 private:
  Grid grid_;
  std::vector<double> values_;
  double time_;
};

/// Smooth test function vanishing at 0 and 1 with analytic second derivative.
class TestFunction {
 public:
  TestFunction(std::string name, std::function<double(double)> value, std::function<double(double)> second_derivative);

  /// sin(k pi x).
  static TestFunction sine(int k = 1);
  /// Identically zero.
  static TestFunction zero();

  double operator()(double x) const { return value_(x); }
  double second_derivative(double x) const { return second_(x); }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  std::function<double(double)> value_;
  std::function<double(double)> second_;
};

/// One state of E per channel site.
struct ChannelConfig {
  std::vector<std::size_t> states;
  bool operator==(const ChannelConfig&) const = default;
};

/// One class label per channel site.
struct AggregatedConfig {
  std::vector<std::size_t> labels;
  bool operator==(const AggregatedConfig&) const = default;
};

AggregatedConfig aggregate(const KineticScheme& s, const ChannelConfig& r);

/// Constant additive source amplitude * 1_[lo, hi](x), or (clamp) u := amplitude there.
struct AppliedInput {
  double amplitude = 0.0;
  double lo = 0.0;
  double hi = 0.1;
  bool clamp = false;

  bool active() const noexcept { return amplitude != 0.0; }
  bool operator==(const AppliedInput&) const = default;
};

/// Additive input as a grid vector (zero at the boundary nodes).
std::vector<double> input_source(const Grid& grid, const AppliedInput& input);
/// Overwrites interior nodes in [lo, hi] with the clamp value.
void apply_clamp(const Grid& grid, const AppliedInput& input, std::span<double> values);

/// Dirac weight w_i multiplying delta_{y_i} in the reaction term.
struct DiracWeight {
  double position;
  double weight;
};

/// w_i = (1/N) c_{r(i)} (v_{r(i)} - u(i/N)).
std::vector<DiracWeight> dirac_weights_full(const KineticScheme& s, const ChannelConfig& r, const Field& u);
/// w_i = (1/N) sum over the active class of c mu(u(i/N)) (v - u(i/N)).
std::vector<DiracWeight> dirac_weights_averaged(const KineticScheme& s, const AggregatedConfig& rbar, const Field& u);

/// G_r(u) on the grid: each Dirac weight placed at its node with factor 1/h.
std::vector<double> reaction_full(const KineticScheme& s, const ChannelConfig& r, const Field& u);
/// F_rbar(u) on the grid; with a single class this is the all-fast average F(u).
std::vector<double> reaction_averaged(const KineticScheme& s, const AggregatedConfig& rbar, const Field& u);

/// Largest dt for which the explicit step is a convex update at every node:
/// dt (2 K/h^2 + c_max/(N h)) <= 1. Implies the diffusion CFL bound.
double admissible_dt(const Grid& grid, double k_diff, double max_conductance);
/// Diffusion-only CFL bound h^2 / (2 K).
double cfl_dt(const Grid& grid, double k_diff);

/// u + dt (K lap_h u + source) at interior nodes, boundaries re-clamped to 0.
/// Throws ErrorKind::InvalidConfig if dt exceeds the CFL bound.
Field fd_step(const Field& u, std::span<const double> source, double k_diff, double dt);

/// L2 pairing by the trapezoid rule.
double pair(const Field& u, const TestFunction& phi);
/// <G_r(u), phi> as the exact finite sum over channels.
double pair_reaction_full(const KineticScheme& s, const ChannelConfig& r, const Field& u, const TestFunction& phi);
/// <F_rbar(u), phi> as the exact finite sum over channels.
double pair_reaction_averaged(const KineticScheme& s, const AggregatedConfig& rbar, const Field& u,
                              const TestFunction& phi);

/// Discrete H^1 norm sqrt(|u|_{L2}^2 + |u'|_{L2}^2).
double h1_norm(const Field& u);

// --- spectral representation -------------------------------------------------
//
// Coordinates are taken in the H^1_0 basis e_k = sqrt(2) sin(k pi x) / sqrt(1 + (k pi)^2).
// The L2 basis is f_k = sqrt(2) sin(k pi x); the two coordinate systems are
// related by a_k = sqrt(1 + (k pi)^2) b_k and reconstruct the same function.

double basis_e(std::size_t k, double x);
double basis_f(std::size_t k, double x);

class SpectralState {
 public:
  explicit SpectralState(std::vector<double> coeffs, double time = 0.0);

  /// Projection of a grid field onto the first `modes` modes (trapezoid L2 products).
  static SpectralState project(const Field& u, std::size_t modes);

  std::size_t modes() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double time() const noexcept { return time_; }

  /// Coordinates b_k in the L2 basis f_k.
  std::vector<double> l2_coeffs() const;
  /// sum_k a_k e_k(x).
  double value_at(double x) const;
  /// sum_k b_k f_k(x); equal to value_at up to round-off.
  double value_at_l2(double x) const;
  Field to_field(const Grid& grid) const;

 private:
  std::vector<double> coeffs_;
  double time_;
};

/// e_k-coordinates of amplitude * 1_[lo, hi].
std::vector<double> indicator_coefficients(double amplitude, double lo, double hi, std::size_t modes);

/// Exponential-Euler step of du/dt = K lap u + sum_i w_i delta_{y_i} + g with
/// the source frozen over the step:
///   a_k <- e^{-lambda_k dt} a_k + (1 - e^{-lambda_k dt}) / lambda_k * g_k,
/// lambda_k = K (k pi)^2, g_k = sum_i w_i (1 + (k pi)^2) e_k(y_i) + distributed_k.
SpectralState spectral_step(const SpectralState& state, std::span<const DiracWeight> source, double k_diff, double dt,
                            std::span<const double> distributed = {});

}  // namespace pdmpaxon
