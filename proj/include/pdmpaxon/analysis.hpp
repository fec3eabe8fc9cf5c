// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdmpaxon/field.hpp"
#include "pdmpaxon/hybrid.hpp"
#include "pdmpaxon/kinetics.hpp"

namespace pdmpaxon {

/// <G_r(u) - F_rbar(u), phi> with rbar the class labels of r, as an exact
/// finite sum over channels.
double defect_integrand(const KineticScheme& s, std::span<const std::size_t> states, const Grid& grid,
                        std::span<const double> u, const TestFunction& phi);

/// D(t) = int_0^t <G_{r_s}(u_s) - F_{rbar_s}(u_s), phi> ds at the snapshot times.
struct DefectSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// Trapezoid quadrature between snapshots, split at every jump; u is
/// interpolated linearly between snapshots. Rejects averaged-model paths.
DefectSeries defect_series(const HybridTrajectory& traj, const TestFunction& phi, const KineticScheme& s);

struct SweepRow {
  double eps;
  double mean_sq;
  double std_error;
  std::size_t n;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Weighted least-squares slope of log(mean_sq) against log(eps).
  double slope;
  double slope_se;
  /// All means vanish; the slope is then NaN.
  bool degenerate;
  std::uint64_t master_seed;
  /// Member seeds, shared by every eps (common random numbers).
  std::vector<std::uint64_t> seeds;

  /// Point estimates strictly decrease along the ladder.
  bool strictly_decreasing() const;
  /// No increase larger than k pooled standard errors along the ladder.
  bool non_increasing_within(double k) const;
};

/// For each eps: mean over `ensemble` full-model runs of |D(T)|^2, snapshots
/// every PDE step. Member i runs with member_seed(base.seed, i).
/// `threads` = 0 uses the hardware concurrency.
SweepReport epsilon_sweep(const KineticScheme& s, const SimConfig& base, std::span<const double> ladder,
                          std::size_t ensemble, const TestFunction& phi, std::size_t threads = 0);

struct OccupationReport {
  /// Total-variation distance per class between the empirical occupation
  /// conditioned on the class and the quasi-stationary law; NaN if unvisited.
  std::vector<double> tv;
  /// Channel-time spent in each class.
  std::vector<double> class_time;
  std::size_t jumps;
};

/// Frozen-potential full model with `channels` independent channels pooled.
OccupationReport occupation_error(const KineticScheme& s, double v, double eps, double T, std::uint64_t seed,
                                  std::size_t channels = 1, double dt = 0.1);

struct WeakRow {
  double eps;
  double mean;
  double std_error;
  std::size_t n;
  /// |mean - averaged mean|.
  double diff;
  /// sqrt(se^2 + se_avg^2).
  double pooled_se;
};

struct WeakReport {
  double t_star;
  double mean_avg;
  double std_error_avg;
  std::size_t n_avg;
  std::vector<WeakRow> rows;
  /// 95% intervals of the smallest eps and of the averaged model overlap.
  bool smallest_overlaps;
};

/// Monte Carlo E<u_{t*}, phi> for the full model along the ladder against
/// the averaged model. Both configs must share scheme, grid, dt, T, diffusion,
/// input and u0. t* must be a snapshot time of both runs.
WeakReport weak_compare(const KineticScheme& s, const SimConfig& full_base, std::span<const double> ladder,
                        const SimConfig& averaged, const TestFunction& phi, double t_star, std::size_t ensemble,
                        std::size_t threads = 0);

struct PoissonSolution {
  /// Joint configurations are indexed little-endian: channel c contributes
  /// state * |E|^c.
  std::vector<double> f;
  std::vector<double> rhs;
  double residual;
  /// One value per product quasi-stationary measure, ordered like the class
  /// assignments (little-endian in the class count).
  std::vector<double> centerings;
  /// <rhs, pi> for the same measures.
  std::vector<double> orthogonality;
  /// max |f - f'| between the centred solution and the projected minimum-norm one.
  double uniqueness_gap;
  /// dim ker(B) from the rank of the joint generator.
  std::size_t kernel_dim;
};

/// rhs(r) = <G_r(u) - F_rbar(u), phi> paired against every product
/// quasi-stationary measure.
std::vector<double> fredholm_products(const KineticScheme& s, const Field& u, const TestFunction& phi);

/// Solves B f = <G_r(u) - F_rbar(u), phi> on E^{N-1} (B the joint fast
/// generator at the frozen voltages) with all centering conditions.
/// Throws ErrorKind::Runtime when the orthogonality exceeds 1e-8 and
/// ErrorKind::InvalidArgument when |E|^{N-1} > 4096.
PoissonSolution poisson_solve(const KineticScheme& s, const Field& u, const TestFunction& phi);

}  // namespace pdmpaxon
