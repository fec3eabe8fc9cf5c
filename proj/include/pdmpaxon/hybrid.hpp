// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdmpaxon/field.hpp"
#include "pdmpaxon/kinetics.hpp"
#include "pdmpaxon/rng.hpp"

namespace pdmpaxon {

enum class ModelKind { Full, Averaged };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Run configuration. Keys of the text form match the CLI flag names.
struct SimConfig {
  std::string scheme = "na8";
  ModelKind model = ModelKind::Full;
  double eps = 1.0;
  std::size_t N = 250;
  std::size_t M = 500;
  double dt = 1e-3;
  double T = 1.0;
  double k_diff = kCableDiffusion;
  AppliedInput input{};
  /// "zero", "sine:<amplitude>" (amplitude * sin(pi x)) or "const:<value>".
  std::string u0 = "zero";
  std::uint64_t seed = 0;
  std::size_t snapshot_stride = 10;
  /// Frozen-potential mode: no diffusion, no reaction, u(i/N) = frozen_voltage.
  std::optional<double> frozen_voltage;
  /// Optional file with the initial configuration (state names or indices,
  /// whitespace separated, one per channel). Empty: draw from the stationary law.
  std::string q0;

  bool operator==(const SimConfig&) const = default;

  Grid grid() const { return Grid(M, N); }
  std::size_t num_steps() const;
};

/// "key = value" lines, numbers with 17 significant digits.
std::string format_config(const SimConfig& cfg);
/// Inverse of format_config; unknown keys are rejected. Lines starting with
/// '#' are accepted with the marker stripped, so CSV headers parse directly.
SimConfig parse_config(std::string_view text);
SimConfig read_config_file(const std::string& path);

/// Throws ErrorKind::InvalidConfig describing the first violated constraint.
/// A dt above the stability bound yields a message carrying the admissible dt.
void validate(const SimConfig& cfg, const KineticScheme& scheme);
/// dt bound enforced by validate (infinite in frozen-potential mode).
double admissible_dt(const SimConfig& cfg, const KineticScheme& scheme);

Field initial_field(const SimConfig& cfg);

struct JumpEvent {
  double time;
  /// 0-based channel index; the channel sits at (channel + 1) / N.
  std::size_t channel;
  std::size_t from;
  std::size_t to;

  bool operator==(const JumpEvent&) const = default;
};

struct Snapshot {
  double time;
  std::vector<double> values;

  bool operator==(const Snapshot&) const = default;
};

/// One simulated path. For the full model the per-channel values are states
/// of E; for the averaged model they are class labels.
struct HybridTrajectory {
  SimConfig config;
  std::string scheme_id;
  std::vector<Snapshot> snapshots;
  std::vector<JumpEvent> jumps;
  std::vector<std::size_t> initial;
  std::vector<std::size_t> final_state;

  ModelKind model() const noexcept { return config.model; }
  std::uint64_t seed() const noexcept { return config.seed; }
  bool operator==(const HybridTrajectory&) const = default;
};

/// Lambda(u, r): all exit intensities, within-class terms divided by eps.
double total_rate(const KineticScheme& s, const Field& u, const ChannelConfig& r, double eps);

struct JumpTarget {
  std::size_t channel;
  std::size_t to;
};

/// Draws (channel, target) with probability scaled rate / Lambda.
/// Throws ErrorKind::Runtime when Lambda = 0.
JumpTarget sample_transition(const KineticScheme& s, const Field& u, const ChannelConfig& r, double eps, Rng& rng);

/// Full two-timescale model. The scheme is passed explicitly; cfg.scheme is
/// only echoed. The random stream is Rng(cfg.seed).
HybridTrajectory simulate_full(const KineticScheme& s, const SimConfig& cfg);
/// Averaged model: reaction F_rbar, labels jump with the aggregated rates.
HybridTrajectory simulate_averaged(const KineticScheme& s, const SimConfig& cfg);
/// Dispatches on cfg.model.
HybridTrajectory simulate(const KineticScheme& s, const SimConfig& cfg);
/// Resolves cfg.scheme through load_scheme.
HybridTrajectory simulate(const SimConfig& cfg);

/// Class-label path of a full-model trajectory: initial labels and the
/// between-class jumps, times preserved.
struct AggregatedPath {
  std::vector<std::size_t> initial;
  std::vector<JumpEvent> jumps;
};

AggregatedPath aggregate_path(const KineticScheme& s, const HybridTrajectory& traj);

}  // namespace pdmpaxon
