// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdmpaxon/hybrid.hpp"
#include "pdmpaxon/kinetics.hpp"

namespace pdmpaxon {

inline constexpr const char* kVersion = "1.0.0";

/// Numbers as decimal with 17 significant digits.
std::string format_number(double x);

/// Rectangular numeric table with its '#' comment lines and column names.
struct CsvMatrix {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Comment lines start with '#'; the first other line is the column header.
/// Rows with a different field count than the header are rejected.
CsvMatrix parse_csv_matrix(const std::string& text);
CsvMatrix read_csv_matrix(const std::string& path);

/// "# key = value" config echo, then "time,u_0,...,u_M" and one row per snapshot.
std::string format_snapshots_csv(const HybridTrajectory& traj);
/// Config echo, then "time,channel,from,to"; channel is the site index i
/// (position i/N), from/to are state names (full) or class labels (averaged).
std::string format_jumps_csv(const HybridTrajectory& traj, const KineticScheme& s);

/// Config echo recovered from the comment lines of a snapshot CSV.
SimConfig config_from_csv(const CsvMatrix& m);

/// Binary 8-bit PGM (P5). Space runs up the vertical axis (x = 1 on the top
/// row), time runs left to right, gray = round(255 * clamp((u - lo) / (hi - lo), 0, 1)).
/// `snapshots` is time-major: one row of node values per time.
std::string format_pgm(const std::vector<std::vector<double>>& snapshots, double lo = 0.0, double hi = kNaReversal);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ManifestEntry {
  std::string name;
  std::string sha256;
  std::uint64_t bytes;
};

/// Writes manifest.json into `dir` listing `files` (names relative to dir).
void write_manifest(const std::string& dir, const std::string& config_echo, std::uint64_t seed,
                    const std::vector<std::string>& files);

/// Mismatching or missing entries; empty when every hash verifies.
std::vector<std::string> verify_manifest(const std::string& manifest_path);

/// PDMP_AXON_SEED parsed as an unsigned 64-bit integer, if set.
std::optional<std::uint64_t> seed_from_env();

}  // namespace pdmpaxon
