// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pdmpaxon/error.hpp"

namespace pdmpaxon {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

void echo_config(std::ostringstream& os, const SimConfig& cfg) {
  std::istringstream in(format_config(cfg));
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvMatrix parse_csv_matrix(const std::string& text) {
  CsvMatrix m;
  std::istringstream in(text);
  std::size_t line_no = 0;
  bool have_header = false;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      m.comments.push_back(line);
      continue;
    }
    auto fields = split_fields(line);
    if (!have_header) {
      m.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != m.columns.size()) {
      fail(ErrorKind::InvalidArgument, "ragged CSV: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                           " fields, header has " + std::to_string(m.columns.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      const char* begin = f.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (f.empty() || end != begin + f.size()) {
        fail(ErrorKind::InvalidArgument, "CSV line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      row.push_back(v);
    }
    m.rows.push_back(std::move(row));
  }
  if (!have_header) fail(ErrorKind::InvalidArgument, "CSV has no header line");
  return m;
}

CsvMatrix read_csv_matrix(const std::string& path) { return parse_csv_matrix(read_text_file(path)); }

std::string format_snapshots_csv(const HybridTrajectory& traj) {
  std::ostringstream os;
  os << "# pdmp-axon " << kVersion << " snapshots\n";
  echo_config(os, traj.config);
  os << "time";
  const std::size_t nodes = traj.config.M + 1;
  for (std::size_t q = 0; q < nodes; ++q) os << ",u_" << q;
  os << '\n';
  for (const auto& snap : traj.snapshots) {
    os << format_number(snap.time);
    for (double v : snap.values) os << ',' << format_number(v);
    os << '\n';
  }
  return os.str();
}

std::string format_jumps_csv(const HybridTrajectory& traj, const KineticScheme& s) {
  std::ostringstream os;
  os << "# pdmp-axon " << kVersion << " jumps\n";
  echo_config(os, traj.config);
  os << "time,channel,from,to\n";
  const bool full = traj.model() == ModelKind::Full;
  auto label = [&](std::size_t k) { return full ? s.state(k).name : std::to_string(k); };
  for (const auto& j : traj.jumps) {
    os << format_number(j.time) << ',' << (j.channel + 1) << ',' << label(j.from) << ',' << label(j.to) << '\n';
  }
  return os.str();
}

SimConfig config_from_csv(const CsvMatrix& m) {
  std::string text;
  for (const auto& line : m.comments) {
    if (line.find(" = ") != std::string::npos) text += line + '\n';
  }
  return parse_config(text);
}

std::string format_pgm(const std::vector<std::vector<double>>& snapshots, double lo, double hi) {
  if (snapshots.empty()) fail(ErrorKind::InvalidArgument, "no snapshots to render");
  if (!(hi > lo)) fail(ErrorKind::InvalidArgument, "gray range needs hi > lo");
  const std::size_t width = snapshots.size();
  const std::size_t height = snapshots.front().size();
  for (const auto& row : snapshots) {
    if (row.size() != height) fail(ErrorKind::InvalidArgument, "ragged snapshot matrix");
  }
  std::ostringstream os;
  os << "P5\n"
     << "# gray = round(255 * clamp((u - " << format_number(lo) << ") / " << format_number(hi - lo) << ", 0, 1))\n"
     << "# rows: x from 1 (top) to 0 (bottom); columns: snapshot times left to right\n"
     << width << ' ' << height << "\n255\n";
  std::string pixels(width * height, '\0');
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t q = height - 1 - r;
    for (std::size_t c = 0; c < width; ++c) {
      const double scaled = std::clamp((snapshots[c][q] - lo) / (hi - lo), 0.0, 1.0);
      pixels[r * width + c] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * scaled)));
    }
  }
  os << pixels;
  return os.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << contents;
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::Runtime, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

void write_manifest(const std::string& dir, const std::string& config_echo, std::uint64_t seed,
                    const std::vector<std::string>& files) {
  namespace fs = std::filesystem;
  nlohmann::json j;
  j["tool"] = "pdmp-axon";
  j["version"] = kVersion;
  j["seed"] = seed;
  j["config"] = config_echo;
  j["created_utc"] = utc_now();
  j["files"] = nlohmann::json::array();
  for (const auto& name : files) {
    const std::string contents = read_text_file((fs::path(dir) / name).string());
    j["files"].push_back({{"name", name}, {"sha256", sha256_hex(contents)}, {"bytes", contents.size()}});
  }
  write_text_file((fs::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, "manifest '" + manifest_path + "' is not valid JSON: " + e.what());
  }
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<std::string> problems;
  if (!j.contains("files") || !j["files"].is_array()) {
    problems.push_back("manifest has no file inventory");
    return problems;
  }
  for (const auto& entry : j["files"]) {
    const std::string name = entry.value("name", "");
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      problems.push_back(name + ": missing");
      continue;
    }
    if (sha256_file(p.string()) != entry.value("sha256", "")) problems.push_back(name + ": hash mismatch");
  }
  return problems;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("PDMP_AXON_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || errno == ERANGE || raw[0] == '-') {
    fail(ErrorKind::InvalidConfig, std::string("PDMP_AXON_SEED is not an unsigned integer: '") + raw + "'");
  }
  return v;
}

}  // namespace pdmpaxon
