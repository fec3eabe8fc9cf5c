// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/pdmpaxon.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "pdmpaxon/analysis.hpp"
#include "pdmpaxon/error.hpp"
#include "pdmpaxon/hybrid.hpp"
#include "pdmpaxon/io.hpp"
#include "pdmpaxon/kinetics.hpp"

struct pdmp_scheme {
  pdmpaxon::KineticScheme scheme;
};

struct pdmp_config {
  pdmpaxon::SimConfig cfg;
};

struct pdmp_trajectory {
  pdmpaxon::HybridTrajectory traj;
};

namespace {

thread_local std::string g_last_error;

pdmp_status to_status(pdmpaxon::ErrorKind kind) {
  switch (kind) {
    case pdmpaxon::ErrorKind::InvalidArgument:
      return PDMP_ERR_INVALID_ARGUMENT;
    case pdmpaxon::ErrorKind::InvalidConfig:
      return PDMP_ERR_INVALID_CONFIG;
    case pdmpaxon::ErrorKind::Reducible:
      return PDMP_ERR_REDUCIBLE;
    case pdmpaxon::ErrorKind::Io:
      return PDMP_ERR_IO;
    case pdmpaxon::ErrorKind::Runtime:
      return PDMP_ERR_RUNTIME;
  }
  return PDMP_ERR_RUNTIME;
}

template <class Fn>
pdmp_status guard(Fn&& fn) {
  try {
    fn();
    return PDMP_OK;
  } catch (const pdmpaxon::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PDMP_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PDMP_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return PDMP_ERR_RUNTIME;
  }
}

template <class T>
const T& need(const T* p, const char* what) {
  if (p == nullptr) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, std::string(what) + " is NULL");
  return *p;
}

template <class T>
void need_out(T* p, const char* what) {
  if (p == nullptr) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

void copy_out(std::span<const double> src, double* dst, std::size_t capacity, std::size_t* len) {
  need_out(len, "length output");
  *len = src.size();
  if (capacity < src.size()) {
    pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument,
                   "buffer holds " + std::to_string(capacity) + " values, " + std::to_string(src.size()) + " needed");
  }
  need_out(dst, "output buffer");
  std::copy(src.begin(), src.end(), dst);
}

void copy_matrix(const pdmpaxon::GeneratorMatrix& g, double* dst, std::size_t capacity, std::size_t* dim) {
  need_out(dim, "dim output");
  *dim = g.dim();
  std::size_t len = 0;
  copy_out(g.entries(), dst, capacity, &len);
}

}  // namespace

extern "C" {

const char* pdmp_version(void) { return pdmpaxon::kVersion; }

const char* pdmp_last_error(void) { return g_last_error.c_str(); }

pdmp_status pdmp_seed_from_env(uint64_t* seed, int* found) {
  return guard([&] {
    need_out(seed, "seed");
    need_out(found, "found");
    const auto v = pdmpaxon::seed_from_env();
    *found = v ? 1 : 0;
    if (v) *seed = *v;
  });
}

pdmp_status pdmp_scheme_open(const char* name_or_path, pdmp_scheme** out) {
  return guard([&] {
    need(name_or_path, "scheme name");
    need_out(out, "scheme output");
    *out = nullptr;
    *out = new pdmp_scheme{pdmpaxon::load_scheme(name_or_path)};
  });
}

void pdmp_scheme_free(pdmp_scheme* scheme) { delete scheme; }

pdmp_status pdmp_scheme_id(const pdmp_scheme* scheme, const char** id) {
  return guard([&] {
    need_out(id, "id output");
    *id = need(scheme, "scheme").scheme.id().c_str();
  });
}

pdmp_status pdmp_scheme_num_states(const pdmp_scheme* scheme, size_t* count) {
  return guard([&] {
    need_out(count, "count output");
    *count = need(scheme, "scheme").scheme.num_states();
  });
}

pdmp_status pdmp_scheme_num_classes(const pdmp_scheme* scheme, size_t* count) {
  return guard([&] {
    need_out(count, "count output");
    *count = need(scheme, "scheme").scheme.num_classes();
  });
}

pdmp_status pdmp_scheme_state_name(const pdmp_scheme* scheme, size_t state, const char** name) {
  return guard([&] {
    need_out(name, "name output");
    const auto& s = need(scheme, "scheme").scheme;
    if (state >= s.num_states()) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "state index out of range");
    *name = s.state(state).name.c_str();
  });
}

pdmp_status pdmp_scheme_class_of(const pdmp_scheme* scheme, size_t state, size_t* cls) {
  return guard([&] {
    need_out(cls, "class output");
    const auto& s = need(scheme, "scheme").scheme;
    if (state >= s.num_states()) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "state index out of range");
    *cls = s.class_of(state);
  });
}

pdmp_status pdmp_scheme_class_members(const pdmp_scheme* scheme, size_t cls, size_t* states, size_t capacity,
                                      size_t* count) {
  return guard([&] {
    need_out(count, "count output");
    const auto members = need(scheme, "scheme").scheme.class_members(cls);
    *count = members.size();
    if (capacity < members.size()) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "buffer too small");
    need_out(states, "output buffer");
    std::copy(members.begin(), members.end(), states);
  });
}

pdmp_status pdmp_eval_rate(const char* rate, double v, double* value) {
  return guard([&] {
    need(rate, "rate");
    need_out(value, "value output");
    if (!std::isfinite(v)) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "voltage must be finite");
    *value = pdmpaxon::eval_rate(pdmpaxon::RateFunction::parse(rate), v);
  });
}

pdmp_status pdmp_quasi_stationary(const pdmp_scheme* scheme, size_t cls, double v, double* probs, size_t capacity,
                                  size_t* len) {
  return guard([&] {
    const auto mu = pdmpaxon::quasi_stationary(need(scheme, "scheme").scheme, cls, v);
    copy_out(mu.probs(), probs, capacity, len);
  });
}

pdmp_status pdmp_full_generator(const pdmp_scheme* scheme, double v, double eps, double* entries, size_t capacity,
                                size_t* dim) {
  return guard([&] {
    copy_matrix(pdmpaxon::full_generator(need(scheme, "scheme").scheme, v, eps), entries, capacity, dim);
  });
}

pdmp_status pdmp_class_generator(const pdmp_scheme* scheme, size_t cls, double v, double* entries, size_t capacity,
                                 size_t* dim) {
  return guard([&] {
    copy_matrix(pdmpaxon::class_generator(need(scheme, "scheme").scheme, cls, v), entries, capacity, dim);
  });
}

pdmp_status pdmp_aggregated_generator(const pdmp_scheme* scheme, double v, double* entries, size_t capacity,
                                      size_t* dim) {
  return guard([&] {
    copy_matrix(pdmpaxon::aggregated_generator(need(scheme, "scheme").scheme, v), entries, capacity, dim);
  });
}

pdmp_status pdmp_config_new(pdmp_config** out) {
  return guard([&] {
    need_out(out, "config output");
    *out = new pdmp_config{};
  });
}

pdmp_status pdmp_config_load(const char* path, pdmp_config** out) {
  return guard([&] {
    need(path, "path");
    need_out(out, "config output");
    *out = nullptr;
    *out = new pdmp_config{pdmpaxon::read_config_file(path)};
  });
}

void pdmp_config_free(pdmp_config* cfg) { delete cfg; }

pdmp_status pdmp_config_set(pdmp_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    // Re-parse the full echo with the new line appended so that a single
    // parser defines the accepted keys and value syntax.
    const std::string text = pdmpaxon::format_config(cfg->cfg) + key + " = " + value + "\n";
    cfg->cfg = pdmpaxon::parse_config(text);
  });
}

pdmp_status pdmp_config_format(const pdmp_config* cfg, char* buf, size_t capacity, size_t* needed) {
  return guard([&] {
    need_out(needed, "size output");
    const std::string text = pdmpaxon::format_config(need(cfg, "config").cfg);
    *needed = text.size() + 1;
    if (capacity < text.size() + 1) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "buffer too small");
    need_out(buf, "output buffer");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

pdmp_status pdmp_config_validate(const pdmp_config* cfg, const pdmp_scheme* scheme) {
  return guard([&] { pdmpaxon::validate(need(cfg, "config").cfg, need(scheme, "scheme").scheme); });
}

pdmp_status pdmp_config_admissible_dt(const pdmp_config* cfg, const pdmp_scheme* scheme, double* dt) {
  return guard([&] {
    need_out(dt, "dt output");
    const auto& c = need(cfg, "config").cfg;
    const auto& s = need(scheme, "scheme").scheme;
    if (c.N < 1 || c.M < 1 || c.M % c.N != 0) {
      pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidConfig, "M must be a positive multiple of N");
    }
    *dt = pdmpaxon::admissible_dt(c, s);
  });
}

pdmp_status pdmp_simulate(const pdmp_scheme* scheme, const pdmp_config* cfg, pdmp_trajectory** out) {
  return guard([&] {
    need_out(out, "trajectory output");
    *out = nullptr;
    auto traj = pdmpaxon::simulate(need(scheme, "scheme").scheme, need(cfg, "config").cfg);
    *out = new pdmp_trajectory{std::move(traj)};
  });
}

void pdmp_trajectory_free(pdmp_trajectory* traj) { delete traj; }

pdmp_status pdmp_trajectory_counts(const pdmp_trajectory* traj, size_t* snapshots, size_t* jumps) {
  return guard([&] {
    const auto& t = need(traj, "trajectory").traj;
    if (snapshots) *snapshots = t.snapshots.size();
    if (jumps) *jumps = t.jumps.size();
  });
}

pdmp_status pdmp_trajectory_snapshot(const pdmp_trajectory* traj, size_t k, double* time, double* values,
                                     size_t capacity, size_t* len) {
  return guard([&] {
    const auto& t = need(traj, "trajectory").traj;
    if (k >= t.snapshots.size()) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "snapshot index out of range");
    if (time) *time = t.snapshots[k].time;
    copy_out(t.snapshots[k].values, values, capacity, len);
  });
}

pdmp_status pdmp_trajectory_write(const pdmp_trajectory* traj, const pdmp_scheme* scheme, const char* out_dir) {
  return guard([&] {
    namespace fs = std::filesystem;
    const auto& t = need(traj, "trajectory").traj;
    const auto& s = need(scheme, "scheme").scheme;
    need(out_dir, "output directory");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) pdmpaxon::fail(pdmpaxon::ErrorKind::Io, "cannot create '" + std::string(out_dir) + "': " + ec.message());
    const fs::path dir(out_dir);
    pdmpaxon::write_text_file((dir / "snapshots.csv").string(), pdmpaxon::format_snapshots_csv(t));
    pdmpaxon::write_text_file((dir / "jumps.csv").string(), pdmpaxon::format_jumps_csv(t, s));
    pdmpaxon::write_manifest(dir.string(), pdmpaxon::format_config(t.config), t.seed(), {"snapshots.csv", "jumps.csv"});
  });
}

pdmp_status pdmp_heatmap(const char* csv_path, const char* pgm_path) {
  return guard([&] {
    need(csv_path, "CSV path");
    need(pgm_path, "PGM path");
    const auto m = pdmpaxon::read_csv_matrix(csv_path);
    if (m.rows.empty()) pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "snapshot CSV has no rows");
    if (m.columns.size() < 2 || m.columns.front() != "time") {
      pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidArgument, "snapshot CSV must start with a 'time' column");
    }
    std::vector<std::vector<double>> fields;
    fields.reserve(m.rows.size());
    for (const auto& row : m.rows) fields.emplace_back(row.begin() + 1, row.end());
    pdmpaxon::write_text_file(pgm_path, pdmpaxon::format_pgm(fields));
  });
}

pdmp_status pdmp_manifest_verify(const char* manifest_path, int* ok) {
  return guard([&] {
    need(manifest_path, "manifest path");
    need_out(ok, "ok output");
    const auto problems = pdmpaxon::verify_manifest(manifest_path);
    *ok = problems.empty() ? 1 : 0;
    if (!problems.empty()) {
      std::string msg = "manifest does not verify:";
      for (const auto& p : problems) msg += " " + p + ";";
      g_last_error = msg;
    }
  });
}

pdmp_status pdmp_sweep(const pdmp_scheme* scheme, const pdmp_config* base, const double* ladder, size_t n_eps,
                       size_t ensemble, size_t threads, const char* out_dir, pdmp_sweep_row* rows,
                       pdmp_sweep_result* result) {
  return guard([&] {
    const auto& s = need(scheme, "scheme").scheme;
    const auto& cfg = need(base, "config").cfg;
    need(ladder, "eps ladder");
    need_out(rows, "rows output");
    need_out(result, "result output");
    const auto report = pdmpaxon::epsilon_sweep(s, cfg, std::span<const double>(ladder, n_eps), ensemble,
                                                pdmpaxon::TestFunction::sine(1), threads);
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
      rows[k] = {report.rows[k].eps, report.rows[k].mean_sq, report.rows[k].std_error, report.rows[k].n};
    }
    result->slope = report.slope;
    result->slope_se = report.slope_se;
    result->degenerate = report.degenerate ? 1 : 0;
    if (out_dir != nullptr) {
      namespace fs = std::filesystem;
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) pdmpaxon::fail(pdmpaxon::ErrorKind::Io, "cannot create '" + std::string(out_dir) + "': " + ec.message());
      std::ostringstream csv;
      csv << "# pdmp-axon " << pdmpaxon::kVersion << " eps sweep, phi = sin(pi x), master seed " << cfg.seed << '\n';
      std::istringstream echo(pdmpaxon::format_config(cfg));
      for (std::string line; std::getline(echo, line);) csv << "# " << line << '\n';
      csv << "eps,mean,stderr,n\n";
      for (const auto& r : report.rows) {
        csv << pdmpaxon::format_number(r.eps) << ',' << pdmpaxon::format_number(r.mean_sq) << ','
            << pdmpaxon::format_number(r.std_error) << ',' << r.n << '\n';
      }
      std::ostringstream summary;
      if (report.degenerate) {
        summary << "degenerate: zero defect\n";
      } else {
        summary << "slope = " << pdmpaxon::format_number(report.slope) << '\n'
                << "slope_se = " << pdmpaxon::format_number(report.slope_se) << '\n';
      }
      summary << "strictly_decreasing = " << (report.strictly_decreasing() ? "true" : "false") << '\n';
      const fs::path dir(out_dir);
      pdmpaxon::write_text_file((dir / "sweep.csv").string(), csv.str());
      pdmpaxon::write_text_file((dir / "summary.txt").string(), summary.str());
    }
  });
}

pdmp_status pdmp_poisson(const pdmp_scheme* scheme, const pdmp_config* cfg, const char* out_path,
                         pdmp_poisson_result* result) {
  return guard([&] {
    const auto& s = need(scheme, "scheme").scheme;
    const auto& c = need(cfg, "config").cfg;
    need_out(result, "result output");
    if (c.N < 2 || c.M < 1 || c.M % c.N != 0) {
      pdmpaxon::fail(pdmpaxon::ErrorKind::InvalidConfig, "N >= 2 and M a positive multiple of N are required");
    }
    const auto u = pdmpaxon::initial_field(c);
    const auto sol = pdmpaxon::poisson_solve(s, u, pdmpaxon::TestFunction::sine(1));
    auto max_abs = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    };
    result->dim = sol.f.size();
    result->kernel_dim = sol.kernel_dim;
    result->residual = sol.residual;
    result->max_centering = max_abs(sol.centerings);
    result->max_orthogonality = max_abs(sol.orthogonality);
    result->uniqueness_gap = sol.uniqueness_gap;
    if (out_path != nullptr) {
      std::ostringstream os;
      os << "# pdmp-axon " << pdmpaxon::kVersion << " Poisson solve, phi = sin(pi x)\n"
         << "scheme = " << s.id() << '\n'
         << "dim = " << result->dim << '\n'
         << "kernel_dim = " << result->kernel_dim << '\n'
         << "residual = " << pdmpaxon::format_number(result->residual) << '\n'
         << "max_centering = " << pdmpaxon::format_number(result->max_centering) << '\n'
         << "max_orthogonality = " << pdmpaxon::format_number(result->max_orthogonality) << '\n'
         << "uniqueness_gap = " << pdmpaxon::format_number(result->uniqueness_gap) << '\n'
         << "f =";
      for (double x : sol.f) os << ' ' << pdmpaxon::format_number(x);
      os << '\n';
      pdmpaxon::write_text_file(out_path, os.str());
    }
  });
}

}  // extern "C"
