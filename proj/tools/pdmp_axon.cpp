// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
//
// pdmp-axon command-line front end. Links only the C interface.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdmpaxon/pdmpaxon.h"

namespace {

struct CliFailure {
  int code;
};

int exit_code(pdmp_status st) {
  switch (st) {
    case PDMP_OK:
      return 0;
    case PDMP_ERR_INVALID_ARGUMENT:
    case PDMP_ERR_INVALID_CONFIG:
    case PDMP_ERR_REDUCIBLE:
      return 2;
    default:
      return 1;
  }
}

void check(pdmp_status st) {
  if (st == PDMP_OK) return;
  std::fprintf(stderr, "error: %s\n", pdmp_last_error());
  throw CliFailure{exit_code(st)};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using SchemeHandle = Handle<pdmp_scheme, pdmp_scheme_free>;
using ConfigHandle = Handle<pdmp_config, pdmp_config_free>;
using TrajectoryHandle = Handle<pdmp_trajectory, pdmp_trajectory_free>;

// Run-configuration flags shared by simulate and sweep, stored as text and
// forwarded verbatim to the config parser.
struct ConfigFlags {
  std::optional<std::string> config_file;
  std::map<std::string, std::optional<std::string>> values;
  bool clamp_input = false;

  void attach(CLI::App& app, const std::vector<std::string>& keys) {
    app.add_option("--config", config_file, "Config file (key = value, keys as flag names)")->check(CLI::ExistingFile);
    static const std::map<std::string, std::string> help{
        {"model", "full | averaged"},
        {"scheme", "Built-in scheme (na8, na4m, toy2, flat2) or scheme file"},
        {"eps", "Time-scale separation eps > 0"},
        {"N", "Channels sit at i/N, i = 1..N-1"},
        {"M", "Grid cells (multiple of N)"},
        {"dt", "PDE time step (ms)"},
        {"T", "Final time (ms)"},
        {"k-diff", "Diffusion coefficient K"},
        {"seed", "Master seed (fallback: PDMP_AXON_SEED)"},
        {"input", "Applied input amplitude on [input-lo, input-hi]"},
        {"input-lo", "Left end of the input segment"},
        {"input-hi", "Right end of the input segment"},
        {"u0", "Initial potential: zero | sine:<a> | const:<c>"},
        {"snapshot-stride", "Record every k-th PDE step"},
        {"frozen-voltage", "Frozen-potential mode at this voltage"},
        {"q0", "File with the initial channel states"},
    };
    for (const auto& key : keys) {
      values[key];
      app.add_option("--" + key, values[key], help.at(key));
    }
  }

  void apply(pdmp_config* cfg) const {
    for (const auto& [key, value] : values) {
      if (value) check(pdmp_config_set(cfg, key.c_str(), value->c_str()));
    }
    if (clamp_input) check(pdmp_config_set(cfg, "clamp-input", "true"));
  }
};

// True when the config file sets the seed itself.
bool file_sets_seed(const std::string& path) {
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    const auto start = line.find_first_not_of(" \t#");
    if (start == std::string::npos) continue;
    const auto eq = line.find('=', start);
    if (eq == std::string::npos) continue;
    std::string key = line.substr(start, eq - start);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "seed") return true;
  }
  return false;
}

// Seed precedence: --seed, then the config file, then PDMP_AXON_SEED, then 0.
void load_config(const ConfigFlags& flags, ConfigHandle& cfg) {
  if (flags.config_file) {
    check(pdmp_config_load(flags.config_file->c_str(), &cfg.p));
  } else {
    check(pdmp_config_new(&cfg.p));
  }
  if (!flags.config_file || !file_sets_seed(*flags.config_file)) {
    uint64_t seed = 0;
    int found = 0;
    check(pdmp_seed_from_env(&seed, &found));
    if (found) check(pdmp_config_set(cfg.p, "seed", std::to_string(seed).c_str()));
  }
  flags.apply(cfg.p);
}

std::string config_value(const pdmp_config* cfg, const std::string& key) {
  size_t needed = 0;
  pdmp_config_format(cfg, nullptr, 0, &needed);
  std::string buf(needed, '\0');
  check(pdmp_config_format(cfg, buf.data(), buf.size(), &needed));
  std::istringstream in(buf.c_str());
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return {};
}

void open_scheme(const std::string& name, SchemeHandle& scheme) { check(pdmp_scheme_open(name.c_str(), &scheme.p)); }

int run_simulate(const ConfigFlags& flags, const std::string& out_dir) {
  ConfigHandle cfg;
  load_config(flags, cfg);
  SchemeHandle scheme;
  open_scheme(config_value(cfg.p, "scheme"), scheme);
  check(pdmp_config_validate(cfg.p, scheme.p));
  TrajectoryHandle traj;
  check(pdmp_simulate(scheme.p, cfg.p, &traj.p));
  check(pdmp_trajectory_write(traj.p, scheme.p, out_dir.c_str()));
  size_t snaps = 0, jumps = 0;
  check(pdmp_trajectory_counts(traj.p, &snaps, &jumps));
  std::printf("snapshots: %zu\njumps: %zu\nout-dir: %s\n", snaps, jumps, out_dir.c_str());
  return 0;
}

int run_heatmap(const std::string& csv, const std::string& out) {
  check(pdmp_heatmap(csv.c_str(), out.c_str()));
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: bad eps value '%s'\n", item.c_str());
      throw CliFailure{2};
    }
  }
  return out;
}

int run_sweep(const ConfigFlags& flags, const std::string& eps_list, std::size_t ensemble, std::size_t threads,
              const std::optional<std::string>& out_dir) {
  ConfigHandle cfg;
  load_config(flags, cfg);
  SchemeHandle scheme;
  open_scheme(config_value(cfg.p, "scheme"), scheme);
  const auto ladder = parse_ladder(eps_list);
  std::vector<pdmp_sweep_row> rows(ladder.size());
  pdmp_sweep_result result{};
  check(pdmp_sweep(scheme.p, cfg.p, ladder.data(), ladder.size(), ensemble, threads,
                   out_dir ? out_dir->c_str() : nullptr, rows.data(), &result));
  std::printf("eps,mean,stderr,n\n");
  for (const auto& r : rows) std::printf("%.17g,%.17g,%.17g,%zu\n", r.eps, r.mean_sq, r.std_error, r.n);
  if (result.degenerate) std::printf("degenerate: zero defect\n");
  else std::printf("slope = %.6g (se %.3g)\n", result.slope, result.slope_se);
  return 0;
}

int run_poisson(const std::string& scheme_name, const std::string& n, const std::optional<std::string>& m,
                const std::string& u0, const std::optional<std::string>& out) {
  SchemeHandle scheme;
  open_scheme(scheme_name, scheme);
  ConfigHandle cfg;
  check(pdmp_config_new(&cfg.p));
  check(pdmp_config_set(cfg.p, "N", n.c_str()));
  check(pdmp_config_set(cfg.p, "M", m ? m->c_str() : n.c_str()));
  check(pdmp_config_set(cfg.p, "u0", u0.c_str()));
  pdmp_poisson_result r{};
  check(pdmp_poisson(scheme.p, cfg.p, out ? out->c_str() : nullptr, &r));
  std::printf("dim = %zu\nkernel_dim = %zu\nresidual = %.3e\nmax_centering = %.3e\nmax_orthogonality = %.3e\n"
              "uniqueness_gap = %.3e\n",
              r.dim, r.kernel_dim, r.residual, r.max_centering, r.max_orthogonality, r.uniqueness_gap);
  return 0;
}

int run_stationary(const std::string& scheme_name, std::size_t cls, double v, bool aggregated) {
  SchemeHandle scheme;
  open_scheme(scheme_name, scheme);
  if (aggregated) {
    size_t dim = 0;
    pdmp_aggregated_generator(scheme.p, v, nullptr, 0, &dim);
    std::vector<double> g(dim * dim);
    check(pdmp_aggregated_generator(scheme.p, v, g.data(), g.size(), &dim));
    std::printf("aggregated generator at v = %.17g\n", v);
    for (size_t i = 0; i < dim; ++i) {
      for (size_t j = 0; j < dim; ++j) std::printf(j ? " %.17g" : "%.17g", g[i * dim + j]);
      std::printf("\n");
    }
    return 0;
  }
  size_t len = 0;
  std::vector<size_t> members(64);
  check(pdmp_scheme_class_members(scheme.p, cls, members.data(), members.size(), &len));
  members.resize(len);
  std::vector<double> mu(len);
  check(pdmp_quasi_stationary(scheme.p, cls, v, mu.data(), mu.size(), &len));
  for (size_t k = 0; k < len; ++k) {
    const char* name = nullptr;
    check(pdmp_scheme_state_name(scheme.p, members[k], &name));
    std::printf("%s %.17g\n", name, mu[k]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdmp-axon: stochastic Hodgkin-Huxley axon as a piecewise deterministic Markov process"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pdmp_version()));

  const std::vector<std::string> sim_keys{"model", "scheme", "eps", "N", "M", "dt", "T", "k-diff", "seed", "input",
                                          "input-lo", "input-hi", "u0", "snapshot-stride", "frozen-voltage", "q0"};

  auto* sim = app.add_subcommand("simulate", "Simulate the full or averaged model");
  ConfigFlags sim_flags;
  sim_flags.attach(*sim, sim_keys);
  sim->add_flag("--clamp-input", sim_flags.clamp_input, "Clamp u to the input value instead of adding a source");
  std::string out_dir = "out";
  sim->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  auto* heat = app.add_subcommand("heatmap", "Render a snapshot CSV as a PGM heatmap");
  std::string heat_csv;
  std::string heat_out = "heatmap.pgm";
  heat->add_option("--csv,csv", heat_csv, "Snapshot CSV")->required();
  heat->add_option("--out", heat_out, "Output PGM")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Averaging-defect eps sweep");
  ConfigFlags sweep_flags;
  sweep_flags.attach(*sweep, {"scheme", "N", "M", "dt", "T", "k-diff", "seed", "input", "input-lo", "input-hi", "u0"});
  std::string eps_list = "0.5,0.1,0.02";
  std::size_t ensemble = 50;
  std::size_t threads = 0;
  std::optional<std::string> sweep_out;
  sweep->add_option("--eps-list", eps_list, "Comma-separated decreasing eps ladder")->capture_default_str();
  sweep->add_option("--ensemble", ensemble, "Members per eps")->capture_default_str();
  sweep->add_option("--threads", threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
  sweep->add_option("--out-dir", sweep_out, "Directory for sweep.csv and summary.txt");

  auto* poisson = app.add_subcommand("poisson", "Desk-scale Poisson equation with centering");
  std::string p_scheme = "toy2";
  std::string p_n = "3";
  std::optional<std::string> p_m;
  std::string p_u0 = "zero";
  std::optional<std::string> p_out;
  poisson->add_option("--scheme", p_scheme, "Scheme")->capture_default_str();
  poisson->add_option("--N", p_n, "Channels at i/N")->capture_default_str();
  poisson->add_option("--M", p_m, "Grid cells (default N)");
  poisson->add_option("--u0", p_u0, "Frozen potential: zero | sine:<a> | const:<c>")->capture_default_str();
  poisson->add_option("--out", p_out, "Diagnostics report file");

  auto* stat = app.add_subcommand("stationary", "Quasi-stationary law of one class");
  std::string s_scheme = "na8";
  std::size_t s_class = 0;
  double s_v = 0.0;
  bool s_agg = false;
  stat->add_option("--scheme", s_scheme, "Scheme")->capture_default_str();
  stat->add_option("--class", s_class, "Class index (0-based)")->capture_default_str();
  stat->add_option("--v", s_v, "Voltage (mV)")->capture_default_str();
  stat->add_flag("--aggregated", s_agg, "Print the aggregated generator instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return run_simulate(sim_flags, out_dir);
    if (*heat) return run_heatmap(heat_csv, heat_out);
    if (*sweep) return run_sweep(sweep_flags, eps_list, ensemble, threads, sweep_out);
    if (*poisson) return run_poisson(p_scheme, p_n, p_m, p_u0, p_out);
    if (*stat) return run_stationary(s_scheme, s_class, s_v, s_agg);
  } catch (const CliFailure& f) {
    return f.code;
  }
  return 1;
}
