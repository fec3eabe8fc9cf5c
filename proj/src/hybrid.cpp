// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/hybrid.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "pdmpaxon/error.hpp"

namespace pdmpaxon {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size()) fail(ErrorKind::InvalidConfig, "config key '" + key + "': bad number '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (text.empty() || text[0] == '-' || end != begin + text.size() || errno == ERANGE) {
    fail(ErrorKind::InvalidConfig, "config key '" + key + "': bad unsigned integer '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  fail(ErrorKind::InvalidConfig, "config key '" + key + "': expected true or false, got '" + text + "'");
}

struct U0Spec {
  enum class Kind { Zero, Sine, Const } kind;
  double value;
};

U0Spec parse_u0(const std::string& text) {
  if (text == "zero" || text == "0") return {U0Spec::Kind::Zero, 0.0};
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    if (head == "sine") return {U0Spec::Kind::Sine, parse_double("u0", tail)};
    if (head == "const") return {U0Spec::Kind::Const, parse_double("u0", tail)};
  }
  fail(ErrorKind::InvalidConfig, "u0 must be 'zero', 'sine:<amplitude>' or 'const:<value>', got '" + text + "'");
}

std::vector<std::size_t> read_q0(const std::string& path, const KineticScheme& s, ModelKind model, std::size_t count) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open q0 file '" + path + "'");
  std::vector<std::size_t> out;
  for (std::string tok; in >> tok;) {
    if (tok.front() == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    std::size_t idx = 0;
    if (auto found = s.find_state(tok)) {
      idx = model == ModelKind::Full ? *found : s.class_of(*found);
    } else {
      idx = static_cast<std::size_t>(parse_u64("q0", tok));
      const std::size_t limit = model == ModelKind::Full ? s.num_states() : s.num_classes();
      if (idx >= limit) fail(ErrorKind::InvalidConfig, "q0 entry '" + tok + "' out of range");
    }
    out.push_back(idx);
  }
  if (out.size() != count) {
    fail(ErrorKind::InvalidConfig, "q0 file has " + std::to_string(out.size()) + " entries, expected N-1 = " + std::to_string(count));
  }
  return out;
}

std::size_t draw(const Distribution& d, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < d.dim(); ++k) {
    if (d[k] <= 0.0) continue;
    acc += d[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

// Per-channel quantities frozen at the step-start voltage.
struct ChannelCache {
  std::vector<std::pair<std::size_t, double>> targets;
  double exit = 0.0;
  // Reaction weight is (cv - cond * u) / N.
  double cond = 0.0;
  double cv = 0.0;
};

void refresh_full(const KineticScheme& s, std::size_t state, double v, double eps, ChannelCache& c) {
  c.targets.clear();
  c.exit = 0.0;
  for (std::size_t k : s.outgoing(state)) {
    const auto& t = s.transitions()[k];
    double rate = t.rate(v);
    if (s.is_fast(t)) rate /= eps;
    c.targets.emplace_back(t.to, rate);
    c.exit += rate;
  }
  const auto& st = s.state(state);
  c.cond = st.conductance;
  c.cv = st.conductance * st.reversal;
}

void refresh_averaged(const KineticScheme& s, std::size_t label, double v, ChannelCache& c) {
  c.targets.clear();
  c.exit = 0.0;
  c.cond = 0.0;
  c.cv = 0.0;
  const auto members = s.class_members(label);
  const Distribution mu = quasi_stationary(s, label, v);
  std::vector<double> to_class(s.num_classes(), 0.0);
  for (std::size_t a = 0; a < members.size(); ++a) {
    const auto& st = s.state(members[a]);
    c.cond += mu[a] * st.conductance;
    c.cv += mu[a] * st.conductance * st.reversal;
    for (std::size_t k : s.outgoing(members[a])) {
      const auto& t = s.transitions()[k];
      const std::size_t target = s.class_of(t.to);
      if (target != label) to_class[target] += mu[a] * t.rate(v);
    }
  }
  for (std::size_t k = 0; k < to_class.size(); ++k) {
    if (to_class[k] > 0.0) {
      c.targets.emplace_back(k, to_class[k]);
      c.exit += to_class[k];
    }
  }
}

// Picks (channel, target) from the caches with two uniforms.
JumpTarget pick(const std::vector<ChannelCache>& caches, double lambda, Rng& rng) {
  const double x = rng.uniform() * lambda;
  std::size_t chosen = caches.size();
  double acc = 0.0;
  for (std::size_t c = 0; c < caches.size(); ++c) {
    if (caches[c].exit <= 0.0) continue;
    chosen = c;
    acc += caches[c].exit;
    if (x < acc) break;
  }
  if (chosen == caches.size()) fail(ErrorKind::Runtime, "no channel has a positive exit rate");
  const auto& cache = caches[chosen];
  const double y = rng.uniform() * cache.exit;
  double acc2 = 0.0;
  std::size_t to = cache.targets.back().first;
  for (const auto& [target, rate] : cache.targets) {
    acc2 += rate;
    if (y < acc2) {
      to = target;
      break;
    }
  }
  return {chosen, to};
}

double sum_exits(const std::vector<ChannelCache>& caches) {
  double total = 0.0;
  for (const auto& c : caches) total += c.exit;
  return total;
}

HybridTrajectory run(const KineticScheme& s, const SimConfig& cfg, ModelKind model) {
  validate(cfg, s);
  const Grid grid = cfg.grid();
  const std::size_t channels = grid.num_channels();
  const bool frozen = cfg.frozen_voltage.has_value();
  const double inv_n = 1.0 / static_cast<double>(cfg.N);
  const double inv_h = 1.0 / grid.spacing();
  const double coef = cfg.k_diff * inv_h * inv_h;

  Rng rng(cfg.seed);
  const Field u_init = initial_field(cfg);
  std::vector<double> u(u_init.values().begin(), u_init.values().end());
  apply_clamp(grid, cfg.input, u);
  const std::vector<double> input = input_source(grid, cfg.input);

  auto voltage = [&](std::size_t c) { return frozen ? *cfg.frozen_voltage : u[grid.channel_node(c)]; };

  HybridTrajectory traj;
  traj.config = cfg;
  traj.config.model = model;
  traj.scheme_id = s.id();

  // Initial configuration.
  std::vector<std::size_t> state;
  if (!cfg.q0.empty()) {
    state = read_q0(cfg.q0, s, model, channels);
  } else {
    state.resize(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = voltage(c);
      const Distribution law = model == ModelKind::Full ? stationary_distribution(full_generator(s, v, cfg.eps))
                                                        : stationary_distribution(aggregated_generator(s, v));
      state[c] = draw(law, rng);
    }
  }
  traj.initial = state;

  std::vector<ChannelCache> caches(channels);
  std::vector<double> v_start(channels);
  auto refresh = [&](std::size_t c) {
    if (model == ModelKind::Full) refresh_full(s, state[c], v_start[c], cfg.eps, caches[c]);
    else refresh_averaged(s, state[c], v_start[c], caches[c]);
  };

  std::vector<double> next(u.size(), 0.0);
  auto advance = [&](double tau) {
    if (frozen || tau <= 0.0) return;
    for (std::size_t q = 1; q + 1 < u.size(); ++q) {
      next[q] = u[q] + tau * (coef * (u[q - 1] - 2.0 * u[q] + u[q + 1]) + input[q]);
    }
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t q = grid.channel_node(c);
      next[q] += tau * (caches[c].cv - caches[c].cond * u[q]) * inv_n * inv_h;
    }
    next.front() = 0.0;
    next.back() = 0.0;
    u.swap(next);
    apply_clamp(grid, cfg.input, u);
  };

  traj.snapshots.push_back({0.0, u});
  const std::size_t steps = cfg.num_steps();
  double t = 0.0;
  double theta = rng.exponential();
  bool caches_valid = false;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_end = k == steps ? cfg.T : static_cast<double>(k) * cfg.dt;
    if (!frozen || !caches_valid) {
      for (std::size_t c = 0; c < channels; ++c) v_start[c] = voltage(c);
      for (std::size_t c = 0; c < channels; ++c) refresh(c);
      caches_valid = true;
    }
    double lambda = sum_exits(caches);
    double rem = t_end - t;
    while (lambda > 0.0 && lambda * rem >= theta) {
      const double tau = theta / lambda;
      advance(tau);
      t = std::min(t + tau, t_end);
      const JumpTarget target = pick(caches, lambda, rng);
      traj.jumps.push_back({t, target.channel, state[target.channel], target.to});
      state[target.channel] = target.to;
      refresh(target.channel);
      lambda = sum_exits(caches);
      rem = std::max(0.0, t_end - t);
      theta = rng.exponential();
    }
    theta -= lambda * rem;
    advance(rem);
    t = t_end;
    if (k % cfg.snapshot_stride == 0 || k == steps) traj.snapshots.push_back({t, u});
  }
  traj.final_state = state;
  return traj;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Full ? "full" : "averaged"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "full") return ModelKind::Full;
  if (text == "averaged") return ModelKind::Averaged;
  fail(ErrorKind::InvalidConfig, "model must be 'full' or 'averaged', got '" + std::string(text) + "'");
}

std::size_t SimConfig::num_steps() const {
  const double ratio = T / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::size_t>(std::max(1.0, nearest));
  return static_cast<std::size_t>(std::ceil(ratio));
}

std::string format_config(const SimConfig& cfg) {
  std::ostringstream os;
  os << "model = " << to_string(cfg.model) << '\n'
     << "scheme = " << cfg.scheme << '\n'
     << "eps = " << num(cfg.eps) << '\n'
     << "N = " << cfg.N << '\n'
     << "M = " << cfg.M << '\n'
     << "dt = " << num(cfg.dt) << '\n'
     << "T = " << num(cfg.T) << '\n'
     << "k-diff = " << num(cfg.k_diff) << '\n'
     << "input = " << num(cfg.input.amplitude) << '\n'
     << "input-lo = " << num(cfg.input.lo) << '\n'
     << "input-hi = " << num(cfg.input.hi) << '\n'
     << "clamp-input = " << (cfg.input.clamp ? "true" : "false") << '\n'
     << "u0 = " << cfg.u0 << '\n'
     << "seed = " << cfg.seed << '\n'
     << "snapshot-stride = " << cfg.snapshot_stride << '\n'
     << "frozen-voltage = " << (cfg.frozen_voltage ? num(*cfg.frozen_voltage) : std::string("none")) << '\n'
     << "q0 = " << cfg.q0 << '\n';
  return os.str();
}

SimConfig parse_config(std::string_view text) {
  SimConfig cfg;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line = trim(raw);
    if (!line.empty() && line.front() == '#') line = trim(std::string_view(line).substr(1));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::InvalidConfig, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "model") cfg.model = parse_model_kind(value);
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "eps") cfg.eps = parse_double(key, value);
    else if (key == "N") cfg.N = parse_u64(key, value);
    else if (key == "M") cfg.M = parse_u64(key, value);
    else if (key == "dt") cfg.dt = parse_double(key, value);
    else if (key == "T") cfg.T = parse_double(key, value);
    else if (key == "k-diff") cfg.k_diff = parse_double(key, value);
    else if (key == "input") cfg.input.amplitude = parse_double(key, value);
    else if (key == "input-lo") cfg.input.lo = parse_double(key, value);
    else if (key == "input-hi") cfg.input.hi = parse_double(key, value);
    else if (key == "clamp-input") cfg.input.clamp = parse_bool(key, value);
    else if (key == "u0") cfg.u0 = value;
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "snapshot-stride") cfg.snapshot_stride = parse_u64(key, value);
    else if (key == "frozen-voltage") {
      if (value == "none" || value.empty()) cfg.frozen_voltage.reset();
      else cfg.frozen_voltage = parse_double(key, value);
    } else if (key == "q0") cfg.q0 = value;
    else fail(ErrorKind::InvalidConfig, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

SimConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

double admissible_dt(const SimConfig& cfg, const KineticScheme& scheme) {
  if (cfg.frozen_voltage) return std::numeric_limits<double>::infinity();
  return admissible_dt(cfg.grid(), cfg.k_diff, scheme.max_conductance());
}

void validate(const SimConfig& cfg, const KineticScheme& scheme) {
  auto bad = [](const std::string& msg) { fail(ErrorKind::InvalidConfig, msg); };
  if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) bad("eps must be positive, got " + num(cfg.eps));
  if (cfg.N < 2) bad("N must be at least 2 (channels sit at i/N, i = 1..N-1)");
  if (cfg.M < 1 || cfg.M % cfg.N != 0) bad("M=" + std::to_string(cfg.M) + " must be a positive multiple of N=" + std::to_string(cfg.N));
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) bad("dt must be positive, got " + num(cfg.dt));
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) bad("T must be positive, got " + num(cfg.T));
  if (!(cfg.k_diff >= 0.0) || !std::isfinite(cfg.k_diff)) bad("k-diff must be non-negative, got " + num(cfg.k_diff));
  if (cfg.snapshot_stride < 1) bad("snapshot-stride must be at least 1");
  if (!std::isfinite(cfg.input.amplitude)) bad("input amplitude must be finite");
  if (!(cfg.input.lo >= 0.0 && cfg.input.lo < cfg.input.hi && cfg.input.hi <= 1.0)) {
    bad("input interval must satisfy 0 <= input-lo < input-hi <= 1");
  }
  if (cfg.frozen_voltage && !std::isfinite(*cfg.frozen_voltage)) bad("frozen-voltage must be finite");
  parse_u0(cfg.u0);
  if (cfg.T / cfg.dt > 1e10) bad("T/dt = " + num(cfg.T / cfg.dt) + " steps is too many");
  const double limit = admissible_dt(cfg, scheme);
  if (cfg.dt > limit * (1.0 + 1e-12)) {
    bad("dt=" + num(cfg.dt) + " exceeds the admissible dt=" + num(limit) +
        " (explicit step must be a convex update: dt*(2*K/h^2 + c_max/(N*h)) <= 1)");
  }
}

Field initial_field(const SimConfig& cfg) {
  const Grid grid = cfg.grid();
  if (cfg.frozen_voltage) {
    const double v = *cfg.frozen_voltage;
    return Field::sample(grid, [v](double) { return v; });
  }
  const U0Spec spec = parse_u0(cfg.u0);
  switch (spec.kind) {
    case U0Spec::Kind::Zero:
      return Field::zero(grid);
    case U0Spec::Kind::Sine: {
      const double a = spec.value;
      return Field::sample(grid, [a](double x) { return a * std::sin(std::numbers::pi * x); });
    }
    case U0Spec::Kind::Const: {
      const double c = spec.value;
      return Field::sample(grid, [c](double) { return c; });
    }
  }
  return Field::zero(grid);
}

double total_rate(const KineticScheme& s, const Field& u, const ChannelConfig& r, double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
  if (r.states.size() != u.grid().num_channels()) fail(ErrorKind::InvalidArgument, "configuration size does not match grid");
  double total = 0.0;
  ChannelCache cache;
  for (std::size_t c = 0; c < r.states.size(); ++c) {
    refresh_full(s, r.states[c], u.at_channel(c), eps, cache);
    total += cache.exit;
  }
  return total;
}

JumpTarget sample_transition(const KineticScheme& s, const Field& u, const ChannelConfig& r, double eps, Rng& rng) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
  if (r.states.size() != u.grid().num_channels()) fail(ErrorKind::InvalidArgument, "configuration size does not match grid");
  std::vector<ChannelCache> caches(r.states.size());
  for (std::size_t c = 0; c < r.states.size(); ++c) refresh_full(s, r.states[c], u.at_channel(c), eps, caches[c]);
  const double lambda = sum_exits(caches);
  if (!(lambda > 0.0)) fail(ErrorKind::Runtime, "total jump rate is zero (absorbing configuration)");
  return pick(caches, lambda, rng);
}

HybridTrajectory simulate_full(const KineticScheme& s, const SimConfig& cfg) {
  if (cfg.model != ModelKind::Full) fail(ErrorKind::InvalidConfig, "simulate_full needs model = full");
  return run(s, cfg, ModelKind::Full);
}

HybridTrajectory simulate_averaged(const KineticScheme& s, const SimConfig& cfg) {
  if (cfg.model != ModelKind::Averaged) fail(ErrorKind::InvalidConfig, "simulate_averaged needs model = averaged");
  return run(s, cfg, ModelKind::Averaged);
}

HybridTrajectory simulate(const KineticScheme& s, const SimConfig& cfg) {
  return cfg.model == ModelKind::Full ? simulate_full(s, cfg) : simulate_averaged(s, cfg);
}

HybridTrajectory simulate(const SimConfig& cfg) { return simulate(load_scheme(cfg.scheme), cfg); }

AggregatedPath aggregate_path(const KineticScheme& s, const HybridTrajectory& traj) {
  if (traj.model() != ModelKind::Full) fail(ErrorKind::InvalidArgument, "aggregate_path needs a full-model trajectory");
  AggregatedPath out;
  out.initial.reserve(traj.initial.size());
  for (std::size_t st : traj.initial) out.initial.push_back(s.class_of(st));
  for (const auto& j : traj.jumps) {
    const std::size_t a = s.class_of(j.from);
    const std::size_t b = s.class_of(j.to);
    if (a != b) out.jumps.push_back({j.time, j.channel, a, b});
  }
  return out;
}

}  // namespace pdmpaxon
