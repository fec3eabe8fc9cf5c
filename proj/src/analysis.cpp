// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dense.hpp"
#include "ensemble.hpp"
#include "pdmpaxon/error.hpp"
#include "pdmpaxon/rng.hpp"

namespace pdmpaxon {

namespace {

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(std::span<const double> xs) {
  detail::CompensatedSum sum;
  for (double x : xs) sum.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = sum.value() / n;
  detail::CompensatedSum sq;
  for (double x : xs) sq.add((x - mean) * (x - mean));
  const double var = xs.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double snapshot_pairing(const HybridTrajectory& traj, const TestFunction& phi, double t_star) {
  const Grid grid = traj.config.grid();
  const double tol = 1e-9 * std::max(1.0, std::abs(t_star));
  for (const auto& snap : traj.snapshots) {
    if (std::abs(snap.time - t_star) <= tol) return pair(Field(grid, snap.values, snap.time), phi);
  }
  fail(ErrorKind::InvalidArgument, "t* is not a snapshot time of the trajectory");
}

}  // namespace

double defect_integrand(const KineticScheme& s, std::span<const std::size_t> states, const Grid& grid,
                        std::span<const double> u, const TestFunction& phi) {
  if (states.size() != grid.num_channels() || u.size() != grid.nodes()) {
    fail(ErrorKind::InvalidArgument, "defect integrand: sizes do not match the grid");
  }
  const double inv_n = 1.0 / static_cast<double>(grid.channel_param());
  detail::CompensatedSum sum;
  for (std::size_t c = 0; c < states.size(); ++c) {
    const double v = u[grid.channel_node(c)];
    const auto& st = s.state(states[c]);
    const std::size_t cls = s.class_of(states[c]);
    const auto members = s.class_members(cls);
    double g = st.conductance * (st.reversal - v);
    if (members.size() > 1) {
      const Distribution mu = quasi_stationary(s, cls, v);
      for (std::size_t a = 0; a < members.size(); ++a) {
        const auto& m = s.state(members[a]);
        g -= mu[a] * m.conductance * (m.reversal - v);
      }
    } else {
      g = 0.0;
    }
    sum.add(inv_n * g * phi(grid.channel_position(c)));
  }
  return sum.value();
}

DefectSeries defect_series(const HybridTrajectory& traj, const TestFunction& phi, const KineticScheme& s) {
  if (traj.model() != ModelKind::Full) fail(ErrorKind::InvalidArgument, "defect_series needs a full-model trajectory");
  if (traj.snapshots.empty()) fail(ErrorKind::InvalidArgument, "trajectory has no snapshots");
  const Grid grid = traj.config.grid();
  std::vector<std::size_t> state = traj.initial;
  std::vector<double> u_mid(grid.nodes());

  DefectSeries out;
  out.times.push_back(traj.snapshots.front().time);
  out.values.push_back(0.0);
  detail::CompensatedSum total;
  std::size_t j = 0;
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    const auto& a = traj.snapshots[k - 1];
    const auto& b = traj.snapshots[k];
    const double span_t = b.time - a.time;
    auto u_at = [&](double t) -> std::span<const double> {
      const double w = span_t > 0.0 ? (t - a.time) / span_t : 0.0;
      for (std::size_t q = 0; q < u_mid.size(); ++q) u_mid[q] = (1.0 - w) * a.values[q] + w * b.values[q];
      return u_mid;
    };
    double t = a.time;
    double g_left = defect_integrand(s, state, grid, u_at(t), phi);
    while (j < traj.jumps.size() && traj.jumps[j].time <= b.time) {
      const double tj = traj.jumps[j].time;
      const double g_right = defect_integrand(s, state, grid, u_at(tj), phi);
      total.add(0.5 * (g_left + g_right) * (tj - t));
      // Several jumps may share a time stamp only through round-off; apply them all.
      while (j < traj.jumps.size() && traj.jumps[j].time == tj) {
        state[traj.jumps[j].channel] = traj.jumps[j].to;
        ++j;
      }
      t = tj;
      g_left = defect_integrand(s, state, grid, u_at(t), phi);
    }
    const double g_right = defect_integrand(s, state, grid, u_at(b.time), phi);
    total.add(0.5 * (g_left + g_right) * (b.time - t));
    out.times.push_back(b.time);
    out.values.push_back(total.value());
  }
  return out;
}

bool SweepReport::strictly_decreasing() const {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (!(rows[k].mean_sq < rows[k - 1].mean_sq)) return false;
  }
  return true;
}

bool SweepReport::non_increasing_within(double k) const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double pooled = std::hypot(rows[i].std_error, rows[i - 1].std_error);
    if (rows[i].mean_sq > rows[i - 1].mean_sq + k * pooled) return false;
  }
  return true;
}

SweepReport epsilon_sweep(const KineticScheme& s, const SimConfig& base, std::span<const double> ladder,
                          std::size_t ensemble, const TestFunction& phi, std::size_t threads) {
  if (ensemble < 10) fail(ErrorKind::InvalidArgument, "ensemble size " + std::to_string(ensemble) + " is below 10");
  if (ladder.empty()) fail(ErrorKind::InvalidArgument, "empty eps ladder");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] >= 1e-3 && ladder[k] <= 1.0)) fail(ErrorKind::InvalidArgument, "eps ladder must lie within [1e-3, 1]");
    if (k > 0 && !(ladder[k] < ladder[k - 1])) fail(ErrorKind::InvalidArgument, "eps ladder must be strictly decreasing");
  }
  SimConfig cfg = base;
  cfg.model = ModelKind::Full;
  cfg.snapshot_stride = 1;
  validate(cfg, s);

  SweepReport report;
  report.master_seed = base.seed;
  for (std::size_t i = 0; i < ensemble; ++i) report.seeds.push_back(member_seed(base.seed, i));

  for (double eps : ladder) {
    const auto finals = detail::run_indexed<double>(ensemble, threads, [&](std::size_t i) {
      SimConfig member = cfg;
      member.eps = eps;
      member.seed = report.seeds[i];
      const auto traj = simulate_full(s, member);
      const double d = defect_series(traj, phi, s).values.back();
      return d * d;
    });
    const MeanSe m = mean_se(finals);
    report.rows.push_back({eps, m.mean, m.se, ensemble});
  }

  report.degenerate = std::all_of(report.rows.begin(), report.rows.end(), [](const SweepRow& r) { return r.mean_sq <= 1e-20; });
  report.slope = std::numeric_limits<double>::quiet_NaN();
  report.slope_se = std::numeric_limits<double>::quiet_NaN();
  if (!report.degenerate && report.rows.size() >= 2) {
    // Var(log m) ~ (se/m)^2 by the delta method.
    double sw = 0.0, sx = 0.0, sy = 0.0;
    std::vector<double> w(report.rows.size()), x(report.rows.size()), y(report.rows.size());
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
      const auto& r = report.rows[k];
      x[k] = std::log(r.eps);
      y[k] = std::log(r.mean_sq);
      const double rel = r.std_error / r.mean_sq;
      w[k] = rel > 0.0 ? 1.0 / (rel * rel) : 1.0;
      sw += w[k];
      sx += w[k] * x[k];
      sy += w[k] * y[k];
    }
    const double xb = sx / sw, yb = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sxx += w[k] * (x[k] - xb) * (x[k] - xb);
      sxy += w[k] * (x[k] - xb) * (y[k] - yb);
    }
    report.slope = sxy / sxx;
    report.slope_se = std::sqrt(1.0 / sxx);
  }
  return report;
}

OccupationReport occupation_error(const KineticScheme& s, double v, double eps, double T, std::uint64_t seed,
                                  std::size_t channels, double dt) {
  if (channels < 1) fail(ErrorKind::InvalidArgument, "occupation_error needs at least one channel");
  SimConfig cfg;
  cfg.scheme = s.id();
  cfg.model = ModelKind::Full;
  cfg.eps = eps;
  cfg.N = channels + 1;
  cfg.M = channels + 1;
  cfg.dt = std::min(dt, T);
  cfg.T = T;
  cfg.k_diff = 0.0;
  cfg.seed = seed;
  cfg.snapshot_stride = std::numeric_limits<std::size_t>::max() / 2;
  cfg.frozen_voltage = v;
  const auto traj = simulate_full(s, cfg);

  std::vector<double> occupancy(s.num_states(), 0.0);
  std::vector<std::size_t> state = traj.initial;
  std::vector<double> since(channels, 0.0);
  for (const auto& j : traj.jumps) {
    occupancy[state[j.channel]] += j.time - since[j.channel];
    since[j.channel] = j.time;
    state[j.channel] = j.to;
  }
  for (std::size_t c = 0; c < channels; ++c) occupancy[state[c]] += T - since[c];

  OccupationReport report;
  report.jumps = traj.jumps.size();
  for (std::size_t cls = 0; cls < s.num_classes(); ++cls) {
    const auto members = s.class_members(cls);
    double time = 0.0;
    for (std::size_t m : members) time += occupancy[m];
    report.class_time.push_back(time);
    if (!(time > 0.0)) {
      report.tv.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const Distribution mu = quasi_stationary(s, cls, v);
    double tv = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a) tv += std::abs(occupancy[members[a]] / time - mu[a]);
    report.tv.push_back(0.5 * tv);
  }
  return report;
}

WeakReport weak_compare(const KineticScheme& s, const SimConfig& full_base, std::span<const double> ladder,
                        const SimConfig& averaged, const TestFunction& phi, double t_star, std::size_t ensemble,
                        std::size_t threads) {
  if (full_base.scheme != averaged.scheme || full_base.N != averaged.N || full_base.M != averaged.M ||
      full_base.dt != averaged.dt || full_base.T != averaged.T || full_base.k_diff != averaged.k_diff ||
      full_base.input.amplitude != averaged.input.amplitude || full_base.input.lo != averaged.input.lo ||
      full_base.input.hi != averaged.input.hi || full_base.input.clamp != averaged.input.clamp ||
      full_base.u0 != averaged.u0 || full_base.frozen_voltage != averaged.frozen_voltage) {
    fail(ErrorKind::InvalidArgument, "weak_compare needs identical discretizations for the full and averaged runs");
  }
  if (ensemble < 2) fail(ErrorKind::InvalidArgument, "weak_compare needs at least 2 members per ensemble");
  if (!(t_star > 0.0 && t_star <= full_base.T)) fail(ErrorKind::InvalidArgument, "t* must lie in (0, T]");

  WeakReport report;
  report.t_star = t_star;
  SimConfig avg = averaged;
  avg.model = ModelKind::Averaged;
  const auto avg_vals = detail::run_indexed<double>(ensemble, threads, [&](std::size_t i) {
    SimConfig member = avg;
    member.seed = member_seed(averaged.seed, i);
    return snapshot_pairing(simulate_averaged(s, member), phi, t_star);
  });
  const MeanSe ma = mean_se(avg_vals);
  report.mean_avg = ma.mean;
  report.std_error_avg = ma.se;
  report.n_avg = ensemble;

  for (double eps : ladder) {
    const auto vals = detail::run_indexed<double>(ensemble, threads, [&](std::size_t i) {
      SimConfig member = full_base;
      member.model = ModelKind::Full;
      member.eps = eps;
      member.seed = member_seed(full_base.seed, i);
      return snapshot_pairing(simulate_full(s, member), phi, t_star);
    });
    const MeanSe m = mean_se(vals);
    report.rows.push_back({eps, m.mean, m.se, ensemble, std::abs(m.mean - ma.mean), std::hypot(m.se, ma.se)});
  }
  report.smallest_overlaps = false;
  if (!report.rows.empty()) {
    const auto smallest = std::min_element(report.rows.begin(), report.rows.end(),
                                           [](const WeakRow& a, const WeakRow& b) { return a.eps < b.eps; });
    report.smallest_overlaps = smallest->diff <= 1.96 * (smallest->std_error + ma.se);
  }
  return report;
}

namespace {

struct JointSpace {
  std::size_t channels;
  std::size_t states;
  std::size_t dim;

  std::vector<std::size_t> decode(std::size_t index) const {
    std::vector<std::size_t> r(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      r[c] = index % states;
      index /= states;
    }
    return r;
  }
};

JointSpace joint_space(const KineticScheme& s, const Grid& grid) {
  JointSpace js{grid.num_channels(), s.num_states(), 1};
  for (std::size_t c = 0; c < js.channels; ++c) {
    if (js.dim > 4096 / js.states) {
      fail(ErrorKind::InvalidArgument, "|E|^(N-1) exceeds the desk-scale limit 4096");
    }
    js.dim *= js.states;
  }
  return js;
}

// Index of the class block containing joint configuration idx.
std::size_t class_assignment(const KineticScheme& s, const JointSpace& js, std::size_t idx) {
  const auto r = js.decode(idx);
  std::size_t assignment = 0;
  std::size_t stride = 1;
  for (std::size_t c = 0; c < js.channels; ++c) {
    assignment += s.class_of(r[c]) * stride;
    stride *= s.num_classes();
  }
  return assignment;
}

// Right-hand side <G_r(u) - F_rbar(u), phi> for every joint configuration.
std::vector<double> poisson_rhs(const KineticScheme& s, const Field& u, const TestFunction& phi, const JointSpace& js) {
  std::vector<double> h(js.dim);
  for (std::size_t idx = 0; idx < js.dim; ++idx) {
    const ChannelConfig r{js.decode(idx)};
    h[idx] = pair_reaction_full(s, r, u, phi) - pair_reaction_averaged(s, aggregate(s, r), u, phi);
  }
  return h;
}

// Product quasi-stationary measures, one per class assignment.
std::vector<std::vector<double>> product_measures(const KineticScheme& s, const Field& u, const JointSpace& js) {
  const std::size_t l = s.num_classes();
  std::vector<std::vector<Distribution>> mu(js.channels);
  for (std::size_t c = 0; c < js.channels; ++c) {
    for (std::size_t j = 0; j < l; ++j) mu[c].push_back(quasi_stationary(s, j, u.at_channel(c)));
  }
  std::size_t count = 1;
  for (std::size_t c = 0; c < js.channels; ++c) count *= l;
  std::vector<std::vector<double>> out(count, std::vector<double>(js.dim, 0.0));
  for (std::size_t idx = 0; idx < js.dim; ++idx) {
    const auto r = js.decode(idx);
    std::size_t assignment = 0;
    std::size_t stride = 1;
    double p = 1.0;
    for (std::size_t c = 0; c < js.channels; ++c) {
      const std::size_t cls = s.class_of(r[c]);
      assignment += cls * stride;
      stride *= l;
      p *= mu[c][cls][s.index_in_class(r[c])];
    }
    out[assignment][idx] = p;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  detail::CompensatedSum sum;
  for (std::size_t k = 0; k < a.size(); ++k) sum.add(a[k] * b[k]);
  return sum.value();
}

}  // namespace

std::vector<double> fredholm_products(const KineticScheme& s, const Field& u, const TestFunction& phi) {
  const JointSpace js = joint_space(s, u.grid());
  const auto h = poisson_rhs(s, u, phi, js);
  std::vector<double> out;
  for (const auto& pi : product_measures(s, u, js)) out.push_back(dot(pi, h));
  return out;
}

PoissonSolution poisson_solve(const KineticScheme& s, const Field& u, const TestFunction& phi) {
  const JointSpace js = joint_space(s, u.grid());
  const std::size_t n = js.dim;

  // Joint fast generator: Kronecker sum of per-site within-class generators.
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t stride = 1;
  for (std::size_t c = 0; c < js.channels; ++c) {
    const double v = u.at_channel(c);
    for (std::size_t idx = 0; idx < n; ++idx) {
      const std::size_t sc = (idx / stride) % js.states;
      for (std::size_t k : s.outgoing(sc)) {
        const auto& t = s.transitions()[k];
        if (!s.is_fast(t)) continue;
        const double rate = t.rate(v);
        const std::size_t target = idx + (t.to * stride) - (sc * stride);
        gen(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(target)) += rate;
        gen(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)) -= rate;
      }
    }
    stride *= js.states;
  }

  PoissonSolution sol;
  sol.rhs = poisson_rhs(s, u, phi, js);
  const auto measures = product_measures(s, u, js);
  for (const auto& pi : measures) sol.orthogonality.push_back(dot(pi, sol.rhs));
  for (std::size_t k = 0; k < sol.orthogonality.size(); ++k) {
    if (std::abs(sol.orthogonality[k]) > 1e-8) {
      fail(ErrorKind::Runtime, "right-hand side is not orthogonal to product measure " + std::to_string(k) +
                                   " (|<rhs, pi>| = " + std::to_string(std::abs(sol.orthogonality[k])) +
                                   "); the averaged reaction is inconsistent with G");
    }
  }

  const auto rows = static_cast<Eigen::Index>(n + measures.size());
  Eigen::MatrixXd bordered(rows, static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  bordered.topRows(static_cast<Eigen::Index>(n)) = gen;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    for (std::size_t idx = 0; idx < n; ++idx) {
      bordered(static_cast<Eigen::Index>(n + k), static_cast<Eigen::Index>(idx)) = measures[k][idx];
    }
  }
  for (std::size_t idx = 0; idx < n; ++idx) rhs(static_cast<Eigen::Index>(idx)) = sol.rhs[idx];
  const Eigen::VectorXd f = bordered.householderQr().solve(rhs);
  sol.f.assign(f.data(), f.data() + f.size());

  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(sol.rhs.data(), static_cast<Eigen::Index>(n));
  sol.residual = (gen * f - h).cwiseAbs().maxCoeff();
  for (const auto& pi : measures) sol.centerings.push_back(dot(pi, sol.f));

  // Minimum-norm solution, then the centering projection on each class block.
  const auto cod = gen.completeOrthogonalDecomposition();
  sol.kernel_dim = n - static_cast<std::size_t>(cod.rank());
  Eigen::VectorXd g = cod.solve(h);
  std::vector<double> gv(g.data(), g.data() + g.size());
  std::vector<double> shift(measures.size());
  for (std::size_t k = 0; k < measures.size(); ++k) shift[k] = dot(measures[k], gv);
  sol.uniqueness_gap = 0.0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    gv[idx] -= shift[class_assignment(s, js, idx)];
    sol.uniqueness_gap = std::max(sol.uniqueness_gap, std::abs(gv[idx] - sol.f[idx]));
  }
  return sol;
}

}  // namespace pdmpaxon
