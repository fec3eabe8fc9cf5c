// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/field.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dense.hpp"
#include "pdmpaxon/error.hpp"

namespace pdmpaxon {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void check_channels(const Grid& grid, std::size_t count, const char* what) {
  if (count != grid.num_channels()) {
    fail(ErrorKind::InvalidArgument, std::string(what) + " has " + std::to_string(count) + " entries, grid has N-1 = " +
                                         std::to_string(grid.num_channels()) + " channels");
  }
}

std::vector<double> place(const Grid& grid, std::span<const DiracWeight> weights) {
  std::vector<double> src(grid.nodes(), 0.0);
  const double inv_h = 1.0 / grid.spacing();
  for (std::size_t c = 0; c < weights.size(); ++c) src[grid.channel_node(c)] += weights[c].weight * inv_h;
  return src;
}

}  // namespace

Grid::Grid(std::size_t cells, std::size_t channel_param) : cells_(cells), channel_param_(channel_param) {
  if (channel_param_ < 1 || cells_ < 1) fail(ErrorKind::InvalidConfig, "grid needs M >= 1 and N >= 1");
  if (cells_ % channel_param_ != 0) {
    fail(ErrorKind::InvalidConfig, "M=" + std::to_string(cells_) + " must be a multiple of N=" + std::to_string(channel_param_));
  }
}

Field::Field(Grid grid, std::vector<double> values, double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.nodes()) {
    fail(ErrorKind::InvalidArgument, "field has " + std::to_string(values_.size()) + " values, grid needs " +
                                         std::to_string(grid_.nodes()));
  }
  if (values_.front() != 0.0 || values_.back() != 0.0) {
    fail(ErrorKind::InvalidArgument, "field must vanish at x=0 and x=1");
  }
}

Field Field::zero(const Grid& grid, double time) { return Field(grid, std::vector<double>(grid.nodes(), 0.0), time); }

Field Field::sample(const Grid& grid, const std::function<double(double)>& f, double time) {
  std::vector<double> v(grid.nodes(), 0.0);
  for (std::size_t q = 1; q + 1 < grid.nodes(); ++q) v[q] = f(grid.position(q));
  return Field(grid, std::move(v), time);
}

TestFunction::TestFunction(std::string name, std::function<double(double)> value,
                           std::function<double(double)> second_derivative)
    : name_(std::move(name)), value_(std::move(value)), second_(std::move(second_derivative)) {
  if (!value_ || !second_) fail(ErrorKind::InvalidArgument, "test function needs value and second derivative");
  if (std::abs(value_(0.0)) > 1e-12 || std::abs(value_(1.0)) > 1e-12) {
    fail(ErrorKind::InvalidArgument, "test function '" + name_ + "' must vanish at 0 and 1");
  }
}

TestFunction TestFunction::sine(int k) {
  const double w = k * kPi;
  return TestFunction(
      "sin(" + std::to_string(k) + "*pi*x)",
      [w](double x) { return x == 1.0 ? 0.0 : std::sin(w * x); },
      [w](double x) { return -w * w * std::sin(w * x); });
}

TestFunction TestFunction::zero() {
  return TestFunction("0", [](double) { return 0.0; }, [](double) { return 0.0; });
}

AggregatedConfig aggregate(const KineticScheme& s, const ChannelConfig& r) {
  AggregatedConfig out;
  out.labels.reserve(r.states.size());
  for (std::size_t st : r.states) out.labels.push_back(s.class_of(st));
  return out;
}

std::vector<double> input_source(const Grid& grid, const AppliedInput& input) {
  std::vector<double> src(grid.nodes(), 0.0);
  if (!input.active() || input.clamp) return src;
  for (std::size_t q = 1; q + 1 < grid.nodes(); ++q) {
    const double x = grid.position(q);
    if (x >= input.lo - 1e-12 && x <= input.hi + 1e-12) src[q] = input.amplitude;
  }
  return src;
}

void apply_clamp(const Grid& grid, const AppliedInput& input, std::span<double> values) {
  if (!input.active() || !input.clamp) return;
  for (std::size_t q = 1; q + 1 < grid.nodes(); ++q) {
    const double x = grid.position(q);
    if (x >= input.lo - 1e-12 && x <= input.hi + 1e-12) values[q] = input.amplitude;
  }
}

std::vector<DiracWeight> dirac_weights_full(const KineticScheme& s, const ChannelConfig& r, const Field& u) {
  const Grid& grid = u.grid();
  check_channels(grid, r.states.size(), "channel configuration");
  const double inv_n = 1.0 / static_cast<double>(grid.channel_param());
  std::vector<DiracWeight> w(r.states.size());
  for (std::size_t c = 0; c < r.states.size(); ++c) {
    if (r.states[c] >= s.num_states()) fail(ErrorKind::InvalidArgument, "channel state index out of range");
    const auto& st = s.state(r.states[c]);
    w[c] = {grid.channel_position(c), inv_n * st.conductance * (st.reversal - u.at_channel(c))};
  }
  return w;
}

std::vector<DiracWeight> dirac_weights_averaged(const KineticScheme& s, const AggregatedConfig& rbar, const Field& u) {
  const Grid& grid = u.grid();
  check_channels(grid, rbar.labels.size(), "class-label configuration");
  const double inv_n = 1.0 / static_cast<double>(grid.channel_param());
  std::vector<DiracWeight> w(rbar.labels.size());
  for (std::size_t c = 0; c < rbar.labels.size(); ++c) {
    const std::size_t cls = rbar.labels[c];
    const auto members = s.class_members(cls);
    const double v = u.at_channel(c);
    const Distribution mu = quasi_stationary(s, cls, v);
    double acc = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
      const auto& st = s.state(members[a]);
      acc += st.conductance * mu[a] * (st.reversal - v);
    }
    w[c] = {grid.channel_position(c), inv_n * acc};
  }
  return w;
}

std::vector<double> reaction_full(const KineticScheme& s, const ChannelConfig& r, const Field& u) {
  return place(u.grid(), dirac_weights_full(s, r, u));
}

std::vector<double> reaction_averaged(const KineticScheme& s, const AggregatedConfig& rbar, const Field& u) {
  return place(u.grid(), dirac_weights_averaged(s, rbar, u));
}

double admissible_dt(const Grid& grid, double k_diff, double max_conductance) {
  const double h = grid.spacing();
  const double rate = 2.0 * k_diff / (h * h) + max_conductance / (static_cast<double>(grid.channel_param()) * h);
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

double cfl_dt(const Grid& grid, double k_diff) {
  const double h = grid.spacing();
  return k_diff > 0.0 ? h * h / (2.0 * k_diff) : std::numeric_limits<double>::infinity();
}

Field fd_step(const Field& u, std::span<const double> source, double k_diff, double dt) {
  const Grid& grid = u.grid();
  if (source.size() != grid.nodes()) fail(ErrorKind::InvalidArgument, "source vector size does not match grid");
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  const double limit = cfl_dt(grid, k_diff);
  if (dt > limit * (1.0 + 1e-12)) {
    fail(ErrorKind::InvalidConfig, "dt=" + fmt(dt) + " violates the diffusion CFL condition; admissible dt <= " + fmt(limit));
  }
  const auto in = u.values();
  std::vector<double> out(in.size(), 0.0);
  const double coef = k_diff / (grid.spacing() * grid.spacing());
  for (std::size_t q = 1; q + 1 < in.size(); ++q) {
    out[q] = in[q] + dt * (coef * (in[q - 1] - 2.0 * in[q] + in[q + 1]) + source[q]);
  }
  return Field(grid, std::move(out), u.time() + dt);
}

double pair(const Field& u, const TestFunction& phi) {
  const Grid& grid = u.grid();
  detail::CompensatedSum sum;
  for (std::size_t q = 0; q < grid.nodes(); ++q) {
    const double weight = (q == 0 || q + 1 == grid.nodes()) ? 0.5 : 1.0;
    sum.add(weight * u[q] * phi(grid.position(q)));
  }
  return sum.value() * grid.spacing();
}

double pair_reaction_full(const KineticScheme& s, const ChannelConfig& r, const Field& u, const TestFunction& phi) {
  detail::CompensatedSum sum;
  for (const auto& w : dirac_weights_full(s, r, u)) sum.add(w.weight * phi(w.position));
  return sum.value();
}

double pair_reaction_averaged(const KineticScheme& s, const AggregatedConfig& rbar, const Field& u,
                              const TestFunction& phi) {
  detail::CompensatedSum sum;
  for (const auto& w : dirac_weights_averaged(s, rbar, u)) sum.add(w.weight * phi(w.position));
  return sum.value();
}

double h1_norm(const Field& u) {
  const auto v = u.values();
  const double h = u.grid().spacing();
  double l2 = 0.0;
  double grad = 0.0;
  for (std::size_t q = 0; q < v.size(); ++q) l2 += v[q] * v[q];
  for (std::size_t q = 0; q + 1 < v.size(); ++q) {
    const double d = (v[q + 1] - v[q]) / h;
    grad += d * d;
  }
  return std::sqrt(h * (l2 + grad));
}

double basis_e(std::size_t k, double x) {
  const double w = static_cast<double>(k) * kPi;
  return std::numbers::sqrt2 * std::sin(w * x) / std::sqrt(1.0 + w * w);
}

double basis_f(std::size_t k, double x) {
  return std::numbers::sqrt2 * std::sin(static_cast<double>(k) * kPi * x);
}

SpectralState::SpectralState(std::vector<double> coeffs, double time) : coeffs_(std::move(coeffs)), time_(time) {
  if (coeffs_.empty()) fail(ErrorKind::InvalidArgument, "spectral state needs at least one mode");
}

SpectralState SpectralState::project(const Field& u, std::size_t modes) {
  const Grid& grid = u.grid();
  std::vector<double> a(modes, 0.0);
  for (std::size_t k = 1; k <= modes; ++k) {
    double b = 0.0;
    for (std::size_t q = 1; q + 1 < grid.nodes(); ++q) b += u[q] * basis_f(k, grid.position(q));
    b *= grid.spacing();
    const double w = static_cast<double>(k) * kPi;
    a[k - 1] = std::sqrt(1.0 + w * w) * b;
  }
  return SpectralState(std::move(a), u.time());
}

std::vector<double> SpectralState::l2_coeffs() const {
  std::vector<double> b(coeffs_.size());
  for (std::size_t k = 1; k <= coeffs_.size(); ++k) {
    const double w = static_cast<double>(k) * kPi;
    b[k - 1] = coeffs_[k - 1] / std::sqrt(1.0 + w * w);
  }
  return b;
}

double SpectralState::value_at(double x) const {
  double acc = 0.0;
  for (std::size_t k = 1; k <= coeffs_.size(); ++k) acc += coeffs_[k - 1] * basis_e(k, x);
  return acc;
}

double SpectralState::value_at_l2(double x) const {
  const auto b = l2_coeffs();
  double acc = 0.0;
  for (std::size_t k = 1; k <= b.size(); ++k) acc += b[k - 1] * basis_f(k, x);
  return acc;
}

Field SpectralState::to_field(const Grid& grid) const {
  std::vector<double> v(grid.nodes(), 0.0);
  for (std::size_t q = 1; q + 1 < grid.nodes(); ++q) v[q] = value_at(grid.position(q));
  return Field(grid, std::move(v), time_);
}

std::vector<double> indicator_coefficients(double amplitude, double lo, double hi, std::size_t modes) {
  std::vector<double> g(modes);
  for (std::size_t k = 1; k <= modes; ++k) {
    const double w = static_cast<double>(k) * kPi;
    // (1 + w^2) * integral of amplitude * e_k over [lo, hi]
    g[k - 1] = std::sqrt(1.0 + w * w) * std::numbers::sqrt2 * amplitude * (std::cos(w * lo) - std::cos(w * hi)) / w;
  }
  return g;
}

SpectralState spectral_step(const SpectralState& state, std::span<const DiracWeight> source, double k_diff, double dt,
                            std::span<const double> distributed) {
  if (!distributed.empty() && distributed.size() != state.modes()) {
    fail(ErrorKind::InvalidArgument, "distributed source has the wrong number of modes");
  }
  const auto a = state.coeffs();
  std::vector<double> next(a.size());
  for (std::size_t k = 1; k <= a.size(); ++k) {
    const double w = static_cast<double>(k) * kPi;
    const double lambda = k_diff * w * w;
    double g = 0.0;
    for (const auto& d : source) g += d.weight * (1.0 + w * w) * basis_e(k, d.position);
    if (!distributed.empty()) g += distributed[k - 1];
    const double decay = std::exp(-lambda * dt);
    const double gain = lambda > 0.0 ? -std::expm1(-lambda * dt) / lambda : dt;
    next[k - 1] = decay * a[k - 1] + gain * g;
  }
  return SpectralState(std::move(next), state.time() + dt);
}

}  // namespace pdmpaxon
