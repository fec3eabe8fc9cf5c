// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/kinetics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "dense.hpp"
#include "pdmpaxon/error.hpp"
#include "pdmpaxon/scheme_file.hpp"

namespace pdmpaxon {

namespace {

// w / (e^w - 1), continuous through w = 0.
double relative_expm1(double w) {
  if (std::abs(w) < 1e-4) return 1.0 - w / 2.0 + w * w / 12.0;
  return w / std::expm1(w);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(std::string_view s) {
  double out = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) return std::nullopt;
  return out;
}

const char* kind_name(RateKind k) {
  switch (k) {
    case RateKind::AlphaM: return "a_m";
    case RateKind::BetaM: return "b_m";
    case RateKind::AlphaH: return "a_h";
    case RateKind::BetaH: return "b_h";
    case RateKind::Constant: return "const";
    case RateKind::Custom: return "custom";
  }
  return "?";
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Kosaraju over the non-zero off-diagonal pattern of a dense matrix.
std::vector<std::vector<std::size_t>> strongly_connected(std::size_t n,
                                                         const std::function<bool(std::size_t, std::size_t)>& edge) {
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    // iterative post-order DFS
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    seen[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      bool pushed = false;
      while (next < n) {
        const std::size_t j = next++;
        if (j != node && !seen[j] && edge(node, j)) {
          seen[j] = 1;
          stack.push_back({j, 0});
          pushed = true;
          break;
        }
      }
      if (!pushed) {
        order.push_back(stack.back().first);
        stack.pop_back();
      }
    }
  }
  std::vector<long> comp(n, -1);
  std::vector<std::vector<std::size_t>> comps;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    comps.emplace_back();
    std::vector<std::size_t> stack{*it};
    comp[*it] = static_cast<long>(comps.size() - 1);
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      comps.back().push_back(node);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != node && comp[j] < 0 && edge(j, node)) {
          comp[j] = comp[*it];
          stack.push_back(j);
        }
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

}  // namespace

double alpha_m(Voltage u) { return relative_expm1(2.5 - 0.1 * u); }
double beta_m(Voltage u) { return 4.0 * std::exp(-u / 18.0); }
double alpha_h(Voltage u) { return 0.07 * std::exp(-u / 20.0); }
double beta_h(Voltage u) { return 1.0 / (std::exp(3.0 - 0.1 * u) + 1.0); }

RateFunction RateFunction::standard(RateKind kind, double multiplier) {
  if (kind == RateKind::Constant || kind == RateKind::Custom) {
    fail(ErrorKind::InvalidArgument, "RateFunction::standard needs one of a_m, b_m, a_h, b_h");
  }
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    fail(ErrorKind::InvalidArgument, "rate multiplier must be positive and finite");
  }
  return RateFunction(kind, multiplier);
}

RateFunction RateFunction::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::InvalidArgument, "constant rate must be positive and finite (omit structurally-zero rates)");
  }
  return RateFunction(RateKind::Constant, value);
}

RateFunction RateFunction::custom(std::string name, std::function<double(Voltage)> fn, double multiplier) {
  if (!fn) fail(ErrorKind::InvalidArgument, "custom rate needs a callable");
  RateFunction r(RateKind::Custom, multiplier);
  r.custom_name_ = std::move(name);
  r.custom_ = std::move(fn);
  return r;
}

RateFunction RateFunction::parse(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) fail(ErrorKind::InvalidArgument, "empty rate expression");
  if (auto value = parse_number(t)) return constant(*value);

  double multiplier = 1.0;
  std::string base = t;
  if (const auto star = t.find('*'); star != std::string::npos) {
    const auto coef = parse_number(trim(std::string_view(t).substr(0, star)));
    if (!coef) fail(ErrorKind::InvalidArgument, "bad rate multiplier in '" + t + "'");
    multiplier = *coef;
    base = trim(std::string_view(t).substr(star + 1));
  }
  static const std::pair<const char*, RateKind> names[] = {
      {"a_m", RateKind::AlphaM}, {"b_m", RateKind::BetaM}, {"a_h", RateKind::AlphaH}, {"b_h", RateKind::BetaH}};
  for (const auto& [name, kind] : names) {
    if (base == name) return standard(kind, multiplier);
  }
  fail(ErrorKind::InvalidArgument, "unknown rate function '" + base + "' (expected a_m, b_m, a_h, b_h or a number)");
}

double RateFunction::operator()(Voltage v) const {
  switch (kind_) {
    case RateKind::AlphaM: return multiplier_ * alpha_m(v);
    case RateKind::BetaM: return multiplier_ * beta_m(v);
    case RateKind::AlphaH: return multiplier_ * alpha_h(v);
    case RateKind::BetaH: return multiplier_ * beta_h(v);
    case RateKind::Constant: return multiplier_;
    case RateKind::Custom: return multiplier_ * custom_(v);
  }
  return 0.0;
}

std::string RateFunction::to_string() const {
  if (kind_ == RateKind::Constant) return format_double(multiplier_);
  const std::string base = kind_ == RateKind::Custom ? custom_name_ : std::string(kind_name(kind_));
  if (multiplier_ == 1.0) return base;
  return format_double(multiplier_) + "*" + base;
}

double eval_rate(const RateFunction& f, Voltage v) { return f(v); }

void GeneratorMatrix::fill_diagonal() {
  for (std::size_t i = 0; i < dim_; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (j != i) off += (*this)(i, j);
    }
    (*this)(i, i) = -off;
  }
}

double GeneratorMatrix::max_abs_row_sum() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) row += (*this)(i, j);
    worst = std::max(worst, std::abs(row));
  }
  return worst;
}

bool GeneratorMatrix::is_generator(double tol) const {
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      if (i != j && !((*this)(i, j) >= 0.0)) return false;
    }
  }
  return max_abs_row_sum() <= tol;
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) fail(ErrorKind::InvalidArgument, "distribution must be non-empty");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) fail(ErrorKind::InvalidArgument, "distribution entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "distribution must sum to 1");
}

KineticScheme::KineticScheme(std::string id, std::vector<StateSpec> states, std::vector<Transition> transitions)
    : id_(std::move(id)), states_(std::move(states)), transitions_(std::move(transitions)) {
  if (states_.empty()) fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "' has no states");
  std::unordered_set<std::string> names;
  std::size_t n_classes = 0;
  for (const auto& st : states_) {
    if (st.name.empty() || !names.insert(st.name).second) {
      fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "': state names must be unique and non-empty");
    }
    if (!(st.conductance >= 0.0) || !std::isfinite(st.conductance) || !std::isfinite(st.reversal)) {
      fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "': state " + st.name + " needs finite c >= 0 and finite v");
    }
    n_classes = std::max(n_classes, st.cls + 1);
    max_conductance_ = std::max(max_conductance_, st.conductance);
  }
  class_members_.assign(n_classes, {});
  index_in_class_.resize(states_.size());
  for (std::size_t s = 0; s < states_.size(); ++s) {
    index_in_class_[s] = class_members_[states_[s].cls].size();
    class_members_[states_[s].cls].push_back(s);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (class_members_[c].empty()) {
      fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "': class " + std::to_string(c) + " is empty");
    }
  }

  outgoing_.assign(states_.size(), {});
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    const auto& t = transitions_[k];
    if (t.from >= states_.size() || t.to >= states_.size() || t.from == t.to) {
      fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "': invalid transition endpoints");
    }
    for (std::size_t other : outgoing_[t.from]) {
      if (transitions_[other].to == t.to) {
        fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "': duplicate transition " + states_[t.from].name +
                                             " -> " + states_[t.to].name);
      }
    }
    outgoing_[t.from].push_back(k);
  }
  for (const auto& out : outgoing_) max_out_degree_ = std::max(max_out_degree_, out.size());

  // Sampled bounds alpha_- <= alpha(v) <= alpha^+ on the voltage box.
  constexpr int kSamples = 2501;
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& t : transitions_) {
    for (int k = 0; k < kSamples; ++k) {
      const double v = kVoltageBoxLow + (kVoltageBoxHigh - kVoltageBoxLow) * k / (kSamples - 1);
      const double r = t.rate(v);
      if (!(r > 0.0) || !std::isfinite(r)) {
        fail(ErrorKind::InvalidArgument, "scheme '" + id_ + "': rate " + states_[t.from].name + " -> " +
                                             states_[t.to].name + " is not strictly positive and finite at v=" +
                                             format_double(v));
      }
      hi = std::max(hi, r);
      lo = std::min(lo, r);
    }
  }
  rate_bound_ = 1.05 * hi;
  rate_floor_ = transitions_.empty() ? 0.0 : lo;

  // Each class must be irreducible under its within-class transitions. Rates are
  // strictly positive on the box, so the structural pattern decides.
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto& members = class_members_[c];
    const std::size_t m = members.size();
    auto edge = [&](std::size_t a, std::size_t b) { return rate(members[a], members[b]) != nullptr; };
    const auto comps = strongly_connected(m, edge);
    if (comps.size() > 1) {
      std::string msg = "scheme '" + id_ + "': class " + std::to_string(c) + " is not irreducible; blocks:";
      for (const auto& comp : comps) {
        msg += " {";
        for (std::size_t k = 0; k < comp.size(); ++k) msg += (k ? "," : "") + states_[members[comp[k]]].name;
        msg += "}";
      }
      fail(ErrorKind::Reducible, msg);
    }
  }
}

std::span<const std::size_t> KineticScheme::class_members(std::size_t cls) const {
  if (cls >= class_members_.size()) {
    fail(ErrorKind::InvalidArgument, "class index " + std::to_string(cls) + " out of range (scheme '" + id_ +
                                         "' has " + std::to_string(class_members_.size()) + " classes)");
  }
  return class_members_[cls];
}

std::optional<std::size_t> KineticScheme::find_state(std::string_view name) const {
  for (std::size_t s = 0; s < states_.size(); ++s) {
    if (states_[s].name == name) return s;
  }
  return std::nullopt;
}

const RateFunction* KineticScheme::rate(std::size_t from, std::size_t to) const {
  for (std::size_t k : outgoing_.at(from)) {
    if (transitions_[k].to == to) return &transitions_[k].rate;
  }
  return nullptr;
}

GeneratorMatrix full_generator(const KineticScheme& s, Voltage v, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::InvalidArgument, "eps must be positive and finite");
  GeneratorMatrix g(s.num_states());
  for (const auto& t : s.transitions()) {
    const double r = t.rate(v);
    g(t.from, t.to) = s.is_fast(t) ? r / eps : r;
  }
  g.fill_diagonal();
  return g;
}

GeneratorMatrix class_generator(const KineticScheme& s, std::size_t cls, Voltage v) {
  const auto members = s.class_members(cls);
  GeneratorMatrix g(members.size());
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t k : s.outgoing(members[a])) {
      const auto& t = s.transitions()[k];
      if (s.class_of(t.to) != cls) continue;
      g(a, s.index_in_class(t.to)) = t.rate(v);
    }
  }
  g.fill_diagonal();
  return g;
}

std::vector<std::vector<std::size_t>> communicating_classes(const GeneratorMatrix& g) {
  return strongly_connected(g.dim(), [&](std::size_t a, std::size_t b) { return g(a, b) > 0.0; });
}

Distribution stationary_distribution(const GeneratorMatrix& g) {
  const std::size_t n = g.dim();
  if (n == 0) fail(ErrorKind::InvalidArgument, "empty generator");
  if (n == 1) return Distribution({1.0});

  const auto comps = communicating_classes(g);
  if (comps.size() > 1) {
    std::string msg = "generator is reducible; disconnected blocks:";
    for (const auto& comp : comps) {
      msg += " {";
      for (std::size_t k = 0; k < comp.size(); ++k) msg += (k ? "," : "") + std::to_string(comp[k]);
      msg += "}";
    }
    fail(ErrorKind::Reducible, msg);
  }

  // Balance equations g^T mu = 0 with the last one replaced by sum(mu) = 1.
  std::vector<double> a(n * n);
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = g(j, i);
  }
  for (std::size_t j = 0; j < n; ++j) a[(n - 1) * n + j] = 1.0;
  b[n - 1] = 1.0;
  if (!detail::solve_dense(a, b, n)) fail(ErrorKind::Runtime, "singular balance system");

  double total = 0.0;
  for (double& p : b) {
    if (p < 0.0) p = 0.0;  // round-off only; irreducible chains have mu > 0
    total += p;
  }
  for (double& p : b) p /= total;
  return Distribution(std::move(b));
}

Distribution quasi_stationary(const KineticScheme& s, std::size_t cls, Voltage v) {
  return stationary_distribution(class_generator(s, cls, v));
}

GeneratorMatrix aggregated_generator(const KineticScheme& s, Voltage v) {
  const std::size_t l = s.num_classes();
  GeneratorMatrix g(l);
  for (std::size_t j = 0; j < l; ++j) {
    const auto members = s.class_members(j);
    const Distribution mu = quasi_stationary(s, j, v);
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t k : s.outgoing(members[a])) {
        const auto& t = s.transitions()[k];
        const std::size_t target = s.class_of(t.to);
        if (target != j) g(j, target) += mu[a] * t.rate(v);
      }
    }
  }
  g.fill_diagonal();
  return g;
}

KineticScheme na8_scheme() {
  std::vector<StateSpec> states;
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t m = 0; m < 4; ++m) {
      const bool open = (m == 3 && h == 1);
      states.push_back({"m" + std::to_string(m) + "h" + std::to_string(h), h, open ? kNaConductance : 0.0,
                        open ? kNaReversal : 0.0});
    }
  }
  auto idx = [](std::size_t m, std::size_t h) { return h * 4 + m; };
  std::vector<Transition> tr;
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t m = 0; m < 3; ++m) {
      tr.push_back({idx(m, h), idx(m + 1, h), RateFunction::standard(RateKind::AlphaM, 3.0 - m)});
      tr.push_back({idx(m + 1, h), idx(m, h), RateFunction::standard(RateKind::BetaM, m + 1.0)});
    }
  }
  for (std::size_t m = 0; m < 4; ++m) {
    tr.push_back({idx(m, 0), idx(m, 1), RateFunction::standard(RateKind::AlphaH)});
    tr.push_back({idx(m, 1), idx(m, 0), RateFunction::standard(RateKind::BetaH)});
  }
  return KineticScheme("na8", std::move(states), std::move(tr));
}

KineticScheme na4m_scheme() {
  std::vector<StateSpec> states;
  for (std::size_t m = 0; m < 4; ++m) {
    const bool open = m == 3;
    states.push_back({"m" + std::to_string(m), 0, open ? kNaConductance : 0.0, open ? kNaReversal : 0.0});
  }
  std::vector<Transition> tr;
  for (std::size_t m = 0; m < 3; ++m) {
    tr.push_back({m, m + 1, RateFunction::standard(RateKind::AlphaM, 3.0 - m)});
    tr.push_back({m + 1, m, RateFunction::standard(RateKind::BetaM, m + 1.0)});
  }
  return KineticScheme("na4m", std::move(states), std::move(tr));
}

KineticScheme toy2_scheme(double open_rate, double close_rate) {
  std::vector<StateSpec> states{{"closed", 0, 0.0, 0.0}, {"open", 0, 1.0, 1.0}};
  std::vector<Transition> tr{{0, 1, RateFunction::constant(open_rate)}, {1, 0, RateFunction::constant(close_rate)}};
  return KineticScheme("toy2", std::move(states), std::move(tr));
}

KineticScheme flat2_scheme() {
  std::vector<StateSpec> states{{"a", 0, 1.0, 1.0}, {"b", 0, 1.0, 1.0}};
  std::vector<Transition> tr{{0, 1, RateFunction::constant(1.0)}, {1, 0, RateFunction::constant(2.0)}};
  return KineticScheme("flat2", std::move(states), std::move(tr));
}

std::vector<std::string> builtin_scheme_names() { return {"na8", "na4m", "toy2", "flat2"}; }

std::optional<KineticScheme> builtin_scheme(std::string_view name) {
  if (name == "na8") return na8_scheme();
  if (name == "na4m") return na4m_scheme();
  if (name == "toy2") return toy2_scheme();
  if (name == "flat2") return flat2_scheme();
  return std::nullopt;
}

KineticScheme load_scheme(const std::string& name_or_path) {
  if (auto s = builtin_scheme(name_or_path)) return *std::move(s);
  return read_scheme_file(name_or_path);
}

}  // namespace pdmpaxon
