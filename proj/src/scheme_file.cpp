// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#include "pdmpaxon/scheme_file.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "pdmpaxon/error.hpp"

namespace pdmpaxon {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line_no) + ": bad number '" + tok + "'");
}

}  // namespace

KineticScheme parse_scheme_text(std::string_view text, const std::string& fallback_id) {
  enum class Section { None, Scheme, States, Rates } section = Section::None;
  std::string id = fallback_id;
  std::vector<StateSpec> states;
  std::vector<std::vector<std::string>> rate_lines;
  std::vector<std::size_t> rate_line_numbers;

  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto toks = split_ws(raw);
    if (toks.empty()) continue;
    if (toks.size() == 1 && toks[0].front() == '[' && toks[0].back() == ']') {
      const std::string name = toks[0].substr(1, toks[0].size() - 2);
      if (name == "scheme") section = Section::Scheme;
      else if (name == "states") section = Section::States;
      else if (name == "rates") section = Section::Rates;
      else fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line_no) + ": unknown section [" + name + "]");
      continue;
    }
    switch (section) {
      case Section::None:
        fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line_no) + ": content before any section");
      case Section::Scheme:
        if (toks.size() == 3 && toks[0] == "id" && toks[1] == "=") {
          id = toks[2];
        } else {
          fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line_no) + ": expected 'id = <name>'");
        }
        break;
      case Section::States: {
        if (toks.size() != 4) {
          fail(ErrorKind::InvalidArgument,
               "scheme line " + std::to_string(line_no) + ": expected '<name> <class> <conductance> <reversal>'");
        }
        const double cls = to_double(toks[1], line_no);
        if (cls < 0 || cls != static_cast<double>(static_cast<std::size_t>(cls))) {
          fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line_no) + ": class must be a non-negative integer");
        }
        states.push_back({toks[0], static_cast<std::size_t>(cls), to_double(toks[2], line_no), to_double(toks[3], line_no)});
        break;
      }
      case Section::Rates:
        if (toks.size() != 3) {
          fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line_no) + ": expected '<from> <to> <rate>'");
        }
        rate_lines.push_back(toks);
        rate_line_numbers.push_back(line_no);
        break;
    }
  }

  auto lookup = [&](const std::string& name, std::size_t line) {
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (states[s].name == name) return s;
    }
    fail(ErrorKind::InvalidArgument, "scheme line " + std::to_string(line) + ": unknown state '" + name + "'");
  };
  std::vector<Transition> transitions;
  for (std::size_t k = 0; k < rate_lines.size(); ++k) {
    const auto& toks = rate_lines[k];
    transitions.push_back({lookup(toks[0], rate_line_numbers[k]), lookup(toks[1], rate_line_numbers[k]),
                           RateFunction::parse(toks[2])});
  }
  return KineticScheme(id, std::move(states), std::move(transitions));
}

KineticScheme read_scheme_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open scheme '" + path + "' (not a built-in name or readable file)");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scheme_text(buf.str(), path);
}

std::string format_scheme_text(const KineticScheme& scheme) {
  std::ostringstream os;
  os.precision(17);
  os << "[scheme]\nid = " << scheme.id() << "\n[states]\n# name class conductance reversal\n";
  for (std::size_t s = 0; s < scheme.num_states(); ++s) {
    const auto& st = scheme.state(s);
    os << st.name << ' ' << st.cls << ' ' << st.conductance << ' ' << st.reversal << '\n';
  }
  os << "[rates]\n# from to rate\n";
  for (const auto& t : scheme.transitions()) {
    os << scheme.state(t.from).name << ' ' << scheme.state(t.to).name << ' ' << t.rate.to_string() << '\n';
  }
  return os.str();
}

}  // namespace pdmpaxon
