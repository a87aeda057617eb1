#pragma once

// Run configuration: a line-oriented `key = value` file with [problem],
// [solver] and [sweep] sections.
//
//   seed = 7
//   [problem]
//   p = 2
//   alpha = 0
//   n = 3
//   f1 = "1"
//   f2 = "1"
//   g1 = "t"
//   g2 = "1"
//   h = "t^{q}"        # {q} is filled in from the sweep
//   omega = "ball"
//   [solver]
//   u0 = 1
//   target_radius = 50
//   [sweep]
//   q = [1, 2, 3]
//
// Sweep keys are problem or solver numbers, `alpha_ratio` (alpha as a
// fraction of p - 1), or placeholders used in expressions. Rows are the
// cartesian product with the first key varying slowest.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "radlab/classifier.hpp"
#include "radlab/format.hpp"
#include "radlab/function_expr.hpp"
#include "radlab/problem.hpp"
#include "radlab/radial_solver.hpp"

namespace radlab {

/// All problems found in a configuration, one message each.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out;
    for (const auto& e : errors) out += (out.empty() ? "" : "\n") + e;
    return out;
  }
  std::vector<std::string> errors_;
};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// One sweep row: (name, value) in declared order.
using SweepPoint = std::vector<std::pair<std::string, double>>;

struct RunConfig {
  double p = 2.0;
  double alpha = 0.0;
  double n = 3.0;
  /// Expression sources, possibly with {name} placeholders.
  std::string f1 = "1", f2 = "1", g1 = "t", g2 = "1", h = "t";
  Domain omega = Domain::Ball;
  double u0 = 1.0;
  double v0 = 1.0;
  SolverOptions solver;
  std::vector<SweepAxis> sweep;
  std::uint64_t seed = 0;
};

/// A config with one sweep point applied.
struct RunInstance {
  ProblemSpec spec;
  Domain omega = Domain::Ball;
  double u0 = 1.0;
  double v0 = 1.0;
  SolverOptions solver;
};

namespace detail {

inline const std::set<std::string>& numeric_problem_keys() {
  static const std::set<std::string> k{"p", "alpha", "n"};
  return k;
}
inline const std::set<std::string>& expression_keys() {
  static const std::set<std::string> k{"f1", "f2", "g1", "g2", "h"};
  return k;
}
inline const std::set<std::string>& solver_keys() {
  static const std::set<std::string> k{"u0", "v0", "target_radius", "blowup_threshold", "rel_tol"};
  return k;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Names appearing as {name} in an expression source.
inline std::vector<std::string> placeholders(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t i = text.find('{'); i != std::string::npos; i = text.find('{', i + 1)) {
    const auto close = text.find('}', i);
    if (close == std::string::npos) break;
    out.push_back(text.substr(i + 1, close - i - 1));
  }
  return out;
}

inline std::string substitute(std::string text, const SweepPoint& point) {
  for (const auto& [name, value] : point) {
    const std::string key = "{" + name + "}";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
      const std::string rep = format_number(value);
      text.replace(pos, key.size(), rep);
      pos += rep.size();
    }
  }
  return text;
}

enum class ValueKind { Bare, Quoted, List };

struct RawValue {
  ValueKind kind = ValueKind::Bare;
  std::string text;                 // bare token or quoted content
  std::vector<std::string> items;  // list items
  std::size_t column = 0;          // 1-based column of the value
};

struct Entry {
  std::string section;
  std::string key;
  RawValue value;
  std::size_t line = 0;
};

inline std::string at(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

/// Splits the text into entries; syntax errors go to `errors`.
inline std::vector<Entry> tokenize(std::string_view text, std::vector<std::string>& errors) {
  std::vector<Entry> entries;
  std::string section;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    // Strip a comment that is not inside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        raw.resize(i);
        break;
      }
    }
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const std::size_t col0 = first + 1;
    if (raw[first] == '[') {
      const auto close = raw.find(']', first);
      if (close == std::string::npos || !trim(std::string_view(raw).substr(close + 1)).empty()) {
        errors.push_back(at(line_no, col0) + "malformed section header");
        continue;
      }
      section = trim(std::string_view(raw).substr(first + 1, close - first - 1));
      if (section != "problem" && section != "solver" && section != "sweep") {
        errors.push_back(at(line_no, col0 + 1) + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      errors.push_back(at(line_no, col0) + "expected `key = value`");
      continue;
    }
    Entry e;
    e.section = section;
    e.line = line_no;
    e.key = trim(std::string_view(raw).substr(0, eq));
    if (!is_identifier(e.key)) {
      errors.push_back(at(line_no, col0) + "invalid key \"" + e.key + "\"");
      continue;
    }
    const auto vstart = raw.find_first_not_of(" \t", eq + 1);
    if (vstart == std::string::npos) {
      errors.push_back(at(line_no, eq + 2) + "missing value for " + e.key);
      continue;
    }
    e.value.column = vstart + 1;
    const std::string rest = trim(std::string_view(raw).substr(vstart));
    if (rest.front() == '"') {
      const auto close = rest.find('"', 1);
      if (close == std::string::npos) {
        errors.push_back(at(line_no, vstart + 1) + "unterminated string");
        continue;
      }
      if (close + 1 != rest.size()) {
        errors.push_back(at(line_no, vstart + close + 2) + "unexpected text after string");
        continue;
      }
      e.value.kind = ValueKind::Quoted;
      e.value.text = rest.substr(1, close - 1);
    } else if (rest.front() == '[') {
      if (rest.back() != ']') {
        errors.push_back(at(line_no, vstart + 1) + "unterminated list");
        continue;
      }
      e.value.kind = ValueKind::List;
      const std::string body = rest.substr(1, rest.size() - 2);
      if (!trim(body).empty()) {
        std::stringstream items(body);
        for (std::string item; std::getline(items, item, ',');) e.value.items.push_back(trim(item));
      }
    } else {
      e.value.kind = ValueKind::Bare;
      e.value.text = rest;
    }
    if (!seen.insert({section, e.key}).second) {
      errors.push_back(at(line_no, col0) + "duplicate key " + e.key);
      continue;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace detail

/// Problem, options and omega for one sweep point (empty point: no sweep).
/// Throws ValidationError / ParseError when the row is invalid.
inline RunInstance instantiate(const RunConfig& cfg, const SweepPoint& point = {}) {
  double p = cfg.p, alpha = cfg.alpha, n = cfg.n;
  std::optional<double> alpha_ratio;
  RunInstance out;
  out.omega = cfg.omega;
  out.u0 = cfg.u0;
  out.v0 = cfg.v0;
  out.solver = cfg.solver;
  for (const auto& [name, value] : point) {
    if (name == "p") p = value;
    else if (name == "alpha") alpha = value;
    else if (name == "n") n = value;
    else if (name == "alpha_ratio") alpha_ratio = value;
    else if (name == "u0") out.u0 = value;
    else if (name == "v0") out.v0 = value;
    else if (name == "target_radius") out.solver.target_radius = value;
    else if (name == "blowup_threshold") out.solver.blowup_threshold = value;
    else if (name == "rel_tol") out.solver.rel_tol = value;
  }
  if (alpha_ratio) alpha = *alpha_ratio * (p - 1.0);
  std::vector<std::string> errors;
  if (n != std::floor(n) || n < 2) errors.push_back("n must be an integer >= 2");
  if (!(out.u0 > 0.0)) errors.push_back("u0 must be positive");
  if (!(out.v0 > 0.0)) errors.push_back("v0 must be positive");
  if (!errors.empty()) throw ValidationError(errors);
  out.spec.p = p;
  out.spec.alpha = alpha;
  out.spec.n = static_cast<int>(n);
  out.spec.f1 = FuncExpr::parse(detail::substitute(cfg.f1, point));
  out.spec.f2 = FuncExpr::parse(detail::substitute(cfg.f2, point));
  out.spec.g1 = FuncExpr::parse(detail::substitute(cfg.g1, point));
  out.spec.g2 = FuncExpr::parse(detail::substitute(cfg.g2, point));
  out.spec.h = FuncExpr::parse(detail::substitute(cfg.h, point));
  require_valid(out.spec);
  out.solver.check();
  return out;
}

/// Cartesian product of the sweep axes; a single empty point without sweep.
inline std::vector<SweepPoint> sweep_points(const RunConfig& cfg) {
  std::vector<SweepPoint> rows{SweepPoint{}};
  for (const auto& axis : cfg.sweep) {
    std::vector<SweepPoint> next;
    for (const auto& row : rows) {
      for (double v : axis.values) {
        SweepPoint r = row;
        r.emplace_back(axis.name, v);
        next.push_back(std::move(r));
      }
    }
    rows = std::move(next);
  }
  return rows;
}

/// Parses and validates configuration text. Every problem is reported.
inline RunConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  const auto entries = detail::tokenize(text, errors);
  RunConfig cfg;
  std::map<std::string, std::pair<std::size_t, std::size_t>> expr_at;  // line, column of the opening quote
  std::set<std::string> given;
  std::vector<std::pair<SweepAxis, std::size_t>> axes;

  auto number = [&](const detail::Entry& e) -> std::optional<double> {
    if (e.value.kind != detail::ValueKind::Bare) {
      errors.push_back(detail::at(e.line, e.value.column) + e.key + " must be a number");
      return std::nullopt;
    }
    auto v = detail::parse_double(e.value.text);
    if (!v) errors.push_back(detail::at(e.line, e.value.column) + "invalid number \"" + e.value.text + "\"");
    return v;
  };

  for (const auto& e : entries) {
    const std::string where = detail::at(e.line, 1);
    if (e.section.empty()) {
      if (e.key != "seed") {
        errors.push_back(where + "unknown key " + e.key + " outside any section");
        continue;
      }
      auto v = number(e);
      if (v && (*v < 0 || *v != std::floor(*v) || *v > 1.8e19)) {
        errors.push_back(detail::at(e.line, e.value.column) + "seed must be a non-negative integer");
      } else if (v) {
        cfg.seed = static_cast<std::uint64_t>(*v);
      }
      continue;
    }
    if (e.section == "problem") {
      if (detail::numeric_problem_keys().contains(e.key)) {
        if (auto v = number(e)) {
          (e.key == "p" ? cfg.p : e.key == "alpha" ? cfg.alpha : cfg.n) = *v;
          given.insert(e.key);
        }
      } else if (detail::expression_keys().contains(e.key)) {
        if (e.value.kind != detail::ValueKind::Quoted) {
          errors.push_back(detail::at(e.line, e.value.column) + e.key + " must be a quoted expression");
          continue;
        }
        std::string& slot = e.key == "f1"   ? cfg.f1
                            : e.key == "f2" ? cfg.f2
                            : e.key == "g1" ? cfg.g1
                            : e.key == "g2" ? cfg.g2
                                            : cfg.h;
        slot = e.value.text;
        expr_at[e.key] = {e.line, e.value.column};
        given.insert(e.key);
      } else if (e.key == "omega") {
        try {
          cfg.omega = parse_domain(e.value.text);
        } catch (const std::invalid_argument& ex) {
          errors.push_back(detail::at(e.line, e.value.column) + ex.what());
        }
      } else {
        errors.push_back(where + "unknown key " + e.key + " in [problem]");
      }
      continue;
    }
    if (e.section == "solver") {
      if (!detail::solver_keys().contains(e.key)) {
        errors.push_back(where + "unknown key " + e.key + " in [solver]");
        continue;
      }
      if (auto v = number(e)) {
        if (e.key == "u0") cfg.u0 = *v;
        else if (e.key == "v0") cfg.v0 = *v;
        else if (e.key == "target_radius") cfg.solver.target_radius = *v;
        else if (e.key == "blowup_threshold") cfg.solver.blowup_threshold = *v;
        else cfg.solver.rel_tol = *v;
        if (!(*v > 0.0)) errors.push_back(detail::at(e.line, e.value.column) + e.key + " must be positive");
      }
      continue;
    }
    if (e.section == "sweep") {
      if (e.value.kind != detail::ValueKind::List || e.value.items.empty()) {
        errors.push_back(detail::at(e.line, e.value.column) + "sweep value for " + e.key +
                         " must be a non-empty list [a, b, ...]");
        continue;
      }
      SweepAxis axis{e.key, {}};
      for (const auto& item : e.value.items) {
        if (auto v = detail::parse_double(item)) {
          axis.values.push_back(*v);
        } else {
          errors.push_back(detail::at(e.line, e.value.column) + "invalid number \"" + item + "\" in sweep list " +
                           e.key);
        }
      }
      axes.emplace_back(std::move(axis), e.line);
    }
  }

  // Sweep keys must name a parameter or a placeholder.
  std::set<std::string> placeholder_names;
  for (const std::string* src : {&cfg.f1, &cfg.f2, &cfg.g1, &cfg.g2, &cfg.h}) {
    for (auto& name : detail::placeholders(*src)) placeholder_names.insert(name);
  }
  std::set<std::string> swept;
  for (auto& [axis, line] : axes) {
    const bool known = detail::numeric_problem_keys().contains(axis.name) || detail::solver_keys().contains(axis.name) ||
                       axis.name == "alpha_ratio" || placeholder_names.contains(axis.name);
    if (!known) {
      errors.push_back(detail::at(line, 1) + "unknown sweep key " + axis.name +
                       " (not a parameter or an expression placeholder)");
      continue;
    }
    swept.insert(axis.name);
    cfg.sweep.push_back(std::move(axis));
  }
  if (swept.contains("alpha") && swept.contains("alpha_ratio")) {
    errors.push_back("sweep cannot set both alpha and alpha_ratio");
  }
  for (const auto& name : placeholder_names) {
    if (!swept.contains(name)) errors.push_back("placeholder {" + name + "} has no [sweep] entry");
  }

  // Required problem keys, unless the sweep provides them.
  for (const char* key : {"p", "alpha", "n", "f1", "f2", "g1", "g2", "h"}) {
    const bool via_sweep = swept.contains(key) || (std::string(key) == "alpha" && swept.contains("alpha_ratio"));
    if (!given.contains(key) && !via_sweep) errors.push_back(std::string("missing key ") + key + " in [problem]");
  }

  // Constraints on fixed values.
  if (given.contains("p") && !swept.contains("p") && !(cfg.p > 1.0)) errors.push_back("p must exceed 1");
  if (given.contains("alpha") && !swept.contains("alpha") && !swept.contains("alpha_ratio") && !(cfg.alpha >= 0.0)) {
    errors.push_back("alpha must be non-negative");
  }
  if (given.contains("n") && !swept.contains("n") && (cfg.n != std::floor(cfg.n) || cfg.n < 2)) {
    errors.push_back("n must be an integer >= 2");
  }
  for (const auto& axis : cfg.sweep) {
    for (double v : axis.values) {
      if (axis.name == "p" && !(v > 1.0)) errors.push_back("sweep p: p must exceed 1 (got " + format_number(v) + ")");
      if ((axis.name == "alpha" || axis.name == "alpha_ratio") && !(v >= 0.0)) {
        errors.push_back("sweep " + axis.name + ": values must be non-negative (got " + format_number(v) + ")");
      }
      if (axis.name == "n" && (v != std::floor(v) || v < 2)) {
        errors.push_back("sweep n: n must be an integer >= 2 (got " + format_number(v) + ")");
      }
      if (detail::solver_keys().contains(axis.name) && !(v > 0.0)) {
        errors.push_back("sweep " + axis.name + ": values must be positive (got " + format_number(v) + ")");
      }
    }
  }
  try {
    cfg.solver.check();
  } catch (const ValidationError& ex) {
    for (const auto& m : ex.errors()) {
      if (m.find("must be positive") == std::string::npos) errors.push_back(m);
    }
  }

  // Expressions must parse once placeholders are filled in.
  SweepPoint probe;
  for (const auto& axis : cfg.sweep) probe.emplace_back(axis.name, axis.values.front());
  for (const auto& [key, src] : std::vector<std::pair<std::string, std::string>>{
           {"f1", cfg.f1}, {"f2", cfg.f2}, {"g1", cfg.g1}, {"g2", cfg.g2}, {"h", cfg.h}}) {
    if (!given.contains(key)) continue;
    const std::string filled = detail::substitute(src, probe);
    try {
      (void)FuncExpr::parse(filled);
    } catch (const ParseError& ex) {
      const auto [line, column] = expr_at[key];
      // Columns are only meaningful when no placeholder shifted the text.
      const std::string prefix = filled == src ? detail::at(line, column + 1 + ex.position())
                                               : "line " + std::to_string(line) + ": ";
      errors.push_back(prefix + key + ": " + ex.what());
    }
  }

  // Growth assumptions, checked on fixed problems only (sweep rows are
  // checked one by one).
  if (errors.empty() && cfg.sweep.empty()) {
    ProblemSpec spec;
    spec.p = cfg.p;
    spec.alpha = cfg.alpha;
    spec.n = static_cast<int>(cfg.n);
    spec.f1 = FuncExpr::parse(cfg.f1);
    spec.f2 = FuncExpr::parse(cfg.f2);
    spec.g1 = FuncExpr::parse(cfg.g1);
    spec.g2 = FuncExpr::parse(cfg.g2);
    spec.h = FuncExpr::parse(cfg.h);
    for (auto& m : validate(spec).errors) errors.push_back(m);
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace radlab
