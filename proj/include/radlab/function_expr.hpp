#pragma once

// Non-negative power-sum scalar functions  f(t) = sum_i c_i t^{e_i},  c_i, e_i >= 0.
//
// Every member of this family is continuous, non-decreasing on [0, inf) and
// positive on (0, inf), and g(t)/t^k with k = max exponent is non-increasing
// with a positive limit. Growth assumptions therefore reduce to reading off
// the leading term.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "radlab/format.hpp"

namespace radlab {

struct PowerTerm {
  double coeff;
  double exponent;

  friend bool operator==(const PowerTerm&, const PowerTerm&) = default;
};

/// Error raised for malformed expression text; `position` is a 0-based
/// character offset into the source.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Leading-order growth t^k of a power sum.
struct GrowthProfile {
  double leading_exponent;
  double leading_coeff;
};

class FuncExpr {
 public:
  /// Parses `expr := term ('+' term)*`, `term := NUM | NUM '*' 't' ['^' NUM] | 't' ['^' NUM]`.
  static FuncExpr parse(std::string_view text);

  /// Builds a canonical expression from raw terms (zero coefficients dropped,
  /// duplicate exponents merged, sorted ascending).
  static FuncExpr from_terms(std::vector<PowerTerm> terms);

  static FuncExpr constant(double c) { return from_terms({{c, 0.0}}); }
  static FuncExpr power(double c, double e) { return from_terms({{c, e}}); }

  /// sum c_i t^{e_i} with 0^0 = 1.
  double operator()(double t) const noexcept {
    double sum = 0.0;
    for (const auto& term : terms_) {
      sum += term.exponent == 0.0 ? term.coeff : term.coeff * std::pow(t, term.exponent);
    }
    return sum;
  }

  const std::vector<PowerTerm>& terms() const noexcept { return terms_; }
  const std::string& source_text() const noexcept { return source_; }
  bool single_term() const noexcept { return terms_.size() == 1; }
  const PowerTerm& leading() const noexcept { return terms_.back(); }
  const PowerTerm& lowest() const noexcept { return terms_.front(); }

  /// Canonical text; parses back to an equal expression.
  std::string to_string() const;

  /// t -> f(scale * t).
  FuncExpr with_scaled_argument(double scale) const {
    std::vector<PowerTerm> out = terms_;
    for (auto& term : out) term.coeff *= std::pow(scale, term.exponent);
    return from_terms(std::move(out));
  }

  /// t -> factor * f(t).
  FuncExpr times(double factor) const {
    std::vector<PowerTerm> out = terms_;
    for (auto& term : out) term.coeff *= factor;
    return from_terms(std::move(out));
  }

  /// Structural equality on the canonical term list.
  friend bool operator==(const FuncExpr& a, const FuncExpr& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<PowerTerm> terms_;
  std::string source_;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  std::vector<PowerTerm> run() {
    skip_space();
    if (at_end()) throw ParseError("empty expression", pos_);
    std::vector<PowerTerm> terms;
    terms.push_back(term());
    skip_space();
    while (!at_end()) {
      expect('+');
      skip_space();
      if (at_end()) throw ParseError("expected term after '+'", pos_);
      terms.push_back(term());
      skip_space();
    }
    return terms;
  }

 private:
  PowerTerm term() {
    reject_minus();
    if (peek() == 't') {
      ++pos_;
      return {1.0, exponent_suffix()};
    }
    if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
      double coeff = number();
      skip_space();
      if (!at_end() && peek() == '*') {
        ++pos_;
        skip_space();
        reject_minus();
        expect('t');
        return {coeff, exponent_suffix()};
      }
      return {coeff, 0.0};
    }
    throw ParseError(std::string("unexpected character '") + peek() + "'", pos_);
  }

  double exponent_suffix() {
    skip_space();
    if (at_end() || peek() != '^') return 1.0;
    ++pos_;
    skip_space();
    reject_minus();
    return number();
  }

  double number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (!at_end() && peek() == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw ParseError("expected number", start);
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      ++pos_;
      if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent in number", start);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{} || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw ParseError("invalid number", start);
    }
    return value;
  }

  void reject_minus() {
    skip_space();
    if (!at_end() && peek() == '-') throw ParseError("negative literal not allowed", pos_);
  }

  void expect(char c) {
    reject_minus();
    if (at_end()) throw ParseError(std::string("expected '") + c + "' but reached end", pos_);
    if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline FuncExpr FuncExpr::from_terms(std::vector<PowerTerm> terms) {
  for (const auto& term : terms) {
    if (!(term.coeff >= 0.0) || !(term.exponent >= 0.0) || !std::isfinite(term.coeff) ||
        !std::isfinite(term.exponent)) {
      throw std::invalid_argument("power-sum terms need finite non-negative coefficients and exponents");
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](const PowerTerm& a, const PowerTerm& b) { return a.exponent < b.exponent; });
  FuncExpr out;
  for (const auto& term : terms) {
    if (term.coeff == 0.0) continue;
    if (!out.terms_.empty() && out.terms_.back().exponent == term.exponent) {
      out.terms_.back().coeff += term.coeff;
    } else {
      out.terms_.push_back(term);
    }
  }
  if (out.terms_.empty()) throw std::invalid_argument("function is identically zero");
  out.source_ = out.to_string();
  return out;
}

inline FuncExpr FuncExpr::parse(std::string_view text) {
  auto terms = detail::ExprParser(text).run();
  bool any_positive = std::any_of(terms.begin(), terms.end(), [](const PowerTerm& t) { return t.coeff > 0; });
  if (!any_positive) throw ParseError("function is identically zero", 0);
  FuncExpr out = from_terms(std::move(terms));
  out.source_ = std::string(text);
  return out;
}

inline std::string FuncExpr::to_string() const {
  std::string out;
  for (const auto& term : terms_) {
    if (!out.empty()) out += " + ";
    if (term.exponent == 0.0) {
      out += format_number(term.coeff);
      continue;
    }
    if (term.coeff != 1.0) out += format_number(term.coeff) + "*";
    out += "t";
    if (term.exponent != 1.0) out += "^" + format_number(term.exponent);
  }
  return out;
}

/// The k of g(t)/t^k non-increasing with positive limit: for a power sum,
/// the largest exponent, together with its coefficient.
inline GrowthProfile derive_k(const FuncExpr& g) {
  const auto& lead = g.leading();
  if (!(lead.coeff > 0.0)) throw std::invalid_argument("all-zero function has no growth order");
  return {lead.exponent, lead.coeff};
}

struct ValidationReport {
  bool valid = true;
  double k1 = 0.0;
  double k2 = 0.0;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
};

/// Growth and monotonicity assumptions for the five system functions.
/// Collects every violation instead of stopping at the first.
inline ValidationReport validate_assumptions(const FuncExpr& f1, const FuncExpr& f2, const FuncExpr& g1,
                                             const FuncExpr& g2, const FuncExpr& h) {
  ValidationReport report;
  report.notes.push_back("non-negative power sums are continuous, non-decreasing and positive on (0,inf)");
  report.k1 = derive_k(g1).leading_exponent;
  report.k2 = derive_k(g2).leading_exponent;
  if (!(report.k1 > 0.0)) report.errors.push_back("g1 must grow: k1 > 0 required");
  if (report.k2 > report.k1) {
    report.errors.push_back("growth orders need k2 <= k1 (k1 = " + format_number(report.k1) +
                            ", k2 = " + format_number(report.k2) + ")");
  }

  // Sampled spot-check on t = 10^-3 .. 10^6.
  struct Named {
    const char* name;
    const FuncExpr* f;
  };
  const Named all[] = {{"f1", &f1}, {"f2", &f2}, {"g1", &g1}, {"g2", &g2}, {"h", &h}};
  bool sampled_ok = true;
  for (const auto& [name, f] : all) {
    double prev = (*f)(1e-3);
    for (int i = 1; i <= 90; ++i) {
      double t = std::pow(10.0, -3.0 + i * 0.1);
      double cur = (*f)(t);
      if (cur < prev || !(cur > 0.0)) {
        report.errors.push_back(std::string(name) + " fails the sampled monotonicity/positivity check");
        sampled_ok = false;
        break;
      }
      prev = cur;
    }
  }
  const std::pair<const FuncExpr*, double> growth[] = {{&g1, report.k1}, {&g2, report.k2}};
  for (const auto& [g, k] : growth) {
    double prev = (*g)(1e-3) / std::pow(1e-3, k);
    for (int i = 1; i <= 90; ++i) {
      double t = std::pow(10.0, -3.0 + i * 0.1);
      double cur = (*g)(t) / std::pow(t, k);
      if (cur > prev * (1.0 + 1e-12)) {
        report.errors.push_back("g(t)/t^k is not non-increasing on the sample grid");
        sampled_ok = false;
        break;
      }
      prev = cur;
    }
  }
  if (sampled_ok) report.notes.push_back("sampled monotonicity check passed on t in [1e-3, 1e6]");
  report.valid = report.errors.empty();
  return report;
}

}  // namespace radlab
