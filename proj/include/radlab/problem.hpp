#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "radlab/function_expr.hpp"

namespace radlab {

/// Raised when the gradient exponent leaves the admissible range alpha < p - 1.
class NoSolutionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a problem or run configuration violates its constraints.
/// Carries the full list of violations.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> errors)
      : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}

  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out;
    for (const auto& e : errors) out += (out.empty() ? "" : "; ") + e;
    return out;
  }
  std::vector<std::string> errors_;
};

/// Radial system
///   Delta_p u = f1(|x|) g1(v) |grad u|^alpha
///   Delta_p v = f2(|x|) g2(v) h(|grad u|)
/// in dimension n.
struct ProblemSpec {
  double p = 2.0;
  double alpha = 0.0;
  int n = 3;
  FuncExpr f1 = FuncExpr::constant(1.0);
  FuncExpr f2 = FuncExpr::constant(1.0);
  FuncExpr g1 = FuncExpr::power(1.0, 1.0);
  FuncExpr g2 = FuncExpr::constant(1.0);
  FuncExpr h = FuncExpr::power(1.0, 1.0);

  /// p - 1 - alpha; positive exactly when radial solutions can exist.
  double gap() const noexcept { return p - 1.0 - alpha; }
  bool admissible() const noexcept { return alpha < p - 1.0; }

  double theta() const {
    if (!admissible()) throw NoSolutionError("alpha >= p - 1: no positive radial solution exists");
    return 1.0 / gap();
  }
  double delta() const { return (n - 1) * gap() / (p - 1.0); }
  double k1() const { return derive_k(g1).leading_exponent; }
  double k2() const { return derive_k(g2).leading_exponent; }

  /// Criterion exponent k1 p / (k1 p + p - 1 - k2).
  double criterion_power() const {
    const double a = k1(), b = k2();
    return a * p / (a * p + p - 1.0 - b);
  }

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// Structural constraints (p > 1, alpha >= 0, n >= 2) plus growth assumptions.
/// alpha >= p - 1 is admissible input; it is classified, not rejected.
inline ValidationReport validate(const ProblemSpec& spec) {
  ValidationReport report = validate_assumptions(spec.f1, spec.f2, spec.g1, spec.g2, spec.h);
  if (!(spec.p > 1.0)) report.errors.insert(report.errors.begin(), "p must exceed 1");
  if (!(spec.alpha >= 0.0)) report.errors.push_back("alpha must be non-negative");
  if (spec.n < 2) report.errors.push_back("n must be an integer >= 2");
  if (!spec.admissible()) report.notes.push_back("alpha >= p - 1: no positive radial solutions exist");
  report.valid = report.errors.empty();
  return report;
}

inline void require_valid(const ProblemSpec& spec) {
  auto report = validate(spec);
  if (!report.valid) throw ValidationError(report.errors);
}

}  // namespace radlab
