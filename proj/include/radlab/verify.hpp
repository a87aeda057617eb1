#pragma once

// Inequalities every radial solution satisfies, checked on computed
// trajectories and on sampled criterion integrals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "radlab/criteria.hpp"
#include "radlab/finite_difference.hpp"
#include "radlab/radial_solver.hpp"

namespace radlab {

struct InequalityReport {
  std::string name;
  std::size_t points_checked = 0;
  double max_relative_violation = 0.0;
  double slack = 0.0;
  /// Radius (or sample) of the worst point; NaN when nothing was violated.
  double worst_at = std::nan("");
  bool pass = true;

  void record(double violation, double where) {
    ++points_checked;
    if (violation > max_relative_violation) {
      max_relative_violation = violation;
      worst_at = where;
    }
  }
  InequalityReport& finish() {
    pass = max_relative_violation <= slack;
    return *this;
  }
};

namespace detail {

/// Violation of lower <= value, relative to |lower|; a wrong sign on a
/// positive bound counts as at least 1.
inline double below_violation(double value, double lower) {
  if (value >= lower) return 0.0;
  const double rel = (lower - value) / std::max(std::abs(lower), 1e-300);
  return lower > 0.0 && value <= 0.0 ? std::max(1.0, rel) : rel;
}

inline double above_violation(double value, double upper) {
  if (value <= upper) return 0.0;
  return (value - upper) / std::max(std::abs(upper), 1e-300);
}

/// Grid indices with r in [lo, hi].
inline std::vector<std::size_t> window(const RadialSolution& s, double lo, double hi) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.r[i] >= lo && s.r[i] <= hi) idx.push_back(i);
  }
  return idx;
}

inline void require_trajectory(const RadialSolution& s) {
  const std::size_t n = s.r.size();
  if (n < 2 || s.u.size() != n || s.v.size() != n || s.w.size() != n || s.dv.size() != n) {
    throw std::invalid_argument("trajectory needs at least two points and equal-length columns");
  }
}

}  // namespace detail

/// u' > 0 and v' > 0 at every grid point with r > 0. Exact zeros are
/// tolerated only in a leading run from r = 0, where a positive but
/// unrepresentably small derivative underflows; negative values and a zero
/// after a positive value always fail, as does a derivative that never
/// becomes positive.
inline InequalityReport check_monotone(const RadialSolution& s) {
  detail::require_trajectory(s);
  InequalityReport rep{.name = "monotone"};
  bool w_seen = false, dv_seen = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s.r[i] > 0.0)) continue;
    auto bad = [](double x, bool& seen) {
      if (x > 0.0) {
        seen = true;
        return 0.0;
      }
      if (std::isnan(x)) return 1.0;
      return x == 0.0 && !seen ? 0.0 : 1.0 + std::abs(x);
    };
    const double bw = bad(s.w[i], w_seen);
    const double bv = bad(s.dv[i], dv_seen);
    rep.record(std::max(bw, bv), s.r[i]);
  }
  if (!w_seen || !dv_seen) rep.record(1.0, s.r.back());
  return rep.finish();
}

/// Two-sided bounds on the derivatives of w^{p-1-alpha} and v'^{p-1}:
///   gap/(n gap + alpha) f1 g1(v) <= [w^gap]'     <= gap/(p-1) f1 g1(v)
///   (1/n) f2 g2(v) h(w)          <= [v'^{p-1}]'  <= f2 g2(v) h(w)
/// with gap = p-1-alpha, derivatives by 5-point log-log finite differences
/// on r in [r_min, fraction * r_end].
inline InequalityReport check_convexity_bounds(const RadialSolution& s, double slack = 1e-4, double r_min = 0.01,
                                               double fraction = 0.9) {
  detail::require_trajectory(s);
  const ProblemSpec& sp = s.spec;
  const double gap = sp.gap();
  const double n = sp.n;
  std::vector<double> W(s.size()), D(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    W[i] = std::pow(std::max(s.w[i], 0.0), gap);
    D[i] = std::pow(std::max(s.dv[i], 0.0), sp.p - 1.0);
  }
  const auto idx = detail::window(s, r_min, fraction * s.r.back());
  if (idx.size() < 10) throw std::invalid_argument("convexity check needs at least 10 grid points in its window");
  InequalityReport rep{.name = "convexity_bounds", .slack = slack};
  for (std::size_t i : idx) {
    const double r = s.r[i];
    const double fg1 = sp.f1(r) * sp.g1(s.v[i]);
    const double fgh = sp.f2(r) * sp.g2(s.v[i]) * sp.h(s.w[i]);
    const double dW = grid_derivative_loglog(s.r, W, i);
    const double dD = grid_derivative_loglog(s.r, D, i);
    rep.record(std::max({detail::below_violation(dW, gap / (n * gap + sp.alpha) * fg1),
                         detail::above_violation(dW, gap / (sp.p - 1.0) * fg1),
                         detail::below_violation(dD, fgh / n), detail::above_violation(dD, fgh)}),
               r);
  }
  return rep.finish();
}

/// (1/r) w^{p-1-alpha} <= delta/((delta+1)(n-1)) f1(r) g1(v(r)) for r > 0.
inline InequalityReport check_uprime_estimate(const RadialSolution& s, double slack = 1e-6) {
  detail::require_trajectory(s);
  const ProblemSpec& sp = s.spec;
  const double delta = sp.delta();
  const double c = delta / ((delta + 1.0) * (sp.n - 1));
  InequalityReport rep{.name = "uprime_estimate", .slack = slack};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s.r[i];
    if (!(r > 0.0)) continue;
    const double lhs = std::pow(std::max(s.w[i], 0.0), sp.gap()) / r;
    rep.record(detail::above_violation(lhs, c * sp.f1(r) * sp.g1(s.v[i])), r);
  }
  return rep.finish();
}

/// lhs <= mid <= rhs of the comparison sandwich at every sample s.
inline InequalityReport check_sandwich(const FuncExpr& h, double p, std::span<const double> samples,
                                       double slack = 1e-9) {
  InequalityReport rep{.name = "sandwich", .slack = slack};
  for (double s : samples) {
    const SandwichValues sv = sandwich_check(h, p, s);
    const double v1 = std::max(0.0, std::expm1(sv.log_lhs - sv.log_mid));
    const double v2 = std::max(0.0, std::expm1(sv.log_mid - sv.log_rhs));
    rep.record(std::isfinite(v1) && std::isfinite(v2) ? std::max(v1, v2) : 1.0, s);
  }
  return rep.finish();
}

/// u may not exceed the blow-up threshold while v stays below 10^3 v(0).
inline InequalityReport check_no_u_only_blowup(const RadialSolution& s) {
  detail::require_trajectory(s);
  InequalityReport rep{.name = "no_u_only_blowup"};
  const double v_cap = 1e3 * s.v.front();
  double v_max = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    v_max = std::max(v_max, s.v[i]);
    rep.record(s.u[i] > s.threshold && v_max < v_cap ? 1.0 : 0.0, s.r[i]);
  }
  return rep.finish();
}

/// Pointwise relative residuals of
///   [r^delta w^{p-1-alpha}]' = delta/(n-1) r^delta f1 g1(v)
///   [r^{n-1} v'^{p-1}]'     = r^{n-1} f2 g2(v) h(w)
/// with the left sides differentiated by 5-point finite differences in
/// (log r, log value).
/// Zero at r = 0, where both sides vanish.
struct EquationResiduals {
  std::vector<double> eq1, eq2;
};

inline EquationResiduals equation_residuals(const RadialSolution& s) {
  detail::require_trajectory(s);
  const ProblemSpec& sp = s.spec;
  const double gap = sp.gap();
  const double delta = sp.delta();
  const double c1 = delta / (sp.n - 1);
  const std::size_t m = s.size();
  std::vector<double> A(m), B(m);
  for (std::size_t i = 0; i < m; ++i) {
    A[i] = std::pow(s.r[i], delta) * std::pow(std::max(s.w[i], 0.0), gap);
    B[i] = std::pow(s.r[i], sp.n - 1) * std::pow(std::max(s.dv[i], 0.0), sp.p - 1.0);
  }
  EquationResiduals out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < m; ++i) {
    const double r = s.r[i];
    if (!(r > 0.0)) continue;
    const double rhs1 = c1 * std::pow(r, delta) * sp.f1(r) * sp.g1(s.v[i]);
    const double rhs2 = std::pow(r, sp.n - 1) * sp.f2(r) * sp.g2(s.v[i]) * sp.h(s.w[i]);
    out.eq1[i] = (grid_derivative_loglog(s.r, A, i) - rhs1) / std::max(std::abs(rhs1), 1e-300);
    out.eq2[i] = rhs2 == 0.0 ? grid_derivative_loglog(s.r, B, i) : (grid_derivative_loglog(s.r, B, i) - rhs2) / std::abs(rhs2);
  }
  return out;
}

/// sup |residual| over r in [r_min, fraction * r_end].
inline double residual_sup(const RadialSolution& s, const std::vector<double>& res, double r_min = 0.01,
                           double fraction = 0.9) {
  double sup = 0.0;
  for (std::size_t i : detail::window(s, r_min, fraction * s.r.back())) sup = std::max(sup, std::abs(res[i]));
  return sup;
}

}  // namespace radlab
