#pragma once

// Radial solutions in integrated form
//
//   A(r) = r^delta w^{p-1-alpha} = delta/(n-1) int_0^r t^delta f1(t) g1(v) dt
//   B(r) = r^{n-1} v'^{p-1}      = int_0^r t^{n-1} f2(t) g2(v) h(w) dt
//
// with w = u'. A Picard fixed point of the integral operator covers [0, rho]
// around the singular origin; embedded Runge-Kutta marching on (u, v, A, B)
// continues from rho until the target radius or a confirmed blow-up.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "radlab/criteria.hpp"
#include "radlab/problem.hpp"
#include "radlab/quadrature.hpp"

namespace radlab {

enum class Termination { ReachedTarget, BlowUp, StepUnderflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTarget: return "ReachedTarget";
    case Termination::BlowUp: return "BlowUp";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "?";
}

struct SolverOptions {
  double target_radius = 50.0;
  double blowup_threshold = 1e8;
  double rel_tol = 1e-8;
  /// Defaults to 1e-4 * target_radius.
  std::optional<double> initial_step;
  /// Defaults to 1e-14 * target_radius.
  std::optional<double> min_step;
  /// Picard radius; defaults to 1e-3 * target_radius.
  std::optional<double> bootstrap_radius;
  std::size_t bootstrap_nodes = 200;
  /// Caps radial steps so r, r^delta w^{p-1-alpha} and r^{n-1} v'^{p-1} change
  /// by at most this relative amount per step. Keeps the stored grid fine
  /// enough for finite-difference residuals.
  double max_relative_change = 0.02;

  double initial_step_or_default() const { return initial_step.value_or(1e-4 * target_radius); }
  double min_step_or_default() const { return min_step.value_or(1e-14 * target_radius); }
  double bootstrap_radius_or_default() const { return bootstrap_radius.value_or(1e-3 * target_radius); }

  void check() const {
    std::vector<std::string> errors;
    if (!(target_radius > 0.0)) errors.push_back("target_radius must be positive");
    if (!(blowup_threshold > 0.0)) errors.push_back("blowup_threshold must be positive");
    if (!(rel_tol > 0.0)) errors.push_back("rel_tol must be positive");
    if (!(max_relative_change > 0.0)) errors.push_back("max_relative_change must be positive");
    if (errors.empty() && !(min_step_or_default() < initial_step_or_default() &&
                            initial_step_or_default() < target_radius)) {
      errors.push_back("need min_step < initial_step < target_radius");
    }
    if (!errors.empty()) throw ValidationError(errors);
  }
};

/// Discrete trajectory (r, u, v, w = u', dv = v') starting at r = 0.
struct RadialSolution {
  ProblemSpec spec;
  double u0 = 1.0;
  double v0 = 1.0;
  std::vector<double> r, u, v, w, dv;
  std::optional<double> R0;
  Termination terminated = Termination::ReachedTarget;
  double threshold = 1e8;
  double bootstrap_radius = 0.0;
  std::size_t bootstrap_points = 0;
  /// Radii where v crossed threshold * 2^k, k = 0, 1, ...
  std::vector<double> threshold_crossings;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::string diagnostics;

  std::size_t size() const noexcept { return r.size(); }
};

// ---------------------------------------------------------------------------
// Picard bootstrap

/// One iterate of the fixed-point map on uniform nodes of [0, radius].
/// j1(s) = int_0^1 y^delta f1(sy) g1(v(sy)) dy and j2(s) = int_0^1 y^{n-1} f2 g2(v) h(w) dy
/// carry the smooth part, so w = (delta/(n-1) s j1)^theta and v' = (s j2)^{1/(p-1)}.
struct PicardIterate {
  double radius = 0.0;
  std::vector<double> r, u, v, j1, j2;
  std::size_t iterations = 0;

  double step() const { return radius / static_cast<double>(r.size() - 1); }
};

namespace detail {

struct RadialCoefficients {
  double p, gap, theta, delta, c1;
  int n;

  explicit RadialCoefficients(const ProblemSpec& spec)
      : p(spec.p),
        gap(spec.gap()),
        theta(spec.theta()),
        delta(spec.delta()),
        c1(spec.delta() / (spec.n - 1)),
        n(spec.n) {}

  double w_from_j1(double s, double j1) const { return s <= 0.0 || j1 <= 0.0 ? 0.0 : std::pow(c1 * s * j1, theta); }
  double dv_from_j2(double s, double j2) const { return s <= 0.0 || j2 <= 0.0 ? 0.0 : std::pow(s * j2, 1.0 / (p - 1.0)); }
};

/// Local cubic Lagrange interpolation on uniform nodes.
inline double lagrange_uniform(const std::vector<double>& values, double step, double x) {
  const std::size_t last = values.size() - 1;
  const double pos = std::clamp(x / step, 0.0, static_cast<double>(last));
  std::size_t k = static_cast<std::size_t>(pos);
  if (k >= last) k = last - 1;
  std::size_t start = k >= 1 ? k - 1 : 0;
  if (start + 3 > last) start = last >= 3 ? last - 3 : 0;
  const std::size_t width = std::min<std::size_t>(4, values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    double li = 1.0;
    for (std::size_t j = 0; j < width; ++j) {
      if (j != i) li *= (pos - double(start + j)) / (double(i) - double(j));
    }
    sum += li * values[start + i];
  }
  return sum;
}

/// Cubic Hermite interpolation on [x0, x1].
inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double hstep = x1 - x0;
  const double t = (x - x0) / hstep;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * hstep * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * hstep * d1;
}

class PicardView {
 public:
  PicardView(const PicardIterate& it, const RadialCoefficients& k) : it_(it), k_(k) {}

  double j1(double s) const { return std::max(0.0, lagrange_uniform(it_.j1, it_.step(), s)); }
  double j2(double s) const { return std::max(0.0, lagrange_uniform(it_.j2, it_.step(), s)); }
  double w(double s) const { return k_.w_from_j1(s, j1(s)); }
  double dv(double s) const { return k_.dv_from_j2(s, j2(s)); }

  double v(double s) const {
    const double hstep = it_.step();
    const std::size_t last = it_.r.size() - 1;
    std::size_t k = static_cast<std::size_t>(std::clamp(s / hstep, 0.0, double(last)));
    if (k >= last) k = last - 1;
    const double x0 = it_.r[k], x1 = it_.r[k + 1];
    return hermite(x0, x1, it_.v[k], it_.v[k + 1], k_.dv_from_j2(x0, it_.j2[k]), k_.dv_from_j2(x1, it_.j2[k + 1]),
                   s);
  }

 private:
  const PicardIterate& it_;
  const RadialCoefficients& k_;
};

}  // namespace detail

/// The constant pair (u0, v0) on `nodes + 1` uniform points of [0, radius].
inline PicardIterate constant_iterate(double u0, double v0, double radius, std::size_t nodes) {
  PicardIterate it;
  it.radius = radius;
  for (std::size_t i = 0; i <= nodes; ++i) it.r.push_back(radius * double(i) / double(nodes));
  it.u.assign(nodes + 1, u0);
  it.v.assign(nodes + 1, v0);
  it.j1.assign(nodes + 1, 0.0);
  it.j2.assign(nodes + 1, 0.0);
  return it;
}

/// One application of the fixed-point operator (both components are
/// computed from the previous pair).
inline PicardIterate picard_step(const ProblemSpec& spec, double u0, double v0, const PicardIterate& prev) {
  const detail::RadialCoefficients k(spec);
  const detail::PicardView old(prev, k);
  const QuadratureOptions tight{1e-13, 1e-300, 2000};
  PicardIterate next = prev;
  next.iterations = prev.iterations + 1;
  const std::size_t count = prev.r.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double s = prev.r[i];
    if (s == 0.0) {
      next.j1[i] = spec.f1(0.0) * spec.g1(v0) / (k.delta + 1.0);
      next.j2[i] = spec.f2(0.0) * spec.g2(v0) * spec.h(0.0) / spec.n;
      continue;
    }
    next.j1[i] = integrate(
                     [&](double y) {
                       const double t = s * y;
                       return std::pow(y, k.delta) * spec.f1(t) * spec.g1(old.v(t));
                     },
                     0.0, 1.0, tight)
                     .value;
    next.j2[i] = integrate(
                     [&](double y) {
                       const double t = s * y;
                       return std::pow(y, spec.n - 1) * spec.f2(t) * spec.g2(old.v(t)) * spec.h(old.w(t));
                     },
                     0.0, 1.0, tight)
                     .value;
  }
  const detail::PicardView fresh(next, k);
  next.u[0] = u0;
  next.v[0] = v0;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const double a = prev.r[i], b = prev.r[i + 1];
    next.u[i + 1] = next.u[i] + integrate([&](double t) { return fresh.w(t); }, a, b, tight).value;
    next.v[i + 1] = next.v[i] + integrate([&](double t) { return fresh.dv(t); }, a, b, tight).value;
  }
  return next;
}

/// Values and derivatives of the converged Picard iterate, plus the
/// integrated quantities A, B needed to continue by marching.
struct BootstrapSegment {
  double radius = 0.0;
  std::size_t iterations = 0;
  std::size_t retries = 0;
  std::vector<double> r, u, v, w, dv, A, B;
};

/// Iterates the fixed-point map from the constant pair until successive
/// iterates differ by less than rel_tol (relative sup norm). A run that
/// needs more than 100 iterations halves the radius, up to 20 times.
inline BootstrapSegment picard_bootstrap(const ProblemSpec& spec, double u0, double v0, double radius,
                                         double rel_tol = 1e-8, std::size_t nodes = 200) {
  if (!(u0 > 0.0) || !(v0 > 0.0)) throw std::invalid_argument("picard_bootstrap needs u0, v0 > 0");
  if (!spec.admissible()) throw NoSolutionError("alpha >= p - 1: no positive radial solution exists");
  const detail::RadialCoefficients k(spec);
  for (std::size_t retry = 0; retry <= 20; ++retry, radius *= 0.5) {
    PicardIterate it = constant_iterate(u0, v0, radius, nodes);
    bool converged = false;
    while (it.iterations < 100) {
      PicardIterate next = picard_step(spec, u0, v0, it);
      // u and v alone can settle before the derivative data does (when v'
      // starts many orders of magnitude below u'), so j1, j2 are compared too.
      double du = 0.0, dvv = 0.0, dj1 = 0.0, dj2 = 0.0, su = 0.0, sv = 0.0, sj1 = 0.0, sj2 = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < next.r.size(); ++i) {
        du = std::max(du, std::abs(next.u[i] - it.u[i]));
        dvv = std::max(dvv, std::abs(next.v[i] - it.v[i]));
        dj1 = std::max(dj1, std::abs(next.j1[i] - it.j1[i]));
        dj2 = std::max(dj2, std::abs(next.j2[i] - it.j2[i]));
        su = std::max(su, std::abs(next.u[i]));
        sv = std::max(sv, std::abs(next.v[i]));
        sj1 = std::max(sj1, std::abs(next.j1[i]));
        sj2 = std::max(sj2, std::abs(next.j2[i]));
        finite = finite && std::isfinite(next.u[i]) && std::isfinite(next.v[i]);
      }
      it = std::move(next);
      if (!finite) break;
      if (du < rel_tol * (1.0 + su) && dvv < rel_tol * (1.0 + sv) && dj1 <= rel_tol * sj1 && dj2 <= rel_tol * sj2) {
        converged = true;
        break;
      }
    }
    if (!converged) continue;
    BootstrapSegment seg;
    seg.radius = radius;
    seg.iterations = it.iterations;
    seg.retries = retry;
    seg.r = it.r;
    seg.u = it.u;
    seg.v = it.v;
    for (std::size_t i = 0; i < it.r.size(); ++i) {
      const double s = it.r[i];
      seg.w.push_back(k.w_from_j1(s, it.j1[i]));
      seg.dv.push_back(k.dv_from_j2(s, it.j2[i]));
      seg.A.push_back(k.c1 * std::pow(s, k.delta + 1.0) * it.j1[i]);
      seg.B.push_back(std::pow(s, double(spec.n)) * it.j2[i]);
    }
    return seg;
  }
  throw std::runtime_error("picard_bootstrap: no contraction after 20 radius halvings");
}

// ---------------------------------------------------------------------------
// Marching

namespace detail {

using State = std::array<double, 4>;

/// d/dr of (u, v, A, B).
struct RadialRhs {
  const ProblemSpec& spec;
  RadialCoefficients k;

  explicit RadialRhs(const ProblemSpec& s) : spec(s), k(s) {}

  double w(double r, double a) const {
    return a > 0.0 ? std::exp(k.theta * (std::log(a) - k.delta * std::log(r))) : 0.0;
  }
  double dv(double r, double b) const {
    return b > 0.0 ? std::exp((std::log(b) - (k.n - 1) * std::log(r)) / (k.p - 1.0)) : 0.0;
  }
  double dA(double r, double v) const { return k.c1 * std::pow(r, k.delta) * spec.f1(r) * spec.g1(std::max(v, 0.0)); }
  double dB(double r, double v, double wv) const {
    return std::pow(r, k.n - 1) * spec.f2(r) * spec.g2(std::max(v, 0.0)) * spec.h(wv);
  }

  State operator()(double r, const State& y) const {
    const double wv = w(r, y[2]);
    return {wv, dv(r, y[3]), dA(r, y[1]), dB(r, y[1], wv)};
  }
};

/// d/dx of (r - r_switch, u, A, B) with x = ln v, used close to blow-up
/// where v' is huge and r barely moves. The offset keeps r - r_switch at
/// full relative precision.
struct LogVRhs {
  const RadialRhs& base;
  double r_switch;

  State operator()(double x, const State& z) const {
    const double r = r_switch + z[0];
    const double v = std::exp(x);
    const double wv = base.w(r, z[2]);
    const double dvv = base.dv(r, z[3]);
    const double dr_dx = dvv > 0.0 ? v / dvv : std::numeric_limits<double>::infinity();
    return {dr_dx, wv * dr_dx, base.dA(r, v) * dr_dx, base.dB(r, v, wv) * dr_dx};
  }
};

// Dormand-Prince 5(4) coefficients.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct StepResult {
  State y;
  State dydx;  // at the new point
  double error_norm;
};

/// One Dormand-Prince step; the error norm is the max over components of
/// |local error| / (rel_tol |y|).
template <class Rhs>
StepResult dormand_prince_step(const Rhs& f, double x, const State& y, const State& k1, double h, double rel_tol) {
  using D = DormandPrince;
  auto combo = [&](std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (const auto& [c, k] : terms) {
      for (std::size_t i = 0; i < 4; ++i) out[i] += h * c * (*k)[i];
    }
    return out;
  };
  const State k2 = f(x + D::c2 * h, combo({{D::a21, &k1}}));
  const State k3 = f(x + D::c3 * h, combo({{D::a31, &k1}, {D::a32, &k2}}));
  const State k4 = f(x + D::c4 * h, combo({{D::a41, &k1}, {D::a42, &k2}, {D::a43, &k3}}));
  const State k5 = f(x + D::c5 * h, combo({{D::a51, &k1}, {D::a52, &k2}, {D::a53, &k3}, {D::a54, &k4}}));
  const State k6 =
      f(x + h, combo({{D::a61, &k1}, {D::a62, &k2}, {D::a63, &k3}, {D::a64, &k4}, {D::a65, &k5}}));
  const State ynew = combo({{D::b1, &k1}, {D::b3, &k3}, {D::b4, &k4}, {D::b5, &k5}, {D::b6, &k6}});
  const State k7 = f(x + h, ynew);
  double err = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double e =
        h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] + D::e6 * k6[i] + D::e7 * k7[i]);
    const double scale = 1e-300 + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    err = std::max(err, std::abs(e) / scale);
    if (!std::isfinite(ynew[i]) || !std::isfinite(k7[i])) err = std::numeric_limits<double>::infinity();
  }
  return {ynew, k7, err};
}

inline double grow_factor(double err) { return err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0; }
inline double shrink_factor(double err) {
  return std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.1;
}

}  // namespace detail

/// Solves from r = 0 with u(0) = u0, v(0) = v0.
///
/// Radius is the independent variable until v approaches the blow-up
/// threshold (or the radial step collapses below 1e-6 r); from there the
/// march continues in x = ln v, which resolves power-type blow-up down to
/// distances far below the spacing of doubles near R0. Blow-up is declared
/// once v has crossed threshold * {1, 2, 4, 8} at radii whose spacings
/// shrink geometrically (ratio < 0.95 twice); growth without that signature
/// (for example exponential) re-arms the ladder above the current value and
/// the march resumes in r. R0 is the Aitken extrapolation of the last three
/// crossing radii.
inline RadialSolution march(const ProblemSpec& spec, double u0, double v0, const SolverOptions& opts = {}) {
  require_valid(spec);
  if (!spec.admissible()) throw NoSolutionError("alpha >= p - 1: no positive radial solution exists");
  if (!(u0 > 0.0) || !(v0 > 0.0)) throw std::invalid_argument("u0 and v0 must be positive");
  opts.check();

  RadialSolution sol;
  sol.spec = spec;
  sol.u0 = u0;
  sol.v0 = v0;
  sol.threshold = opts.blowup_threshold;

  const double target = opts.target_radius;
  const BootstrapSegment seg = picard_bootstrap(
      spec, u0, v0, std::min(opts.bootstrap_radius_or_default(), 0.5 * target), opts.rel_tol, opts.bootstrap_nodes);
  sol.bootstrap_radius = seg.radius;
  sol.bootstrap_points = seg.r.size();
  sol.r = seg.r;
  sol.u = seg.u;
  sol.v = seg.v;
  sol.w = seg.w;
  sol.dv = seg.dv;

  auto record = [&](double rr, double uu, double vv, double ww, double dd) {
    if (rr <= sol.r.back()) {
      // Below the resolution of r near R0: keep the newest state.
      sol.u.back() = uu, sol.v.back() = vv, sol.w.back() = ww, sol.dv.back() = dd;
      return;
    }
    sol.r.push_back(rr);
    sol.u.push_back(uu);
    sol.v.push_back(vv);
    sol.w.push_back(ww);
    sol.dv.push_back(dd);
  };

  const detail::RadialRhs rhs(spec);
  double r = seg.radius;
  detail::State y{seg.u.back(), seg.v.back(), seg.A.back(), seg.B.back()};
  double h = std::min(opts.initial_step_or_default(), target - r);
  const double min_step = opts.min_step_or_default();
  double ladder_base = opts.blowup_threshold;

  while (true) {
    // ---- radius phase
    detail::State dydr = rhs(r, y);
    bool to_log_phase = false;
    while (true) {
      if (r >= target * (1.0 - 1e-15)) {
        sol.terminated = Termination::ReachedTarget;
        return sol;
      }
      if (h < 1e-6 * r && dydr[1] > 0.0) {
        to_log_phase = true;
        break;
      }
      if (h < min_step) {
        sol.terminated = Termination::StepUnderflow;
        sol.diagnostics = "step size fell below min_step at r = " + format_number(r) + " with v = " +
                          format_number(y[1]) + " below the blow-up threshold";
        return sol;
      }
      const bool last = r + h >= target;
      const double step = last ? target - r : h;
      const auto trial = detail::dormand_prince_step(rhs, r, y, dydr, step, opts.rel_tol);
      if (!(trial.error_norm <= 1.0)) {
        ++sol.rejected_steps;
        h = step * detail::shrink_factor(trial.error_norm);
        continue;
      }
      if (trial.y[1] >= ladder_base) {
        // Cross the threshold ladder in the log phase, starting from here.
        to_log_phase = true;
        break;
      }
      ++sol.accepted_steps;
      r = last ? target : r + step;
      y = trial.y;
      dydr = trial.dydx;
      record(r, y[0], y[1], dydr[0], dydr[1]);
      h = step * detail::grow_factor(trial.error_norm);
      for (double scale : {r, y[2] / dydr[2], y[3] / dydr[3]}) {
        if (scale > 0.0 && std::isfinite(scale)) h = std::min(h, opts.max_relative_change * scale);
      }
    }
    if (!to_log_phase) break;

    // ---- log-v phase
    const detail::LogVRhs log_rhs{rhs, r};
    double x = std::log(y[1]);
    detail::State z{0.0, y[0], y[2], y[3]};
    detail::State dzdx = log_rhs(x, z);
    double hx = std::clamp(0.5 * (std::log(ladder_base) - x), 1e-3, 0.01);
    std::vector<double> ladder;  // crossing offsets r - r_switch
    bool back_to_radius = false;
    while (true) {
      if (!(hx > 1e-12)) {
        sol.terminated = Termination::StepUnderflow;
        sol.diagnostics = "log-v step collapsed at r = " + format_number(r + z[0]);
        return sol;
      }
      const double level = ladder_base * std::pow(2.0, double(ladder.size()));
      const double x_level = std::log(level);
      const bool hits_level = x + hx >= x_level;
      const double step = hits_level ? x_level - x : hx;
      const auto trial = detail::dormand_prince_step(log_rhs, x, z, dzdx, step, opts.rel_tol);
      if (!(trial.error_norm <= 1.0)) {
        ++sol.rejected_steps;
        hx = step * detail::shrink_factor(trial.error_norm);
        continue;
      }
      if (r + trial.y[0] > target) {
        // Radius would overshoot the target: finish in the radius phase.
        ladder_base *= std::pow(2.0, double(ladder.size()));
        back_to_radius = true;
        break;
      }
      ++sol.accepted_steps;
      x = hits_level ? x_level : x + step;
      z = trial.y;
      dzdx = trial.dydx;
      const double vv = std::exp(x);
      const double rr = r + z[0];
      record(rr, z[1], vv, rhs.w(rr, z[2]), rhs.dv(rr, z[3]));
      // A step clipped onto a ladder level says little about the next one.
      hx = hits_level ? std::max(hx, step * detail::grow_factor(trial.error_norm))
                      : step * detail::grow_factor(trial.error_norm);
      if (!hits_level) continue;

      ladder.push_back(z[0]);
      sol.threshold_crossings.push_back(rr);
      if (ladder.size() < 4) continue;
      const double d1 = ladder[1] - ladder[0], d2 = ladder[2] - ladder[1], d3 = ladder[3] - ladder[2];
      if (d1 > 0.0 && d2 < 0.95 * d1 && d3 < 0.95 * d2) {
        sol.terminated = Termination::BlowUp;
        const double denom = d3 - d2;
        sol.R0 = r + (denom < 0.0 ? ladder[3] - d3 * d3 / denom : ladder[3]);
        return sol;
      }
      sol.diagnostics = "threshold crossed without geometric convergence of crossing radii; treated as global growth";
      ladder_base = 2.0 * vv;
      if (!std::isfinite(ladder_base) || ladder_base > 1e250) {
        sol.terminated = Termination::StepUnderflow;
        sol.diagnostics = "overflow guard reached at r = " + format_number(rr);
        return sol;
      }
      back_to_radius = true;
      break;
    }
    if (!back_to_radius) break;
    // Resume in r from the last accepted log-phase state.
    const double r_new = r + z[0];
    y = {z[1], std::exp(x), z[2], z[3]};
    h = std::max(std::min(1e-3 * r_new, target - r_new), 4.0 * min_step);
    r = r_new;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Scaling

/// Problem data for the rescaled solution u~(s) = u(lambda s):
/// f1~(r) = lambda^{p-alpha} f1(lambda r), f2~(r) = lambda^p f2(lambda r),
/// g~ = g, h~(t) = h(t / lambda).
inline ProblemSpec scale_problem(const ProblemSpec& spec, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scale factor must be positive");
  ProblemSpec out = spec;
  out.f1 = spec.f1.with_scaled_argument(lambda).times(std::pow(lambda, spec.p - spec.alpha));
  out.f2 = spec.f2.with_scaled_argument(lambda).times(std::pow(lambda, spec.p));
  out.h = spec.h.with_scaled_argument(1.0 / lambda);
  return out;
}

/// u(r) and u'(r) on a trajectory by cubic Hermite interpolation.
inline double interpolate_u(const RadialSolution& s, double r) {
  auto it = std::upper_bound(s.r.begin(), s.r.end(), r);
  std::size_t k = it == s.r.begin() ? 0 : std::size_t(it - s.r.begin()) - 1;
  if (k + 1 >= s.r.size()) k = s.r.size() - 2;
  return detail::hermite(s.r[k], s.r[k + 1], s.u[k], s.u[k + 1], s.w[k], s.w[k + 1], r);
}

inline double interpolate_v(const RadialSolution& s, double r) {
  auto it = std::upper_bound(s.r.begin(), s.r.end(), r);
  std::size_t k = it == s.r.begin() ? 0 : std::size_t(it - s.r.begin()) - 1;
  if (k + 1 >= s.r.size()) k = s.r.size() - 2;
  return detail::hermite(s.r[k], s.r[k + 1], s.v[k], s.v[k + 1], s.dv[k], s.dv[k + 1], r);
}

struct ScalingReport {
  double lambda = 1.0;
  double radius = 0.0;  // rescaled radius rho; the original is solved on [0, lambda rho]
  double residual_u = 0.0;
  double residual_v = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Solves the rescaled problem on [0, rho] and the original on [0, lambda rho]
/// and reports sup |u(lambda s) - u~(s)| and sup |v(lambda s) - v~(s)|.
inline ScalingReport check_scaling_identity(const ProblemSpec& spec, double lambda, double u0, double v0,
                                            double rho, const SolverOptions& base = {}) {
  SolverOptions tilde_opts = base;
  tilde_opts.target_radius = rho;
  tilde_opts.initial_step.reset();
  tilde_opts.min_step.reset();
  tilde_opts.bootstrap_radius.reset();
  SolverOptions orig_opts = tilde_opts;
  orig_opts.target_radius = lambda * rho;

  const RadialSolution tilde = march(scale_problem(spec, lambda), u0, v0, tilde_opts);
  const RadialSolution orig = march(spec, u0, v0, orig_opts);
  for (const auto* s : {&tilde, &orig}) {
    if (s->terminated != Termination::ReachedTarget) {
      throw std::runtime_error("check_scaling_identity: solve did not reach its radius (" +
                               std::string(to_string(s->terminated)) + ")");
    }
  }
  ScalingReport rep;
  rep.lambda = lambda;
  rep.radius = rho;
  double sup_u = 0.0;
  for (std::size_t i = 0; i < tilde.size(); ++i) {
    const double rr = std::min(lambda * tilde.r[i], orig.r.back());
    rep.residual_u = std::max(rep.residual_u, std::abs(interpolate_u(orig, rr) - tilde.u[i]));
    rep.residual_v = std::max(rep.residual_v, std::abs(interpolate_v(orig, rr) - tilde.v[i]));
    sup_u = std::max(sup_u, std::abs(tilde.u[i]));
  }
  rep.bound = 10.0 * base.rel_tol * (1.0 + sup_u);
  rep.pass = rep.residual_u <= rep.bound && rep.residual_v <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Gradient envelope near the blow-up radius

struct EnvelopeReport {
  double c1 = 0.0;
  double c2 = 0.0;
  std::size_t points_checked = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;
  double window_start = 0.0;
  bool pass = false;
};

/// Fits 0 < C1 <= C2 with C1 (R0 - r) <= Phi(w^{p-1-alpha}) <= C2 (R0 - r) over
/// the last tenth of [0, R0) and checks
/// Phi^{-1}(C2 (R0 - r))^theta <= w(r) <= Phi^{-1}(C1 (R0 - r))^theta pointwise.
inline EnvelopeReport blowup_envelope_check(const RadialSolution& sol) {
  if (sol.terminated != Termination::BlowUp || !sol.R0) {
    throw std::domain_error("blowup_envelope_check needs a run terminated by blow-up");
  }
  const ProblemSpec& spec = sol.spec;
  // Throws when Phi is undefined.
  (void)phi(spec, 1.0);
  const double R0 = *sol.R0;
  const double gap = spec.gap();
  EnvelopeReport rep;
  rep.window_start = 0.9 * R0;
  std::vector<std::size_t> idx;
  rep.c1 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sol.size(); ++i) {
    if (sol.r[i] < rep.window_start || !(sol.r[i] < R0) || !(sol.w[i] > 0.0)) continue;
    const double ratio = phi(spec, std::pow(sol.w[i], gap)) / (R0 - sol.r[i]);
    rep.c1 = std::min(rep.c1, ratio);
    rep.c2 = std::max(rep.c2, ratio);
    idx.push_back(i);
  }
  rep.points_checked = idx.size();
  const double theta = spec.theta();
  for (std::size_t i : idx) {
    const double d = R0 - sol.r[i];
    const double lower = std::pow(phi_inverse(spec, rep.c2 * d), theta);
    const double upper = std::pow(phi_inverse(spec, rep.c1 * d), theta);
    const double viol = std::max({0.0, lower / sol.w[i] - 1.0, sol.w[i] / upper - 1.0});
    rep.max_violation = std::max(rep.max_violation, viol);
    // Inversion is accurate to 1e-8 relative; anything above is structural.
    if (viol > 1e-7) ++rep.violations;
  }
  rep.pass = !idx.empty() && rep.c1 > 0.0 && rep.c1 < rep.c2 && std::isfinite(rep.c2) && rep.violations == 0;
  return rep;
}

}  // namespace radlab
