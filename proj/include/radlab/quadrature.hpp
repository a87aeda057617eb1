#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with global interval bisection,
// plus a power-law mapping for tails [a, inf) of integrands with algebraic decay.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace radlab {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-30;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for Kronrod nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integral of f over [a, b] (a <= b). Stops when the summed error estimate
/// drops below max(abs_tol, rel_tol |I|) or the panel budget is spent.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel> panels;
  auto first = detail::gauss_kronrod_15(f, a, b);
  double total = first.value;
  double error = first.error;
  panels.push(first);
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (panels.size() >= opts.max_intervals) {
      out.value = total;
      out.error = error;
      out.intervals = panels.size();
      return out;
    }
    auto worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // panel at machine resolution
    panels.pop();
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to shed the drift of incremental updates.
  total = 0.0;
  error = 0.0;
  out.intervals = panels.size();
  while (!panels.empty()) {
    total += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  out.value = total;
  out.error = error;
  out.converged = error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) * 1.0000001;
  return out;
}

/// Integral of f over [a, inf) for a > 0 and f(s) ~ C s^decay with decay < -1.
///
/// `log_f` receives log(s) and returns log f(s), so the integrand never
/// overflows. The map s = a x^{-gamma}, gamma = 1/(-decay-1), sends the tail to
/// (0, 1] where the transformed integrand tends to a constant.
template <class LogF>
QuadratureResult integrate_power_tail(LogF&& log_f, double a, double decay, const QuadratureOptions& opts = {}) {
  const double gamma = 1.0 / (-decay - 1.0);
  const double log_a = std::log(a);
  const double log_scale = std::log(a * gamma);
  auto mapped = [&](double x) {
    if (x <= 0.0) x = std::numeric_limits<double>::min();
    const double log_x = std::log(x);
    const double log_s = log_a - gamma * log_x;
    return std::exp(log_f(log_s) + log_scale + (-gamma - 1.0) * log_x);
  };
  return integrate(mapped, 0.0, 1.0, opts);
}

/// Least-squares slope of y against x.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace radlab
