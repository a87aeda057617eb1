#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace radlab {

/// First-derivative weights at `x0` for arbitrary distinct stencil nodes
/// (Fornberg's recursion, derivative orders 0 and 1).
inline std::vector<double> first_derivative_weights(double x0, std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> prev(n, std::vector<double>(2, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  prev[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          prev[i][k] = c1 * (k * prev[i - 1][k - 1] - c5 * prev[i - 1][k]) / c2;
        }
        prev[i][0] = -c1 * c5 * prev[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        prev[j][k] = (c4 * prev[j][k] - k * prev[j][k - 1]) / c3;
      }
      prev[j][0] = c4 * prev[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) weights[j] = prev[j][1];
  return weights;
}

/// dy/dx at grid index i from a `width`-point stencil, centred where the
/// grid allows and shifted inward at the ends.
inline double grid_derivative(std::span<const double> x, std::span<const double> y, std::size_t i,
                              std::size_t width = 5) {
  const std::size_t n = x.size();
  width = std::min(width, n);
  std::size_t start = i >= width / 2 ? i - width / 2 : 0;
  if (start + width > n) start = n - width;
  auto w = first_derivative_weights(x[i], x.subspan(start, width));
  double d = 0.0;
  for (std::size_t j = 0; j < width; ++j) d += w[j] * y[start + j];
  return d;
}

/// dy/dx at index i for positive data, differentiating log y against log x
/// so that power-law profiles (steep near x = 0) stay accurate. Falls back to
/// grid_derivative when no stencil around i avoids non-positive values.
inline double grid_derivative_loglog(std::span<const double> x, std::span<const double> y, std::size_t i,
                                     std::size_t width = 5) {
  const std::size_t n = x.size();
  width = std::min(width, n);
  std::size_t start = i >= width / 2 ? i - width / 2 : 0;
  if (start + width > n) start = n - width;
  // Shift off r = 0 (or zero data) towards a one-sided stencil.
  while (start < i && start + width < n && (!(x[start] > 0.0) || !(y[start] > 0.0))) ++start;
  std::vector<double> lx(width), ly(width);
  for (std::size_t j = 0; j < width; ++j) {
    if (!(x[start + j] > 0.0) || !(y[start + j] > 0.0)) return grid_derivative(x, y, i, width);
    lx[j] = std::log(x[start + j]);
    ly[j] = std::log(y[start + j]);
  }
  const double slope = grid_derivative(lx, ly, i - start, width);
  return y[i] / x[i] * slope;
}

}  // namespace radlab
