#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "errors.hpp"

namespace censcop::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(1 + exp(x)) without overflow.
inline double log1pexp(double x) {
  return x > 35.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log(exp(a) + exp(b)).
inline double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Two-sided p-value of a standard normal statistic.
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

/// Root of a monotone function on [lo, hi] by bisection. f(lo) and f(hi) must
/// bracket zero. Stops when |f| <= ftol or the bracket shrinks below xtol.
template <class F>
double bisect(F&& f, double lo, double hi, double ftol, double xtol = 1e-15, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericalError("bisect: root not bracketed on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= ftol || (hi - lo) <= xtol * std::max(1.0, std::abs(mid))) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Smallest x in [lo, hi] with cdf(x) >= target for a nondecreasing cdf.
template <class F>
double invert_monotone(F&& cdf, double target, double lo, double hi, double xtol = 1e-10) {
  for (int it = 0; it < 200 && hi - lo > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

template <std::size_t N>
struct GaussLegendreRule {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendreRule() {
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

template <class F>
double gl_panel(F& f, double a, double b) {
  static const GaussLegendreRule<10> rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < 10; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

template <class F>
double gl_adaptive(F& f, double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl_panel(f, a, mid);
  const double right = gl_panel(f, mid, b);
  const double sum = left + right;
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(sum - whole) <= std::max(tol, noise)) return sum;
  return gl_adaptive(f, a, mid, left, 0.5 * tol, depth - 1) +
         gl_adaptive(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive 10-point Gauss-Legendre quadrature with panel bisection. The
/// tolerance is relative to the magnitude of the first whole-interval estimate.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, int max_depth = 40) {
  if (a == b) return 0.0;
  const double whole = detail::gl_panel(f, a, b);
  const double tol = rel_tol * std::max(std::abs(whole), 1e-300);
  return detail::gl_adaptive(f, a, b, whole, tol, max_depth);
}

struct MinimumResult {
  double x;
  double value;
};

/// Minimises f on [lo, hi]: a coarse scan locates the best cell, Brent's method
/// refines inside the neighbouring cells.
template <class F>
MinimumResult minimize_scalar(F&& f, double lo, double hi, int scan_points = 40,
                              int bits = 40) {
  double best_x = lo;
  double best_v = kInf;
  std::vector<double> grid(static_cast<std::size_t>(scan_points));
  for (int i = 0; i < scan_points; ++i) {
    const double x = lo + (hi - lo) * i / (scan_points - 1);
    grid[static_cast<std::size_t>(i)] = x;
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  if (!std::isfinite(best_v)) {
    throw NumericalError("minimize_scalar: objective not finite anywhere on [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const double step = (hi - lo) / (scan_points - 1);
  const double a = std::max(lo, best_x - step);
  const double b = std::min(hi, best_x + step);
  boost::uintmax_t max_iter = 200;
  const auto [x, v] = boost::math::tools::brent_find_minima(f, a, b, bits, max_iter);
  if (v <= best_v) return {x, v};
  return {best_x, best_v};
}

/// Pearson correlation of two equally long sequences; NaN when degenerate.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace censcop::numerics
