#pragma once

// Scalar convex analysis: one-sided derivatives and Legendre conjugates of
// functions R -> [0, inf], plus the standard dissipation densities.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "maxslope/interval.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

/// A proper convex function on the real line. `value` may return +inf
/// outside the effective domain. The two closed forms are optional; when
/// absent, numerical fallbacks are used.
struct ScalarConvex {
  std::function<double(double)> value;
  /// Closed-form subdifferential [f'_-(x), f'_+(x)].
  std::function<Interval(double)> subdifferential;
  /// Closed-form Legendre conjugate.
  std::function<double(double)> conjugate;
  std::string name;

  double operator()(double x) const { return value(x); }
};

struct OneSided {
  double left = 0.0;
  double right = 0.0;
};

namespace detail {

// Difference quotients of a convex function are monotone in the step, so the
// geometric sequence h_k = 2^-k h0 converges from one side.
inline double stable_quotient(const std::function<double(double)>& f, double x,
                              double fx, double direction) {
  constexpr double h0 = 1e-2;
  constexpr int kmax = 20;
  constexpr double settle = 1e-8;
  double h = h0;
  double previous = std::numeric_limits<double>::quiet_NaN();
  double q = 0.0;
  for (int k = 0; k <= kmax; ++k, h *= 0.5) {
    const double fy = f(x + direction * h);
    if (!std::isfinite(fy))
      throw DomainError("one_sided_derivatives: non-finite value near " +
                        std::to_string(x));
    q = direction * (fy - fx) / h;
    if (k > 0 && std::abs(q - previous) < settle) break;
    previous = q;
  }
  return q;
}

}  // namespace detail

/// Left and right derivative of f at x. Uses the closed-form
/// subdifferential when available, difference quotients otherwise.
inline OneSided one_sided_derivatives(const ScalarConvex& f, double x) {
  if (f.subdifferential) {
    const Interval d = f.subdifferential(x);
    return {d.lo, d.hi};
  }
  const double fx = f.value(x);
  if (!std::isfinite(fx))
    throw DomainError("one_sided_derivatives: point outside domain");
  OneSided r{detail::stable_quotient(f.value, x, fx, -1.0),
             detail::stable_quotient(f.value, x, fx, +1.0)};
  if (r.left > r.right) r.left = r.right = 0.5 * (r.left + r.right);
  return r;
}

/// Numerical conjugate sup_r (s r - f(r)), ignoring any closed form.
/// The search window doubles until the maximizer is interior; a window
/// beyond 1e8 means f is not superlinear.
inline double numeric_conjugate_1d(const std::function<double(double)>& f,
                                   double s) {
  auto objective = [&](double r) {
    const double fr = f(r);
    return std::isfinite(fr) ? s * r - fr : -kInf;
  };
  constexpr int n = 401;
  double half = 1.0;
  double lo = -half, hi = half, step = 0.0;
  int best = 0;
  for (;;) {
    lo = -half;
    hi = half;
    step = (hi - lo) / (n - 1);
    double best_value = -kInf;
    best = 0;
    for (int i = 0; i < n; ++i) {
      const double v = objective(lo + i * step);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    if (best > 0 && best < n - 1) break;
    half *= 2.0;
    if (half > 1e8)
      throw ModelError("conjugate_1d: supremum not attained (non-superlinear input)");
  }
  // two refinements of the bracket around the grid argmax
  double a = lo + (best - 1) * step;
  double b = lo + (best + 1) * step;
  for (int pass = 0; pass < 2; ++pass) {
    constexpr int m = 41;
    const double h = (b - a) / (m - 1);
    int arg = 0;
    double best_value = -kInf;
    for (int i = 0; i < m; ++i) {
      const double v = objective(a + i * h);
      if (v > best_value) {
        best_value = v;
        arg = i;
      }
    }
    const double c = a + arg * h;
    a = c - h;
    b = c + h;
  }
  const auto found = boost::math::tools::brent_find_minima(
      [&](double r) { return -objective(r); }, a, b,
      std::numeric_limits<double>::digits);
  return std::max(-found.second, objective(0.5 * (a + b)));
}

/// f*(s) = sup_r (s r - f(r)).
inline double conjugate_1d(const ScalarConvex& f, double s) {
  if (f.conjugate) return f.conjugate(s);
  return numeric_conjugate_1d(f.value, s);
}

// Built-in densities

/// c r^2 / 2
inline ScalarConvex quadratic_density(double c = 1.0) {
  if (!(c > 0)) throw ConfigError("quadratic_density: modulus must be positive");
  return {[c](double r) { return 0.5 * c * r * r; },
          [c](double r) { return Interval::point(c * r); },
          [c](double s) { return 0.5 * s * s / c; }, "quadratic"};
}

/// c |r|^p / p with p > 1.
inline ScalarConvex power_density(double p, double c = 1.0) {
  if (!(p > 1)) throw ConfigError("power_density: exponent must exceed 1");
  if (!(c > 0)) throw ConfigError("power_density: scale must be positive");
  const double q = p / (p - 1.0);
  return {[p, c](double r) { return c * std::pow(std::abs(r), p) / p; },
          [p, c](double r) {
            const double d = c * std::pow(std::abs(r), p - 1.0);
            return Interval::point(r < 0 ? -d : d);
          },
          [q, c](double s) {
            return std::pow(c, 1.0 - q) * std::pow(std::abs(s), q) / q;
          },
          "power"};
}

/// alpha r^2/2 on |r| <= b, beta r^2/2 - (beta - alpha) b^2/2 outside.
/// With alpha = 1, beta = 4, b = 1 this is the kinked density 2r^2 - 3/2.
inline ScalarConvex piecewise_quadratic_density(double alpha, double beta,
                                                double b) {
  if (!(alpha > 0) || !(beta >= alpha) || !(b > 0))
    throw ConfigError(
        "piecewise_quadratic_density: need 0 < inner <= outer and breakpoint > 0");
  const double shift = 0.5 * (beta - alpha) * b * b;
  return {
      [=](double r) {
        const double a = std::abs(r);
        return a <= b ? 0.5 * alpha * r * r : 0.5 * beta * r * r - shift;
      },
      [=](double r) {
        const double a = std::abs(r);
        if (a < b) return Interval::point(alpha * r);
        if (a > b) return Interval::point(beta * r);
        return r > 0 ? Interval{alpha * b, beta * b} : Interval{-beta * b, -alpha * b};
      },
      [=](double s) {
        const double a = std::abs(s);
        if (a <= alpha * b) return 0.5 * s * s / alpha;
        if (a <= beta * b) return a * b - 0.5 * alpha * b * b;
        return 0.5 * s * s / beta + shift;
      },
      "piecewise_quadratic"};
}

/// Strips closed forms so that all operations take the numerical route.
inline ScalarConvex value_only(const ScalarConvex& f) {
  return {f.value, {}, {}, f.name + "(numeric)"};
}

}  // namespace maxslope
