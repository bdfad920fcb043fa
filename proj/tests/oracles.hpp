#pragma once

// Brute-force reference computations for the unit tests. They share no code
// with the library: plain dense grids refined by ternary search, central
// differences and composite Simpson sums.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

struct Argmin {
  double x;
  double value;
};

/// Dense grid on [lo, hi], then ternary search on the bracket around the best node.
inline Argmin argmin_1d(const Fn& f, double lo, double hi, int nodes = 200001) {
  const double h = (hi - lo) / (nodes - 1);
  int best = 0;
  double fb = f(lo);
  for (int i = 1; i < nodes; ++i) {
    const double v = f(lo + i * h);
    if (v < fb) {
      fb = v;
      best = i;
    }
  }
  double a = lo + std::max(0, best - 1) * h;
  double b = lo + std::min(nodes - 1, best + 1) * h;
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (f(m1) <= f(m2))
      b = m2;
    else
      a = m1;
  }
  const double x = 0.5 * (a + b);
  return f(x) <= fb ? Argmin{x, f(x)} : Argmin{lo + best * h, fb};
}

/// sup_r (s r - f(r)) over [lo, hi].
inline double conjugate(const Fn& f, double s, double lo = -50.0, double hi = 50.0) {
  return -argmin_1d([&](double r) { return f(r) - s * r; }, lo, hi).value;
}

inline double derivative(const Fn& f, double x, double h = 1e-6) { return (f(x + h) - f(x - h)) / (2.0 * h); }

inline double right_derivative(const Fn& f, double x, double h = 1e-7) { return (f(x + h) - f(x)) / h; }
inline double left_derivative(const Fn& f, double x, double h = 1e-7) { return (f(x) - f(x - h)) / h; }

inline double simpson(const Fn& f, double a, double b, int panels = 2000) {
  const double h = (b - a) / (2 * panels);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Sign changes of g(s) = F(s) - G(s) located by bisection on a uniform scan.
inline std::vector<double> crossings(const Fn& g, double lo, double hi, int scan = 4000) {
  std::vector<double> out;
  double a = lo, ga = g(lo);
  for (int i = 1; i <= scan; ++i) {
    const double b = lo + (hi - lo) * i / scan, gb = g(b);
    if ((ga < 0) != (gb < 0)) {
      double l = a, r = b;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (l + r);
        ((g(m) < 0) == (ga < 0) ? l : r) = m;
      }
      out.push_back(0.5 * (l + r));
    }
    a = b;
    ga = gb;
  }
  return out;
}

}  // namespace oracle
