#pragma once

// Deterministic global minimization: a scan + golden-section multistart in 1D,
// BFGS multistart with pattern-search polish in n-D, an exhaustive grid
// oracle for n <= 3, and minimization of a dual potential over an
// intersection of subdifferential descriptors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "maxslope/parallel.hpp"
#include "maxslope/subdifferential.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

struct SolveConfig {
  double value_tol = 1e-9;
  double arg_tol = 1e-7;
  /// Minimizers closer than this are merged into one cluster.
  double cluster_radius = 1e-6;
  int scan_points = 2048;
  int convex_scan_points = 96;
  int starts = 16;
  std::uint64_t seed = 20240517;
  int max_iter = 500;
  double oracle_step = 1e-5;
  /// Cross-check every global_minimize call against grid_oracle (n <= 3).
  bool oracle = false;
  int max_window_doublings = 4;

  void validate() const {
    if (!(value_tol > 0) || !(arg_tol > 0) || !(cluster_radius > 0))
      throw ConfigError("SolveConfig: tolerances must be positive");
    if (!(oracle_step > 0)) throw ConfigError("SolveConfig: oracle step must be positive");
    // two refinement passes divide the oracle step by 100
    if (oracle_step / 100.0 > 10.0 * arg_tol)
      throw ConfigError("SolveConfig: oracle resolution coarser than 10x argument tolerance");
    if (scan_points < 8 || convex_scan_points < 8 || starts < 1 || max_iter < 1)
      throw ConfigError("SolveConfig: iteration counts must be positive");
  }
};

/// Objective with an optional (sub)gradient.
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;

  double operator()(const Vec& x) const { return value(x); }
};

/// Axis-aligned search window.
struct Window {
  Vec lo;
  Vec hi;

  static Window around(const Vec& center, double half_width) {
    return {center.array() - half_width, center.array() + half_width};
  }
  Eigen::Index dim() const { return lo.size(); }
  Window expanded(double factor) const {
    const Vec c = 0.5 * (lo + hi);
    const Vec h = 0.5 * (hi - lo) * factor;
    return {c - h, c + h};
  }
};

struct MinimizeResult {
  double value = kInf;
  /// Lexicographically ordered cluster representatives.
  std::vector<Vec> minimizers;
};

namespace detail {

struct Candidate {
  Vec x;
  double f;
};

/// Keeps candidates within the value tolerance of the best, merges clusters
/// and orders representatives lexicographically.
inline MinimizeResult reduce_candidates(std::vector<Candidate> cands, double value_tol,
                                        double radius) {
  MinimizeResult out;
  if (cands.empty()) return out;
  double best = kInf;
  for (const auto& c : cands) best = std::min(best, c.f);
  if (!std::isfinite(best)) return out;
  const double slack = value_tol * std::max(1.0, std::abs(best));
  std::vector<Candidate> keep;
  for (auto& c : cands)
    if (c.f <= best + slack) keep.push_back(std::move(c));
  std::sort(keep.begin(), keep.end(),
            [](const Candidate& a, const Candidate& b) { return lex_less(a.x, b.x); });
  std::vector<Vec> reps;
  for (const auto& c : keep) {
    bool merged = false;
    for (const auto& r : reps)
      if ((r - c.x).norm() <= radius) {
        merged = true;
        break;
      }
    if (!merged) reps.push_back(c.x);
  }
  out.value = best;
  out.minimizers = std::move(reps);
  return out;
}

inline Vec numeric_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  Vec g(x.size());
  Vec y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline bool on_boundary(const Vec& x, const Window& w, double tol) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] <= w.lo[i] + tol || x[i] >= w.hi[i] - tol) return true;
  return false;
}

}  // namespace detail

/// Local descent: BFGS with Armijo backtracking, followed by a compass
/// search that also makes progress across kinks.
inline Vec local_descent(const Objective& obj, Vec x, const SolveConfig& cfg) {
  const auto n = x.size();
  auto grad = [&](const Vec& y) {
    return obj.gradient ? obj.gradient(y) : detail::numeric_gradient(obj.value, y);
  };
  double fx = obj.value(x);
  if (!std::isfinite(fx)) return x;
  Vec g = grad(x);
  Mat H = Mat::Identity(n, n);
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (!g.allFinite() || g.norm() <= 1e-12 * (1.0 + std::abs(fx))) break;
    Vec d = -H * g;
    if (d.dot(g) >= 0) {
      H.setIdentity();
      d = -g;
    }
    double t = 1.0;
    Vec xn;
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      xn = x + t * d;
      fn = obj.value(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * g.dot(d)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const Vec gn = grad(xn);
    const Vec s = xn - x;
    const Vec y = gn - g;
    const double sy = s.dot(y);
    x = xn;
    const double df = fx - fn;
    fx = fn;
    g = gn;
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Mat I = Mat::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    if (s.norm() <= 0.1 * cfg.arg_tol && df <= cfg.value_tol * 1e-3) break;
  }
  // compass polish
  double step = 1e-2 * (1.0 + x.lpNorm<Eigen::Infinity>());
  const double floor = 0.01 * cfg.arg_tol;
  while (step > floor) {
    bool improved = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vec y = x;
        y[i] += sgn * step;
        const double fy = obj.value(y);
        if (fy < fx) {
          x = y;
          fx = fy;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

/// Exhaustive grid evaluation over `window` (n <= 3) followed by two local
/// refinement passes (step/10 each) around every discrete local minimum that
/// can still compete with the best. Throws when the best point lies on the
/// window boundary.
inline MinimizeResult grid_oracle(const std::function<double(const Vec&)>& f,
                                  const Window& window, double step,
                                  double value_tol = 1e-9) {
  const auto n = window.dim();
  if (n < 1 || n > 3) throw ConfigError("grid_oracle: dimension must be 1..3");
  if (!(step > 0)) throw ConfigError("grid_oracle: step must be positive");
  std::vector<long> counts(n);
  long total = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = window.hi[i] - window.lo[i];
    if (!(w > 0) || !std::isfinite(w)) throw ConfigError("grid_oracle: empty window");
    counts[i] = static_cast<long>(std::floor(w / step + 1e-9)) + 1;
    total *= counts[i];
  }
  if (total > 40'000'000) throw ConfigError("grid_oracle: grid too large");

  auto point = [&](long flat) {
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = window.lo[i] + static_cast<double>(flat % counts[i]) * step;
      flat /= counts[i];
    }
    return x;
  };

  std::vector<double> values(static_cast<std::size_t>(total));
  const std::size_t chunks = 64;
  const long per = (total + static_cast<long>(chunks) - 1) / static_cast<long>(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const long begin = static_cast<long>(c) * per;
    const long end = std::min(total, begin + per);
    for (long k = begin; k < end; ++k) values[k] = f(point(k));
  });

  double best = kInf;
  for (double v : values) best = std::min(best, v);
  if (!std::isfinite(best)) throw SolverError("grid_oracle: objective infinite on window");

  // discrete local minima with their neighbour variation
  std::vector<detail::Candidate> seeds;
  std::vector<long> stride(n, 1);
  for (Eigen::Index i = 1; i < n; ++i) stride[i] = stride[i - 1] * counts[i - 1];
  for (long k = 0; k < total; ++k) {
    const double v = values[k];
    if (!std::isfinite(v)) continue;
    bool local_min = true;
    double variation = 0.0;
    for (Eigen::Index i = 0; i < n && local_min; ++i) {
      const long idx = (k / stride[i]) % counts[i];
      for (int s : {-1, 1}) {
        const long j = idx + s;
        if (j < 0 || j >= counts[i]) continue;
        const double w = values[k + s * stride[i]];
        if (w < v || (w == v && s < 0)) {
          local_min = false;
          break;
        }
        variation = std::max(variation, w - v);
      }
    }
    if (local_min && v <= best + variation + value_tol * std::max(1.0, std::abs(best)))
      seeds.push_back({point(k), v});
  }

  std::vector<detail::Candidate> refined;
  for (auto seed : seeds) {
    double h = step;
    for (int pass = 0; pass < 2; ++pass) {
      const double sub = h / 10.0;
      const int m = 21;
      long sub_total = 1;
      for (Eigen::Index i = 0; i < n; ++i) sub_total *= m;
      Vec base = seed.x;
      for (long k = 0; k < sub_total; ++k) {
        Vec x(n);
        long r = k;
        for (Eigen::Index i = 0; i < n; ++i) {
          x[i] = base[i] + (static_cast<double>(r % m) - 10.0) * sub;
          r /= m;
        }
        if ((x.array() < window.lo.array()).any() || (x.array() > window.hi.array()).any())
          continue;
        const double v = f(x);
        if (v < seed.f) seed = {x, v};
      }
      h = sub;
    }
    refined.push_back(seed);
  }
  auto result = detail::reduce_candidates(std::move(refined), value_tol,
                                          2.0 * std::sqrt(static_cast<double>(n)) * step / 100.0);
  for (const auto& x : result.minimizers)
    if (detail::on_boundary(x, window, 0.5 * step))
      throw SolverError("grid_oracle: window boundary active");
  return result;
}

namespace detail {

// Golden-section search on [a, b] down to a few ulps.
inline double golden_section(const std::function<double(double)>& f, double a, double b) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200; ++it) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * scale || b - a <= 1e-300) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

// Bisection on the sign of a subgradient. Near a smooth minimum golden
// section only resolves the argument to about sqrt(eps); the subgradient
// sign pins it to machine precision, and at kinks it lands on the kink.
inline std::optional<double> subgradient_polish(const Objective& obj, double x) {
  if (!obj.gradient) return std::nullopt;
  auto slope = [&](double y) { return obj.gradient(scalar_vec(y))[0]; };
  const double w = 1e-6 * (1.0 + std::abs(x));
  double a = x - w, b = x + w;
  const double ga = slope(a), gb = slope(b);
  if (!std::isfinite(ga) || !std::isfinite(gb) || !(ga < 0.0) || !(gb > 0.0)) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = slope(m);
    if (!std::isfinite(gm)) return std::nullopt;
    if (gm == 0.0) return m;
    (gm < 0.0 ? a : b) = m;
  }
  const double fa = obj.value(scalar_vec(a)), fb = obj.value(scalar_vec(b));
  return fa <= fb ? a : b;
}

// Newton iterations on the gradient with a finite-difference Jacobian.
// Value-based descent stalls near sqrt(eps) on stiff objectives (small
// steps sigma); a step is kept only if the gradient shrinks and the value
// does not rise beyond rounding, so kinks are left where they are.
inline Vec newton_polish(const Objective& obj, Vec x, int max_iter = 60) {
  if (!obj.gradient) return x;
  const auto n = x.size();
  double fx = obj.value(x);
  Vec g = obj.gradient(x);
  if (!std::isfinite(fx) || !g.allFinite()) return x;
  for (int it = 0; it < max_iter && g.norm() > 0.0; ++it) {
    Mat J(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-7 * (1.0 + std::abs(x[i]));
      Vec a = x, b = x;
      a[i] += h;
      b[i] -= h;
      J.col(i) = (obj.gradient(a) - obj.gradient(b)) / (2.0 * h);
    }
    if (!J.allFinite()) break;
    const Vec d = J.colPivHouseholderQr().solve(-g);
    if (!d.allFinite()) break;
    const Vec xn = x + d;
    const double fn = obj.value(xn);
    const Vec gn = obj.gradient(xn);
    if (!std::isfinite(fn) || !gn.allFinite() || !(gn.norm() < g.norm()) ||
        fn > fx + 1e-13 * std::max(1.0, std::abs(fx)))
      break;
    x = xn;
    fx = fn;
    g = gn;
  }
  return x;
}

inline MinimizeResult minimize_1d(const Objective& obj, const Window& w, const SolveConfig& cfg,
                                  bool convex, bool& boundary_active) {
  const int n = convex ? cfg.convex_scan_points : cfg.scan_points;
  const double lo = w.lo[0], hi = w.hi[0];
  const double h = (hi - lo) / (n - 1);
  std::vector<double> xs(n), fs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = lo + i * h;
    fs[i] = obj.value(scalar_vec(xs[i]));
  }
  std::vector<int> seeds;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(fs[i])) continue;
    const bool left_ok = i == 0 || fs[i] <= fs[i - 1];
    const bool right_ok = i == n - 1 || fs[i] <= fs[i + 1];
    if (left_ok && right_ok) {
      if (!seeds.empty() && seeds.back() == i - 1 && fs[i] == fs[i - 1]) continue;
      seeds.push_back(i);
    }
  }
  std::stable_sort(seeds.begin(), seeds.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  if (static_cast<int>(seeds.size()) > cfg.starts) seeds.resize(cfg.starts);

  auto f1 = [&](double x) {
    const double v = obj.value(scalar_vec(x));
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  std::vector<Candidate> cands;
  for (int i : seeds) {
    const double a = xs[std::max(i - 1, 0)];
    const double b = xs[std::min(i + 1, n - 1)];
    double x = golden_section(f1, a, b);
    double fx = f1(x);
    if (auto p = subgradient_polish(obj, x)) {
      const double fp = f1(*p);
      if (fp <= fx + 1e-12 * std::max(1.0, std::abs(fx))) {
        x = *p;
        fx = fp;
      }
    }
    if (fx <= fs[i])
      cands.push_back({scalar_vec(x), fx});
    else
      cands.push_back({scalar_vec(xs[i]), fs[i]});
  }
  auto result = reduce_candidates(std::move(cands), cfg.value_tol, cfg.cluster_radius);
  boundary_active = false;
  for (const auto& x : result.minimizers)
    if (on_boundary(x, w, h)) boundary_active = true;
  return result;
}

inline MinimizeResult minimize_nd(const Objective& obj, const Window& w, const SolveConfig& cfg,
                                  bool convex, const Vec* center, bool& boundary_active) {
  const auto n = w.dim();
  std::vector<Vec> starts;
  if (center) starts.push_back(*center);
  const int extra = convex ? (center ? 0 : 1) : cfg.starts - static_cast<int>(starts.size());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < extra; ++k) {
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = w.lo[i] + unit(rng) * (w.hi[i] - w.lo[i]);
    starts.push_back(x);
  }
  std::vector<Candidate> cands(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    Vec x = local_descent(obj, starts[k], cfg);
    cands[k] = {x, obj.value(x)};
  }
  auto result = reduce_candidates(std::move(cands), cfg.value_tol, cfg.cluster_radius);
  boundary_active = false;
  for (const auto& x : result.minimizers)
    if (on_boundary(x, w, 0.0)) boundary_active = true;
  return result;
}

}  // namespace detail

/// Deterministic global minimization over `window`. When a minimizer hits
/// the window boundary the window is doubled (up to cfg.max_window_doublings
/// times); persistent boundary activity signals a non-coercive objective.
/// `convex` enables the fast path (fewer scan points / a single start).
inline MinimizeResult global_minimize(const Objective& obj, Window window,
                                      const SolveConfig& cfg, bool convex = false,
                                      const Vec* center = nullptr) {
  for (int attempt = 0; attempt <= cfg.max_window_doublings; ++attempt) {
    bool boundary = false;
    MinimizeResult r = window.dim() == 1
                           ? detail::minimize_1d(obj, window, cfg, convex, boundary)
                           : detail::minimize_nd(obj, window, cfg, convex, center, boundary);
    if (r.minimizers.empty())
      throw SolverError("global_minimize: objective infinite on the search window");
    if (!boundary) {
      if (cfg.oracle && window.dim() <= 3) {
        const auto ref = grid_oracle(obj.value, window, cfg.oracle_step, cfg.value_tol);
        const double resolution = cfg.oracle_step / 100.0 * 2.0 *
                                  std::sqrt(static_cast<double>(window.dim()));
        bool agree = std::abs(ref.value - r.value) <= 1e-6 * std::max(1.0, std::abs(r.value)) &&
                     ref.minimizers.size() == r.minimizers.size();
        for (std::size_t i = 0; agree && i < r.minimizers.size(); ++i)
          agree = (ref.minimizers[i] - r.minimizers[i]).norm() <= resolution + cfg.cluster_radius;
        if (!agree) {
          std::ostringstream os;
          os << "global_minimize: oracle disagreement; solver value " << r.value << " at {";
          for (const auto& x : r.minimizers) os << ' ' << x.transpose();
          os << " }, oracle value " << ref.value << " at {";
          for (const auto& x : ref.minimizers) os << ' ' << x.transpose();
          os << " }";
          throw SolverError(os.str());
        }
      }
      return r;
    }
    window = window.expanded(2.0);
  }
  throw SolverError("global_minimize: minimizer on the search window boundary (non-coercive?)");
}

/// How a dual potential depends on its argument; decides how it is minimized over boxes.
enum class ConjugateShape { separable, radial, general };

struct DualMinimum {
  bool feasible = false;
  double value = kInf;
  Vec xi;
};

/// Minimizes `objective` (xi -> R*(-xi)) over the intersection of the
/// given descriptors. The objective is convex with minimum 0 at xi = 0, so
/// on boxes the separable and radial cases reduce to projecting the origin.
inline DualMinimum constrained_dual_minimize(const std::function<double(const Vec&)>& objective,
                                             const std::vector<SubdifferentialSet>& feasible,
                                             ConjugateShape shape, double certificate = 1e-8) {
  if (feasible.empty()) throw Error("constrained_dual_minimize: no constraints");
  bool all_boxes = true;
  for (const auto& s : feasible) all_boxes = all_boxes && s.kind() != SubdifferentialSet::Kind::sampled;

  if (all_boxes) {
    std::optional<SubdifferentialSet> box = feasible.front();
    for (std::size_t i = 1; i < feasible.size() && box; ++i) box = intersect_boxes(*box, feasible[i]);
    if (!box) return {};
    Vec xi = box->min_norm_element();
    double value = objective(xi);
    if (shape == ConjugateShape::general && !box->is_singleton()) {
      // projected gradient with backtracking
      for (int it = 0; it < 500; ++it) {
        const Vec g = detail::numeric_gradient(objective, xi);
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
          Vec y = (xi - t * g).cwiseMax(box->lower()).cwiseMin(box->upper());
          const double fy = objective(y);
          if (fy < value - 1e-14) {
            xi = y;
            value = fy;
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
      // vertices catch objectives that are affine on the box
      if (box->dim() <= 8)
        for (const auto& v : box->vertices()) {
          const double fv = objective(v);
          if (fv < value) {
            xi = v;
            value = fv;
          }
        }
    }
    return {true, value, xi};
  }

  // certified sampling over the sampled descriptors
  std::vector<Vec> candidates;
  Vec lo = feasible.front().lower(), hi = feasible.front().upper();
  for (const auto& s : feasible) {
    lo = lo.cwiseMax(s.lower());
    hi = hi.cwiseMin(s.upper());
    if (s.kind() == SubdifferentialSet::Kind::sampled)
      for (const auto& p : s.points()) {
        candidates.push_back(p);
        if ((lo.array() <= hi.array()).all()) candidates.push_back(p.cwiseMax(lo).cwiseMin(hi));
      }
  }
  if ((lo.array() <= hi.array()).all()) candidates.push_back(Vec::Zero(lo.size()).cwiseMax(lo).cwiseMin(hi));
  DualMinimum best;
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& s : feasible) ok = ok && s.contains(c, certificate);
    if (!ok) continue;
    const double v = objective(c);
    if (!best.feasible || v < best.value || (v == best.value && lex_less(c, best.xi)))
      best = {true, v, c};
  }
  return best;
}

}  // namespace maxslope
