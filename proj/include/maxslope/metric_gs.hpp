#pragma once

// Generalized metric gradient systems (M, E, D, psi) with M = R^n and a
// distance D derived from the Euclidean one: single steps, slopes, the
// metric energy identity and De Giorgi's estimate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "maxslope/models.hpp"
#include "maxslope/quadrature.hpp"
#include "maxslope/scalar_convex.hpp"
#include "maxslope/solver.hpp"
#include "maxslope/trace.hpp"

namespace maxslope {

/// D(u, w) = min(|u - w|, truncation); truncation = inf is the Euclidean distance.
class MetricModel {
 public:
  static MetricModel euclidean(Eigen::Index n) { return MetricModel(n, kInf); }
  static MetricModel truncated(Eigen::Index n, double radius) {
    if (!(radius > 0)) throw ConfigError("truncated metric: radius must be positive");
    return MetricModel(n, radius);
  }

  Eigen::Index dim() const { return n_; }
  double truncation() const { return radius_; }
  bool geodesic() const { return !std::isfinite(radius_); }
  std::string name() const { return geodesic() ? "euclidean" : "truncated"; }

  double operator()(const Vec& u, const Vec& w) const { return std::min((u - w).norm(), radius_); }

  /// Gradient of w -> D(u, w) where it exists (zero on the saturated region and at w = u).
  Vec gradient(const Vec& u, const Vec& w) const {
    const double r = (w - u).norm();
    if (r == 0.0 || r > radius_) return Vec::Zero(w.size());
    return (w - u) / r;
  }

  /// Constant-speed geodesic; only available on the Euclidean model.
  std::optional<Vec> geodesic_point(const Vec& u, const Vec& w, double theta) const {
    if (!geodesic()) return std::nullopt;
    return Vec((1.0 - theta) * u + theta * w);
  }

 private:
  MetricModel(Eigen::Index n, double radius) : n_(n), radius_(radius) {}
  Eigen::Index n_;
  double radius_;
};

struct MetricSystem {
  MetricModel metric = MetricModel::euclidean(1);
  EnergyFunctional energy;
  ScalarConvex psi;
  SolveConfig solve;
  Tolerances tol;
  QuadratureOptions quadrature;
  double window_half_width = 0.0;

  Eigen::Index dim() const { return energy.dim(); }
  void validate() const {
    if (metric.dim() != energy.dim()) throw ConfigError("MetricSystem: metric and energy dimensions differ");
    if (std::abs(psi(0.0)) > 1e-12) throw ConfigError("MetricSystem: psi(0) must vanish");
    if (!(psi(8.0) / 8.0 > psi(1.0))) throw ConfigError("MetricSystem: psi must be superlinear");
    if (!std::isfinite(energy.lower_bound())) throw ConfigError("MetricSystem: energy lower bound must be finite");
    solve.validate();
  }

  double psi_derivative(double r) const {
    if (psi.subdifferential) return psi.subdifferential(r).hi;
    return one_sided_derivatives(psi, r).right;
  }
  double psi_conjugate(double s) const { return conjugate_1d(psi, s); }
};

inline Objective metric_objective(const MetricSystem& sys, const Vec& u0, double sigma) {
  return {[&sys, u0, sigma](const Vec& u) {
            const double e = sys.energy(u);
            if (!std::isfinite(e)) return kInf;
            return sigma * sys.psi(sys.metric(u0, u) / sigma) + e;
          },
          [&sys, u0, sigma](const Vec& u) {
            try {
              const double d = sys.metric(u0, u);
              return Vec(sys.psi_derivative(d / sigma) * sys.metric.gradient(u0, u) +
                         sys.energy.subdifferential(u).element());
            } catch (const DomainError&) {
              return Vec(Vec::Constant(u.size(), std::numeric_limits<double>::quiet_NaN()));
            }
          }};
}

inline StepResult metric_step(const MetricSystem& sys, const Vec& u0, double sigma) {
  if (!(sigma > 0)) throw DomainError("metric_step: sigma must be positive");
  if (!std::isfinite(sys.energy(u0))) throw DomainError("metric_step: u0 outside dom(E)");
  const Objective obj = metric_objective(sys, u0, sigma);
  const double half = sys.window_half_width > 0 ? sys.window_half_width : std::max(4.0, 2.0 * u0.norm() + 4.0);
  const bool convex = sys.metric.geodesic() && sys.energy.convex();
  const MinimizeResult r = global_minimize(obj, Window::around(u0, half), sys.solve, convex, &u0);
  StepResult s;
  s.sigma = sigma;
  s.value = r.value;
  s.minimizers = r.minimizers;
  s.d_minus = kInf;
  s.d_plus = 0.0;
  for (const auto& u : s.minimizers) {
    const double d = sys.metric(u0, u);
    s.d_minus = std::min(s.d_minus, d);
    s.d_plus = std::max(s.d_plus, d);
  }
  return s;
}

// Slopes

namespace detail {

inline std::vector<Vec> sphere_directions(Eigen::Index n, const Vec* extra = nullptr) {
  std::vector<Vec> dirs;
  if (n == 1) {
    dirs = {scalar_vec(1.0), scalar_vec(-1.0)};
  } else if (n == 2) {
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 64.0;
      Vec d(2);
      d << std::cos(a), std::sin(a);
      dirs.push_back(d);
    }
  } else {
    dirs = probe_directions(n, 64);
  }
  if (extra && extra->norm() > 0) {
    dirs.push_back(*extra / extra->norm());
    dirs.push_back(-*extra / extra->norm());
  }
  return dirs;
}

}  // namespace detail

/// limsup_{v -> u} (f(u) - f(v))^+ / D(u, v), sampled on spheres of radii
/// r0 2^-k (k = 0..12). Returns the value once consecutive radii agree to
/// 1e-6, else the value at the smallest radius.
inline double sphere_slope(const std::function<double(const Vec&)>& f, const MetricModel& metric, const Vec& u,
                           const Vec* extra_direction = nullptr, double r0 = 0.1) {
  const auto dirs = detail::sphere_directions(u.size(), extra_direction);
  const double fu = f(u);
  double prev = -1.0, cur = 0.0;
  for (int k = 0; k <= 12; ++k) {
    const double r = std::ldexp(r0, -k);
    cur = 0.0;
    for (const auto& d : dirs) {
      const Vec v = u + r * d;
      const double dist = metric(u, v);
      if (dist <= 0) continue;
      const double fv = f(v);
      if (!std::isfinite(fv)) continue;
      cur = std::max(cur, std::max(0.0, fu - fv) / dist);
    }
    if (prev >= 0 && std::abs(cur - prev) <= 1e-6) return cur;
    prev = cur;
  }
  return cur;
}

/// |dE|(u): the analytic slope when the energy provides one, relaxed to the
/// minimum over the coordinate neighbours at distance 1e-9 (1 + |u|) so that
/// computed points next to a kink get the lower semicontinuous value.
/// Energies without an analytic slope use the sphere estimator.
inline double metric_slope(const MetricSystem& sys, const Vec& u) {
  if (!std::isfinite(sys.energy(u))) throw DomainError("metric_slope: point outside dom(E)");
  auto analytic = [&](const Vec& x) -> std::optional<double> {
    if (!std::isfinite(sys.energy(x))) return std::nullopt;
    return sys.energy.analytic_slope(x);
  };
  const auto base = analytic(u);
  if (!base) return sphere_slope([&](const Vec& x) { return sys.energy(x); }, sys.metric, u);
  double s = *base;
  const double delta = 1e-9 * (1.0 + u.norm());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (double sgn : {-1.0, 1.0}) {
      Vec y = u;
      y[i] += sgn * delta;
      if (auto a = analytic(y)) s = std::min(s, *a);
    }
  return s;
}

/// Slope of w -> -D(u0, w) at u, with the radial direction added to the sphere.
inline double distance_slope(const MetricSystem& sys, const Vec& u0, const Vec& u) {
  if ((u - u0).norm() == 0.0) throw DomainError("distance_slope: u must differ from u0");
  const Vec radial = u - u0;
  return sphere_slope([&](const Vec& w) { return -sys.metric(u0, w); }, sys.metric, u, &radial);
}

/// psi'(D(u0, u)/sigma) - |dE|(u); nonnegative on minimizers.
inline double slope_estimate_gap(const MetricSystem& sys, const Vec& u0, double sigma, const Vec& u) {
  return sys.psi_derivative(sys.metric(u0, u) / sigma) - metric_slope(sys, u);
}

// Traces

struct MetricTrace {
  InterpolantTrace trace;
  /// Residuals of the metric energy identity with d- and d+ at each sample.
  std::vector<double> identity_minus;
  std::vector<double> identity_plus;
};

namespace detail {

struct MetricNode {
  StepResult step;
  double slope = 0.0;
  double integrand = 0.0;
  double identity_minus = 0.0;
  double identity_plus = 0.0;
};

inline MetricNode metric_node(const MetricSystem& sys, const Vec& u0, double rho) {
  MetricNode n;
  n.step = metric_step(sys, u0, rho);
  n.slope = metric_slope(sys, n.step.selected());
  n.integrand = sys.psi_conjugate(n.slope);
  n.identity_minus = sys.psi_conjugate(sys.psi_derivative(n.step.d_minus / rho));
  n.identity_plus = sys.psi_conjugate(sys.psi_derivative(n.step.d_plus / rho));
  return n;
}

}  // namespace detail

inline MetricTrace metric_trace(const MetricSystem& sys, const Vec& u0, std::vector<double> sigmas) {
  sys.validate();
  auto q = integrate_adaptive<detail::MetricNode>(
      [&](double rho) { return detail::metric_node(sys, u0, rho); },
      [](const detail::MetricNode& n) {
        return std::vector<double>{n.integrand, n.identity_minus, n.identity_plus};
      },
      sigmas, sys.quadrature);
  MetricTrace mt;
  InterpolantTrace& t = mt.trace;
  t.u0 = u0;
  t.energy0 = sys.energy(u0);
  t.rho_min = q.rho_min;
  t.quadrature_error = q.max_error();
  t.error_bar = t.quadrature_error + std::abs(t.energy0 - q.sample_at(q.rho_min).step.value);
  std::sort(sigmas.begin(), sigmas.end());
  sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());
  for (double s : sigmas) {
    const auto& n = q.sample_at(s);
    const auto& integ = q.integral_at(s);
    TraceSample ts;
    ts.sigma = s;
    ts.u = n.step.selected();
    ts.phi = n.step.value;
    ts.energy = sys.energy(ts.u);
    ts.dissipation = s * sys.psi(sys.metric(u0, ts.u) / s);
    ts.slope = n.slope;
    ts.r_slope = n.slope;
    ts.conditioned_slope = n.integrand;
    ts.d_minus = n.step.d_minus;
    ts.d_plus = n.step.d_plus;
    ts.integral = integ[0];
    ts.identity_integral_minus = integ[1];
    ts.identity_integral_plus = integ[2];
    ts.minimizer_count = n.step.minimizers.size();
    mt.identity_minus.push_back(t.energy0 - ts.phi - ts.identity_integral_minus);
    mt.identity_plus.push_back(t.energy0 - ts.phi - ts.identity_integral_plus);
    t.samples.push_back(std::move(ts));
  }
  return mt;
}

struct IdentityResidual {
  double minus = 0.0;
  double plus = 0.0;
  double error = 0.0;
};

/// E(u0) - E(u_sigma) - sigma psi(D/sigma) - int_0^sigma psi*(psi'(d_rho/rho)) for d = d- and d+.
inline IdentityResidual energy_identity_residual(const MetricSystem& sys, const Vec& u0, double sigma) {
  const MetricTrace mt = metric_trace(sys, u0, {sigma});
  return {mt.identity_minus.front(), mt.identity_plus.front(), mt.trace.error_bar};
}

inline GapReport de_giorgi_metric_gap(const MetricSystem& sys, const Vec& u0, const std::vector<double>& sigmas) {
  return gaps_from_trace(metric_trace(sys, u0, sigmas).trace, sys.tol.gap);
}

inline GapEntry de_giorgi_metric_gap(const MetricSystem& sys, const Vec& u0, double sigma) {
  return de_giorgi_metric_gap(sys, u0, std::vector<double>{sigma}).entries.front();
}

/// Switching points of the selected minimizer on [lo, hi], from a uniform
/// scan followed by bisection.
inline std::vector<double> metric_jumps(const MetricSystem& sys, const Vec& u0, double lo, double hi,
                                        int samples = 256) {
  std::vector<double> sig;
  std::vector<Vec> us(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) sig.push_back(lo + (hi - lo) * k / (samples - 1));
  parallel_for(sig.size(), [&](std::size_t i) { us[i] = metric_step(sys, u0, sig[i]).selected(); });
  std::vector<double> out;
  for (std::size_t k : detect_jumps(us)) {
    const JumpBracket b = bisect_jump([&](double m) { return metric_step(sys, u0, m).selected(); }, sig[k],
                                      sig[k + 1], us[k], us[k + 1]);
    out.push_back(0.5 * (b.left + b.right));
  }
  return out;
}

using SlopeModulus = std::function<double(const Vec&, const Vec&)>;

/// max over pairs of E(u) - |dE|(u) D(u, w) - omega(u, w) D(u, w) - E(w).
inline double uniform_slope_probe(const MetricSystem& sys, const SlopeModulus& omega,
                                  const std::vector<std::pair<Vec, Vec>>& pairs) {
  double worst = -kInf;
  for (const auto& [u, w] : pairs) {
    const double d = sys.metric(u, w);
    worst = std::max(worst, sys.energy(u) - metric_slope(sys, u) * d - omega(u, w) * d - sys.energy(w));
  }
  return worst;
}

}  // namespace maxslope
