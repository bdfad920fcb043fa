#pragma once

// Generalized gradient systems (R^n, E, R): the single-step problem
// min_u sigma R((u - u0)/sigma) + E(u), its Euler-Lagrange certificate,
// slopes, De Giorgi gaps, and the validation procedures built on them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "maxslope/models.hpp"
#include "maxslope/moreau.hpp"
#include "maxslope/quadrature.hpp"
#include "maxslope/radial.hpp"
#include "maxslope/solver.hpp"
#include "maxslope/trace.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

struct BanachSystem {
  EnergyFunctional energy;
  DissipationPotential dissipation;
  SolveConfig solve;
  Tolerances tol;
  QuadratureOptions quadrature;
  /// Half-width of the initial search box around u0; 0 picks max(4, 2|u0| + 4).
  double window_half_width = 0.0;

  Eigen::Index dim() const { return energy.dim(); }
  void validate() const {
    if (energy.dim() != dissipation.dim())
      throw ConfigError("BanachSystem: energy and dissipation dimensions differ");
    if (!std::isfinite(energy.lower_bound()))
      throw ConfigError("BanachSystem: energy lower bound must be finite");
    solve.validate();
  }
};

struct ConditionedSlopeResult {
  std::optional<SubdifferentialSet> feasible;
  Vec xi;
  double value = kInf;
  bool attained = false;
  double euler_lagrange_gap = kInf;
  /// Radius of the neighbourhood hull that was needed (0 when exact).
  double enlargement = 0.0;
};

namespace detail {

inline double search_half_width(double configured, const Vec& u0) {
  return configured > 0 ? configured : std::max(4.0, 2.0 * u0.norm() + 4.0);
}

/// Radius below which a computed minimizer cannot be told apart from a kink.
inline double relaxation_radius(const Vec& u) { return 1e-9 * (1.0 + u.norm()); }

template <class F>
SubdifferentialSet neighbourhood_hull(F&& sub, const Vec& x, double delta) {
  std::optional<SubdifferentialSet> h;
  auto add = [&](const Vec& y) {
    try {
      SubdifferentialSet s = sub(y);
      h = h ? h->box_hull(s) : s;
    } catch (const DomainError&) {
    }
  };
  add(x);
  if (delta > 0)
    for (Eigen::Index i = 0; i < x.size(); ++i)
      for (double sgn : {-1.0, 1.0}) {
        Vec y = x;
        y[i] += sgn * delta;
        add(y);
      }
  if (!h) throw DomainError("neighbourhood_hull: empty subdifferential around the point");
  return *h;
}

/// Box intersection that tolerates a mismatch up to `slack` per coordinate,
/// collapsing such coordinates to the midpoint of the gap.
inline std::optional<SubdifferentialSet> intersect_with_slack(const SubdifferentialSet& a,
                                                              const SubdifferentialSet& b,
                                                              double slack) {
  Vec lo = a.lower().cwiseMax(b.lower());
  Vec hi = a.upper().cwiseMin(b.upper());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (lo[i] <= hi[i]) continue;
    if (lo[i] - hi[i] > slack * (1.0 + std::abs(lo[i]))) return std::nullopt;
    lo[i] = hi[i] = 0.5 * (lo[i] + hi[i]);
  }
  return SubdifferentialSet::box(lo, hi);
}

}  // namespace detail

inline Objective banach_objective(const BanachSystem& sys, const Vec& u0, double sigma) {
  return {[&sys, u0, sigma](const Vec& u) {
            const double e = sys.energy(u);
            if (!std::isfinite(e)) return kInf;
            return sigma * sys.dissipation((u - u0) / sigma) + e;
          },
          [&sys, u0, sigma](const Vec& u) {
            try {
              return Vec(sys.dissipation.subdifferential((u - u0) / sigma).element() +
                         sys.energy.subdifferential(u).element());
            } catch (const DomainError&) {
              return Vec(Vec::Constant(u.size(), std::numeric_limits<double>::quiet_NaN()));
            }
          }};
}

/// max of the two certificates: xi in dE(u) and -xi in dR((u - u0)/sigma).
inline double euler_lagrange_gap(const BanachSystem& sys, const Vec& u0, double sigma, const Vec& u,
                                 const Vec& xi) {
  const Vec v = (u - u0) / sigma;
  return std::max(energy_membership_gap(sys.energy, u, xi), fenchel_gap(sys.dissipation, v, Vec(-xi)));
}

/// C_R(u0, sigma; u) = min R*(-xi) over dE(u) and -dR((u - u0)/sigma).
/// On that set the Fenchel equality makes R*(-xi) = <-xi, v> - R(v); this
/// form is used whenever R has no closed-form conjugate. When the exact
/// intersection is empty (a minimizer known only up to rounding next to a
/// kink), both subdifferentials are replaced by hulls over growing
/// neighbourhoods.
inline ConditionedSlopeResult conditioned_slope(const BanachSystem& sys, const Vec& u0, double sigma,
                                                const Vec& u) {
  const Vec v = (u - u0) / sigma;
  const auto& R = sys.dissipation;
  ConditionedSlopeResult out;
  for (double delta : {0.0, 1e-9, 1e-7, 1e-5}) {
    const double du = delta * (1.0 + u.norm());
    SubdifferentialSet se = detail::neighbourhood_hull(
        [&](const Vec& y) { return sys.energy.subdifferential(y); }, u, du);
    SubdifferentialSet sr = detail::neighbourhood_hull(
        [&](const Vec& y) { return R.subdifferential(y); }, v, du / sigma);
    const SubdifferentialSet target = sr.negated();
    std::optional<SubdifferentialSet> f;
    if (se.kind() != SubdifferentialSet::Kind::sampled && target.kind() != SubdifferentialSet::Kind::sampled) {
      f = detail::intersect_with_slack(se, target, 1e-6);
    } else {
      const bool closed = R.closed_conjugate(Vec::Zero(R.dim())).has_value();
      auto obj = [&](const Vec& xi) {
        return closed ? potential_conjugate(R, Vec(-xi)) : std::max(0.0, -xi.dot(v) - R(v));
      };
      const DualMinimum dm = constrained_dual_minimize(obj, {se, target}, R.shape(), sys.tol.certificate);
      if (dm.feasible) {
        out.feasible = SubdifferentialSet::singleton(dm.xi);
        out.xi = dm.xi;
        out.value = dm.value;
        out.attained = true;
        out.enlargement = du;
        break;
      }
      continue;
    }
    if (!f) continue;
    const bool closed = R.closed_conjugate(Vec::Zero(R.dim())).has_value();
    auto obj = [&](const Vec& xi) {
      return closed ? potential_conjugate(R, Vec(-xi)) : -xi.dot(v) - R(v);
    };
    const DualMinimum dm =
        constrained_dual_minimize(obj, {*f}, closed ? R.shape() : ConjugateShape::general);
    out.feasible = f;
    out.xi = dm.xi;
    out.value = std::max(0.0, dm.value);
    out.attained = true;
    out.enlargement = du;
    break;
  }
  if (out.attained) out.euler_lagrange_gap = euler_lagrange_gap(sys, u0, sigma, u, out.xi);
  return out;
}

/// Global minimizers of sigma R((u - u0)/sigma) + E(u), each certified by
/// the Euler-Lagrange inclusion.
inline StepResult banach_step(const BanachSystem& sys, const Vec& u0, double sigma) {
  if (!(sigma > 0)) throw DomainError("banach_step: sigma must be positive");
  if (!std::isfinite(sys.energy(u0))) throw DomainError("banach_step: u0 outside dom(E)");
  const Objective obj = banach_objective(sys, u0, sigma);
  const Window w = Window::around(u0, detail::search_half_width(sys.window_half_width, u0));
  MinimizeResult r = global_minimize(obj, w, sys.solve, sys.energy.convex(), &u0);
  if (sys.dim() > 1) {
    // Polish in velocity coordinates v = (u - u0)/sigma, where the
    // Euler-Lagrange system stays well scaled as sigma -> 0.
    const Objective scaled{[&](const Vec& v) { return obj.value(u0 + sigma * v) / sigma; },
                           [&](const Vec& v) { return obj.gradient(u0 + sigma * v); }};
    for (auto& u : r.minimizers)
      u = u0 + sigma * detail::newton_polish(scaled, local_descent(scaled, Vec((u - u0) / sigma), sys.solve));
    double best = kInf;
    for (const auto& u : r.minimizers) best = std::min(best, obj.value(u));
    r.value = best;
  }
  StepResult s;
  s.sigma = sigma;
  s.value = r.value;
  s.minimizers = r.minimizers;
  s.d_minus = kInf;
  s.d_plus = 0.0;
  for (const auto& u : s.minimizers) {
    const double d = (u - u0).norm();
    s.d_minus = std::min(s.d_minus, d);
    s.d_plus = std::max(s.d_plus, d);
    const ConditionedSlopeResult c = conditioned_slope(sys, u0, sigma, u);
    if (!c.attained || !(c.euler_lagrange_gap <= sys.tol.certificate * std::max(1.0, std::abs(s.value)))) {
      std::ostringstream os;
      os << "banach_step: minimizer " << u.transpose() << " at sigma " << sigma
         << " failed the Euler-Lagrange certificate (gap " << c.euler_lagrange_gap << ")";
      throw SolverError(os.str());
    }
  }
  return s;
}

/// S_R(u) = min R*(-xi) over dE(u). `relax` > 0 takes the hull of dE over
/// that neighbourhood (lower semicontinuous envelope at computed points).
inline double r_slope(const BanachSystem& sys, const Vec& u, double relax = 0.0) {
  const SubdifferentialSet se = detail::neighbourhood_hull(
      [&](const Vec& y) { return energy_subdifferential(sys.energy, y); }, u, relax);
  const auto& R = sys.dissipation;
  const DualMinimum dm = constrained_dual_minimize(
      [&](const Vec& xi) { return potential_conjugate(R, Vec(-xi), sys.solve); }, {se}, R.shape(),
      sys.tol.certificate);
  if (!dm.feasible) throw DomainError("r_slope: empty subdifferential");
  return dm.value;
}

/// Replaces the C_R-optimal selection by a caller-provided xi when set.
using XiSelection = std::function<Vec(double sigma, const Vec& u, const ConditionedSlopeResult&)>;

namespace detail {

struct BanachNode {
  StepResult step;
  ConditionedSlopeResult cond;
  double integrand = 0.0;
};

inline BanachNode banach_node(const BanachSystem& sys, const Vec& u0, double rho, const XiSelection& sel) {
  BanachNode n;
  n.step = banach_step(sys, u0, rho);
  n.cond = conditioned_slope(sys, u0, rho, n.step.selected());
  n.integrand = n.cond.value;
  if (sel) {
    n.cond.xi = sel(rho, n.step.selected(), n.cond);
    n.integrand = potential_conjugate(sys.dissipation, Vec(-n.cond.xi), sys.solve);
  }
  return n;
}

}  // namespace detail

/// The variational interpolant at the requested sigmas, with running
/// integrals of C_R from an adaptive quadrature that has every requested
/// sigma as a node.
inline InterpolantTrace banach_trace(const BanachSystem& sys, const Vec& u0, std::vector<double> sigmas,
                                     const XiSelection& selection = {}) {
  sys.validate();
  auto q = integrate_adaptive<detail::BanachNode>(
      [&](double rho) { return detail::banach_node(sys, u0, rho, selection); },
      [](const detail::BanachNode& n) { return std::vector<double>{n.integrand}; }, sigmas, sys.quadrature);
  InterpolantTrace t;
  t.u0 = u0;
  t.energy0 = sys.energy(u0);
  t.rho_min = q.rho_min;
  t.quadrature_error = q.max_error();
  const auto& head = q.sample_at(q.rho_min);
  t.error_bar = t.quadrature_error + std::abs(t.energy0 - head.step.value);
  std::sort(sigmas.begin(), sigmas.end());
  sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());
  for (double s : sigmas) {
    const auto& n = q.sample_at(s);
    TraceSample ts;
    ts.sigma = s;
    ts.u = n.step.selected();
    ts.phi = n.step.value;
    ts.energy = sys.energy(ts.u);
    ts.dissipation = s * sys.dissipation((ts.u - u0) / s);
    ts.xi = n.cond.xi;
    ts.conditioned_slope = n.integrand;
    ts.r_slope = r_slope(sys, ts.u, detail::relaxation_radius(ts.u));
    ts.d_minus = n.step.d_minus;
    ts.d_plus = n.step.d_plus;
    ts.integral = q.integral_at(s)[0];
    ts.minimizer_count = n.step.minimizers.size();
    t.samples.push_back(std::move(ts));
  }
  return t;
}

inline GapReport de_giorgi_banach_gap(const BanachSystem& sys, const Vec& u0, const std::vector<double>& sigmas,
                                      const XiSelection& selection = {}) {
  return gaps_from_trace(banach_trace(sys, u0, sigmas, selection), sys.tol.gap);
}

inline GapEntry de_giorgi_banach_gap(const BanachSystem& sys, const Vec& u0, double sigma) {
  return de_giorgi_banach_gap(sys, u0, std::vector<double>{sigma}).entries.front();
}

struct MarginalDerivativeBounds {
  double delta_minus = 0.0;
  double delta_plus = 0.0;
  double fd_slope = 0.0;
  double fd_left = 0.0;
  double fd_right = 0.0;
  /// Left and right difference quotients agree, so phi is taken as differentiable here.
  bool differentiable = true;
  bool within() const { return delta_minus <= fd_slope && fd_slope <= delta_plus; }
};

/// delta_minus = sup over minimizers of g'_-(sigma), delta_plus = inf of
/// g'_+(sigma) where g(t) = t R((u - u0)/t); fd_slope is the central
/// difference of the marginal function phi.
inline MarginalDerivativeBounds marginal_derivative_bounds(const BanachSystem& sys, const Vec& u0, double sigma,
                                                           double h = 1e-5) {
  const StepResult s = banach_step(sys, u0, sigma);
  MarginalDerivativeBounds b;
  b.delta_minus = -kInf;
  b.delta_plus = kInf;
  for (const auto& u : s.minimizers) {
    const Vec w = (u - u0) / sigma;
    if (w.isZero(0.0)) {
      b.delta_minus = std::max(b.delta_minus, 0.0);
      b.delta_plus = std::min(b.delta_plus, 0.0);
      continue;
    }
    // a minimizer known to the argument tolerance may sit on either side of a kink
    const double r = sys.tol.argument * (1.0 + u.norm()) / sigma;
    Interval range = conjugate_range_on_subdifferential(sys.dissipation, w);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      for (double sgn : {-1.0, 1.0}) {
        Vec y = w;
        y[i] += sgn * r;
        range = hull(range, conjugate_range_on_subdifferential(sys.dissipation, y));
      }
    b.delta_minus = std::max(b.delta_minus, -range.hi);
    b.delta_plus = std::min(b.delta_plus, -range.lo);
  }
  const double hh = h * std::max(1.0, sigma);
  const double fp = banach_step(sys, u0, sigma + hh).value;
  const double fm = banach_step(sys, u0, sigma - hh).value;
  b.fd_slope = (fp - fm) / (2.0 * hh);
  b.fd_right = (fp - s.value) / hh;
  b.fd_left = (s.value - fm) / hh;
  b.differentiable = std::abs(b.fd_right - b.fd_left) <= 1e-3 * std::max(1.0, std::abs(b.fd_slope));
  return b;
}

struct DerivativeCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = C_R(u0, rho; u_rho); rhs = -d/ds [s R((u_rho - u0)/s)] at s = rho.
inline DerivativeCheck identity_derivative_check(const BanachSystem& sys, const InterpolantTrace& trace,
                                                 double rho) {
  auto it = std::find_if(trace.samples.begin(), trace.samples.end(),
                         [rho](const TraceSample& s) { return s.sigma == rho; });
  if (it == trace.samples.end()) throw Error("identity_derivative_check: rho is not a trace sample");
  const RadialProfile p = radial_profile(sys.dissipation, Vec(it->u - trace.u0), rho);
  return {it->conditioned_slope, -p.g_right};
}

// Moreau-Yosida pipeline

struct YosidaPipelineReport {
  std::vector<double> etas;
  std::vector<double> sigmas;
  /// per_eta[k][j]: gap of the regularized system eta_k at sigmas[j].
  std::vector<std::vector<GapEntry>> per_eta;
  /// Accumulation points per sigma.
  std::vector<std::vector<Vec>> accumulation;
  std::vector<GapEntry> limit;
  /// Distance between the smallest-eta interpolant and the direct solution.
  std::vector<double> distance_to_direct;
  double e_bar = 0.0;
  double a_priori_max = 0.0;
  bool a_priori_ok = false;
};

/// Largest distance at which a minimizer of the original problem is
/// identified as a limit of the regularized minimizers.
inline constexpr double kAccumulationRadius = 1e-2;

inline std::vector<double> default_eta_schedule() {
  std::vector<double> e;
  for (int k = 2; k <= 12; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

namespace detail {

struct YosidaNode {
  std::vector<Vec> u;      // selected minimizer per eta
  std::vector<double> c;   // C_R per eta
  std::vector<double> dissipation;
  std::vector<Vec> limit;  // accumulation points
  double limit_c = 0.0;
  double a_priori = 0.0;
  double phi0 = 0.0;       // phi of the smallest eta
};

/// Points of the original minimizer set J_sigma(u0) lying within `radius`
/// of the smallest-eta minimizers: the finite stand-in for the upper limit
/// of the regularized minimizer sets.
inline std::vector<Vec> accumulation_points(const std::vector<Vec>& direct, const std::vector<Vec>& last,
                                            double radius) {
  std::vector<Vec> out;
  for (const auto& x : direct)
    for (const auto& y : last)
      if ((x - y).norm() <= radius) {
        out.push_back(x);
        break;
      }
  return out;
}

}  // namespace detail

/// For each eta: the regularized system (E, R_eta) and its De Giorgi gap;
/// then the limit estimate with C_R of the original R evaluated at the
/// accumulation points of the regularized interpolants.
inline YosidaPipelineReport yosida_pipeline(const BanachSystem& sys, const Vec& u0, std::vector<double> sigmas,
                                            std::vector<double> etas = default_eta_schedule()) {
  sys.validate();
  if (etas.size() < 2) throw ConfigError("yosida_pipeline: need at least two etas");
  std::sort(etas.begin(), etas.end(), std::greater<>());
  std::sort(sigmas.begin(), sigmas.end());
  sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());
  const std::size_t K = etas.size();
  std::vector<BanachSystem> reg;
  for (double eta : etas) {
    BanachSystem s = sys;
    s.dissipation = yosida(sys.dissipation, eta);
    reg.push_back(s);
  }

  YosidaPipelineReport rep;
  rep.etas = etas;
  rep.sigmas = sigmas;
  const double e0 = sys.energy(u0);
  const double s_prime = e0 - sys.energy.lower_bound();
  const double cbar = superlinearity_constant(sys.dissipation);
  const double smax = sigmas.back();
  rep.e_bar = e0 + u0.norm() + smax * cbar + s_prime + std::sqrt(2.0 * smax * s_prime);

  auto eval = [&](double rho) {
    detail::YosidaNode n;
    std::vector<Vec> last_set;
    for (std::size_t k = 0; k < K; ++k) {
      const StepResult st = banach_step(reg[k], u0, rho);
      const Vec& u = st.selected();
      n.u.push_back(u);
      n.c.push_back(conditioned_slope(reg[k], u0, rho, u).value);
      n.dissipation.push_back(rho * reg[k].dissipation((u - u0) / rho));
      n.a_priori = std::max(n.a_priori, sys.energy(u) + u.norm());
      if (k + 1 == K) {
        last_set = st.minimizers;
        n.phi0 = st.value;
      }
    }
    const StepResult direct = banach_step(sys, u0, rho);
    n.limit = detail::accumulation_points(direct.minimizers, last_set, kAccumulationRadius);
    if (n.limit.empty()) {
      std::ostringstream os;
      os << "yosida_pipeline: no minimizer of the original problem within " << kAccumulationRadius
         << " of the regularized minimizers at sigma " << rho;
      throw ModelError(os.str());
    }
    n.limit_c = conditioned_slope(sys, u0, rho, n.limit.front()).value;
    return n;
  };
  auto project = [](const detail::YosidaNode& n) {
    std::vector<double> v(n.c);
    v.push_back(n.limit_c);
    return v;
  };
  auto q = integrate_adaptive<detail::YosidaNode>(eval, project, sigmas, sys.quadrature);

  const auto& head = q.sample_at(q.rho_min);
  rep.a_priori_max = 0.0;
  for (const auto& n : q.samples) rep.a_priori_max = std::max(rep.a_priori_max, n.a_priori);
  rep.a_priori_ok = rep.a_priori_max <= rep.e_bar;

  rep.per_eta.assign(K, {});
  for (double s : sigmas) {
    const auto& n = q.sample_at(s);
    const auto& integ = q.integral_at(s);
    for (std::size_t k = 0; k < K; ++k) {
      GapEntry e;
      e.sigma = s;
      e.gap = e0 - sys.energy(n.u[k]) - n.dissipation[k] - integ[k];
      e.error = q.error[k] + std::abs(e0 - head.phi0);
      e.classification = classify_gap(e.gap, sys.tol.gap, e.error);
      rep.per_eta[k].push_back(e);
    }
    const Vec& ul = n.limit.front();
    GapEntry e;
    e.sigma = s;
    e.gap = e0 - sys.energy(ul) - s * sys.dissipation((ul - u0) / s) - integ[K];
    e.error = q.error[K] + std::abs(e0 - head.phi0);
    e.classification = classify_gap(e.gap, sys.tol.gap, e.error);
    rep.limit.push_back(e);
    rep.accumulation.push_back(n.limit);
    rep.distance_to_direct.push_back((n.u.back() - banach_step(sys, u0, s).selected()).norm());
  }
  return rep;
}

// Chain rule validation along a piecewise continuous interpolant

struct JumpReport {
  double tau = 0.0;
  Vec u_left;
  Vec u_right;
  double phi = 0.0;
  /// max |Phi_tau(u_pm) - phi(tau)|
  double value_mismatch = 0.0;
};

struct PieceReport {
  double sigma_begin = 0.0;
  double sigma_end = 0.0;
  /// max over cells of |dE - <xi_mean, du>| / dsigma
  double chain_rule_residual = 0.0;
  /// |E(u_end) - E(u_begin) - sum <xi_mean, du>|
  double telescoping_residual = 0.0;
};

struct ChainRuleReport {
  std::vector<JumpReport> jumps;
  std::vector<PieceReport> pieces;
  /// E(u0) - E(u_sigma) - sigma R - int C_R at the last sample, assembled piecewise.
  double reconstructed_residual = 0.0;
};

/// Jumps: consecutive displacement above 10x the median of the nonzero
/// displacements, each located by bisection. On every piece the discrete
/// chain rule dE = <xi, du> (trapezoidal in xi) is checked.
inline ChainRuleReport chain_rule_validation(const BanachSystem& sys, const InterpolantTrace& trace) {
  const auto& S = trace.samples;
  if (S.size() < 3) throw ConfigError("chain_rule_validation: trace too short");
  ChainRuleReport rep;
  std::vector<Vec> us;
  for (const auto& x : S) us.push_back(x.u);
  const std::vector<std::size_t> cuts = detect_jumps(us);

  for (std::size_t k : cuts) {
    const JumpBracket br = bisect_jump([&](double m) { return banach_step(sys, trace.u0, m).selected(); },
                                       S[k].sigma, S[k + 1].sigma, S[k].u, S[k + 1].u);
    const Vec& ua = br.u_left;
    const Vec& ub = br.u_right;
    JumpReport j;
    j.tau = 0.5 * (br.left + br.right);
    j.u_left = ua;
    j.u_right = ub;
    j.phi = banach_step(sys, trace.u0, j.tau).value;
    const Objective obj = banach_objective(sys, trace.u0, j.tau);
    j.value_mismatch = std::max(std::abs(obj(ua) - j.phi), std::abs(obj(ub) - j.phi));
    rep.jumps.push_back(j);
  }

  std::size_t begin = 0;
  std::vector<std::size_t> ends(cuts);
  ends.push_back(S.size() - 1);
  for (std::size_t end : ends) {
    PieceReport p;
    p.sigma_begin = S[begin].sigma;
    p.sigma_end = S[end].sigma;
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const Vec du = S[k + 1].u - S[k].u;
      const double incr = 0.5 * (S[k].xi + S[k + 1].xi).dot(du);
      const double dE = S[k + 1].energy - S[k].energy;
      const double ds = S[k + 1].sigma - S[k].sigma;
      p.chain_rule_residual = std::max(p.chain_rule_residual, std::abs(dE - incr) / ds);
      sum += incr;
    }
    p.telescoping_residual = std::abs(S[end].energy - S[begin].energy - sum);
    rep.pieces.push_back(p);
    begin = end + 1;
  }
  const auto& last = S.back();
  rep.reconstructed_residual = trace.energy0 - last.energy - last.dissipation - last.integral;
  return rep;
}

// Lipschitz continuity of the interpolant

struct LipschitzAudit {
  double empirical = 0.0;
  double bound = 0.0;
  double c_m = 0.0;
  double lambda = 0.0;
  double radius = 0.0;
};

/// Lipschitz constant of v -> P(v) - R(v) = R*(dR(v)) on the ball of
/// radius M, from adjacent pairs on a grid (1D) or seeded random pairs.
inline double conjugate_level_lipschitz(const DissipationPotential& R, double M) {
  auto h = [&](const Vec& v) { return conjugate_range_on_subdifferential(R, v).hi; };
  double best = 0.0;
  if (R.dim() == 1) {
    const int n = 4001;
    double prev = h(scalar_vec(-M));
    for (int i = 1; i < n; ++i) {
      const double x0 = -M + 2.0 * M * (i - 1) / (n - 1);
      const double x1 = -M + 2.0 * M * i / (n - 1);
      const double cur = h(scalar_vec(x1));
      best = std::max(best, std::abs(cur - prev) / (x1 - x0));
      prev = cur;
    }
    return best;
  }
  std::mt19937_64 rng(0x11b5);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto ball = [&]() {
    Vec d(R.dim());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = g(rng);
    return Vec(d / d.norm() * M * std::pow(unit(rng), 1.0 / static_cast<double>(d.size())));
  };
  for (int k = 0; k < 4000; ++k) {
    const Vec a = ball();
    Vec b = a + 1e-3 * M * ball() / M;
    if (b.norm() > M) b *= M / b.norm();
    const double d = (a - b).norm();
    if (d > 0) best = std::max(best, std::abs(h(a) - h(b)) / d);
  }
  return best;
}

/// Empirical Lipschitz constant of sigma -> u_sigma over the samples
/// against C_M / (lambda sigma_floor) with M = C-bar + (E(u0) - E0)/sigma_floor,
/// the radius of the ball containing every (u_sigma - u0)/sigma, sigma >= sigma_floor.
inline LipschitzAudit lipschitz_interpolant_audit(const BanachSystem& sys, const Vec& u0, double sigma_floor,
                                                  std::vector<double> sigmas) {
  const auto lambda = sys.energy.lambda_convexity();
  if (!lambda || !(*lambda > 0)) throw ConfigError("lipschitz_interpolant_audit: energy must be lambda-convex, lambda > 0");
  std::sort(sigmas.begin(), sigmas.end());
  LipschitzAudit a;
  a.lambda = *lambda;
  a.radius = superlinearity_constant(sys.dissipation) + (sys.energy(u0) - sys.energy.lower_bound()) / sigma_floor;
  a.c_m = conjugate_level_lipschitz(sys.dissipation, a.radius);
  a.bound = a.c_m / (a.lambda * sigma_floor);
  std::vector<Vec> us(sigmas.size());
  parallel_for(sigmas.size(), [&](std::size_t i) { us[i] = banach_step(sys, u0, sigmas[i]).selected(); });
  for (std::size_t i = 0; i + 1 < sigmas.size(); ++i)
    a.empirical = std::max(a.empirical, (us[i + 1] - us[i]).norm() / (sigmas[i + 1] - sigmas[i]));
  return a;
}

}  // namespace maxslope
