#pragma once

// The radial profile g(t) = t R(v/t) and radial differentiability.
//
// On dR(w) the Fenchel equality gives R*(eta) = <eta, w> - R(w), which is
// affine in eta, so max and min of R* over dR(w) come from the support
// function of the subdifferential descriptor.

#include <cmath>

#include "maxslope/models.hpp"
#include "maxslope/scalar_convex.hpp"

namespace maxslope {

struct RadialProfile {
  double g = 0.0;
  double g_left = 0.0;
  double g_right = 0.0;
  /// One-sided difference quotients of g, for cross-checking.
  double fd_left = 0.0;
  double fd_right = 0.0;
};

/// max / min of R* over dR(w).
inline Interval conjugate_range_on_subdifferential(const DissipationPotential& R, const Vec& w) {
  const SubdifferentialSet s = R.subdifferential(w);
  const double r = R(w);
  return {s.min_linear(w) - r, s.support(w) - r};
}

inline RadialProfile radial_profile(const DissipationPotential& R, const Vec& v, double t) {
  if (!(t > 0)) throw DomainError("radial_profile: t must be positive");
  RadialProfile p;
  if (v.isZero(0.0)) return p;
  const Vec w = v / t;
  p.g = t * R(w);
  const Interval range = conjugate_range_on_subdifferential(R, w);
  p.g_left = -range.hi;
  p.g_right = -range.lo;
  auto g = [&](double s) { return s > 0 ? s * R(v / s) : kInf; };
  const OneSided fd = one_sided_derivatives(value_only(ScalarConvex{g, {}, {}, "g"}), t);
  p.fd_left = fd.left;
  p.fd_right = fd.right;
  return p;
}

/// lambda -> R(lambda v) has one-sided derivatives max / min of <xi, v> over dR(lambda v).
inline OneSided directional_derivatives(const DissipationPotential& R, const Vec& v, double lambda) {
  const SubdifferentialSet s = R.subdifferential(lambda * v);
  return {s.min_linear(v), s.support(v)};
}

inline bool is_radially_differentiable(const DissipationPotential& R, const Vec& v, double tol = 1e-6) {
  if (v.isZero(0.0)) throw DomainError("is_radially_differentiable: v must be nonzero");
  const RadialProfile p = radial_profile(R, v, 1.0);
  return std::abs(p.g_left - p.g_right) <= tol;
}

/// P(v) = <xi, v> for xi in dR(v); single-valued exactly when R is radially
/// differentiable at v.
inline double p_mapping(const DissipationPotential& R, const Vec& v, double tol = 1e-6) {
  if (v.isZero(0.0)) return 0.0;
  const SubdifferentialSet s = R.subdifferential(v);
  const double hi = s.support(v), lo = s.min_linear(v);
  if (std::abs(hi - lo) > tol * std::max(1.0, std::abs(hi)))
    throw ModelError("p_mapping: R is not radially differentiable here, P is multi-valued");
  return hi;
}

}  // namespace maxslope
