#pragma once

// Sampled variational interpolants and the De Giorgi gaps read off them,
// shared by the metric and the Banach settings.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "maxslope/quadrature.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

/// One single-step problem. `minimizers` is ordered lexicographically.
struct StepResult {
  double sigma = 0.0;
  double value = 0.0;
  std::vector<Vec> minimizers;
  double d_minus = 0.0;
  double d_plus = 0.0;

  const Vec& selected() const { return minimizers.front(); }
};

struct TraceSample {
  double sigma = 0.0;
  Vec u;
  double phi = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  Vec xi;
  double r_slope = 0.0;
  /// Integrand: C_R for Banach systems, psi*(|dE|) for metric ones.
  double conditioned_slope = 0.0;
  /// Metric slope |dE| (metric systems only).
  double slope = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;
  /// Running integral of the integrand over (0, sigma].
  double integral = 0.0;
  /// Metric energy identity: running integrals of psi*(psi'(d-/rho)) and psi*(psi'(d+/rho)).
  double identity_integral_minus = 0.0;
  double identity_integral_plus = 0.0;
  std::size_t minimizer_count = 1;
};

struct InterpolantTrace {
  Vec u0;
  double energy0 = 0.0;
  std::vector<TraceSample> samples;
  /// Quadrature error estimate plus the head bound |E(u0) - phi(rho_min)|.
  double error_bar = 0.0;
  double quadrature_error = 0.0;
  double rho_min = 0.0;
};

struct GapEntry {
  double sigma = 0.0;
  double gap = 0.0;
  double error = 0.0;
  GapClass classification = GapClass::identity;
};

struct GapReport {
  std::vector<GapEntry> entries;

  bool any(GapClass c) const {
    return std::any_of(entries.begin(), entries.end(), [c](const GapEntry& e) { return e.classification == c; });
  }
  bool all(GapClass c) const {
    return std::all_of(entries.begin(), entries.end(), [c](const GapEntry& e) { return e.classification == c; });
  }
};

/// gap(sigma) = E(u0) - E(u_sigma) - sigma R((u_sigma - u0)/sigma) - int_0^sigma integrand.
inline GapReport gaps_from_trace(const InterpolantTrace& t, double tol) {
  GapReport r;
  for (const auto& s : t.samples) {
    GapEntry e;
    e.sigma = s.sigma;
    e.gap = t.energy0 - s.energy - s.dissipation - s.integral;
    e.error = t.error_bar;
    e.classification = classify_gap(e.gap, tol, e.error);
    r.entries.push_back(e);
  }
  return r;
}

/// Indices k where |u_{k+1} - u_k| exceeds 10x the median of the nonzero
/// consecutive displacements.
inline std::vector<std::size_t> detect_jumps(const std::vector<Vec>& us) {
  std::vector<double> disp, nonzero;
  for (std::size_t k = 0; k + 1 < us.size(); ++k) {
    disp.push_back((us[k + 1] - us[k]).norm());
    if (disp.back() > 0) nonzero.push_back(disp.back());
  }
  std::vector<std::size_t> out;
  if (nonzero.empty()) return out;
  const auto mid = nonzero.begin() + static_cast<std::ptrdiff_t>(nonzero.size() / 2);
  std::nth_element(nonzero.begin(), mid, nonzero.end());
  const double threshold = 10.0 * *mid;
  for (std::size_t k = 0; k < disp.size(); ++k)
    if (disp[k] > threshold) out.push_back(k);
  return out;
}

struct JumpBracket {
  double left = 0.0;
  double right = 0.0;
  Vec u_left;
  Vec u_right;
};

/// Shrinks [a, b] around the switch of the selection `select(sigma)` from
/// the branch through ua to the branch through ub.
template <class Select>
JumpBracket bisect_jump(Select&& select, double a, double b, Vec ua, Vec ub) {
  for (int it = 0; it < 60 && b - a > 1e-12 * b; ++it) {
    const double m = 0.5 * (a + b);
    const Vec um = select(m);
    if ((um - ua).norm() <= (um - ub).norm()) {
      a = m;
      ua = um;
    } else {
      b = m;
      ub = um;
    }
  }
  return {a, b, ua, ub};
}

}  // namespace maxslope
