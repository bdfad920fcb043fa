#pragma once

// Adaptive integration over sigma in (0, sigma_max] for integrands whose
// every evaluation is a single-step solve. Nodes start geometric towards 0
// plus a uniform fill; panels are refined level by level with adaptive
// Simpson, and each level's new nodes are evaluated concurrently.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "maxslope/parallel.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

struct QuadratureOptions {
  /// Absolute target for each integral over the whole range.
  double tol = 1e-6;
  /// rho_min = ratio * (smallest required node).
  double rho_min_ratio = 1e-4;
  /// ... but not below floor * (largest node): much smaller steps are beyond
  /// what double precision resolves in the velocity (u - u0) / rho.
  double rho_min_floor = 1e-7;
  int uniform_fill = 16;
  /// Panels narrower than ratio * sigma_max are accepted as they are (jumps).
  double min_width_ratio = 1e-9;
  int max_levels = 48;
};

template <class Sample>
struct QuadratureResult {
  double rho_min = 0.0;
  /// Every evaluated node, ascending, with its sample.
  std::vector<double> nodes;
  std::vector<Sample> samples;
  /// Panel endpoints (ascending) and the integral from 0 to each endpoint.
  std::vector<double> endpoints;
  std::vector<std::vector<double>> cumulative;
  /// Summed local error estimates per component.
  std::vector<double> error;

  const Sample& sample_at(double rho) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), rho);
    if (it == nodes.end() || *it != rho) throw Error("quadrature: node not evaluated");
    return samples[static_cast<std::size_t>(it - nodes.begin())];
  }
  const std::vector<double>& integral_at(double rho) const {
    auto it = std::lower_bound(endpoints.begin(), endpoints.end(), rho);
    if (it == endpoints.end() || *it != rho) throw Error("quadrature: not a panel endpoint");
    return cumulative[static_cast<std::size_t>(it - endpoints.begin())];
  }
  double max_error() const {
    double e = 0.0;
    for (double x : error) e = std::max(e, x);
    return e;
  }
};

/// Integrates the components of project(eval(rho)) over (0, max(required)].
/// The head (0, rho_min] is approximated by rho_min * f(rho_min); its exact
/// control is the caller's business since it depends on the model.
template <class Sample, class Eval, class Project>
QuadratureResult<Sample> integrate_adaptive(Eval&& eval, Project&& project, std::vector<double> required,
                                            const QuadratureOptions& opt = {}) {
  if (required.empty()) throw ConfigError("integrate_adaptive: no nodes requested");
  std::sort(required.begin(), required.end());
  required.erase(std::unique(required.begin(), required.end()), required.end());
  if (!(required.front() > 0)) throw ConfigError("integrate_adaptive: nodes must be positive");
  const double sigma = required.back();
  const double rho_min =
      std::min(required.front(), std::max(opt.rho_min_ratio * required.front(), opt.rho_min_floor * sigma));
  const double min_width = opt.min_width_ratio * sigma;

  std::vector<double> initial{rho_min};
  for (double r = sigma; r > rho_min; r *= 0.5) initial.push_back(r);
  for (int k = 1; k <= opt.uniform_fill; ++k) initial.push_back(sigma * k / opt.uniform_fill);
  for (double r : required)
    if (r > rho_min) initial.push_back(r);
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());

  std::map<double, Sample> cache;
  std::map<double, std::vector<double>> values;
  auto evaluate = [&](std::vector<double> pts) {
    std::vector<double> todo;
    for (double p : pts)
      if (!cache.count(p)) todo.push_back(p);
    std::sort(todo.begin(), todo.end());
    todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
    std::vector<Sample> out(todo.size());
    parallel_for(todo.size(), [&](std::size_t i) { out[i] = eval(todo[i]); });
    for (std::size_t i = 0; i < todo.size(); ++i) {
      values[todo[i]] = project(out[i]);
      cache.emplace(todo[i], std::move(out[i]));
    }
  };

  struct Panel {
    double a, b;
  };
  std::vector<Panel> active;
  std::vector<double> first;
  for (std::size_t i = 0; i + 1 < initial.size(); ++i) {
    active.push_back({initial[i], initial[i + 1]});
    first.push_back(initial[i]);
    first.push_back(0.5 * (initial[i] + initial[i + 1]));
  }
  first.push_back(initial.back());
  evaluate(first);
  const std::size_t m = values.begin()->second.size();

  struct Done {
    double a, b;
    std::vector<double> integral;
  };
  std::vector<Done> done;
  std::vector<double> error(m, 0.0);

  auto simpson = [&](double a, double b, std::size_t k) {
    return (b - a) / 6.0 * (values[a][k] + 4.0 * values[0.5 * (a + b)][k] + values[b][k]);
  };

  for (int level = 0; !active.empty(); ++level) {
    std::vector<double> quarter;
    for (const auto& p : active) {
      const double c = 0.5 * (p.a + p.b);
      quarter.push_back(0.5 * (p.a + c));
      quarter.push_back(0.5 * (c + p.b));
    }
    evaluate(quarter);
    std::vector<Panel> next;
    for (const auto& p : active) {
      const double c = 0.5 * (p.a + p.b);
      std::vector<double> s2(m), diff(m);
      double worst = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double s1 = simpson(p.a, p.b, k);
        s2[k] = simpson(p.a, c, k) + simpson(c, p.b, k);
        diff[k] = s2[k] - s1;
        worst = std::max(worst, std::abs(diff[k]));
      }
      const double local = 15.0 * opt.tol * (p.b - p.a) / sigma;
      const bool finite = std::isfinite(worst);
      if ((finite && worst <= local) || p.b - p.a <= min_width || level >= opt.max_levels) {
        if (!finite) throw SolverError("integrate_adaptive: non-finite integrand");
        for (std::size_t k = 0; k < m; ++k) {
          s2[k] += diff[k] / 15.0;
          error[k] += std::abs(diff[k]) / 15.0;
        }
        done.push_back({p.a, p.b, s2});
      } else {
        next.push_back({p.a, c});
        next.push_back({c, p.b});
      }
    }
    active = std::move(next);
  }

  std::sort(done.begin(), done.end(), [](const Done& x, const Done& y) { return x.a < y.a; });
  QuadratureResult<Sample> res;
  res.rho_min = rho_min;
  std::vector<double> acc(m);
  for (std::size_t k = 0; k < m; ++k) acc[k] = rho_min * values[rho_min][k];
  res.endpoints.push_back(rho_min);
  res.cumulative.push_back(acc);
  for (const auto& d : done) {
    for (std::size_t k = 0; k < m; ++k) acc[k] += d.integral[k];
    res.endpoints.push_back(d.b);
    res.cumulative.push_back(acc);
  }
  res.error = error;
  for (auto& [rho, s] : cache) {
    res.nodes.push_back(rho);
    res.samples.push_back(std::move(s));
  }
  return res;
}

enum class GapClass { identity, strict_estimate, violation, inconclusive };

inline std::string to_string(GapClass c) {
  switch (c) {
    case GapClass::identity: return "identity";
    case GapClass::strict_estimate: return "strict-estimate";
    case GapClass::violation: return "violation";
    case GapClass::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// identity when |gap| <= tol; inconclusive when the error bar covers the gap;
/// otherwise the sign decides.
inline GapClass classify_gap(double gap, double tol, double error_bar) {
  if (std::abs(gap) <= tol) return GapClass::identity;
  if (std::abs(gap) <= error_bar) return GapClass::inconclusive;
  return gap > 0 ? GapClass::strict_estimate : GapClass::violation;
}

}  // namespace maxslope
