#pragma once

// The Minimizing Movement Scheme over a horizon, its cell-wise variational
// interpolant and the discrete energy-dissipation balance.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "maxslope/banach_gs.hpp"
#include "maxslope/metric_gs.hpp"
#include "maxslope/trace.hpp"

namespace maxslope {

// Uniform access to the two kinds of systems.

inline StepResult single_step(const BanachSystem& sys, const Vec& u0, double sigma) {
  return banach_step(sys, u0, sigma);
}
inline StepResult single_step(const MetricSystem& sys, const Vec& u0, double sigma) {
  return metric_step(sys, u0, sigma);
}
inline double increment(const BanachSystem&, const Vec& a, const Vec& b) { return (b - a).norm(); }
inline double increment(const MetricSystem& sys, const Vec& a, const Vec& b) { return sys.metric(a, b); }
inline InterpolantTrace variational_trace(const BanachSystem& sys, const Vec& u0, const std::vector<double>& s) {
  return banach_trace(sys, u0, s);
}
inline InterpolantTrace variational_trace(const MetricSystem& sys, const Vec& u0, const std::vector<double>& s) {
  return metric_trace(sys, u0, s).trace;
}

struct MMSTrajectory {
  double tau = 0.0;
  double horizon = 0.0;
  /// u_tau^k, k = 0..K.
  std::vector<Vec> nodes;
  /// steps[k - 1] produced nodes[k].
  std::vector<StepResult> steps;
  /// Incremental speeds D(u^{k-1}, u^k) / tau.
  std::vector<double> speeds;

  std::size_t cells() const { return steps.size(); }
};

/// Sequential single steps of size tau up to the first multiple of tau >= T.
/// A failing step is reported together with the nodes computed so far.
template <class System>
MMSTrajectory run_mms(const System& sys, const Vec& u0, double tau, double horizon) {
  if (!(tau > 0)) throw ConfigError("run_mms: tau must be positive");
  if (!(horizon >= tau)) throw ConfigError("run_mms: horizon must be at least tau");
  const auto K = static_cast<std::size_t>(std::ceil(horizon / tau - 1e-9));
  MMSTrajectory t;
  t.tau = tau;
  t.horizon = horizon;
  t.nodes.push_back(u0);
  for (std::size_t k = 1; k <= K; ++k) {
    try {
      t.steps.push_back(single_step(sys, t.nodes.back(), tau));
    } catch (const Error& e) {
      std::ostringstream os;
      os << "run_mms: step " << k << " failed after " << t.nodes.size() << " nodes: " << e.what();
      throw SolverError(os.str());
    }
    t.nodes.push_back(t.steps.back().selected());
    t.speeds.push_back(increment(sys, t.nodes[k - 1], t.nodes[k]) / tau);
  }
  return t;
}

/// sigma samples in (0, tau]: half geometric tau 2^-j towards 0, half uniform.
inline std::vector<double> cell_samples(double tau, int count = 32) {
  if (count < 2) throw ConfigError("cell_samples: need at least two samples per cell");
  std::vector<double> s;
  const int geometric = count / 2;
  for (int j = 1; j <= geometric; ++j) s.push_back(std::ldexp(tau, -j));
  const int uniform = count - geometric;
  for (int k = 1; k <= uniform; ++k) s.push_back(tau * k / uniform);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

struct MMSTrace {
  /// One interpolant per cell, sigma measured from the cell's left node.
  std::vector<InterpolantTrace> cells;
};

template <class System>
MMSTrace interpolant_trace(const System& sys, const MMSTrajectory& traj, int samples_per_cell = 32) {
  MMSTrace out;
  const std::vector<double> sig = cell_samples(traj.tau, samples_per_cell);
  for (std::size_t k = 0; k < traj.cells(); ++k) {
    InterpolantTrace t = variational_trace(sys, traj.nodes[k], sig);
    const Vec& end = t.samples.back().u;
    if ((end - traj.nodes[k + 1]).norm() > sys.solve.cluster_radius) {
      std::ostringstream os;
      os << "interpolant_trace: cell " << k + 1 << " ends at " << end.transpose() << " but the node is "
         << traj.nodes[k + 1].transpose();
      throw SolverError(os.str());
    }
    out.cells.push_back(std::move(t));
  }
  return out;
}

struct EDBReport {
  double tau = 0.0;
  std::vector<GapEntry> cell_gaps;
  /// E(u0) - E(u_K) - sum over cells of (dissipation + integral).
  double total = 0.0;
  /// Sum of the per-cell error bars.
  double error = 0.0;
};

template <class System>
EDBReport edb_report(const System& sys, const MMSTrajectory& traj, const MMSTrace& trace) {
  if (trace.cells.size() != traj.cells()) throw ConfigError("edb_report: trace does not cover every cell");
  EDBReport r;
  r.tau = traj.tau;
  double spent = 0.0;
  for (const auto& cell : trace.cells) {
    const GapReport g = gaps_from_trace(cell, sys.tol.gap);
    r.cell_gaps.push_back(g.entries.back());
    const TraceSample& last = cell.samples.back();
    spent += last.dissipation + last.integral;
    r.error += cell.error_bar;
  }
  r.total = sys.energy(traj.nodes.front()) - sys.energy(traj.nodes.back()) - spent;
  return r;
}

struct RefinementTable {
  std::vector<EDBReport> levels;

  /// |total| does not grow from one level to the next beyond both error bars.
  bool non_increasing() const {
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
      if (std::abs(levels[i + 1].total) > std::abs(levels[i].total) + levels[i].error + levels[i + 1].error)
        return false;
    return true;
  }
};

template <class System>
RefinementTable edb_refinement(const System& sys, const Vec& u0, double tau0, double horizon, int levels = 4,
                               int samples_per_cell = 32) {
  RefinementTable t;
  for (int l = 0; l < levels; ++l) {
    const double tau = std::ldexp(tau0, -l);
    const MMSTrajectory traj = run_mms(sys, u0, tau, horizon);
    t.levels.push_back(edb_report(sys, traj, interpolant_trace(sys, traj, samples_per_cell)));
  }
  return t;
}

}  // namespace maxslope
