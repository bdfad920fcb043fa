#pragma once

// Moreau-Yosida regularization R_eta(v) = min_w R(w) + |w - v|^2 / (2 eta)
// with the Euclidean norm, so the duality map is the identity.

#include <cmath>
#include <memory>
#include <string>

#include "maxslope/models.hpp"
#include "maxslope/solver.hpp"

namespace maxslope {

/// W_eta(v): the unique minimizer of w -> |w - v|^2/(2 eta) + R(w).
inline Vec prox(const DissipationPotential& R, double eta, const Vec& v, const SolveConfig& cfg = {}) {
  if (!(eta > 0)) throw ConfigError("prox: eta must be positive");
  if (v.isZero(0.0)) return v;
  if (auto p = R.closed_prox(eta, v)) return *p;
  Objective obj{[&](const Vec& w) { return R(w) + (w - v).squaredNorm() / (2.0 * eta); },
                [&](const Vec& w) { return Vec(R.subdifferential(w).element() + (w - v) / eta); }};
  const auto r = global_minimize(obj, Window::around(v, 2.0 * (1.0 + v.norm())), cfg, true, &v);
  return r.minimizers.front();
}

class YosidaPotential final : public PotentialImpl {
 public:
  YosidaPotential(DissipationPotential base, double eta) : base_(std::move(base)), eta_(eta) {
    if (!(eta > 0)) throw ConfigError("YosidaPotential: eta must be positive");
  }
  Eigen::Index dim() const override { return base_.dim(); }
  double value(const Vec& v) const override {
    const Vec w = maxslope::prox(base_, eta_, v);
    return base_(w) + (w - v).squaredNorm() / (2.0 * eta_);
  }
  SubdifferentialSet subdifferential(const Vec& v) const override {
    return SubdifferentialSet::singleton((v - maxslope::prox(base_, eta_, v)) / eta_);
  }
  /// R_eta* = R* + (eta/2)|xi|^2.
  std::optional<double> conjugate(const Vec& xi) const override {
    return potential_conjugate(base_, xi) + 0.5 * eta_ * xi.squaredNorm();
  }
  PotentialTag tag() const override { return PotentialTag::yosida_wrapped; }
  ConjugateShape shape() const override { return base_.shape(); }
  std::string name() const override { return "yosida(" + base_.name() + ")"; }

  const DissipationPotential& base() const { return base_; }
  double eta() const { return eta_; }

 private:
  DissipationPotential base_;
  double eta_;
};

inline DissipationPotential yosida(const DissipationPotential& R, double eta) {
  return DissipationPotential(std::make_shared<YosidaPotential>(R, eta));
}

struct ValueGradient {
  double value = 0.0;
  Vec gradient;
};

inline ValueGradient yosida_value_gradient(const DissipationPotential& R, double eta, const Vec& v) {
  const Vec w = prox(R, eta, v);
  return {R(w) + (w - v).squaredNorm() / (2.0 * eta), (v - w) / eta};
}

struct ConjugateCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs: conjugate of R_eta computed numerically from its values alone;
/// rhs: R*(xi) + (eta/2)|xi|^2.
inline ConjugateCheck yosida_conjugate_check(const DissipationPotential& R, double eta, const Vec& xi,
                                             const SolveConfig& cfg = {}) {
  const DissipationPotential Re = yosida(R, eta);
  ConjugateCheck c;
  c.rhs = potential_conjugate(R, xi, cfg) + 0.5 * eta * xi.squaredNorm();
  if (R.dim() == 1) {
    c.lhs = numeric_conjugate_1d([&](double r) { return Re(scalar_vec(r)); }, xi[0]);
  } else {
    Objective obj{[&](const Vec& v) { return Re(v) - xi.dot(v); }, {}};
    const Vec origin = Vec::Zero(R.dim());
    c.lhs = -global_minimize(obj, Window::around(origin, 4.0 * (1.0 + xi.norm())), cfg, true, &origin)
                 .value;
  }
  return c;
}

/// C_S with R_eta(v) <= S  =>  |v| <= C_S for every eta in (0, 1], from
/// |v| <= |W| + |v - W| <= (C-bar + R(W)) + sqrt(2 eta R_eta(v)).
inline double equi_coercivity_bound(const DissipationPotential& R, double S) {
  if (!(S >= 0)) throw ConfigError("equi_coercivity_bound: S must be nonnegative");
  return superlinearity_constant(R) + S + std::sqrt(2.0 * S);
}

}  // namespace maxslope
