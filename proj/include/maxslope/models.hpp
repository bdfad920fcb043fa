#pragma once

// Dissipation potentials R and energies E on R^n, with subdifferential
// descriptors and conjugates.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "maxslope/scalar_convex.hpp"
#include "maxslope/solver.hpp"
#include "maxslope/subdifferential.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

enum class PotentialTag {
  quadratic,
  p_power,
  sum,
  separable_integral,
  piecewise_scalar,
  metric_like,
  yosida_wrapped
};

inline std::string to_string(PotentialTag t) {
  switch (t) {
    case PotentialTag::quadratic: return "quadratic";
    case PotentialTag::p_power: return "p_power";
    case PotentialTag::sum: return "sum";
    case PotentialTag::separable_integral: return "separable_integral";
    case PotentialTag::piecewise_scalar: return "piecewise_scalar";
    case PotentialTag::metric_like: return "metric_like";
    case PotentialTag::yosida_wrapped: return "yosida_wrapped";
  }
  return "unknown";
}

namespace detail {

/// argmin_w (w - v)^2 / (2t) + f(w) for a scalar density with f(0) = 0 = min f.
/// The optimality condition 0 in (w - v)/t + df(w) is monotone in w, so
/// bisection on it terminates exactly on kinks.
inline double scalar_prox(const ScalarConvex& f, double t, double v) {
  if (v == 0.0) return 0.0;
  auto residual = [&](double w) {
    const OneSided d = one_sided_derivatives(f, w);
    return Interval{(w - v) / t + d.left, (w - v) / t + d.right};
  };
  double a = std::min(0.0, v), b = std::max(0.0, v);
  for (int it = 0; it < 300; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const Interval r = residual(m);
    if (r.contains(0.0)) return m;
    (r.hi < 0.0 ? a : b) = m;
  }
  if (residual(a).contains(0.0)) return a;
  if (residual(b).contains(0.0)) return b;
  const double fa = (a - v) * (a - v) / (2 * t) + f(a);
  const double fb = (b - v) * (b - v) / (2 * t) + f(b);
  return fa <= fb ? a : b;
}

}  // namespace detail

class PotentialImpl {
 public:
  virtual ~PotentialImpl() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vec& v) const = 0;
  virtual SubdifferentialSet subdifferential(const Vec& v) const = 0;
  /// Structure-exploiting conjugate; nullopt means "use the numerical route".
  virtual std::optional<double> conjugate(const Vec&) const { return std::nullopt; }
  /// Prox map argmin_w |w - v|^2/(2 eta) + R(w); nullopt means "solve numerically".
  virtual std::optional<Vec> prox(double, const Vec&) const { return std::nullopt; }
  virtual PotentialTag tag() const = 0;
  virtual ConjugateShape shape() const = 0;
  virtual std::string name() const = 0;
};

/// Value-semantic handle on an immutable potential.
class DissipationPotential {
 public:
  DissipationPotential() = default;
  explicit DissipationPotential(std::shared_ptr<const PotentialImpl> impl) : impl_(std::move(impl)) {}

  Eigen::Index dim() const { return impl_->dim(); }
  double operator()(const Vec& v) const { return impl_->value(v); }
  double value(const Vec& v) const { return impl_->value(v); }
  SubdifferentialSet subdifferential(const Vec& v) const { return impl_->subdifferential(v); }
  std::optional<double> closed_conjugate(const Vec& xi) const { return impl_->conjugate(xi); }
  std::optional<Vec> closed_prox(double eta, const Vec& v) const { return impl_->prox(eta, v); }
  PotentialTag tag() const { return impl_->tag(); }
  ConjugateShape shape() const { return impl_->shape(); }
  std::string name() const { return impl_->name(); }
  const PotentialImpl& impl() const { return *impl_; }
  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  std::shared_ptr<const PotentialImpl> impl_;
};

/// R(v) = sum_i w_i f_i(v_i).
class SeparablePotential final : public PotentialImpl {
 public:
  SeparablePotential(std::vector<ScalarConvex> densities, Vec weights, PotentialTag tag)
      : f_(std::move(densities)), w_(std::move(weights)), tag_(tag) {
    if (f_.empty() || static_cast<Eigen::Index>(f_.size()) != w_.size())
      throw ConfigError("SeparablePotential: one weight per density required");
    if ((w_.array() <= 0).any()) throw ConfigError("SeparablePotential: weights must be positive");
  }

  Eigen::Index dim() const override { return w_.size(); }
  double value(const Vec& v) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) s += w_[i] * f_[i](v[i]);
    return s;
  }
  SubdifferentialSet subdifferential(const Vec& v) const override {
    std::vector<Interval> parts(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const OneSided d = one_sided_derivatives(f_[i], v[i]);
      parts[i] = {w_[i] * d.left, w_[i] * d.right};
    }
    return SubdifferentialSet::box(parts);
  }
  std::optional<double> conjugate(const Vec& xi) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) s += w_[i] * conjugate_1d(f_[i], xi[i] / w_[i]);
    return s;
  }
  std::optional<Vec> prox(double eta, const Vec& v) const override {
    Vec out(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) out[i] = detail::scalar_prox(f_[i], eta * w_[i], v[i]);
    return out;
  }
  PotentialTag tag() const override { return tag_; }
  ConjugateShape shape() const override { return ConjugateShape::separable; }
  std::string name() const override { return "separable(" + f_.front().name + ")"; }

  const std::vector<ScalarConvex>& densities() const { return f_; }
  const Vec& weights() const { return w_; }

 private:
  std::vector<ScalarConvex> f_;
  Vec w_;
  PotentialTag tag_;
};

/// R(v) = psi(|v|) for an even convex psi.
class RadialPotential final : public PotentialImpl {
 public:
  RadialPotential(Eigen::Index n, ScalarConvex psi, PotentialTag tag)
      : n_(n), psi_(std::move(psi)), tag_(tag) {
    if (n_ < 1) throw ConfigError("RadialPotential: dimension must be positive");
  }

  Eigen::Index dim() const override { return n_; }
  double value(const Vec& v) const override { return psi_(v.norm()); }
  SubdifferentialSet subdifferential(const Vec& v) const override {
    const double r = v.norm();
    const OneSided d = one_sided_derivatives(psi_, r);
    if (r > 0.0) {
      const Vec dir = v / r;
      if (d.left == d.right) return SubdifferentialSet::singleton(d.right * dir);
      if (n_ == 1) return SubdifferentialSet::box(scalar_vec(std::min(d.left * dir[0], d.right * dir[0])),
                                                  scalar_vec(std::max(d.left * dir[0], d.right * dir[0])));
      return SubdifferentialSet::sampled({d.left * dir, d.right * dir});
    }
    // the subdifferential at 0 is the ball of radius psi'_+(0)
    const double c = d.right;
    if (c == 0.0) return SubdifferentialSet::singleton(Vec::Zero(n_));
    if (n_ == 1) return SubdifferentialSet::box(scalar_vec(-c), scalar_vec(c));
    std::vector<Vec> pts;
    std::mt19937_64 rng(0xba11);
    std::normal_distribution<double> g;
    for (Eigen::Index i = 0; i < n_; ++i) {
      Vec e = Vec::Zero(n_);
      e[i] = c;
      pts.push_back(e);
      pts.push_back(-e);
    }
    for (int k = 0; k < 64; ++k) {
      Vec e(n_);
      for (Eigen::Index i = 0; i < n_; ++i) e[i] = g(rng);
      pts.push_back(c * e / e.norm());
    }
    return SubdifferentialSet::sampled(std::move(pts));
  }
  std::optional<double> conjugate(const Vec& xi) const override {
    return conjugate_1d(psi_, xi.norm());
  }
  std::optional<Vec> prox(double eta, const Vec& v) const override {
    const double r = v.norm();
    if (r == 0.0) return Vec::Zero(n_);
    return Vec(detail::scalar_prox(psi_, eta, r) / r * v);
  }
  PotentialTag tag() const override { return tag_; }
  ConjugateShape shape() const override { return ConjugateShape::radial; }
  std::string name() const override { return "radial(" + psi_.name + ")"; }

  const ScalarConvex& profile() const { return psi_; }

 private:
  Eigen::Index n_;
  ScalarConvex psi_;
  PotentialTag tag_;
};

/// R = R_1 + ... + R_m.
class SumPotential final : public PotentialImpl {
 public:
  explicit SumPotential(std::vector<DissipationPotential> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw ConfigError("SumPotential: no summands");
    for (const auto& p : parts_)
      if (p.dim() != parts_.front().dim()) throw ConfigError("SumPotential: dimension mismatch");
  }

  Eigen::Index dim() const override { return parts_.front().dim(); }
  double value(const Vec& v) const override {
    double s = 0.0;
    for (const auto& p : parts_) s += p(v);
    return s;
  }
  SubdifferentialSet subdifferential(const Vec& v) const override {
    SubdifferentialSet s = parts_.front().subdifferential(v);
    for (std::size_t i = 1; i < parts_.size(); ++i) s = s + parts_[i].subdifferential(v);
    return s;
  }
  PotentialTag tag() const override { return PotentialTag::sum; }
  ConjugateShape shape() const override {
    for (const auto& p : parts_)
      if (p.shape() != ConjugateShape::separable) return ConjugateShape::general;
    return ConjugateShape::separable;
  }
  std::string name() const override {
    std::string s = "sum(";
    for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "," : "") + parts_[i].name();
    return s + ")";
  }
  const std::vector<DissipationPotential>& parts() const { return parts_; }

 private:
  std::vector<DissipationPotential> parts_;
};

// Potential factories

inline DissipationPotential quadratic_potential(Eigen::Index n = 1, double c = 1.0) {
  return DissipationPotential(std::make_shared<SeparablePotential>(
      std::vector<ScalarConvex>(n, quadratic_density(c)), Vec::Ones(n), PotentialTag::quadratic));
}

/// c |v|^p / p with the Euclidean norm.
inline DissipationPotential power_potential(Eigen::Index n, double p, double c = 1.0) {
  return DissipationPotential(
      std::make_shared<RadialPotential>(n, power_density(p, c), PotentialTag::p_power));
}

/// sum_i w_i f(v_i), e.g. a quadrature of an integral functional.
inline DissipationPotential separable_potential(const ScalarConvex& f, const Vec& weights,
                                                PotentialTag tag = PotentialTag::separable_integral) {
  return DissipationPotential(std::make_shared<SeparablePotential>(
      std::vector<ScalarConvex>(weights.size(), f), weights, tag));
}

/// One scalar density per coordinate (n = 1 gives a piecewise scalar potential).
inline DissipationPotential scalar_potential(const ScalarConvex& f) {
  return DissipationPotential(std::make_shared<SeparablePotential>(
      std::vector<ScalarConvex>{f}, Vec::Ones(1), PotentialTag::piecewise_scalar));
}

/// psi(|v|) for a metric dissipation profile psi.
inline DissipationPotential metric_like_potential(Eigen::Index n, const ScalarConvex& psi) {
  return DissipationPotential(std::make_shared<RadialPotential>(n, psi, PotentialTag::metric_like));
}

inline DissipationPotential sum_potential(std::vector<DissipationPotential> parts) {
  return DissipationPotential(std::make_shared<SumPotential>(std::move(parts)));
}

// Energies

class EnergyImpl {
 public:
  virtual ~EnergyImpl() = default;
  virtual Eigen::Index dim() const = 0;
  /// +inf outside the effective domain.
  virtual double value(const Vec& u) const = 0;
  /// Frechet subdifferential; throws DomainError where it is empty.
  virtual SubdifferentialSet subdifferential(const Vec& u) const = 0;
  virtual double lower_bound() const = 0;
  virtual std::optional<double> lambda_convexity() const { return std::nullopt; }
  virtual std::optional<double> metric_slope(const Vec&) const { return std::nullopt; }
  /// Legendre conjugate for convex energies (used by Fenchel certificates).
  virtual std::optional<double> conjugate(const Vec&) const { return std::nullopt; }
  virtual bool convex() const {
    const auto l = lambda_convexity();
    return l && *l >= 0.0;
  }
  virtual std::string name() const = 0;
};

class EnergyFunctional {
 public:
  EnergyFunctional() = default;
  explicit EnergyFunctional(std::shared_ptr<const EnergyImpl> impl) : impl_(std::move(impl)) {}

  Eigen::Index dim() const { return impl_->dim(); }
  double operator()(const Vec& u) const { return impl_->value(u); }
  double value(const Vec& u) const { return impl_->value(u); }
  SubdifferentialSet subdifferential(const Vec& u) const { return impl_->subdifferential(u); }
  double lower_bound() const { return impl_->lower_bound(); }
  std::optional<double> lambda_convexity() const { return impl_->lambda_convexity(); }
  std::optional<double> analytic_slope(const Vec& u) const { return impl_->metric_slope(u); }
  std::optional<double> conjugate(const Vec& xi) const { return impl_->conjugate(xi); }
  bool convex() const { return impl_->convex(); }
  std::string name() const { return impl_->name(); }
  const EnergyImpl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const EnergyImpl> impl_;
};

/// 1/2 (u - c)^T A (u - c) + offset with A symmetric positive definite.
class QuadraticEnergy final : public EnergyImpl {
 public:
  QuadraticEnergy(Mat A, Vec center, double offset = 0.0)
      : A_(std::move(A)), c_(std::move(center)), offset_(offset) {
    if (A_.rows() != A_.cols() || A_.rows() != c_.size())
      throw ConfigError("QuadraticEnergy: shape mismatch");
    Eigen::SelfAdjointEigenSolver<Mat> es(A_);
    lambda_ = es.eigenvalues().minCoeff();
    if (!(lambda_ > 0)) throw ConfigError("QuadraticEnergy: matrix must be positive definite");
    ldlt_ = A_.ldlt();
  }
  Eigen::Index dim() const override { return c_.size(); }
  double value(const Vec& u) const override {
    const Vec d = u - c_;
    return 0.5 * d.dot(A_ * d) + offset_;
  }
  SubdifferentialSet subdifferential(const Vec& u) const override {
    return SubdifferentialSet::singleton(A_ * (u - c_));
  }
  double lower_bound() const override { return offset_; }
  std::optional<double> lambda_convexity() const override { return lambda_; }
  std::optional<double> metric_slope(const Vec& u) const override { return (A_ * (u - c_)).norm(); }
  std::optional<double> conjugate(const Vec& xi) const override {
    return 0.5 * xi.dot(ldlt_.solve(xi)) + xi.dot(c_) - offset_;
  }
  std::string name() const override { return "quadratic"; }

 private:
  Mat A_;
  Vec c_;
  double offset_;
  double lambda_ = 0.0;
  Eigen::LDLT<Mat> ldlt_;
};

/// Quadratic plus sum_k a_k sin(w_k . u + b_k). The perturbation has
/// Hessian norm at most sum |a_k| |w_k|^2, which bounds the loss of convexity.
class PerturbedQuadraticEnergy final : public EnergyImpl {
 public:
  struct Mode {
    double amplitude;
    Vec wave;
    double phase;
  };

  PerturbedQuadraticEnergy(Mat A, Vec center, std::vector<Mode> modes)
      : base_(A, center), A_(std::move(A)), c_(std::move(center)), modes_(std::move(modes)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A_);
    double loss = 0.0;
    for (const auto& m : modes_) loss += std::abs(m.amplitude) * m.wave.squaredNorm();
    lambda_ = es.eigenvalues().minCoeff() - loss;
  }
  Eigen::Index dim() const override { return c_.size(); }
  double value(const Vec& u) const override {
    double s = base_.value(u);
    for (const auto& m : modes_) s += m.amplitude * std::sin(m.wave.dot(u) + m.phase);
    return s;
  }
  Vec gradient(const Vec& u) const {
    Vec g = A_ * (u - c_);
    for (const auto& m : modes_) g += m.amplitude * std::cos(m.wave.dot(u) + m.phase) * m.wave;
    return g;
  }
  SubdifferentialSet subdifferential(const Vec& u) const override {
    return SubdifferentialSet::singleton(gradient(u));
  }
  double lower_bound() const override {
    double s = 0.0;
    for (const auto& m : modes_) s -= std::abs(m.amplitude);
    return s;
  }
  std::optional<double> lambda_convexity() const override { return lambda_; }
  std::optional<double> metric_slope(const Vec& u) const override { return gradient(u).norm(); }
  std::string name() const override { return "perturbed_quadratic"; }

 private:
  QuadraticEnergy base_;
  Mat A_;
  Vec c_;
  std::vector<Mode> modes_;
  double lambda_;
};

/// sum_i max(u_i, 0).
class PositivePartEnergy final : public EnergyImpl {
 public:
  explicit PositivePartEnergy(Eigen::Index n) : n_(n) {}
  Eigen::Index dim() const override { return n_; }
  double value(const Vec& u) const override { return u.cwiseMax(0.0).sum(); }
  SubdifferentialSet subdifferential(const Vec& u) const override {
    std::vector<Interval> parts(n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      parts[i] = u[i] > 0 ? Interval::point(1.0) : u[i] < 0 ? Interval::point(0.0) : Interval{0.0, 1.0};
    return SubdifferentialSet::box(parts);
  }
  double lower_bound() const override { return 0.0; }
  std::optional<double> lambda_convexity() const override { return 0.0; }
  std::optional<double> metric_slope(const Vec& u) const override {
    return subdifferential(u).min_norm_element().norm();
  }
  /// Indicator of [0, 1]^n.
  std::optional<double> conjugate(const Vec& xi) const override {
    return ((xi.array() >= 0.0).all() && (xi.array() <= 1.0).all()) ? 0.0 : kInf;
  }
  std::string name() const override { return "positive_part"; }

 private:
  Eigen::Index n_;
};

class ZeroEnergy final : public EnergyImpl {
 public:
  explicit ZeroEnergy(Eigen::Index n) : n_(n) {}
  Eigen::Index dim() const override { return n_; }
  double value(const Vec&) const override { return 0.0; }
  SubdifferentialSet subdifferential(const Vec&) const override {
    return SubdifferentialSet::singleton(Vec::Zero(n_));
  }
  double lower_bound() const override { return 0.0; }
  std::optional<double> lambda_convexity() const override { return 0.0; }
  std::optional<double> metric_slope(const Vec&) const override { return 0.0; }
  std::optional<double> conjugate(const Vec& xi) const override {
    return xi.isZero(0.0) ? 0.0 : kInf;
  }
  std::string name() const override { return "zero"; }

 private:
  Eigen::Index n_;
};

/// 1/2 min(|u|^2, r^2): nonconvex, with an empty Frechet subdifferential on |u| = r.
class ClippedQuadraticEnergy final : public EnergyImpl {
 public:
  ClippedQuadraticEnergy(Eigen::Index n, double r) : n_(n), r_(r) {
    if (!(r > 0)) throw ConfigError("ClippedQuadraticEnergy: radius must be positive");
  }
  Eigen::Index dim() const override { return n_; }
  double value(const Vec& u) const override { return 0.5 * std::min(u.squaredNorm(), r_ * r_); }
  SubdifferentialSet subdifferential(const Vec& u) const override {
    const double s = u.norm();
    if (s < r_) return SubdifferentialSet::singleton(u);
    if (s > r_) return SubdifferentialSet::singleton(Vec::Zero(n_));
    throw DomainError("ClippedQuadraticEnergy: empty subdifferential on the clipping sphere");
  }
  double lower_bound() const override { return 0.0; }
  std::optional<double> metric_slope(const Vec& u) const override {
    const double s = u.norm();
    return s <= r_ ? s : 0.0;
  }
  bool convex() const override { return false; }
  std::string name() const override { return "clipped_quadratic"; }

 private:
  Eigen::Index n_;
  double r_;
};

/// Finite-difference Allen-Cahn energy on (0, 1) with n interior nodes and
/// homogeneous Dirichlet data: sum h (|Du|^2/2 + W(u)), W(r) = (r^2 - 1)^2 / 4.
class AllenCahnEnergy final : public EnergyImpl {
 public:
  explicit AllenCahnEnergy(Eigen::Index n = 64) : n_(n), h_(1.0 / static_cast<double>(n + 1)) {
    if (n < 1) throw ConfigError("AllenCahnEnergy: need at least one node");
  }
  Eigen::Index dim() const override { return n_; }
  double spacing() const { return h_; }
  double value(const Vec& u) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i <= n_; ++i) {
      const double left = i == 0 ? 0.0 : u[i - 1];
      const double right = i == n_ ? 0.0 : u[i];
      const double d = (right - left) / h_;
      s += 0.5 * h_ * d * d;
    }
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double w = u[i] * u[i] - 1.0;
      s += 0.25 * h_ * w * w;
    }
    return s;
  }
  Vec gradient(const Vec& u) const {
    Vec g(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double left = i == 0 ? 0.0 : u[i - 1];
      const double right = i == n_ - 1 ? 0.0 : u[i + 1];
      g[i] = (2.0 * u[i] - left - right) / h_ + h_ * (u[i] * u[i] * u[i] - u[i]);
    }
    return g;
  }
  SubdifferentialSet subdifferential(const Vec& u) const override {
    return SubdifferentialSet::singleton(gradient(u));
  }
  double lower_bound() const override { return 0.0; }
  /// Smallest Laplacian eigenvalue over h minus h (since W'' >= -1).
  std::optional<double> lambda_convexity() const override {
    const double s = std::sin(std::numbers::pi * h_ / 2.0);
    return 4.0 * s * s / h_ - h_;
  }
  std::optional<double> metric_slope(const Vec& u) const override { return gradient(u).norm(); }
  std::string name() const override { return "allen_cahn_1d"; }

 private:
  Eigen::Index n_;
  double h_;
};

inline EnergyFunctional quadratic_energy(Eigen::Index n = 1, double a = 1.0) {
  return EnergyFunctional(
      std::make_shared<QuadraticEnergy>(a * Mat::Identity(n, n), Vec::Zero(n)));
}
inline EnergyFunctional quadratic_energy(const Mat& A, const Vec& center, double offset = 0.0) {
  return EnergyFunctional(std::make_shared<QuadraticEnergy>(A, center, offset));
}
inline EnergyFunctional perturbed_quadratic_energy(const Mat& A, const Vec& center,
                                                   std::vector<PerturbedQuadraticEnergy::Mode> modes) {
  return EnergyFunctional(std::make_shared<PerturbedQuadraticEnergy>(A, center, std::move(modes)));
}
inline EnergyFunctional positive_part_energy(Eigen::Index n = 1) {
  return EnergyFunctional(std::make_shared<PositivePartEnergy>(n));
}
inline EnergyFunctional zero_energy(Eigen::Index n = 1) {
  return EnergyFunctional(std::make_shared<ZeroEnergy>(n));
}
inline EnergyFunctional clipped_quadratic_energy(Eigen::Index n = 1, double r = 1.0) {
  return EnergyFunctional(std::make_shared<ClippedQuadraticEnergy>(n, r));
}
inline EnergyFunctional allen_cahn_energy(Eigen::Index n = 64) {
  return EnergyFunctional(std::make_shared<AllenCahnEnergy>(n));
}

/// The dissipation paired with the Allen-Cahn energy: sum h |v_i|^5 / 5.
inline DissipationPotential allen_cahn_dissipation(Eigen::Index n = 64) {
  const double h = 1.0 / static_cast<double>(n + 1);
  return separable_potential(power_density(5.0), Vec::Constant(n, h));
}

// Operations

inline SubdifferentialSet potential_subdifferential(const DissipationPotential& R, const Vec& v) {
  return R.subdifferential(v);
}

/// R*(xi): closed form when the structure provides one, otherwise a convex
/// maximization of <xi, v> - R(v).
inline double potential_conjugate(const DissipationPotential& R, const Vec& xi,
                                  const SolveConfig& cfg = {}) {
  if (auto c = R.closed_conjugate(xi)) return *c;
  if (R.dim() == 1)
    return numeric_conjugate_1d([&](double r) { return R(scalar_vec(r)); }, xi[0]);
  Objective obj{[&](const Vec& v) { return R(v) - xi.dot(v); },
                [&](const Vec& v) { return Vec(R.subdifferential(v).element() - xi); }};
  const Vec origin = Vec::Zero(R.dim());
  const auto r = global_minimize(obj, Window::around(origin, 4.0 * (1.0 + xi.norm())), cfg,
                                 /*convex=*/true, &origin);
  return -r.value;
}

/// R(v) + R*(xi) - <xi, v>, clamped at zero; <= tol certifies xi in dR(v).
inline double fenchel_gap(const DissipationPotential& R, const Vec& v, const Vec& xi) {
  return std::max(0.0, R(v) + potential_conjugate(R, xi) - xi.dot(v));
}

inline SubdifferentialSet energy_subdifferential(const EnergyFunctional& E, const Vec& u) {
  if (!std::isfinite(E(u))) throw DomainError("energy_subdifferential: point outside dom(E)");
  return E.subdifferential(u);
}

/// Certificate that xi lies in dE(u): the Fenchel gap for convex energies
/// with a known conjugate, the distance to the descriptor otherwise. An
/// indicator conjugate is infinite a rounding error away from its domain,
/// so that case also falls back to the distance.
inline double energy_membership_gap(const EnergyFunctional& E, const Vec& u, const Vec& xi) {
  if (auto c = E.conjugate(xi); c && std::isfinite(*c)) return std::max(0.0, E(u) + *c - xi.dot(u));
  return E.subdifferential(u).distance(xi);
}

/// Unit test directions: coordinate axes, their negatives, and seeded random directions.
inline std::vector<Vec> probe_directions(Eigen::Index n, int random_count = 64) {
  std::vector<Vec> dirs;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  if (n > 1) {
    std::mt19937_64 rng(0xd1ec);
    std::normal_distribution<double> g;
    for (int k = 0; k < random_count; ++k) {
      Vec d(n);
      for (Eigen::Index i = 0; i < n; ++i) d[i] = g(rng);
      dirs.push_back(d / d.norm());
    }
  }
  return dirs;
}

/// C-bar = sup_v (|v| - R(v)) = max over unit covectors of R*, the constant
/// in |v| <= C-bar + R(v).
inline double superlinearity_constant(const DissipationPotential& R) {
  double c = 0.0;
  for (const auto& d : probe_directions(R.dim())) c = std::max(c, potential_conjugate(R, d));
  return c;
}

struct SuperlinearityProbe {
  bool primal = false;
  bool dual = false;
};

/// Checks that R(t v)/t and R*(t xi)/t grow along t = 2^k for sampled
/// directions (both limits of the growth hypothesis).
inline SuperlinearityProbe superlinearity_probe(const DissipationPotential& R) {
  SuperlinearityProbe out{true, true};
  for (const auto& d : probe_directions(R.dim(), 8)) {
    double prev_p = -kInf, prev_d = -kInf;
    for (int k = 0; k <= 8; ++k) {
      const double t = std::ldexp(1.0, k);
      const double qp = R(t * d) / t;
      const double qd = potential_conjugate(R, Vec(t * d)) / t;
      if (!(qp > prev_p)) out.primal = false;
      if (!(qd > prev_d)) out.dual = false;
      prev_p = qp;
      prev_d = qd;
    }
  }
  return out;
}

}  // namespace maxslope
