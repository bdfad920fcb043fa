#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "maxslope/interval.hpp"
#include "maxslope/types.hpp"

namespace maxslope {

/// Descriptor of a closed convex set of covectors: a single point, an
/// axis-aligned box, or the convex hull of finitely many sampled points.
class SubdifferentialSet {
 public:
  enum class Kind { singleton, box, sampled };

  static SubdifferentialSet singleton(Vec xi) {
    SubdifferentialSet s;
    s.kind_ = Kind::singleton;
    s.lo_ = xi;
    s.hi_ = std::move(xi);
    return s;
  }

  static SubdifferentialSet box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw Error("SubdifferentialSet::box: size mismatch");
    if ((lo.array() > hi.array()).any()) throw Error("SubdifferentialSet::box: empty box");
    if (lo == hi) return singleton(std::move(lo));
    SubdifferentialSet s;
    s.kind_ = Kind::box;
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
  }

  static SubdifferentialSet box(const std::vector<Interval>& parts) {
    Vec lo(parts.size()), hi(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      lo[i] = parts[i].lo;
      hi[i] = parts[i].hi;
    }
    return box(std::move(lo), std::move(hi));
  }

  static SubdifferentialSet sampled(std::vector<Vec> points) {
    if (points.empty()) throw Error("SubdifferentialSet::sampled: no points");
    SubdifferentialSet s;
    s.kind_ = Kind::sampled;
    s.lo_ = points.front();
    s.hi_ = points.front();
    for (const auto& p : points) {
      s.lo_ = s.lo_.cwiseMin(p);
      s.hi_ = s.hi_.cwiseMax(p);
    }
    s.points_ = std::move(points);
    if (s.lo_.size() == 1) return box(s.lo_, s.hi_);  // hull of reals is an interval
    return s;
  }

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return lo_.size(); }
  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }
  const std::vector<Vec>& points() const { return points_; }
  bool is_singleton() const { return kind_ == Kind::singleton; }

  Interval coordinate(Eigen::Index i) const { return {lo_[i], hi_[i]}; }

  /// Support function h(d) = max <eta, d> over the set.
  double support(const Vec& d) const {
    if (kind_ == Kind::sampled) {
      double best = -kInf;
      for (const auto& p : points_) best = std::max(best, p.dot(d));
      return best;
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) s += std::max(lo_[i] * d[i], hi_[i] * d[i]);
    return s;
  }

  double min_linear(const Vec& d) const { return -support(-d); }

  /// Projection of the origin (box/singleton exact; nearest sample otherwise).
  Vec min_norm_element() const {
    if (kind_ == Kind::sampled) {
      const Vec* best = &points_.front();
      for (const auto& p : points_)
        if (p.norm() < best->norm()) best = &p;
      return *best;
    }
    return Vec::Zero(dim()).cwiseMax(lo_).cwiseMin(hi_);
  }

  /// A canonical element, used as a descent direction.
  Vec element() const {
    if (kind_ == Kind::sampled) return min_norm_element();
    return Vec::Zero(dim()).cwiseMax(lo_).cwiseMin(hi_);
  }

  /// Euclidean distance to the set (exact for box/singleton; for sampled
  /// sets the distance to the hull is bounded by the nearest sample).
  double distance(const Vec& xi) const {
    if (kind_ == Kind::sampled) {
      if (contains(xi, 0.0)) return 0.0;
      double best = kInf;
      for (const auto& p : points_) best = std::min(best, (p - xi).norm());
      return best;
    }
    return (xi - xi.cwiseMax(lo_).cwiseMin(hi_)).norm();
  }

  bool contains(const Vec& xi, double tol) const {
    if (kind_ != Kind::sampled)
      return (xi.array() >= lo_.array() - tol).all() &&
             (xi.array() <= hi_.array() + tol).all();
    for (const auto& d : test_directions())
      if (xi.dot(d) > support(d) + tol) return false;
    return true;
  }

  SubdifferentialSet scaled(double s) const {
    if (kind_ == Kind::sampled) {
      std::vector<Vec> pts;
      for (const auto& p : points_) pts.push_back(s * p);
      return sampled(std::move(pts));
    }
    if (s >= 0) return box_or_point(s * lo_, s * hi_);
    return box_or_point(s * hi_, s * lo_);
  }

  SubdifferentialSet negated() const { return scaled(-1.0); }

  /// Minkowski sum.
  SubdifferentialSet operator+(const SubdifferentialSet& o) const {
    if (kind_ != Kind::sampled && o.kind_ != Kind::sampled)
      return box_or_point(lo_ + o.lo_, hi_ + o.hi_);
    const auto a = vertices();
    const auto b = o.vertices();
    std::vector<Vec> pts;
    pts.reserve(a.size() * b.size());
    for (const auto& p : a)
      for (const auto& q : b) pts.push_back(p + q);
    return sampled(std::move(pts));
  }

  /// Bounding box of the union (outer approximation of the hull).
  SubdifferentialSet box_hull(const SubdifferentialSet& o) const {
    return box_or_point(lo_.cwiseMin(o.lo_), hi_.cwiseMax(o.hi_));
  }

  /// Extreme points (box vertices are enumerated, so boxes must be small).
  std::vector<Vec> vertices() const {
    if (kind_ == Kind::sampled) return points_;
    if (kind_ == Kind::singleton) return {lo_};
    const auto n = dim();
    if (n > 12) throw Error("SubdifferentialSet::vertices: box dimension too large");
    std::vector<Vec> out;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      Vec v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = (mask >> i) & 1u ? hi_[i] : lo_[i];
      out.push_back(v);
    }
    return out;
  }

 private:
  static SubdifferentialSet box_or_point(Vec lo, Vec hi) {
    if (lo == hi) return singleton(std::move(lo));
    return box(std::move(lo), std::move(hi));
  }

  std::vector<Vec> test_directions() const {
    std::vector<Vec> dirs;
    const auto n = dim();
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e[i] = 1.0;
      dirs.push_back(e);
      dirs.push_back(-e);
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g;
    for (int k = 0; k < 64; ++k) {
      Vec d(n);
      for (Eigen::Index i = 0; i < n; ++i) d[i] = g(rng);
      dirs.push_back(d / d.norm());
    }
    return dirs;
  }

  Kind kind_ = Kind::singleton;
  Vec lo_;
  Vec hi_;
  std::vector<Vec> points_;
};

/// Exact intersection of two box/singleton descriptors; empty -> nullopt.
inline std::optional<SubdifferentialSet> intersect_boxes(const SubdifferentialSet& a,
                                                         const SubdifferentialSet& b) {
  const Vec lo = a.lower().cwiseMax(b.lower());
  const Vec hi = a.upper().cwiseMin(b.upper());
  if ((lo.array() > hi.array()).any()) return std::nullopt;
  return SubdifferentialSet::box(lo, hi);
}

}  // namespace maxslope
