#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxslope {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Project-wide tolerance defaults. Scenarios may override each field.
struct Tolerances {
  double value = 1e-9;
  double argument = 1e-7;
  double derivative = 1e-6;
  double gap = 1e-4;
  double certificate = 1e-8;
};

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario, bad parameters, unknown structure tag.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the effective domain of a functional.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Optimizer or quadrature failed to reach the requested accuracy.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A model-level invariant was violated (inconsistent model, non-superlinear input...).
class ModelError : public Error {
 public:
  using Error::Error;
};

inline Vec scalar_vec(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

inline bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace maxslope
