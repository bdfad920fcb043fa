#include <gtest/gtest.h>

#include <random>

#include "maxslope/maxslope.hpp"
#include "oracles.hpp"

using namespace maxslope;

namespace {

const ScalarConvex kKinked = piecewise_quadratic_density(1.0, 4.0, 1.0);

double kinked_closed_form(double r) {
  const double a = std::abs(r);
  return a <= 1.0 ? 0.5 * r * r : 2.0 * r * r - 1.5;
}

}  // namespace

TEST(OneSidedDerivatives, SmoothQuadratic) {
  const OneSided d = one_sided_derivatives(quadratic_density(), 1.0);
  EXPECT_DOUBLE_EQ(d.left, 1.0);
  EXPECT_DOUBLE_EQ(d.right, 1.0);
}

TEST(OneSidedDerivatives, KinkOfPiecewiseQuadratic) {
  const OneSided d = one_sided_derivatives(value_only(kKinked), 1.0);
  EXPECT_NEAR(d.left, 1.0, 1e-6);
  EXPECT_NEAR(d.right, 4.0, 1e-6);
}

TEST(OneSidedDerivatives, CubicAtOrigin) {
  const OneSided d = one_sided_derivatives(value_only(power_density(3.0)), 0.0);
  EXPECT_NEAR(d.left, 0.0, 1e-6);
  EXPECT_NEAR(d.right, 0.0, 1e-6);
}

TEST(OneSidedDerivatives, LeftNeverExceedsRight) {
  for (double x : {-2.0, -1.0, -0.3, 0.0, 0.7, 1.0, 3.0}) {
    const OneSided d = one_sided_derivatives(value_only(kKinked), x);
    EXPECT_LE(d.left, d.right + 1e-9) << x;
  }
}

TEST(OneSidedDerivatives, NonFiniteNeighbourhoodIsADomainError) {
  const ScalarConvex barrier{[](double r) { return r < 0 ? kInf : r * r; }, {}, {}, "barrier"};
  EXPECT_THROW(one_sided_derivatives(barrier, 0.0), DomainError);
}

TEST(Conjugate1d, ClosedForms) {
  EXPECT_NEAR(conjugate_1d(quadratic_density(), 1.0), 0.5, 1e-12);
  EXPECT_NEAR(conjugate_1d(quadratic_density(), 0.0), 0.0, 1e-15);
}

TEST(Conjugate1d, KinkedDensityAgainstDenseGrid) {
  const double expected = oracle::conjugate(kinked_closed_form, 2.0, -10.0, 10.0);
  EXPECT_NEAR(expected, 1.5, 1e-8);
  EXPECT_NEAR(conjugate_1d(value_only(kKinked), 2.0), expected, 1e-7);
  EXPECT_NEAR(conjugate_1d(kKinked, 2.0), expected, 1e-9);
}

TEST(Conjugate1d, NumericMatchesClosedFormOnPowers) {
  for (double p : {2.0, 3.0, 4.0, 5.0})
    for (double s : {-3.0, -0.5, 0.0, 0.25, 2.0}) {
      const ScalarConvex f = power_density(p);
      EXPECT_NEAR(conjugate_1d(value_only(f), s), conjugate_1d(f, s), 1e-7) << p << " " << s;
    }
}

TEST(Conjugate1d, NonSuperlinearInputIsRejected) {
  const ScalarConvex linear{[](double r) { return std::abs(r); }, {}, {}, "abs"};
  EXPECT_THROW(conjugate_1d(linear, 2.0), Error);
}

TEST(FenchelYoung, HoldsWithEqualityExactlyOnTheSubdifferential) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 400; ++k) {
    const double r = U(rng), s = 2.0 * U(rng);
    const double gap = kKinked(r) + kKinked.conjugate(s) - s * r;
    EXPECT_GE(gap, -1e-9);
    const OneSided d = one_sided_derivatives(kKinked, r);
    if (s >= d.left - 1e-12 && s <= d.right + 1e-12) EXPECT_LE(gap, 1e-7);
    else EXPECT_GT(gap, 1e-7);
  }
  for (double r : {-1.0, 1.0})
    for (double s : {1.0, 2.5, 4.0})
      EXPECT_NEAR(kKinked(r) + kKinked.conjugate(r * s) - r * s * r, 0.0, 1e-12);
}

TEST(RadialProfile, QuadraticPotential) {
  const RadialProfile p = radial_profile(quadratic_potential(1), scalar_vec(1.0), 1.0);
  // R*(1) from the grid oracle
  const double rstar = oracle::conjugate([](double r) { return 0.5 * r * r; }, 1.0);
  EXPECT_NEAR(p.g, 0.5, 1e-15);
  EXPECT_NEAR(p.g_left, -rstar, 1e-9);
  EXPECT_NEAR(p.g_right, -rstar, 1e-9);
}

TEST(RadialProfile, KinkedPotentialAtTheKink) {
  const RadialProfile p = radial_profile(scalar_potential(kKinked), scalar_vec(-2.0), 2.0);
  const auto g = [](double t) { return t * kinked_closed_form(-2.0 / t); };
  EXPECT_NEAR(p.g, 1.0, 1e-12);
  EXPECT_NEAR(p.g_left, oracle::left_derivative(g, 2.0), 1e-5);
  EXPECT_NEAR(p.g_right, oracle::right_derivative(g, 2.0), 1e-5);
  EXPECT_NEAR(p.g_left, -3.5, 1e-9);
  EXPECT_NEAR(p.g_right, -0.5, 1e-9);
}

TEST(RadialProfile, MonotoneAndConvexInT) {
  const std::vector<DissipationPotential> Rs{quadratic_potential(2), power_potential(2, 3.0),
                                             separable_potential(kKinked, Vec::Ones(2))};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (const auto& R : Rs)
    for (int k = 0; k < 20; ++k) {
      const Vec v = Vec::NullaryExpr(2, [&] { return 2.0 * N(rng); });
      double g_prev = kInf, right_prev = -kInf;
      for (double t = 0.25; t <= 8.0; t *= 1.3) {
        const RadialProfile p = radial_profile(R, v, t);
        EXPECT_LE(p.g, g_prev + 1e-9);
        EXPECT_LE(p.g_left, p.g_right + 1e-12);
        EXPECT_LE(p.g_right, 1e-12);
        EXPECT_GE(p.g_left, right_prev - 1e-9);
        const double scale = std::max(1.0, std::abs(p.g_right));
        EXPECT_NEAR(p.g_left, p.fd_left, 1e-6 * scale);
        EXPECT_NEAR(p.g_right, p.fd_right, 1e-6 * scale);
        g_prev = p.g;
        right_prev = p.g_right;
      }
    }
}

TEST(RadialProfile, RejectsNonPositiveT) {
  EXPECT_THROW(radial_profile(quadratic_potential(1), scalar_vec(1.0), 0.0), DomainError);
}

TEST(RadialDifferentiability, Examples) {
  Vec v(2);
  v << 0.3, -1.2;
  EXPECT_TRUE(is_radially_differentiable(power_potential(2, 3.0), v));
  const DissipationPotential R = scalar_potential(kKinked);
  EXPECT_FALSE(is_radially_differentiable(R, scalar_vec(1.0)));
  EXPECT_FALSE(is_radially_differentiable(R, scalar_vec(-1.0)));
  EXPECT_TRUE(is_radially_differentiable(R, scalar_vec(0.5)));
  EXPECT_THROW(is_radially_differentiable(R, scalar_vec(0.0)), DomainError);
}

TEST(RadialDifferentiability, AgreesWithConjugateSpreadOnBuiltins) {
  for (const auto& name : builtin_names()) {
    const Scenario sc = load_scenario(name);
    if (!sc.banach || sc.dim() > 3) continue;
    const DissipationPotential& R = sc.banach->dissipation;
    for (double a : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
      const Vec v = Vec::Constant(sc.dim(), a);
      const Interval range = conjugate_range_on_subdifferential(R, v);
      EXPECT_EQ(is_radially_differentiable(R, v), range.hi - range.lo <= 1e-6) << name << " " << a;
    }
  }
}

TEST(DirectionalDerivatives, DifferenceQuotientsMatchSupportFunction) {
  const std::vector<DissipationPotential> Rs{quadratic_potential(1), scalar_potential(kKinked),
                                             power_potential(1, 4.0)};
  for (const auto& R : Rs)
    for (double v : {-1.5, -1.0, 0.4, 1.0})
      for (double lambda : {0.5, 1.0, 2.0}) {
        const auto f = [&](double l) { return R(scalar_vec(l * v)); };
        const OneSided d = directional_derivatives(R, scalar_vec(v), lambda);
        EXPECT_NEAR(d.right, oracle::right_derivative(f, lambda, 1e-8), 1e-6) << R.name() << v << lambda;
        EXPECT_NEAR(d.left, oracle::left_derivative(f, lambda, 1e-8), 1e-6) << R.name() << v << lambda;
      }
}

TEST(PMapping, Examples) {
  EXPECT_NEAR(p_mapping(power_potential(1, 3.0), scalar_vec(3.0)), 27.0, 1e-9);
  EXPECT_EQ(p_mapping(quadratic_potential(1), scalar_vec(0.0)), 0.0);
  // v^2/2 + v^4/4 at v = 1: <xi, v> with xi = v + v^3
  EXPECT_NEAR(p_mapping(sum_potential({quadratic_potential(1), power_potential(1, 4.0)}), scalar_vec(1.0)), 2.0,
              1e-9);
  EXPECT_THROW(p_mapping(scalar_potential(kKinked), scalar_vec(1.0)), ModelError);
}

TEST(PMapping, AdditiveOverSums) {
  const DissipationPotential a = power_potential(2, 3.0), b = quadratic_potential(2, 2.0);
  const DissipationPotential s = sum_potential({a, b});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int k = 0; k < 20; ++k) {
    const Vec v = Vec::NullaryExpr(2, [&] { return N(rng); });
    EXPECT_NEAR(p_mapping(s, v), p_mapping(a, v) + p_mapping(b, v), 1e-9);
  }
}
