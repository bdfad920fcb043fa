#include <gtest/gtest.h>

#include <random>

#include "maxslope/maxslope.hpp"
#include "oracles.hpp"

using namespace maxslope;

namespace {

const DissipationPotential kKinked = scalar_potential(piecewise_quadratic_density(1.0, 4.0, 1.0));

std::vector<DissipationPotential> potentials() {
  return {quadratic_potential(1), kKinked, power_potential(1, 3.0), power_potential(2, 4.0),
          sum_potential({quadratic_potential(2), power_potential(2, 3.0)})};
}

}  // namespace

TEST(Prox, Examples) {
  EXPECT_NEAR(prox(quadratic_potential(1), 1.0, scalar_vec(3.0))[0], 1.5, 1e-9);
  EXPECT_NEAR(prox(kKinked, 0.5, scalar_vec(2.0))[0], 1.0, 1e-9);
  EXPECT_EQ(prox(kKinked, 0.5, scalar_vec(0.0))[0], 0.0);
}

TEST(Prox, MatchesGridArgmin) {
  const auto kinked = [](double r) { return std::abs(r) <= 1 ? 0.5 * r * r : 2.0 * r * r - 1.5; };
  for (double eta : {0.1, 0.5, 2.0})
    for (double v : {-3.0, -1.2, 0.4, 1.3, 5.0}) {
      const auto ref = oracle::argmin_1d([&](double w) { return kinked(w) + (w - v) * (w - v) / (2 * eta); }, -10, 10);
      EXPECT_NEAR(prox(kKinked, eta, scalar_vec(v))[0], ref.x, 1e-7) << eta << " " << v;
    }
}

TEST(Prox, RejectsNonPositiveEta) { EXPECT_THROW(prox(kKinked, 0.0, scalar_vec(1.0)), Error); }

TEST(YosidaValueGradient, Examples) {
  EXPECT_NEAR(yosida_value_gradient(quadratic_potential(1), 1.0, scalar_vec(3.0)).value, 2.25, 1e-9);
  EXPECT_NEAR(yosida_value_gradient(kKinked, 0.5, scalar_vec(2.0)).gradient[0], 2.0, 1e-8);
}

TEST(YosidaValueGradient, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> N;
  const auto Rs = potentials();
  for (int k = 0; k < 100; ++k) {
    const DissipationPotential& R = Rs[static_cast<std::size_t>(k) % Rs.size()];
    const double eta = std::ldexp(1.0, -(k % 5));
    const Vec v = Vec::NullaryExpr(R.dim(), [&] { return 2.0 * N(rng); });
    const ValueGradient vg = yosida_value_gradient(R, eta, v);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double fd = oracle::derivative(
          [&](double x) {
            Vec y = v;
            y[i] = x;
            return yosida_value_gradient(R, eta, y).value;
          },
          v[i], 1e-5);
      EXPECT_NEAR(vg.gradient[i], fd, 1e-5) << R.name() << " eta " << eta;
    }
  }
}

TEST(YosidaConjugate, DualIdentityOnExamples) {
  const ConjugateCheck q = yosida_conjugate_check(quadratic_potential(1), 1.0, scalar_vec(1.0));
  EXPECT_NEAR(q.lhs, 1.0, 1e-6);
  EXPECT_NEAR(q.rhs, 1.0, 1e-12);
  const ConjugateCheck k = yosida_conjugate_check(kKinked, 0.25, scalar_vec(-1.0));
  EXPECT_NEAR(k.lhs, 0.625, 1e-5);
  EXPECT_NEAR(k.rhs, 0.625, 1e-12);
  EXPECT_NEAR(yosida_conjugate_check(kKinked, 0.25, scalar_vec(0.0)).lhs, 0.0, 1e-9);
}

TEST(YosidaConjugate, TwoDimensionalPotential) {
  Vec xi(2);
  xi << 0.7, -1.1;
  const ConjugateCheck c = yosida_conjugate_check(power_potential(2, 3.0), 0.5, xi);
  EXPECT_NEAR(c.lhs, c.rhs, 1e-6);
}

TEST(Yosida, MonotoneFamilyBelowR) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> N;
  for (const auto& R : potentials())
    for (int k = 0; k < 20; ++k) {
      const Vec v = Vec::NullaryExpr(R.dim(), [&] { return 2.0 * N(rng); });
      double prev = -kInf;
      for (double eta : {2.0, 1.0, 0.25, 1.0 / 16}) {
        const double r = yosida(R, eta)(v);
        EXPECT_GE(r, prev - 1e-12) << R.name();
        EXPECT_LE(r, R(v) + 1e-12) << R.name();
        prev = r;
      }
    }
}

TEST(Yosida, ConvergesPointwiseAsEtaVanishes) {
  // 0 <= R - R_eta <= eta |xi|^2 / 2 for any xi in dR(v), so the gap is O(eta)
  std::mt19937_64 rng(47);
  std::normal_distribution<double> N;
  for (const auto& R : potentials())
    for (int k = 0; k < 10; ++k) {
      const Vec v = Vec::NullaryExpr(R.dim(), [&] { return N(rng); });
      const double slope = potential_subdifferential(R, v).min_norm_element().squaredNorm();
      for (int j : {6, 10, 14}) {
        const double eta = std::ldexp(1.0, -j);
        const double gap = R(v) - yosida(R, eta)(v);
        EXPECT_GE(gap, -1e-12) << R.name();
        EXPECT_LE(gap, 0.5 * eta * slope + 1e-10) << R.name() << " eta " << eta;
      }
    }
}

TEST(Yosida, RegularizedPotentialIsRadiallyDifferentiable) {
  const DissipationPotential Re = yosida(kKinked, 0.25);
  for (double v : {-2.0, -1.0, -0.5, 0.5, 1.0, 1.25, 2.0}) EXPECT_TRUE(is_radially_differentiable(Re, scalar_vec(v)));
}

TEST(EquiCoercivity, BoundHoldsAcrossTheSchedule) {
  for (const auto& R : potentials()) {
    for (double S : {0.0, 0.5, 3.0}) {
      const double C = equi_coercivity_bound(R, S);
      for (double eta : {1.0, 0.25, 1.0 / 64}) {
        // largest |v| along the probe directions with R_eta(v) <= S
        const DissipationPotential Re = yosida(R, eta);
        for (const Vec& d : probe_directions(R.dim(), 8)) {
          double lo = 0.0, hi = 1.0;
          while (Re(Vec(hi * d)) <= S) hi *= 2.0;
          for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (lo + hi);
            (Re(Vec(m * d)) <= S ? lo : hi) = m;
          }
          EXPECT_LE(lo, C + 1e-9) << R.name() << " S " << S << " eta " << eta;
        }
      }
    }
  }
  EXPECT_DOUBLE_EQ(equi_coercivity_bound(quadratic_potential(1), 0.0), superlinearity_constant(quadratic_potential(1)));
  EXPECT_THROW(equi_coercivity_bound(quadratic_potential(1), -1.0), ConfigError);
}
