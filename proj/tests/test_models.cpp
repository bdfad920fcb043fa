#include <gtest/gtest.h>

#include <random>

#include "maxslope/maxslope.hpp"
#include "oracles.hpp"

using namespace maxslope;

namespace {

const DissipationPotential kKinked = scalar_potential(piecewise_quadratic_density(1.0, 4.0, 1.0));

std::vector<DissipationPotential> builtin_potentials() {
  std::vector<DissipationPotential> out;
  for (const auto& name : builtin_names()) {
    const Scenario sc = load_scenario(name);
    if (sc.banach) out.push_back(sc.banach->dissipation);
  }
  out.push_back(power_potential(2, 3.0));
  out.push_back(sum_potential({quadratic_potential(2), power_potential(2, 4.0)}));
  out.push_back(separable_potential(piecewise_quadratic_density(1.0, 4.0, 1.0), Vec::Ones(3)));
  return out;
}

}  // namespace

TEST(PotentialSubdifferential, Examples) {
  const SubdifferentialSet q = potential_subdifferential(quadratic_potential(1), scalar_vec(3.0));
  ASSERT_TRUE(q.is_singleton());
  EXPECT_DOUBLE_EQ(q.element()[0], 3.0);
  const SubdifferentialSet k = potential_subdifferential(kKinked, scalar_vec(-1.0));
  EXPECT_DOUBLE_EQ(k.lower()[0], -4.0);
  EXPECT_DOUBLE_EQ(k.upper()[0], -1.0);
  Vec v(2);
  v << -1.0, 0.5;
  const SubdifferentialSet s =
      potential_subdifferential(separable_potential(piecewise_quadratic_density(1.0, 4.0, 1.0), Vec::Ones(2)), v);
  EXPECT_DOUBLE_EQ(s.lower()[0], -4.0);
  EXPECT_DOUBLE_EQ(s.upper()[0], -1.0);
  EXPECT_DOUBLE_EQ(s.lower()[1], 0.5);
  EXPECT_DOUBLE_EQ(s.upper()[1], 0.5);
}

TEST(PotentialSubdifferential, EveryReturnedElementPassesTheFenchelCertificate) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N;
  for (const auto& R : builtin_potentials()) {
    if (R.dim() > 8) continue;
    for (int k = 0; k < 10; ++k) {
      Vec v = Vec::NullaryExpr(R.dim(), [&] { return 1.5 * N(rng); });
      if (k == 0) v.setConstant(1.0);  // kinks of the piecewise densities
      const SubdifferentialSet s = potential_subdifferential(R, v);
      for (const Vec& xi : s.vertices()) EXPECT_LE(fenchel_gap(R, v, xi), 1e-8) << R.name();
      EXPECT_LE(fenchel_gap(R, v, s.element()), 1e-8) << R.name();
    }
  }
}

TEST(PotentialConjugate, ExamplesAgainstGrid) {
  EXPECT_NEAR(potential_conjugate(quadratic_potential(1), scalar_vec(1.0)), 0.5, 1e-12);
  const auto kinked = [](double r) { return std::abs(r) <= 1 ? 0.5 * r * r : 2.0 * r * r - 1.5; };
  for (double s : {-4.0, -2.5, -1.0, 0.3, 3.0}) {
    EXPECT_NEAR(potential_conjugate(kKinked, scalar_vec(s)), oracle::conjugate(kinked, s), 1e-8) << s;
  }
  EXPECT_NEAR(potential_conjugate(kKinked, scalar_vec(-1.0)), 0.5, 1e-12);
  EXPECT_NEAR(potential_conjugate(kKinked, scalar_vec(-4.0)), 3.5, 1e-12);
}

TEST(PotentialConjugate, ClosedFormMatchesNumericalSupremum) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> N;
  for (const auto& R : builtin_potentials()) {
    if (R.dim() > 3) continue;
    for (int k = 0; k < 5; ++k) {
      const Vec xi = Vec::NullaryExpr(R.dim(), [&] { return N(rng); });
      const Objective obj{[&](const Vec& v) { return R(v) - xi.dot(v); }, {}};
      SolveConfig cfg;
      const double numeric = -global_minimize(obj, Window::around(Vec::Zero(R.dim()), 6.0), cfg).value;
      EXPECT_NEAR(potential_conjugate(R, xi), numeric, 1e-7) << R.name();
    }
  }
}

TEST(FenchelGap, Examples) {
  EXPECT_NEAR(fenchel_gap(quadratic_potential(1), scalar_vec(2.0), scalar_vec(2.0)), 0.0, 1e-12);
  EXPECT_NEAR(fenchel_gap(kKinked, scalar_vec(-1.0), scalar_vec(-2.5)), 0.0, 1e-12);
  EXPECT_NEAR(fenchel_gap(quadratic_potential(1), scalar_vec(1.0), scalar_vec(0.0)), 0.5, 1e-12);
}

TEST(EnergySubdifferential, Examples) {
  EXPECT_DOUBLE_EQ(energy_subdifferential(quadratic_energy(1), scalar_vec(1.0)).element()[0], 1.0);
  const SubdifferentialSet pp = energy_subdifferential(positive_part_energy(1), scalar_vec(0.0));
  EXPECT_DOUBLE_EQ(pp.lower()[0], 0.0);
  EXPECT_DOUBLE_EQ(pp.upper()[0], 1.0);
  EXPECT_DOUBLE_EQ(energy_subdifferential(positive_part_energy(1), scalar_vec(-1.0)).upper()[0], 0.0);
}

TEST(EnergySubdifferential, DiscretizedAllenCahnMatchesFiniteDifferences) {
  const EnergyFunctional E = allen_cahn_energy(64);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.2, 1.2);
  for (int k = 0; k < 10; ++k) {
    const Vec u = Vec::NullaryExpr(64, [&] { return U(rng); });
    const SubdifferentialSet s = energy_subdifferential(E, u);
    ASSERT_TRUE(s.is_singleton());
    for (Eigen::Index i = 0; i < 64; ++i) {
      const double fd = oracle::derivative(
          [&](double x) {
            Vec y = u;
            y[i] = x;
            return E(y);
          },
          u[i], 1e-5);
      EXPECT_NEAR(s.element()[i], fd, 1e-5) << i;
    }
  }
}

TEST(EnergySubdifferential, EmptyFrechetSubdifferentialIsAnError) {
  EXPECT_THROW(energy_subdifferential(clipped_quadratic_energy(1, 1.0), scalar_vec(1.0)), DomainError);
  EXPECT_DOUBLE_EQ(energy_subdifferential(clipped_quadratic_energy(1, 1.0), scalar_vec(0.5)).element()[0], 0.5);
}

TEST(Superlinearity, HoldsForEveryBuiltinPotential) {
  for (const auto& R : builtin_potentials()) {
    if (R.dim() > 8) continue;
    const SuperlinearityProbe p = superlinearity_probe(R);
    EXPECT_TRUE(p.primal) << R.name();
    EXPECT_TRUE(p.dual) << R.name();
  }
}

TEST(Superlinearity, ConstantBoundsNormByPotential) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N;
  for (const auto& R : builtin_potentials()) {
    if (R.dim() > 8) continue;
    const double c = superlinearity_constant(R);
    for (int k = 0; k < 50; ++k) {
      const Vec v = Vec::NullaryExpr(R.dim(), [&] { return 3.0 * N(rng); });
      EXPECT_LE(v.norm(), c + R(v) + 1e-9) << R.name();
    }
  }
}

TEST(Energies, PerturbedQuadraticKeepsConvexityModulus) {
  Mat A = Mat::Identity(2, 2) * 2.0;
  const Vec c = Vec::Zero(2);
  Vec w(2);
  w << 1.0, 0.5;
  const EnergyFunctional E = perturbed_quadratic_energy(A, c, {{0.3, w, 0.1}});
  ASSERT_TRUE(E.lambda_convexity());
  EXPECT_NEAR(*E.lambda_convexity(), 2.0 - 0.3 * 1.25, 1e-12);
  EXPECT_TRUE(E.convex());
}
