#include <gtest/gtest.h>

#include "maxslope/maxslope.hpp"
#include "oracles.hpp"

using namespace maxslope;

namespace {

double double_well(double x) { return (x * x - 1.0) * (x * x - 1.0); }

Objective scalar_objective(double (*f)(double)) {
  return {[f](const Vec& x) { return f(x[0]); }, {}};
}

double half_square(const Vec& xi) { return 0.5 * xi.squaredNorm(); }

}  // namespace

TEST(GlobalMinimize, Parabola) {
  const MinimizeResult r = global_minimize(scalar_objective([](double x) { return (x - 0.3) * (x - 0.3) + 2.0; }),
                                           Window::around(scalar_vec(0.0), 4.0), SolveConfig{});
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  ASSERT_EQ(r.minimizers.size(), 1u);
  EXPECT_NEAR(r.minimizers[0][0], 0.3, 1e-7);
}

TEST(GlobalMinimize, DoubleWellReportsBothMinimizersInOrder) {
  const MinimizeResult r = global_minimize(scalar_objective(double_well), Window::around(scalar_vec(0.0), 3.0),
                                           SolveConfig{});
  ASSERT_EQ(r.minimizers.size(), 2u);
  EXPECT_NEAR(r.minimizers[0][0], -1.0, 1e-6);
  EXPECT_NEAR(r.minimizers[1][0], 1.0, 1e-6);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(GlobalMinimize, AgreesWithDenseGridOnKinkedObjectives) {
  const auto f = [](double x) { return std::abs(x - 0.7) + 0.1 * x * x + (x > 2 ? x - 2 : 0.0); };
  const auto ref = oracle::argmin_1d(f, -5, 5);
  const MinimizeResult r = global_minimize({[&](const Vec& x) { return f(x[0]); }, {}},
                                           Window::around(scalar_vec(0.0), 5.0), SolveConfig{});
  EXPECT_NEAR(r.value, ref.value, 1e-9);
  EXPECT_NEAR(r.minimizers.front()[0], ref.x, 1e-6);
}

TEST(GlobalMinimize, TwoDimensionalRosenbrockValley) {
  const Objective obj{[](const Vec& x) {
                        return (1 - x[0]) * (1 - x[0]) + 10.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
                      },
                      {}};
  const MinimizeResult r = global_minimize(obj, Window::around(Vec::Zero(2), 3.0), SolveConfig{});
  ASSERT_FALSE(r.minimizers.empty());
  EXPECT_NEAR(r.minimizers[0][0], 1.0, 1e-4);
  EXPECT_NEAR(r.minimizers[0][1], 1.0, 1e-4);
}

TEST(GlobalMinimize, WindowGrowsUntilTheMinimizerIsInterior) {
  const MinimizeResult r = global_minimize(scalar_objective([](double x) { return (x - 9.0) * (x - 9.0); }),
                                           Window::around(scalar_vec(0.0), 4.0), SolveConfig{});
  EXPECT_NEAR(r.minimizers.front()[0], 9.0, 1e-6);
}

TEST(GlobalMinimize, NonCoerciveObjectiveIsAnError) {
  EXPECT_THROW(global_minimize(scalar_objective([](double x) { return -x; }), Window::around(scalar_vec(0.0), 1.0),
                               SolveConfig{}),
               SolverError);
}

TEST(GlobalMinimize, IsDeterministic) {
  const Objective obj{[](const Vec& x) { return double_well(x[0]) + std::cos(3 * x[1]) + 0.1 * x[1] * x[1]; }, {}};
  const MinimizeResult a = global_minimize(obj, Window::around(Vec::Zero(2), 3.0), SolveConfig{});
  const MinimizeResult b = global_minimize(obj, Window::around(Vec::Zero(2), 3.0), SolveConfig{});
  EXPECT_EQ(a.value, b.value);
  ASSERT_EQ(a.minimizers.size(), b.minimizers.size());
  for (std::size_t i = 0; i < a.minimizers.size(); ++i) EXPECT_EQ(a.minimizers[i], b.minimizers[i]);
}

TEST(GlobalMinimize, OracleModeAcceptsAgreeingResults) {
  SolveConfig cfg;
  cfg.oracle = true;
  const MinimizeResult r =
      global_minimize(scalar_objective(double_well), Window::around(scalar_vec(0.0), 3.0), cfg);
  EXPECT_EQ(r.minimizers.size(), 2u);
}

TEST(GridOracle, FindsTheDoubleWellMinimizers) {
  const MinimizeResult r = grid_oracle([](const Vec& x) { return double_well(x[0]); },
                                       Window::around(scalar_vec(0.1), 3.0), 1e-3);
  ASSERT_EQ(r.minimizers.size(), 2u);
  EXPECT_NEAR(r.minimizers[0][0], -1.0, 1e-5);
  EXPECT_NEAR(r.minimizers[1][0], 1.0, 1e-5);
}

TEST(GridOracle, RejectsBadArguments) {
  const auto f = [](const Vec& x) { return x.squaredNorm(); };
  EXPECT_THROW(grid_oracle(f, Window::around(Vec::Zero(4), 1.0), 0.5), ConfigError);
  EXPECT_THROW(grid_oracle(f, Window::around(Vec::Zero(1), 1.0), 0.0), ConfigError);
  EXPECT_THROW(grid_oracle(f, Window::around(Vec::Zero(3), 1.0), 1e-4), ConfigError);
}

TEST(ConstrainedDualMinimize, SingletonBoxAndEmptyIntersection) {
  const auto one = [](double lo, double hi) { return SubdifferentialSet::box(scalar_vec(lo), scalar_vec(hi)); };
  const DualMinimum s = constrained_dual_minimize(half_square, {SubdifferentialSet::singleton(scalar_vec(0.5))},
                                                  ConjugateShape::separable);
  ASSERT_TRUE(s.feasible);
  EXPECT_DOUBLE_EQ(s.value, 0.125);
  const DualMinimum b = constrained_dual_minimize(half_square, {one(-1.0, 2.0), one(0.0, 1.0)},
                                                  ConjugateShape::separable);
  ASSERT_TRUE(b.feasible);
  EXPECT_DOUBLE_EQ(b.value, 0.0);
  const DualMinimum shifted = constrained_dual_minimize(half_square, {one(0.5, 2.0)}, ConjugateShape::radial);
  EXPECT_DOUBLE_EQ(shifted.xi[0], 0.5);
  EXPECT_FALSE(constrained_dual_minimize(half_square, {one(0.0, 1.0), one(2.0, 3.0)}, ConjugateShape::separable)
                   .feasible);
  EXPECT_THROW(constrained_dual_minimize(half_square, {}, ConjugateShape::separable), Error);
}

TEST(ConstrainedDualMinimize, GeneralShapeMatchesGridOnABox) {
  const auto f = [](const Vec& xi) { return std::pow(std::abs(xi[0] - 0.3), 1.5) + xi[1] * xi[1]; };
  const DualMinimum d = constrained_dual_minimize(
      f, {SubdifferentialSet::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0))}, ConjugateShape::general);
  ASSERT_TRUE(d.feasible);
  EXPECT_NEAR(d.value, 0.0, 1e-6);
  EXPECT_NEAR(d.xi[0], 0.3, 1e-3);
}

TEST(ConstrainedDualMinimize, SampledDescriptorsOnlyReturnCertifiedCandidates) {
  // hull is the segment x + y = 1; the origin is not in it
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  const DualMinimum d = constrained_dual_minimize(
      half_square, {SubdifferentialSet::sampled({a, b}), SubdifferentialSet::box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0))},
      ConjugateShape::separable);
  ASSERT_TRUE(d.feasible);
  EXPECT_DOUBLE_EQ(d.value, 0.5);
  EXPECT_EQ(d.xi, b);
  EXPECT_GE(d.value, 0.25);
}

TEST(SolveConfig, Validation) {
  SolveConfig c;
  EXPECT_NO_THROW(c.validate());
  c.value_tol = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolveConfig{};
  c.oracle_step = 1e-2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolveConfig{};
  c.starts = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
