#include <gtest/gtest.h>

#include "maxslope/maxslope.hpp"
#include "oracles.hpp"

using namespace maxslope;

namespace {

MetricSystem builtin(const std::string& name) { return *load_scenario(name).metric; }

MetricSystem euclidean_quadratic() {
  MetricSystem m;
  m.metric = MetricModel::euclidean(1);
  m.energy = quadratic_energy(1);
  m.psi = quadratic_density();
  return m;
}

// sigma psi(D/sigma) + E for the truncated-distance example, written out directly
double truncated_objective(double u0, double sigma, double u) {
  const double d = std::min(std::abs(u - u0), 1.0);
  return d * d / (2.0 * sigma) + 0.5 * u * u;
}

}  // namespace

TEST(MetricStep, TruncatedDistanceExample) {
  const MetricSystem m = builtin("ex2_12");
  const StepResult s = metric_step(m, scalar_vec(2.0), 0.25);
  EXPECT_NEAR(s.selected()[0], 1.6, 1e-6);
  EXPECT_NEAR(s.value, 1.6, 1e-9);
  EXPECT_NEAR(metric_step(m, scalar_vec(2.0), 2.0).selected()[0], 0.0, 1e-6);
}

TEST(MetricStep, PositivePartExample) {
  const MetricSystem m = builtin("ex2_13");
  for (double s : {0.25, 0.5, 0.9, 1.5, 3.0})
    EXPECT_NEAR(metric_step(m, scalar_vec(1.0), s).selected()[0], std::max(1.0 - s, 0.0), 1e-6) << s;
}

TEST(MetricStep, AgreesWithGridArgminOnTheTruncatedModel) {
  const MetricSystem m = builtin("ex2_12");
  for (double s : {0.1, 0.2, 0.3, 0.4, 0.6, 1.0, 2.5}) {
    const auto ref = oracle::argmin_1d([&](double u) { return truncated_objective(2.0, s, u); }, -6, 6);
    const StepResult r = metric_step(m, scalar_vec(2.0), s);
    EXPECT_NEAR(r.value, ref.value, 1e-9) << s;
    EXPECT_NEAR(r.selected()[0], ref.x, 1e-6) << s;
  }
}

TEST(MetricStep, CrossoverMatchesBruteForceBranchComparison) {
  // the two candidate branches: u0/(1+s) while inside the truncation radius, and 0 once saturated
  const auto branch_gap = [](double s) {
    const double inner = truncated_objective(2.0, s, 2.0 / (1.0 + s));
    const double saturated = truncated_objective(2.0, s, 0.0);
    return inner - saturated;
  };
  const std::vector<double> roots = oracle::crossings(branch_gap, 0.05, 2.0);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0], 1.0 / 3.0, 1e-9);
  const std::vector<double> found = metric_jumps(builtin("ex2_12"), scalar_vec(2.0), 0.05, 2.0);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_NEAR(found[0], roots[0], 1e-6);
}

TEST(MetricStep, MarginalFunctionIsMonotoneAndTendsToTheEnergy) {
  for (const char* name : {"ex2_12", "ex2_13"}) {
    const Scenario sc = load_scenario(name);
    const MetricSystem& m = *sc.metric;
    const double e0 = m.energy(sc.u0);
    double prev = e0;
    for (double s : sc.sigma_grid()) {
      const StepResult r = metric_step(m, sc.u0, s);
      EXPECT_LE(r.value, prev + 1e-9) << name << " " << s;
      EXPECT_LE(r.d_minus, r.d_plus) << name;
      prev = r.value;
    }
    EXPECT_LE(std::abs(metric_step(m, sc.u0, 1e-4).value - e0), 1e-3) << name;
  }
}

TEST(MetricSlope, Examples) {
  EXPECT_NEAR(metric_slope(builtin("ex2_13"), scalar_vec(0.3)), 1.0, 1e-12);
  EXPECT_NEAR(metric_slope(builtin("ex2_13"), scalar_vec(0.0)), 0.0, 1e-12);
  EXPECT_NEAR(metric_slope(builtin("ex2_12"), scalar_vec(2.0)), 2.0, 1e-6);
}

TEST(MetricSlope, SphereEstimatorAgreesWithAnalyticSlope) {
  const MetricSystem m = builtin("ex2_12");
  for (double u : {-1.5, -0.2, 0.4, 1.1}) {
    const double est = sphere_slope([&](const Vec& x) { return m.energy(x); }, m.metric, scalar_vec(u), nullptr);
    EXPECT_NEAR(est, std::abs(u), 1e-4) << u;
  }
}

TEST(DistanceSlope, Examples) {
  EXPECT_NEAR(distance_slope(builtin("ex2_13"), scalar_vec(0.0), scalar_vec(1.0)), 1.0, 1e-3);
  EXPECT_NEAR(distance_slope(builtin("ex2_12"), scalar_vec(2.0), scalar_vec(0.0)), 0.0, 1e-12);
  MetricSystem m;
  m.metric = MetricModel::euclidean(2);
  m.energy = quadratic_energy(2);
  m.psi = quadratic_density();
  EXPECT_NEAR(distance_slope(m, Vec::Zero(2), Vec::Ones(2)), 1.0, 1e-3);
}

TEST(DistanceSlope, VanishesWhereTheTruncatedDistanceSaturates) {
  const MetricSystem m = builtin("ex2_12");
  for (double u : {-2.0, 0.5, 0.9, 3.5, 4.0}) EXPECT_EQ(distance_slope(m, scalar_vec(2.0), scalar_vec(u)), 0.0) << u;
}

TEST(SlopeEstimateGap, Examples) {
  EXPECT_NEAR(slope_estimate_gap(builtin("ex2_13"), scalar_vec(1.0), 0.5, scalar_vec(0.5)), 0.0, 1e-9);
  EXPECT_NEAR(slope_estimate_gap(builtin("ex2_13"), scalar_vec(1.0), 2.0, scalar_vec(0.0)), 0.5, 1e-9);
  EXPECT_NEAR(slope_estimate_gap(builtin("ex2_12"), scalar_vec(2.0), 2.0, scalar_vec(0.0)), 0.5, 1e-9);
}

TEST(SlopeEstimateGap, NonNegativeAtCertifiedMinimizers) {
  for (const char* name : {"ex2_12", "ex2_13"}) {
    const Scenario sc = load_scenario(name);
    for (double s : sc.sigma_grid()) {
      const StepResult r = metric_step(*sc.metric, sc.u0, s);
      for (const Vec& u : r.minimizers) EXPECT_GE(slope_estimate_gap(*sc.metric, sc.u0, s, u), -1e-6) << name << s;
    }
  }
}

TEST(EnergyIdentity, ResidualVanishesOnExamples) {
  EXPECT_LE(std::abs(energy_identity_residual(builtin("ex2_12"), scalar_vec(2.0), 0.25).plus), 1e-4);
  EXPECT_LE(std::abs(energy_identity_residual(builtin("ex2_13"), scalar_vec(1.0), 0.5).minus), 1e-4);
  EXPECT_LE(std::abs(energy_identity_residual(builtin("ex2_12"), scalar_vec(2.0), 2.0).minus), 1e-4);
}

TEST(DeGiorgiMetricGap, PositivePartAgainstClosedForm) {
  const MetricSystem m = builtin("ex2_13");
  const GapReport g = de_giorgi_metric_gap(m, scalar_vec(1.0), std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0});
  for (const GapEntry& e : g.entries) {
    const double expected = e.sigma <= 1.0 ? 0.0 : 0.5 - 0.5 / e.sigma;
    EXPECT_NEAR(e.gap, expected, 1e-4) << e.sigma;
    EXPECT_EQ(e.classification, e.sigma <= 1.0 ? GapClass::identity : GapClass::strict_estimate);
  }
}

TEST(DeGiorgiMetricGap, TruncatedModelIsStrictBeyondTheCrossover) {
  const GapEntry e = de_giorgi_metric_gap(builtin("ex2_12"), scalar_vec(2.0), 2.0);
  EXPECT_NEAR(e.gap, 1.25, 1e-4);
  EXPECT_EQ(e.classification, GapClass::strict_estimate);
}

TEST(DeGiorgiMetricGap, IdentityOnGeodesicSpaceWithContinuousSlope) {
  const MetricSystem m = euclidean_quadratic();
  std::vector<double> sig;
  for (int k = 1; k <= 16; ++k) sig.push_back(0.25 * k);
  for (const GapEntry& e : de_giorgi_metric_gap(m, scalar_vec(1.5), sig).entries) {
    EXPECT_NEAR(e.gap, 0.0, 1e-4) << e.sigma;
    EXPECT_EQ(e.classification, GapClass::identity);
  }
}

TEST(DeGiorgiMetricGap, NeverBelowTheErrorBarOnBuiltins) {
  for (const char* name : {"ex2_12", "ex2_13"}) {
    const Scenario sc = load_scenario(name);
    const InterpolantTrace t = metric_trace(*sc.metric, sc.u0, sc.sigma_grid()).trace;
    for (const GapEntry& e : gaps_from_trace(t, sc.metric->tol.gap).entries)
      EXPECT_GE(e.gap, -e.error) << name << " " << e.sigma;
  }
}

TEST(UniformSlopeProbe, ReportsTheWorstViolation) {
  const MetricSystem m = builtin("ex2_13");
  const SlopeModulus zero = [](const Vec&, const Vec&) { return 0.0; };
  EXPECT_NEAR(uniform_slope_probe(m, zero, {{scalar_vec(0.5), scalar_vec(-1.0)}}), -1.0, 1e-12);
}

TEST(MetricModel, TruncatedDistance) {
  const MetricModel d = MetricModel::truncated(1, 1.0);
  EXPECT_DOUBLE_EQ(d(scalar_vec(0.0), scalar_vec(0.4)), 0.4);
  EXPECT_DOUBLE_EQ(d(scalar_vec(0.0), scalar_vec(3.0)), 1.0);
  EXPECT_FALSE(d.geodesic());
  EXPECT_TRUE(MetricModel::euclidean(2).geodesic());
}
