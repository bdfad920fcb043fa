#pragma once

// Golden examples and light property suites, run by `maxslope selftest`.
// Every check records the computed value next to the expected one so that
// two runs of the same build can be compared byte for byte.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "maxslope/banach_gs.hpp"
#include "maxslope/metric_gs.hpp"
#include "maxslope/mms_driver.hpp"
#include "maxslope/moreau.hpp"
#include "maxslope/radial.hpp"
#include "maxslope/report.hpp"
#include "maxslope/scenario.hpp"

namespace maxslope {

struct CheckResult {
  std::string module;
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

struct SelftestReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.passed ? 0 : 1;
    return n;
  }
  Json to_json() const {
    Json a = Json::array();
    for (const auto& c : checks)
      a.push_back({{"module", c.module},
                   {"name", c.name},
                   {"value", c.value},
                   {"expected", c.expected},
                   {"tolerance", c.tolerance},
                   {"passed", c.passed},
                   {"note", c.note}});
    return {{"passed", passed()}, {"failures", failures()}, {"checks", a}};
  }
};

namespace detail {

class Checker {
 public:
  explicit Checker(SelftestReport& r) : r_(r) {}
  void module(std::string m) { module_ = std::move(m); }

  void near(const std::string& name, const std::function<double()>& f, double expected, double tol) {
    run(name, [&](CheckResult& c) {
      c.value = f();
      c.expected = expected;
      c.tolerance = tol;
      c.passed = std::abs(c.value - expected) <= tol;
    });
  }
  /// Passes when f() <= bound.
  void at_most(const std::string& name, const std::function<double()>& f, double bound) {
    run(name, [&](CheckResult& c) {
      c.value = f();
      c.expected = bound;
      c.passed = c.value <= bound;
      c.note = "upper bound";
    });
  }
  void at_least(const std::string& name, const std::function<double()>& f, double bound) {
    run(name, [&](CheckResult& c) {
      c.value = f();
      c.expected = bound;
      c.passed = c.value >= bound;
      c.note = "lower bound";
    });
  }
  void holds(const std::string& name, const std::function<bool()>& f) {
    run(name, [&](CheckResult& c) {
      c.passed = f();
      c.value = c.passed ? 1.0 : 0.0;
      c.expected = 1.0;
    });
  }
  template <class E>
  void throws(const std::string& name, const std::function<void()>& f) {
    run(name, [&](CheckResult& c) {
      c.expected = 1.0;
      try {
        f();
      } catch (const E&) {
        c.passed = true;
        c.value = 1.0;
      }
      c.note = "expects an error";
    });
  }

 private:
  template <class F>
  void run(const std::string& name, F&& body) {
    CheckResult c;
    c.module = module_;
    c.name = name;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.passed = false;
      c.note = std::string("error: ") + e.what();
    }
    r_.checks.push_back(std::move(c));
  }
  SelftestReport& r_;
  std::string module_;
};

inline BanachSystem builtin_banach(const std::string& name) { return *load_scenario(name).banach; }
inline MetricSystem builtin_metric(const std::string& name) { return *load_scenario(name).metric; }

}  // namespace detail

inline SelftestReport run_selftest() {
  SelftestReport rep;
  detail::Checker ck(rep);
  const Vec x1 = scalar_vec(1.0);
  const ScalarConvex kinked = piecewise_quadratic_density(1.0, 4.0, 1.0);
  const DissipationPotential R42 = scalar_potential(kinked);
  const DissipationPotential Rq = quadratic_potential(1);
  const auto s = [](double x) { return scalar_vec(x); };

  ck.module("convex_kernel");
  ck.near("one_sided quadratic left", [] { return one_sided_derivatives(quadratic_density(), 1.0).left; }, 1, 1e-12);
  ck.near("one_sided kinked left", [&] { return one_sided_derivatives(value_only(kinked), 1.0).left; }, 1, 1e-6);
  ck.near("one_sided kinked right", [&] { return one_sided_derivatives(value_only(kinked), 1.0).right; }, 4, 1e-6);
  ck.near("one_sided cubic at 0", [] { return one_sided_derivatives(value_only(power_density(3)), 0.0).right; }, 0,
          1e-6);
  ck.near("conjugate quadratic s=1", [] { return conjugate_1d(value_only(quadratic_density()), 1.0); }, 0.5, 1e-9);
  ck.near("conjugate kinked s=2", [&] { return conjugate_1d(value_only(kinked), 2.0); }, 1.5, 1e-9);
  ck.near("conjugate quadratic s=0", [] { return conjugate_1d(value_only(quadratic_density()), 0.0); }, 0, 1e-12);
  ck.near("radial profile quadratic g", [&] { return radial_profile(Rq, x1, 1.0).g; }, 0.5, 1e-12);
  ck.near("radial profile quadratic g_right", [&] { return radial_profile(Rq, x1, 1.0).g_right; }, -0.5, 1e-12);
  ck.near("radial profile kinked g", [&] { return radial_profile(R42, s(-2), 2.0).g; }, 1.0, 1e-12);
  ck.near("radial profile kinked g_left", [&] { return radial_profile(R42, s(-2), 2.0).g_left; }, -3.5, 1e-9);
  ck.near("radial profile kinked g_right", [&] { return radial_profile(R42, s(-2), 2.0).g_right; }, -0.5, 1e-9);
  ck.near("radial profile at v=0", [&] { return radial_profile(R42, s(0), 1.0).g_left; }, 0, 0);
  ck.holds("p-power radially differentiable", [] {
    Vec v(2);
    v << 0.3, -1.2;
    return is_radially_differentiable(power_potential(2, 3.0), v);
  });
  ck.holds("kinked not radially differentiable at 1", [&] { return !is_radially_differentiable(R42, x1); });
  ck.holds("kinked radially differentiable at 0.5", [&] { return is_radially_differentiable(R42, s(0.5)); });
  ck.near("P of cubic at 3", [] { return p_mapping(power_potential(1, 3.0), scalar_vec(3.0)); }, 27, 1e-9);
  ck.near("P of quadratic at 0", [&] { return p_mapping(Rq, s(0)); }, 0, 0);
  ck.near("P of quadratic plus quartic at 1",
          [&] { return p_mapping(sum_potential({Rq, power_potential(1, 4.0)}), x1); }, 2, 1e-9);

  ck.module("models");
  ck.near("dR quadratic at 3", [&] { return potential_subdifferential(Rq, s(3)).element()[0]; }, 3, 1e-12);
  ck.near("dR kinked at -1 lower", [&] { return potential_subdifferential(R42, s(-1)).lower()[0]; }, -4, 1e-12);
  ck.near("dR kinked at -1 upper", [&] { return potential_subdifferential(R42, s(-1)).upper()[0]; }, -1, 1e-12);
  ck.holds("dR separable kinked box", [&] {
    Vec v(2);
    v << -1.0, 0.5;
    const auto d = potential_subdifferential(separable_potential(kinked, Vec::Ones(2)), v);
    return d.lower()[0] == -4 && d.upper()[0] == -1 && d.lower()[1] == 0.5 && d.upper()[1] == 0.5;
  });
  ck.near("R* quadratic at 1", [&] { return potential_conjugate(Rq, x1); }, 0.5, 1e-12);
  ck.near("R* kinked at -1", [&] { return potential_conjugate(R42, s(-1)); }, 0.5, 1e-12);
  ck.near("R* kinked at -4", [&] { return potential_conjugate(R42, s(-4)); }, 3.5, 1e-12);
  ck.near("Fenchel gap quadratic pair", [&] { return fenchel_gap(Rq, s(2), s(2)); }, 0, 1e-12);
  ck.near("Fenchel gap kinked pair", [&] { return fenchel_gap(R42, s(-1), s(-2.5)); }, 0, 1e-12);
  ck.near("Fenchel gap non-member", [&] { return fenchel_gap(Rq, x1, s(0)); }, 0.5, 1e-12);
  ck.near("dE quadratic at 1", [] { return energy_subdifferential(quadratic_energy(1), scalar_vec(1)).element()[0]; },
          1, 1e-12);
  ck.near("dE positive part at 0 upper",
          [] { return energy_subdifferential(positive_part_energy(1), scalar_vec(0)).upper()[0]; }, 1, 0);
  ck.near("dE positive part at -1",
          [] { return energy_subdifferential(positive_part_energy(1), scalar_vec(-1)).upper()[0]; }, 0, 0);

  ck.module("moreau");
  ck.near("prox quadratic", [&] { return prox(Rq, 1.0, s(3))[0]; }, 1.5, 1e-9);
  ck.near("prox kinked", [&] { return prox(R42, 0.5, s(2))[0]; }, 1.0, 1e-9);
  ck.near("prox at 0", [&] { return prox(R42, 0.5, s(0))[0]; }, 0, 0);
  ck.near("Yosida value quadratic", [&] { return yosida_value_gradient(Rq, 1.0, s(3)).value; }, 2.25, 1e-9);
  ck.near("Yosida gradient kinked", [&] { return yosida_value_gradient(R42, 0.5, s(2)).gradient[0]; }, 2.0, 1e-8);
  ck.near("Yosida conjugate quadratic", [&] { return yosida_conjugate_check(Rq, 1.0, x1).lhs; }, 1.0, 1e-6);
  ck.near("Yosida conjugate kinked", [&] { return yosida_conjugate_check(R42, 0.25, s(-1)).lhs; }, 0.625, 1e-5);
  ck.near("Yosida conjugate at 0", [&] { return yosida_conjugate_check(R42, 0.25, s(0)).lhs; }, 0, 1e-9);
  ck.near("equi-coercivity S=0", [&] { return equi_coercivity_bound(Rq, 0.0); }, superlinearity_constant(Rq), 0);

  ck.module("metric_gs");
  const MetricSystem m12 = detail::builtin_metric("ex2_12");
  const MetricSystem m13 = detail::builtin_metric("ex2_13");
  ck.near("ex2_12 step sigma=0.25", [&] { return metric_step(m12, s(2), 0.25).selected()[0]; }, 1.6, 1e-6);
  ck.near("ex2_12 value sigma=0.25", [&] { return metric_step(m12, s(2), 0.25).value; }, 1.6, 1e-9);
  ck.near("ex2_12 step sigma=2", [&] { return metric_step(m12, s(2), 2.0).selected()[0]; }, 0, 1e-6);
  ck.near("ex2_13 step sigma=0.5", [&] { return metric_step(m13, x1, 0.5).selected()[0]; }, 0.5, 1e-6);
  ck.near("slope positive part at 0.3", [&] { return metric_slope(m13, s(0.3)); }, 1, 1e-12);
  ck.near("slope positive part at 0", [&] { return metric_slope(m13, s(0)); }, 0, 1e-12);
  ck.near("slope quadratic at 2", [&] { return metric_slope(m12, s(2)); }, 2, 1e-6);
  ck.near("distance slope Euclidean", [&] { return distance_slope(m13, s(0), x1); }, 1, 1e-3);
  ck.near("distance slope truncated", [&] { return distance_slope(m12, s(2), s(0)); }, 0, 1e-12);
  ck.near("distance slope Euclidean 2D", [] {
    MetricSystem m;
    m.metric = MetricModel::euclidean(2);
    m.energy = quadratic_energy(2);
    m.psi = quadratic_density();
    return distance_slope(m, Vec::Zero(2), Vec::Ones(2));
  }, 1, 1e-3);
  ck.near("slope estimate gap equality", [&] { return slope_estimate_gap(m13, x1, 0.5, s(0.5)); }, 0, 1e-9);
  ck.near("slope estimate gap strict", [&] { return slope_estimate_gap(m13, x1, 2.0, s(0)); }, 0.5, 1e-9);
  ck.near("slope estimate gap truncated", [&] { return slope_estimate_gap(m12, s(2), 2.0, s(0)); }, 0.5, 1e-9);
  ck.near("identity residual ex2_12", [&] { return energy_identity_residual(m12, s(2), 0.25).plus; }, 0, 1e-4);
  ck.near("identity residual ex2_13", [&] { return energy_identity_residual(m13, x1, 0.5).minus; }, 0, 1e-4);
  ck.near("De Giorgi gap ex2_13 sigma=2", [&] { return de_giorgi_metric_gap(m13, x1, 2.0).gap; }, 0.25, 1e-4);
  ck.near("De Giorgi gap ex2_13 sigma=0.5", [&] { return de_giorgi_metric_gap(m13, x1, 0.5).gap; }, 0, 1e-4);
  ck.near("De Giorgi gap ex2_12 sigma=2", [&] { return de_giorgi_metric_gap(m12, s(2), 2.0).gap; }, 1.25, 1e-4);
  ck.near("ex2_12 crossover", [&] { return metric_jumps(m12, s(2), 0.05, 2.0).at(0); }, 1.0 / 3.0, 1e-6);
  ck.near("uniform slope probe pair", [&] {
    return uniform_slope_probe(m13, [](const Vec&, const Vec&) { return 0.0; }, {{s(0.5), s(-1)}});
  }, -1, 1e-12);

  ck.module("banach_gs");
  const BanachSystem b36 = detail::builtin_banach("ex3_6");
  const BanachSystem b42 = detail::builtin_banach("ex4_2");
  const BanachSystem bq = detail::builtin_banach("quadratic");
  const BanachSystem bjump = detail::builtin_banach("ex2_12_banach");
  ck.near("ex3_6 step sigma=0.5", [&] { return banach_step(b36, x1, 0.5).selected()[0]; }, 0.5, 1e-6);
  ck.near("ex4_2 step sigma=3", [&] { return banach_step(b42, s(6), 3.0).selected()[0]; }, 3, 1e-6);
  ck.near("ex4_2 step sigma=1", [&] { return banach_step(b42, s(6), 1.0).selected()[0]; }, 4.8, 1e-6);
  ck.near("EL gap ex3_6 sigma=0.5", [&] { return euler_lagrange_gap(b36, x1, 0.5, s(0.5), x1); }, 0, 1e-12);
  ck.near("EL gap ex3_6 sigma=2", [&] { return euler_lagrange_gap(b36, x1, 2.0, s(0), s(0.5)); }, 0, 1e-12);
  ck.near("EL gap ex3_6 bad xi", [&] { return euler_lagrange_gap(b36, x1, 2.0, s(0), s(0)); }, 0.125, 1e-12);
  ck.near("R-slope ex3_6 at 0.5", [&] { return r_slope(b36, s(0.5)); }, 0.5, 1e-12);
  ck.near("R-slope ex3_6 at 0", [&] { return r_slope(b36, s(0)); }, 0, 1e-12);
  ck.near("R-slope quadratic at 2", [&] { return r_slope(bq, s(2)); }, 2, 1e-12);
  ck.near("C_R ex3_6 sigma=0.5", [&] { return conditioned_slope(b36, x1, 0.5, s(0.5)).value; }, 0.5, 1e-9);
  ck.near("C_R ex3_6 sigma=2", [&] { return conditioned_slope(b36, x1, 2.0, s(0)).value; }, 0.125, 1e-9);
  ck.near("xi ex3_6 sigma=2", [&] { return conditioned_slope(b36, x1, 2.0, s(0)).xi[0]; }, 0.5, 1e-9);
  ck.near("C_R ex4_2 sigma=3", [&] { return conditioned_slope(b42, s(6), 3.0, s(3)).value; }, 2.5, 1e-9);
  ck.near("gap ex3_6 sigma=2", [&] { return de_giorgi_banach_gap(b36, x1, 2.0).gap; }, 0, 1e-4);
  ck.near("gap ex4_2 sigma=6", [&] { return de_giorgi_banach_gap(b42, s(6), 6.0).gap; }, 0, 1e-4);
  ck.near("gap quadratic sigma=1", [&] { return de_giorgi_banach_gap(bq, x1, 1.0).gap; }, 0, 1e-4);
  ck.at_least("gap ex3_6 with xi = 0 beyond sigma=1", [&] {
    const XiSelection bad = [](double sigma, const Vec& u, const ConditionedSlopeResult& c) {
      return sigma > 1.0 ? Vec(Vec::Zero(u.size())) : c.xi;
    };
    return de_giorgi_banach_gap(b36, x1, std::vector<double>{2.0}, bad).entries[0].gap;
  }, 1e-3);
  ck.near("marginal bound ex3_6 sigma=0.5", [&] { return marginal_derivative_bounds(b36, x1, 0.5).fd_slope; },
          -0.5, 1e-5);
  // the bounds are hulls over the argument tolerance, so they carry derivative-tolerance accuracy
  ck.near("marginal bound ex3_6 sigma=2", [&] { return marginal_derivative_bounds(b36, x1, 2.0).delta_plus; },
          -0.125, 1e-6);
  ck.near("marginal bound ex4_2 delta_minus", [&] { return marginal_derivative_bounds(b42, s(6), 3.0).delta_minus; },
          -3.5, 1e-6);
  ck.near("marginal bound ex4_2 delta_plus", [&] { return marginal_derivative_bounds(b42, s(6), 3.0).delta_plus; },
          -0.5, 1e-6);
  ck.holds("marginal bracket ex4_2", [&] { return marginal_derivative_bounds(b42, s(6), 3.0).within(); });
  const InterpolantTrace t36 = banach_trace(b36, x1, {0.5, 2.0});
  ck.near("identity derivative ex3_6 rho=0.5", [&] { return identity_derivative_check(b36, t36, 0.5).rhs; }, 0.5,
          1e-9);
  ck.near("identity derivative ex3_6 rho=2", [&] { return identity_derivative_check(b36, t36, 2.0).rhs; }, 0.125,
          1e-9);
  ck.near("chain rule jump value matching", [&] {
    std::vector<double> sig;
    for (int k = 1; k <= 512; ++k) sig.push_back(6.0 * k / 512);
    const ChainRuleReport c = chain_rule_validation(bjump, banach_trace(bjump, s(2), sig));
    return c.jumps.size() == 1 ? c.jumps[0].value_mismatch : 1.0;
  }, 0, 1e-5);
  ck.holds("Lipschitz audit quadratic", [&] {
    std::vector<double> sig;
    for (int k = 0; k <= 60; ++k) sig.push_back(0.5 + 7.5 * k / 60);
    const LipschitzAudit a = lipschitz_interpolant_audit(bq, x1, 0.5, sig);
    return a.empirical <= a.bound + 1e-6;
  });

  ck.module("mms_driver");
  ck.near("MMS quadratic node 4", [&] { return run_mms(bq, x1, 0.5, 2.0).nodes.at(4)[0]; }, std::pow(1 / 1.5, 4),
          1e-7);
  ck.near("MMS ex2_13 node 3", [&] { return run_mms(m13, x1, 0.25, 2.0).nodes.at(3)[0]; }, 0.25, 1e-7);
  ck.near("EDB ex2_13 tau=2", [&] {
    const MMSTrajectory t = run_mms(m13, x1, 2.0, 2.0);
    return edb_report(m13, t, interpolant_trace(m13, t)).total;
  }, 0.25, 1e-4);

  ck.module("solver");
  SolveConfig cfg;
  ck.near("global minimize parabola", [&] {
    return global_minimize({[](const Vec& u) { return (u[0] - 1) * (u[0] - 1); }, {}}, Window::around(s(0), 4), cfg)
        .minimizers.at(0)[0];
  }, 1, 1e-7);
  ck.holds("global minimize double well", [&] {
    const auto r = global_minimize(
        {[](const Vec& u) { return std::min((u[0] - 1) * (u[0] - 1), (u[0] + 1) * (u[0] + 1)); }, {}},
        Window::around(s(0), 4), cfg);
    return r.minimizers.size() == 2 && std::abs(r.minimizers[0][0] + 1) < 1e-6 &&
           std::abs(r.minimizers[1][0] - 1) < 1e-6;
  });
  ck.near("grid oracle ex4_2 sigma=3", [&] {
    return grid_oracle(banach_objective(b42, s(6), 3.0).value, Window::around(s(6), 8), 1e-3).minimizers.at(0)[0];
  }, 3, 1e-3);
  ck.near("dual minimize singleton", [] {
    return constrained_dual_minimize([](const Vec& x) { return 0.5 * x.squaredNorm(); },
                                     {SubdifferentialSet::singleton(scalar_vec(0.5))}, ConjugateShape::separable)
        .value;
  }, 0.125, 1e-15);
  ck.holds("dual minimize empty", [] {
    return !constrained_dual_minimize([](const Vec& x) { return 0.5 * x.squaredNorm(); },
                                      {SubdifferentialSet::singleton(scalar_vec(0.5)),
                                       SubdifferentialSet::singleton(scalar_vec(1.0))},
                                      ConjugateShape::separable)
                .feasible;
  });

  ck.module("cli");
  ck.near("load ex3_6", [] { return load_scenario("ex3_6").u0[0]; }, 1, 0);
  ck.near("load ex4_2", [] { return load_scenario("ex4_2").u0[0]; }, 6, 0);
  ck.throws<ConfigError>("zero sigma window rejected", [] {
    Json doc = builtin_scenarios().at("ex3_6");
    doc["sigma_window"] = {0.0, 1.0};
    parse_scenario(doc);
  });

  ck.module("properties");
  ck.holds("Fenchel-Young on kinked density", [&] {
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const double r = 0.15 * i, sv = 0.3 * j;
        if (kinked(r) + kinked.conjugate(sv) - sv * r < -1e-9) return false;
      }
    return true;
  });
  ck.holds("marginal function non-increasing on builtins", [&] {
    for (const auto& name : {"ex3_6", "ex4_2", "quadratic", "ex2_12_banach"}) {
      const Scenario sc = load_scenario(name);
      double prev = sc.banach->energy(sc.u0);
      for (double sg : sc.sigma_grid()) {
        const double v = banach_step(*sc.banach, sc.u0, sg).value;
        if (v > prev + 1e-9) return false;
        prev = v;
      }
    }
    return true;
  });
  ck.holds("energy non-increasing along MMS nodes", [&] {
    for (const auto& name : {"ex3_6", "ex4_2", "quadratic", "ex2_12_banach"}) {
      const Scenario sc = load_scenario(name);
      const MMSTrajectory t = run_mms(*sc.banach, sc.u0, sc.tau, sc.horizon);
      for (std::size_t k = 1; k < t.nodes.size(); ++k)
        if (sc.banach->energy(t.nodes[k]) > sc.banach->energy(t.nodes[k - 1]) + 1e-12) return false;
    }
    return true;
  });
  return rep;
}

}  // namespace maxslope
