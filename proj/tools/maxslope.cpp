#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "maxslope/maxslope.hpp"

namespace fs = std::filesystem;
using namespace maxslope;

namespace {

struct Options {
  std::string command;
  std::string scenario;
  std::optional<int> sigma_samples;
  std::optional<double> tau;
  std::optional<double> horizon;
  std::optional<double> sigma;
  std::optional<std::string> out;
  bool oracle = false;
};

Scenario prepare(const Options& o) {
  Scenario sc = load_scenario(o.scenario);
  if (o.sigma_samples) {
    if (*o.sigma_samples < 1) throw ConfigError("--sigma-samples: must be at least 1");
    sc.sigma_samples = *o.sigma_samples;
  }
  if (o.tau) sc.tau = *o.tau;
  if (o.horizon) sc.horizon = *o.horizon;
  if (o.out) sc.output = *o.out;
  if (o.oracle) sc.set_oracle(true);
  if (!(sc.tau > 0)) throw ConfigError("--tau: must be positive");
  if (!(sc.horizon >= sc.tau)) throw ConfigError("--horizon: must be at least tau");
  return sc;
}

template <class F>
auto dispatch(const Scenario& sc, F&& f) {
  if (sc.banach) return f(*sc.banach);
  return f(*sc.metric);
}

Json header(const Scenario& sc, const std::string& command) {
  return {{"scenario", sc.name}, {"kind", to_string(sc.kind)}, {"command", command}};
}

int run_step(const Scenario& sc, std::optional<double> sigma) {
  const double s = sigma.value_or(sc.sigma_hi);
  if (!(s > 0)) throw ConfigError("--sigma: must be positive");
  const StepResult r = dispatch(sc, [&](const auto& sys) { return single_step(sys, sc.u0, s); });
  Json j = header(sc, "step");
  j["step"] = to_json(r);
  write_atomic(fs::path(sc.output) / "step.json", dump(j));
  std::cout << "sigma " << format_double(s) << " value " << format_double(r.value) << " minimizer "
            << to_json(r.selected()).dump() << " (" << r.minimizers.size() << " minimizer"
            << (r.minimizers.size() == 1 ? "" : "s") << ")\n";
  return 0;
}

std::pair<InterpolantTrace, GapReport> sweep_data(const Scenario& sc) {
  return dispatch(sc, [&](const auto& sys) {
    InterpolantTrace t = variational_trace(sys, sc.u0, sc.sigma_grid());
    GapReport g = gaps_from_trace(t, sys.tol.gap);
    return std::make_pair(std::move(t), std::move(g));
  });
}

int gap_exit(const GapReport& g) { return g.any(GapClass::violation) ? 1 : 0; }

int run_sweep(const Scenario& sc) {
  const auto [trace, gaps] = sweep_data(sc);
  write_atomic(fs::path(sc.output) / "sweep.csv", sweep_csv(trace, gaps));
  Json j = header(sc, "sweep");
  j["error_bar"] = trace.error_bar;
  j["gaps"] = to_json(gaps);
  write_atomic(fs::path(sc.output) / "gaps.json", dump(j));
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& e : gaps.entries) ++counts[static_cast<int>(e.classification)];
  std::cout << trace.samples.size() << " samples: identity " << counts[0] << ", strict-estimate " << counts[1]
            << ", violation " << counts[2] << ", inconclusive " << counts[3] << "\n";
  return gap_exit(gaps);
}

int run_gap(const Scenario& sc, std::optional<double> sigma) {
  GapReport gaps;
  if (sigma) {
    if (!(*sigma > 0)) throw ConfigError("--sigma: must be positive");
    gaps.entries.push_back(dispatch(sc, [&](const auto& sys) {
      using S = std::decay_t<decltype(sys)>;
      if constexpr (std::is_same_v<S, BanachSystem>)
        return de_giorgi_banach_gap(sys, sc.u0, *sigma);
      else
        return de_giorgi_metric_gap(sys, sc.u0, *sigma);
    }));
  } else {
    gaps = sweep_data(sc).second;
  }
  for (const auto& e : gaps.entries)
    std::cout << "sigma " << format_double(e.sigma) << ": " << to_string(e.classification) << ", gap "
              << format_double(e.gap) << " (error " << format_double(e.error) << ")\n";
  Json j = header(sc, "gap");
  j["gaps"] = to_json(gaps);
  write_atomic(fs::path(sc.output) / "gaps.json", dump(j));
  return gap_exit(gaps);
}

int run_mms_command(const Scenario& sc) {
  const EDBReport r = dispatch(sc, [&](const auto& sys) {
    const MMSTrajectory traj = run_mms(sys, sc.u0, sc.tau, sc.horizon);
    return edb_report(sys, traj, interpolant_trace(sys, traj));
  });
  Json j = header(sc, "mms");
  j["horizon"] = sc.horizon;
  j["edb"] = to_json(r);
  write_atomic(fs::path(sc.output) / "mms.json", dump(j));
  bool bad = false;
  for (const auto& g : r.cell_gaps) bad = bad || g.classification == GapClass::violation;
  std::cout << r.cell_gaps.size() << " cells, EDB residual " << format_double(r.total) << " (error "
            << format_double(r.error) << ")\n";
  return bad ? 1 : 0;
}

int run_pipeline(const Scenario& sc) {
  if (!sc.banach) throw ConfigError("pipeline: requires a banach scenario");
  const YosidaPipelineReport r = yosida_pipeline(*sc.banach, sc.u0, sc.sigma_grid(), default_eta_schedule());
  Json j = header(sc, "pipeline");
  j["etas"] = r.etas;
  j["report"] = to_json(r);
  write_atomic(fs::path(sc.output) / "pipeline.json", dump(j));
  bool identity = true;
  for (const auto& row : r.per_eta)
    for (const auto& e : row) identity = identity && e.classification == GapClass::identity;
  double worst = kInf;
  for (const auto& e : r.limit) worst = std::min(worst, e.gap);
  std::cout << r.etas.size() << " regularizations, per-eta identity " << (identity ? "yes" : "no")
            << ", smallest limit gap " << format_double(worst) << ", a priori bound "
            << format_double(r.e_bar) << (r.a_priori_ok ? " holds" : " fails") << "\n";
  return identity && r.a_priori_ok && worst >= -2e-4 ? 0 : 1;
}

int run_selftest_command(const std::string& out) {
  const SelftestReport r = run_selftest();
  write_atomic(fs::path(out) / "selftest.json", dump(r.to_json()));
  for (const auto& c : r.checks)
    if (!c.passed)
      std::cout << "FAIL " << c.module << ": " << c.name << " value " << format_double(c.value) << " expected "
                << format_double(c.expected) << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
  std::cout << r.checks.size() - r.failures() << "/" << r.checks.size() << " checks passed\n";
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational interpolants and De Giorgi gaps for generalized gradient systems"};
  app.require_subcommand(1, 1);
  Options o;
  const auto common = [&](CLI::App* sub, bool needs_scenario) {
    auto* s = sub->add_option("--scenario", o.scenario, "built-in name or JSON file");
    if (needs_scenario) s->required();
    sub->add_option("--sigma-samples", o.sigma_samples, "number of sigma samples in the window");
    sub->add_option("--tau", o.tau, "MMS step size");
    sub->add_option("--horizon", o.horizon, "MMS horizon");
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--oracle", o.oracle, "cross-check every minimization against the grid oracle");
  };
  for (const char* name : {"step", "sweep", "mms", "gap", "pipeline"}) {
    auto* sub = app.add_subcommand(name);
    common(sub, true);
    if (std::string(name) == "step" || std::string(name) == "gap")
      sub->add_option("--sigma", o.sigma, "single step size");
  }
  common(app.add_subcommand("selftest", "run the golden examples and property suites"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (o.command == "selftest") return run_selftest_command(o.out.value_or("out"));
    const Scenario sc = prepare(o);
    if (o.command == "step") return run_step(sc, o.sigma);
    if (o.command == "sweep") return run_sweep(sc);
    if (o.command == "gap") return run_gap(sc, o.sigma);
    if (o.command == "mms") return run_mms_command(sc);
    return run_pipeline(sc);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure (" << o.scenario << "): " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "model failure (" << o.scenario << "): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
