#pragma once

// Scenario documents: JSON in, validated systems out. Built-in scenarios
// are stored as JSON too, so they go through the same validation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxslope/banach_gs.hpp"
#include "maxslope/metric_gs.hpp"
#include "maxslope/moreau.hpp"

namespace maxslope {

using Json = nlohmann::ordered_json;

enum class SystemKind { metric, banach };

inline std::string to_string(SystemKind k) { return k == SystemKind::metric ? "metric" : "banach"; }

struct Scenario {
  std::string name;
  SystemKind kind = SystemKind::banach;
  Vec u0;
  std::optional<BanachSystem> banach;
  std::optional<MetricSystem> metric;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  int sigma_samples = 64;
  double tau = 0.5;
  double horizon = 2.0;
  std::string output = "out";
  Json source;

  /// sigma_samples points from sigma_lo to sigma_hi inclusive.
  std::vector<double> sigma_grid() const {
    std::vector<double> g;
    if (sigma_samples == 1) return {sigma_hi};
    for (int k = 0; k < sigma_samples; ++k)
      g.push_back(sigma_lo + (sigma_hi - sigma_lo) * k / (sigma_samples - 1));
    return g;
  }
  const Tolerances& tolerances() const { return banach ? banach->tol : metric->tol; }
  const SolveConfig& solve() const { return banach ? banach->solve : metric->solve; }
  void set_oracle(bool on) {
    if (banach) banach->solve.oracle = on;
    if (metric) metric->solve.oracle = on;
  }
  Eigen::Index dim() const { return u0.size(); }
};

namespace detail {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }
  const std::string& path() const { return path_; }
  const Json& json() const { return j_; }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  Reader at(const std::string& key) const {
    if (!has(key)) Reader(j_, path_ + "." + key).fail("required field missing");
    return Reader(j_.at(key), path_ + "." + key);
  }
  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double x = j_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }
  double positive() const {
    const double x = number();
    if (!(x > 0)) fail("must be positive");
    return x;
  }
  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  Vec vector() const {
    if (j_.is_number()) return scalar_vec(number());
    const std::size_t n = size();
    if (n == 0) fail("expected a nonempty array");
    Vec v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = at(i).number();
    return v;
  }
  Mat matrix(Eigen::Index n) const {
    if (size() != static_cast<std::size_t>(n)) fail("expected " + std::to_string(n) + " rows");
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec row = at(static_cast<std::size_t>(i)).vector();
      if (row.size() != n) at(static_cast<std::size_t>(i)).fail("row length must be " + std::to_string(n));
      m.row(i) = row.transpose();
    }
    return m;
  }
  double number_or(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  double positive_or(const std::string& key, double fallback) const {
    return has(key) ? at(key).positive() : fallback;
  }
  std::string type() const {
    if (!j_.is_object()) fail("expected an object with a \"type\" field");
    return at("type").string();
  }

 private:
  const Json& j_;
  std::string path_;
};

inline ScalarConvex parse_density(const Reader& r) {
  const std::string t = r.type();
  try {
    if (t == "quadratic") return quadratic_density(r.positive_or("scale", 1.0));
    if (t == "power") return power_density(r.at("p").number(), r.positive_or("scale", 1.0));
    if (t == "piecewise_quadratic")
      return piecewise_quadratic_density(r.positive_or("inner", 1.0), r.positive_or("outer", 4.0),
                                         r.positive_or("breakpoint", 1.0));
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("$", 0) == 0) throw;
    r.fail(e.what());
  }
  r.at("type").fail("unknown density type '" + t + "'");
}

inline DissipationPotential parse_dissipation(const Reader& r, Eigen::Index n) {
  const std::string t = r.type();
  if (t == "quadratic") return quadratic_potential(n, r.positive_or("scale", 1.0));
  if (t == "power") {
    const double p = r.at("p").number();
    if (!(p > 1)) r.at("p").fail("exponent must exceed 1");
    return power_potential(n, p, r.positive_or("scale", 1.0));
  }
  if (t == "piecewise_quadratic" || t == "separable") {
    const ScalarConvex f = t == "separable" ? parse_density(r.at("density")) : parse_density(r);
    Vec w = Vec::Ones(n);
    if (r.has("weights")) {
      w = r.at("weights").vector();
      if (w.size() != n) r.at("weights").fail("length must match the dimension");
      if ((w.array() <= 0).any()) r.at("weights").fail("weights must be positive");
    }
    return separable_potential(f, w, t == "separable" ? PotentialTag::separable_integral
                                                      : PotentialTag::piecewise_scalar);
  }
  if (t == "metric_like") return metric_like_potential(n, parse_density(r.at("psi")));
  if (t == "sum") {
    const Reader parts = r.at("parts");
    if (parts.size() < 2) parts.fail("a sum needs at least two parts");
    std::vector<DissipationPotential> ps;
    for (std::size_t i = 0; i < parts.size(); ++i) ps.push_back(parse_dissipation(parts.at(i), n));
    return sum_potential(std::move(ps));
  }
  if (t == "yosida") return yosida(parse_dissipation(r.at("base"), n), r.at("eta").positive());
  if (t == "allen_cahn") return allen_cahn_dissipation(n);
  r.at("type").fail("unknown dissipation type '" + t + "'");
}

inline EnergyFunctional parse_energy(const Reader& r, Eigen::Index n) {
  const std::string t = r.type();
  auto center = [&]() {
    if (!r.has("center")) return Vec(Vec::Zero(n));
    Vec c = r.at("center").vector();
    if (c.size() != n) r.at("center").fail("length must match the dimension");
    return c;
  };
  auto matrix = [&]() {
    if (r.has("matrix")) return r.at("matrix").matrix(n);
    return Mat(r.positive_or("scale", 1.0) * Mat::Identity(n, n));
  };
  try {
    if (t == "quadratic") return quadratic_energy(matrix(), center(), r.number_or("offset", 0.0));
    if (t == "perturbed_quadratic") {
      std::vector<PerturbedQuadraticEnergy::Mode> modes;
      const Reader ms = r.at("modes");
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const Reader m = ms.at(i);
        Vec w = m.at("wave").vector();
        if (w.size() != n) m.at("wave").fail("length must match the dimension");
        modes.push_back({m.at("amplitude").number(), w, m.number_or("phase", 0.0)});
      }
      return perturbed_quadratic_energy(matrix(), center(), std::move(modes));
    }
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("$", 0) == 0) throw;
    r.fail(e.what());
  }
  if (t == "positive_part") return positive_part_energy(n);
  if (t == "zero") return zero_energy(n);
  if (t == "clipped_quadratic") return clipped_quadratic_energy(n, r.positive_or("radius", 1.0));
  if (t == "allen_cahn") return allen_cahn_energy(n);
  r.at("type").fail("unknown energy type '" + t + "'");
}

inline MetricModel parse_distance(const Reader& r, Eigen::Index n) {
  const std::string t = r.type();
  if (t == "euclidean") return MetricModel::euclidean(n);
  if (t == "truncated") return MetricModel::truncated(n, r.at("radius").positive());
  r.at("type").fail("unknown distance type '" + t + "'");
}

inline Tolerances parse_tolerances(const Reader& r) {
  Tolerances t;
  if (!r.json().is_object()) r.fail("expected an object");
  t.value = r.positive_or("value", t.value);
  t.argument = r.positive_or("argument", t.argument);
  t.derivative = r.positive_or("derivative", t.derivative);
  t.gap = r.positive_or("gap", t.gap);
  t.certificate = r.positive_or("certificate", t.certificate);
  return t;
}

}  // namespace detail

inline Scenario parse_scenario(const Json& doc) {
  const detail::Reader r(doc, "$");
  if (!doc.is_object()) r.fail("scenario must be a JSON object");
  Scenario s;
  s.source = doc;
  s.name = r.at("name").string();
  const std::string kind = r.at("kind").string();
  if (kind == "metric") s.kind = SystemKind::metric;
  else if (kind == "banach") s.kind = SystemKind::banach;
  else r.at("kind").fail("must be \"metric\" or \"banach\"");

  s.u0 = r.at("u0").vector();
  const Eigen::Index n = s.u0.size();

  const detail::Reader win = r.at("sigma_window");
  if (win.size() != 2) win.fail("expected [lo, hi]");
  s.sigma_lo = win.at(0).number();
  s.sigma_hi = win.at(1).number();
  if (!(s.sigma_lo > 0)) win.at(0).fail("lower endpoint must be positive");
  if (!(s.sigma_hi > s.sigma_lo)) win.at(1).fail("upper endpoint must exceed the lower one");
  if (r.has("sigma_samples")) {
    s.sigma_samples = r.at("sigma_samples").integer();
    if (s.sigma_samples < 1) r.at("sigma_samples").fail("must be at least 1");
  }
  s.tau = r.positive_or("tau", s.tau);
  s.horizon = r.positive_or("horizon", s.horizon);
  if (s.horizon < s.tau) r.at("horizon").fail("must be at least tau");
  if (r.has("output")) s.output = r.at("output").string();

  Tolerances tol;
  if (r.has("tolerances")) tol = detail::parse_tolerances(r.at("tolerances"));
  SolveConfig cfg;
  cfg.value_tol = tol.value;
  cfg.arg_tol = tol.argument;
  if (r.has("oracle")) cfg.oracle = r.at("oracle").boolean();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    r.at("tolerances").fail(e.what());
  }
  const double half = r.number_or("search_half_width", 0.0);
  if (half < 0) r.at("search_half_width").fail("must be nonnegative");

  const EnergyFunctional energy = detail::parse_energy(r.at("energy"), n);
  if (energy.dim() != n) r.at("energy").fail("dimension does not match u0");
  if (!std::isfinite(energy(s.u0))) r.at("u0").fail("outside the domain of the energy");

  if (s.kind == SystemKind::banach) {
    if (r.has("distance") || r.has("psi")) r.fail("banach scenarios take \"dissipation\", not \"distance\"/\"psi\"");
    BanachSystem b{energy, detail::parse_dissipation(r.at("dissipation"), n), cfg, tol, {}, half};
    b.validate();
    s.banach = b;
  } else {
    if (r.has("dissipation")) r.fail("metric scenarios take \"distance\" and \"psi\", not \"dissipation\"");
    MetricSystem m;
    m.metric = detail::parse_distance(r.at("distance"), n);
    m.energy = energy;
    m.psi = detail::parse_density(r.at("psi"));
    m.solve = cfg;
    m.tol = tol;
    m.window_half_width = half;
    try {
      m.validate();
    } catch (const ConfigError& e) {
      r.fail(e.what());
    }
    s.metric = m;
  }
  return s;
}

// Built-in scenarios

inline Json allen_cahn_initial_state(int n = 64) {
  Json u = Json::array();
  const double h = 1.0 / (n + 1);
  for (int i = 1; i <= n; ++i) {
    const double x = i * h;
    u.push_back(0.8 * std::sin(std::numbers::pi * x) + 0.3 * std::sin(3.0 * std::numbers::pi * x));
  }
  return u;
}

inline const std::map<std::string, Json>& builtin_scenarios() {
  static const std::map<std::string, Json> table = [] {
    std::map<std::string, Json> t;
    t["ex2_12"] = {{"name", "ex2_12"},
                   {"kind", "metric"},
                   {"description", "E(u) = u^2/2 with the distance min(|u - w|, 1), psi(r) = r^2/2"},
                   {"energy", {{"type", "quadratic"}}},
                   {"distance", {{"type", "truncated"}, {"radius", 1.0}}},
                   {"psi", {{"type", "quadratic"}}},
                   {"u0", 2.0},
                   {"sigma_window", {0.0625, 4.0}},
                   {"sigma_samples", 64},
                   {"tau", 0.5},
                   {"horizon", 2.0}};
    t["ex2_13"] = {{"name", "ex2_13"},
                   {"kind", "metric"},
                   {"description", "E(u) = max(u, 0) with the Euclidean distance, psi(r) = r^2/2"},
                   {"energy", {{"type", "positive_part"}}},
                   {"distance", {{"type", "euclidean"}}},
                   {"psi", {{"type", "quadratic"}}},
                   {"u0", 1.0},
                   {"sigma_window", {0.0625, 4.0}},
                   {"sigma_samples", 64},
                   {"tau", 0.25},
                   {"horizon", 2.0}};
    t["ex3_6"] = {{"name", "ex3_6"},
                  {"kind", "banach"},
                  {"description", "E(u) = max(u, 0), R(v) = v^2/2"},
                  {"energy", {{"type", "positive_part"}}},
                  {"dissipation", {{"type", "quadratic"}}},
                  {"u0", 1.0},
                  {"sigma_window", {0.0625, 4.0}},
                  {"sigma_samples", 64},
                  {"tau", 0.5},
                  {"horizon", 2.0}};
    t["ex4_2"] = {{"name", "ex4_2"},
                  {"kind", "banach"},
                  {"description", "E(u) = u^2/2, R(v) = v^2/2 on |v| <= 1 and 2v^2 - 3/2 outside"},
                  {"energy", {{"type", "quadratic"}}},
                  {"dissipation",
                   {{"type", "piecewise_quadratic"}, {"inner", 1.0}, {"outer", 4.0}, {"breakpoint", 1.0}}},
                  {"u0", 6.0},
                  {"sigma_window", {0.125, 8.0}},
                  {"sigma_samples", 64},
                  {"tau", 1.0},
                  {"horizon", 8.0}};
    t["allen_cahn_1d"] = {{"name", "allen_cahn_1d"},
                          {"kind", "banach"},
                          {"description",
                           "Finite-difference Allen-Cahn energy on (0,1), 64 interior nodes, Dirichlet "
                           "boundary, R(v) = sum h |v_i|^5 / 5"},
                          {"energy", {{"type", "allen_cahn"}}},
                          {"dissipation", {{"type", "allen_cahn"}}},
                          {"u0", allen_cahn_initial_state()},
                          {"sigma_window", {0.01, 0.5}},
                          {"sigma_samples", 16},
                          {"tau", 0.05},
                          {"horizon", 0.2}};
    t["quadratic"] = {{"name", "quadratic"},
                      {"kind", "banach"},
                      {"description", "E(u) = u^2/2, R(v) = v^2/2"},
                      {"energy", {{"type", "quadratic"}}},
                      {"dissipation", {{"type", "quadratic"}}},
                      {"u0", 1.0},
                      {"sigma_window", {0.5, 8.0}},
                      {"sigma_samples", 64},
                      {"tau", 0.5},
                      {"horizon", 2.0}};
    t["ex2_12_banach"] = {{"name", "ex2_12_banach"},
                          {"kind", "banach"},
                          {"description", "E(u) = min(u^2, 1)/2, R(v) = v^2/2: the interpolant jumps at sigma = 3"},
                          {"energy", {{"type", "clipped_quadratic"}, {"radius", 1.0}}},
                          {"dissipation", {{"type", "quadratic"}}},
                          {"u0", 2.0},
                          {"sigma_window", {0.0625, 6.0}},
                          {"sigma_samples", 64},
                          {"tau", 1.0},
                          {"horizon", 6.0}};
    return t;
  }();
  return table;
}

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> n;
  for (const auto& [k, v] : builtin_scenarios()) n.push_back(k);
  return n;
}

/// A registered name or the path of a JSON document.
inline Scenario load_scenario(const std::string& name_or_path) {
  const auto& table = builtin_scenarios();
  if (auto it = table.find(name_or_path); it != table.end()) return parse_scenario(it->second);
  if (!std::filesystem::exists(name_or_path))
    throw ConfigError("unknown scenario '" + name_or_path + "' (not a built-in name or an existing file)");
  std::ifstream in(name_or_path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(name_or_path + ": malformed JSON: " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace maxslope
