#pragma once

// Report emission: the fixed sweep CSV, JSON gap reports, atomic writes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "maxslope/banach_gs.hpp"
#include "maxslope/mms_driver.hpp"
#include "maxslope/scenario.hpp"
#include "maxslope/trace.hpp"

namespace maxslope {

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Columns: sigma, u_0..u_{n-1}, phi, energy, dissipation_term, r_slope,
/// conditioned_slope, integral_term, gap, classification, quad_error.
inline std::string sweep_csv(const InterpolantTrace& trace, const GapReport& gaps) {
  std::ostringstream os;
  const Eigen::Index n = trace.u0.size();
  os << "sigma";
  for (Eigen::Index i = 0; i < n; ++i) os << ",u_" << i;
  os << ",phi,energy,dissipation_term,r_slope,conditioned_slope,integral_term,gap,classification,quad_error\n";
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const TraceSample& s = trace.samples[k];
    const GapEntry& g = gaps.entries[k];
    os << format_double(s.sigma);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(s.u[i]);
    os << ',' << format_double(s.phi) << ',' << format_double(s.energy) << ',' << format_double(s.dissipation)
       << ',' << format_double(s.r_slope) << ',' << format_double(s.conditioned_slope) << ','
       << format_double(s.integral) << ',' << format_double(g.gap) << ',' << to_string(g.classification) << ','
       << format_double(g.error) << '\n';
  }
  return os.str();
}

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const GapEntry& e) {
  return {{"sigma", e.sigma}, {"gap", e.gap}, {"error", e.error}, {"classification", to_string(e.classification)}};
}

inline Json to_json(const GapReport& r) {
  Json a = Json::array();
  for (const auto& e : r.entries) a.push_back(to_json(e));
  return a;
}

inline Json to_json(const StepResult& s) {
  Json m = Json::array();
  for (const auto& u : s.minimizers) m.push_back(to_json(u));
  return {{"sigma", s.sigma}, {"value", s.value}, {"minimizers", m}, {"d_minus", s.d_minus}, {"d_plus", s.d_plus}};
}

inline Json to_json(const EDBReport& r) {
  Json cells = Json::array();
  for (const auto& g : r.cell_gaps) cells.push_back(to_json(g));
  return {{"tau", r.tau}, {"total", r.total}, {"error", r.error}, {"cells", cells}};
}

inline Json to_json(const YosidaPipelineReport& r) {
  Json per = Json::array();
  for (std::size_t k = 0; k < r.etas.size(); ++k) {
    Json g = Json::array();
    for (const auto& e : r.per_eta[k]) g.push_back(to_json(e));
    per.push_back({{"eta", r.etas[k]}, {"gaps", g}});
  }
  Json lim = Json::array();
  for (std::size_t j = 0; j < r.limit.size(); ++j) {
    Json acc = Json::array();
    for (const auto& x : r.accumulation[j]) acc.push_back(to_json(x));
    Json e = to_json(r.limit[j]);
    e["accumulation_points"] = acc;
    e["distance_to_direct"] = r.distance_to_direct[j];
    lim.push_back(e);
  }
  return {{"per_eta", per},
          {"limit", lim},
          {"a_priori_bound", r.e_bar},
          {"a_priori_max", r.a_priori_max},
          {"a_priori_ok", r.a_priori_ok}};
}

/// Fixed-format JSON text (full double precision, two-space indent).
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace maxslope
