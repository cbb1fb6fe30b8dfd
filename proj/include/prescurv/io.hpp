#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "prescurv/flow.hpp"
#include "prescurv/hypersurface.hpp"

// Artifact output: series CSV, report JSON and snapshots.  Files are written
// atomically (temp + rename) and floating-point values are printed with 17
// significant digits, so identical runs produce byte-identical artifacts.

namespace prescurv::io {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string series_csv(const FlowReport& rep) {
  std::string out = "step,t_flow,dt,residual,kappa_min,vtilde_max,dist_lower,dist_upper\n";
  for (const auto& row : rep.series) {
    out += std::to_string(row.step);
    for (double v : {row.t_flow, row.dt, row.residual, row.kappa_min, row.vtilde_max,
                     row.dist_lower, row.dist_upper}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json monitor_json(const MonitorReport& m) {
  return nlohmann::json{{"sign_preservation", m.sign_ok},
                        {"monotone_descent", m.descent_ok},
                        {"containment", m.containment_ok},
                        {"convexity", m.convexity_ok},
                        {"vtilde_bound", m.vtilde_ok},
                        {"sign_worst", m.sign_worst},
                        {"descent_worst", m.descent_worst},
                        {"containment_worst", m.containment_worst},
                        {"kappa_min_run", m.kappa_min_run},
                        {"first_violation_step", m.first_violation_step}};
}

/// Full run report; embeds the resolved configuration and seed so a report
/// alone reproduces its run.
inline nlohmann::json report_json(const FlowReport& rep, const nlohmann::json& resolved_config,
                                  std::uint64_t seed) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : rep.probes)
    probes.push_back({{"node", p.node},
                      {"integral", p.integral},
                      {"crossed", p.crossed},
                      {"integral_at_crossing", p.integral_at_crossing},
                      {"t_crossing", p.t_crossing}});
  return nlohmann::json{{"config", resolved_config},
                        {"seed", seed},
                        {"stop_cause", to_string(rep.cause)},
                        {"steps", rep.steps},
                        {"t_final", rep.t_final},
                        {"residual_final", rep.residual_final},
                        {"monitors", monitor_json(rep.monitors)},
                        {"partial_integrals", probes},
                        {"vtilde_early_max", rep.vtilde_early_max},
                        {"vtilde_run_max", rep.vtilde_run_max},
                        {"witness_node", rep.witness_node},
                        {"message", rep.message}};
}

/// Self-describing snapshot of a graph state, optionally with the derived
/// curvature and gradient fields.
inline nlohmann::json snapshot_json(const GraphState& state, const GeometryFields* geo = nullptr) {
  std::vector<int> res;
  for (int a = 0; a < state.grid.dim(); ++a) res.push_back(state.grid.res(a));
  nlohmann::json snap{{"grid", {{"dimension", state.grid.dim()}, {"resolution", res}}},
                      {"t_flow", state.t_flow},
                      {"u", state.u}};
  if (geo != nullptr) {
    snap["kappa"] = geo->kappa;
    snap["vtilde"] = geo->vtilde;
  }
  return snap;
}

/// Per-node field table for plotting: coordinates, height, curvatures,
/// gradient function.
inline std::string fields_csv(const GraphState& state, const GeometryFields& geo) {
  const int dim = state.grid.dim();
  std::string out;
  for (int a = 0; a < dim; ++a) out += "x" + std::to_string(a + 1) + ",";
  out += "u";
  for (int i = 0; i < dim; ++i) out += ",kappa" + std::to_string(i + 1);
  out += ",vtilde\n";
  double x[3];
  for (std::size_t p = 0; p < state.grid.node_count(); ++p) {
    state.grid.position(p, x);
    for (int a = 0; a < dim; ++a) out += format_double(x[a]) + ",";
    out += format_double(state.u[p]);
    for (int i = 0; i < dim; ++i) out += "," + format_double(geo.kappa[p * dim + i]);
    out += "," + format_double(geo.vtilde[p]);
    out += '\n';
  }
  return out;
}

}  // namespace prescurv::io
