#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "prescurv/flow.hpp"

// Run configuration: a strictly validated JSON document with sections
// ambient / grid / curvature / prescription / barriers / flow / output.
// Unknown keys are rejected; the first violation is reported with its JSON
// path (and line for parse errors).  A top-level "scenario" key starts from
// a named built-in preset, with the remaining document deep-merged on top.

namespace prescurv {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  nlohmann::json resolved;  // the fully merged and defaulted document

  int dimension = 2;
  ScalarFunction warp;
  ScalarFunction psi;
  Slab slab;
  std::array<int, 3> resolution{32, 32, 1};
  std::string family = "K";
  Prescription f = Prescription::constant(1.0);
  Phi phi = Phi::log();
  // barrier specs are evaluated on the grid when building the flow config
  nlohmann::json lower_spec, upper_spec;

  double dt_safety = 0.9;
  double tolerance = 1e-6;
  long max_steps = 500000;
  std::uint64_t seed = 2024;
  bool unsafe_init = false;
  MonitorConfig monitors;
  int series_stride = 1;
  long snapshot_every = 0;
};

/// Composition expressions over the built-in families, e.g.
/// "product(power(sigma,2),K)".  Bare "sigma" / "invsigma" / "H" mean k = 1.
CurvatureFunction parse_family(const std::string& expr, int n);

namespace configdetail {

class FamilyParser {
 public:
  FamilyParser(const std::string& s, int n) : s_(s), n_(n) {}

  CurvatureFunction parse() {
    CurvatureFunction f = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("curvature.family: " + why + " at position " + std::to_string(pos_) +
                      " in '" + s_ + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a name");
    return s_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s_.substr(pos_), &used);
    } catch (const std::exception&) {
      fail("expected a number");
    }
    pos_ += used;
    return v;
  }

  int integer_arg(const std::string& name, int fallback) {
    if (!consume('(')) return fallback;
    const double v = number();
    if (!consume(')')) fail("expected ')' after " + name);
    const int k = static_cast<int>(v);
    if (v != k) fail(name + " takes an integer order");
    return k;
  }

  CurvatureFunction expression() {
    const std::string name = ident();
    if (name == "K" || name == "gauss") return CurvatureFunction::gauss(n_);
    if (name == "sigma") return CurvatureFunction::sigma_k(n_, integer_arg(name, 1));
    if (name == "invsigma" || name == "sigmatilde")
      return CurvatureFunction::inv_sigma_k(n_, integer_arg(name, 1));
    if (name == "H" || name == "elem") return CurvatureFunction::elem_sym(n_, integer_arg(name, 1));
    if (name == "power") {
      if (!consume('(')) fail("power needs (expr, exponent)");
      CurvatureFunction base = expression();
      if (!consume(',')) fail("power needs an exponent");
      const double r = number();
      if (!consume(')')) fail("expected ')'");
      return CurvatureFunction::power(base, r);
    }
    if (name == "product") {
      if (!consume('(')) fail("product needs (expr, expr)");
      CurvatureFunction a = expression();
      if (!consume(',')) fail("product needs two arguments");
      CurvatureFunction b = expression();
      if (!consume(')')) fail("expected ')'");
      return CurvatureFunction::product(a, b);
    }
    if (name == "normalized") {
      if (!consume('(')) fail("normalized needs (expr)");
      CurvatureFunction a = expression();
      if (!consume(')')) fail("expected ')'");
      return CurvatureFunction::normalized(a);
    }
    fail("unknown family '" + name + "'");
  }

  const std::string& s_;
  int n_;
  std::size_t pos_ = 0;
};

inline void require_keys(const nlohmann::json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

inline ScalarFunction parse_warp(const nlohmann::json& spec, const std::string& path) {
  if (spec.is_string()) return ScalarFunction::builtin(spec.get<std::string>());
  if (spec.is_object() && spec.contains("spline")) {
    require_keys(spec, path, {"spline"});
    const auto& sp = spec.at("spline");
    require_keys(sp, path + ".spline", {"t", "phi"});
    return ScalarFunction::spline(sp.at("t").get<std::vector<double>>(),
                                  sp.at("phi").get<std::vector<double>>());
  }
  throw ConfigError(path + ": expected a warp name or {\"spline\": {...}}");
}

inline ScalarFunction parse_psi(const nlohmann::json& spec, const std::string& path) {
  if (spec.is_string()) {
    if (spec.get<std::string>() == "zero") return ScalarFunction::constant(0.0);
    throw ConfigError(path + ": only \"zero\" or a constant is supported");
  }
  if (spec.is_number()) return ScalarFunction::constant(spec.get<double>());
  throw ConfigError(path + ": expected \"zero\" or a number");
}

inline Prescription parse_prescription_field(const nlohmann::json& spec,
                                             const std::string& path) {
  require_keys(spec, path, {"type", "value", "epsilon", "axes"});
  const std::string type = get_or<std::string>(spec, "type", "constant", path);
  const double value = get_or<double>(spec, "value", 1.0, path);
  if (type == "constant") return Prescription::constant(value);
  if (type == "cosine") {
    const double eps = get_or<double>(spec, "epsilon", 0.0, path);
    auto axes = get_or<std::vector<int>>(spec, "axes", {1}, path);
    return Prescription::cosine(value, eps, std::move(axes));
  }
  throw ConfigError(path + ".type: unknown prescription type '" + type + "'");
}

/// Barrier field sampled on the grid: constant or cosine profile.
inline Field sample_barrier(const nlohmann::json& spec, const PeriodicGrid& grid,
                            const std::string& path) {
  require_keys(spec, path, {"type", "value", "epsilon", "axes"});
  const std::string type = get_or<std::string>(spec, "type", "constant", path);
  const double value = get_or<double>(spec, "value", 0.0, path);
  Field u(grid.node_count(), value);
  if (type == "constant") return u;
  if (type == "cosine") {
    const double eps = get_or<double>(spec, "epsilon", 0.0, path);
    const auto axes = get_or<std::vector<int>>(spec, "axes", {1}, path);
    double x[3];
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
      grid.position(p, x);
      double m = eps;
      for (int a : axes) m *= std::cos(x[a - 1]);
      u[p] = value + m;
    }
    return u;
  }
  throw ConfigError(path + ".type: unknown barrier type '" + type + "'");
}

inline const std::map<std::string, const char*>& scenario_table() {
  static const std::map<std::string, const char*> table = {
      {"flrw-gauss-constant", R"json({
        "ambient": {"dimension": 2, "warp": "gauss_decay", "psi": "zero", "slab": [0.25, 2.75]},
        "grid": {"resolution": [32, 32]},
        "curvature": {"family": "K"},
        "prescription": {"f": {"type": "constant", "value": 1.5}, "phi": "log"},
        "barriers": {"lower": {"type": "constant", "value": 1.0},
                     "upper": {"type": "constant", "value": 2.0}},
        "flow": {"dt_safety": 0.9, "tolerance": 5e-7, "max_steps": 100000, "seed": 20260811},
        "output": {"series_stride": 10, "snapshot_every": 0}
      })json"},
      {"flrw-gauss-cosine", R"json({
        "ambient": {"dimension": 2, "warp": "gauss_decay", "psi": "zero", "slab": [0.25, 2.75]},
        "grid": {"resolution": [32, 32]},
        "curvature": {"family": "K"},
        "prescription": {"f": {"type": "cosine", "value": 1.5, "epsilon": 0.1, "axes": [1, 2]},
                          "phi": "log"},
        "barriers": {"lower": {"type": "constant", "value": 1.0},
                     "upper": {"type": "constant", "value": 2.0}},
        "flow": {"dt_safety": 0.9, "tolerance": 1e-5, "max_steps": 100000, "seed": 20260811},
        "output": {"series_stride": 10, "snapshot_every": 0}
      })json"},
      {"minkowski-1d-demo", R"json({
        "ambient": {"dimension": 1, "warp": "gauss_decay", "psi": "zero", "slab": [0.25, 2.75]},
        "grid": {"resolution": [64]},
        "curvature": {"family": "K"},
        "prescription": {"f": {"type": "cosine", "value": 1.5, "epsilon": 0.05, "axes": [1]},
                          "phi": "log"},
        "barriers": {"lower": {"type": "constant", "value": 1.0},
                     "upper": {"type": "constant", "value": 2.0}},
        "flow": {"dt_safety": 0.9, "tolerance": 1e-6, "max_steps": 100000, "seed": 7},
        "output": {"series_stride": 5, "snapshot_every": 0}
      })json"}};
  return table;
}

}  // namespace configdetail

inline CurvatureFunction parse_family(const std::string& expr, int n) {
  return configdetail::FamilyParser(expr, n).parse();
}

inline std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& [k, _] : configdetail::scenario_table()) names.push_back(k);
  return names;
}

inline nlohmann::json scenario_json(const std::string& name) {
  const auto& table = configdetail::scenario_table();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& [k, _] : table) known += " " + k;
    throw ConfigError("unknown scenario '" + name + "'; available:" + known);
  }
  return nlohmann::json::parse(it->second);
}

/// Parses and validates a configuration document.  Parse errors carry the
/// line computed from the byte offset; schema errors carry the JSON path.
inline RunConfig parse_config(const std::string& text) {
  using nlohmann::json;
  namespace cd = configdetail;

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    throw ConfigError("config: JSON parse error at line " + std::to_string(line) + ": " +
                      e.what());
  }

  cd::require_keys(doc, "config",
                   {"scenario", "ambient", "grid", "curvature", "prescription", "barriers",
                    "flow", "output"});
  if (doc.contains("scenario")) {
    json merged = scenario_json(doc.at("scenario").get<std::string>());
    json patch = doc;
    patch.erase("scenario");
    merged.merge_patch(patch);
    doc = std::move(merged);
  }

  RunConfig cfg;

  const json ambient = doc.value("ambient", json::object());
  cd::require_keys(ambient, "ambient", {"dimension", "warp", "psi", "slab"});
  cfg.dimension = cd::get_or<int>(ambient, "dimension", 2, "ambient");
  if (cfg.dimension < 1 || cfg.dimension > 3)
    throw ConfigError("ambient.dimension: must be 1, 2 or 3");
  cfg.warp = ambient.contains("warp") ? cd::parse_warp(ambient.at("warp"), "ambient.warp")
                                      : ScalarFunction::builtin("gauss_decay");
  cfg.psi = ambient.contains("psi") ? cd::parse_psi(ambient.at("psi"), "ambient.psi")
                                    : ScalarFunction::constant(0.0);
  const auto slab = cd::get_or<std::vector<double>>(ambient, "slab", {0.25, 2.75}, "ambient");
  if (slab.size() != 2 || !(slab[0] < slab[1]))
    throw ConfigError("ambient.slab: expected [t_min, t_max] with t_min < t_max");
  cfg.slab = {slab[0], slab[1]};

  const json grid = doc.value("grid", json::object());
  cd::require_keys(grid, "grid", {"resolution"});
  auto res = cd::get_or<std::vector<int>>(grid, "resolution", {32, 32}, "grid");
  if (static_cast<int>(res.size()) != cfg.dimension)
    throw ConfigError("grid.resolution: need one entry per dimension");
  cfg.resolution = {1, 1, 1};
  for (int a = 0; a < cfg.dimension; ++a) {
    if (res[a] < 8) throw ConfigError("grid.resolution: entries must be >= 8");
    cfg.resolution[a] = res[a];
  }

  const json curv = doc.value("curvature", json::object());
  cd::require_keys(curv, "curvature", {"family"});
  cfg.family = cd::get_or<std::string>(curv, "family", "K", "curvature");
  parse_family(cfg.family, cfg.dimension);  // validate now, surface errors early

  const json presc = doc.value("prescription", json::object());
  cd::require_keys(presc, "prescription", {"f", "phi"});
  if (presc.contains("f")) cfg.f = cd::parse_prescription_field(presc.at("f"), "prescription.f");
  if (presc.contains("phi")) {
    const json& p = presc.at("phi");
    if (p.is_string() && p.get<std::string>() == "log")
      cfg.phi = Phi::log();
    else if (p.is_object() && p.contains("power")) {
      cd::require_keys(p, "prescription.phi", {"power"});
      cfg.phi = Phi::power(p.at("power").get<double>());
    } else {
      throw ConfigError("prescription.phi: expected \"log\" or {\"power\": m}");
    }
  }

  const json barriers = doc.value("barriers", json::object());
  cd::require_keys(barriers, "barriers", {"lower", "upper"});
  cfg.lower_spec = barriers.value("lower", nlohmann::json{{"type", "constant"}, {"value", 0.0}});
  cfg.upper_spec = barriers.value("upper", nlohmann::json{{"type", "constant"}, {"value", 1.0}});

  const json flow = doc.value("flow", json::object());
  cd::require_keys(flow, "flow",
                   {"dt_safety", "tolerance", "max_steps", "seed", "unsafe_init", "monitors"});
  cfg.dt_safety = cd::get_or<double>(flow, "dt_safety", 0.9, "flow");
  if (!(cfg.dt_safety > 0.0 && cfg.dt_safety <= 1.0))
    throw ConfigError("flow.dt_safety: must lie in (0, 1]");
  cfg.tolerance = cd::get_or<double>(flow, "tolerance", 1e-6, "flow");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("flow.tolerance: must be positive");
  cfg.max_steps = cd::get_or<long>(flow, "max_steps", 500000, "flow");
  cfg.seed = cd::get_or<std::uint64_t>(flow, "seed", 2024, "flow");
  cfg.unsafe_init = cd::get_or<bool>(flow, "unsafe_init", false, "flow");
  if (flow.contains("monitors")) {
    const json& m = flow.at("monitors");
    cd::require_keys(m, "flow.monitors",
                     {"sign_preservation", "monotone_descent", "containment", "convexity",
                      "vtilde_bound"});
    cfg.monitors.sign_preservation =
        cd::get_or<bool>(m, "sign_preservation", true, "flow.monitors");
    cfg.monitors.monotone_descent =
        cd::get_or<bool>(m, "monotone_descent", true, "flow.monitors");
    cfg.monitors.containment = cd::get_or<bool>(m, "containment", true, "flow.monitors");
    cfg.monitors.convexity = cd::get_or<bool>(m, "convexity", true, "flow.monitors");
    cfg.monitors.vtilde_bound = cd::get_or<bool>(m, "vtilde_bound", true, "flow.monitors");
  }

  const json output = doc.value("output", json::object());
  cd::require_keys(output, "output", {"series_stride", "snapshot_every", "dir"});
  cfg.series_stride = cd::get_or<int>(output, "series_stride", 1, "output");
  if (cfg.series_stride < 1) throw ConfigError("output.series_stride: must be >= 1");
  cfg.snapshot_every = cd::get_or<long>(output, "snapshot_every", 0, "output");

  cfg.resolved = doc;
  return cfg;
}

inline WarpedAmbient make_ambient(const RunConfig& cfg) {
  return WarpedAmbient(cfg.dimension, cfg.warp, cfg.slab, cfg.psi);
}

inline PeriodicGrid make_grid(const RunConfig& cfg) {
  return PeriodicGrid(cfg.dimension, cfg.resolution);
}

inline FlowConfig make_flow_config(const RunConfig& cfg) {
  const PeriodicGrid grid = make_grid(cfg);
  FlowConfig out(make_ambient(cfg), grid, parse_family(cfg.family, cfg.dimension), cfg.f,
                 cfg.phi, configdetail::sample_barrier(cfg.lower_spec, grid, "barriers.lower"),
                 configdetail::sample_barrier(cfg.upper_spec, grid, "barriers.upper"));
  out.dt_safety = cfg.dt_safety;
  out.tolerance = cfg.tolerance;
  out.max_steps = cfg.max_steps;
  out.seed = cfg.seed;
  out.unsafe_init = cfg.unsafe_init;
  out.monitors = cfg.monitors;
  out.series_stride = cfg.series_stride;
  return out;
}

}  // namespace prescurv
