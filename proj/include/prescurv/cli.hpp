#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prescurv/acceptance.hpp"
#include "prescurv/ambient_curvature.hpp"
#include "prescurv/certify.hpp"
#include "prescurv/config.hpp"
#include "prescurv/io.hpp"

// Subcommand dispatch.  Exit codes: 0 success / converged, 2 guard abort or
// invalid input, 3 max_steps exhausted, 64 usage errors.

namespace prescurv::cli {

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::string& path) {
  RunConfig rc = parse_config(read_file(path));
  if (const char* env = std::getenv("PRESCURV_SEED")) {
    rc.seed = std::strtoull(env, nullptr, 10);
    rc.resolved["flow"]["seed"] = rc.seed;
  }
  return rc;
}

inline int cmd_run(const std::string& config_path, const std::string& out_dir,
                   bool unsafe_init) {
  const RunConfig rc = load_config(config_path);
  FlowConfig cfg = make_flow_config(rc);
  cfg.unsafe_init = cfg.unsafe_init || unsafe_init;

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  SnapshotHook hook;
  if (rc.snapshot_every > 0) {
    hook = [&](const GraphState& state, long step) {
      io::atomic_write(dir / ("snapshot_" + std::to_string(step) + ".json"),
                       io::snapshot_json(state).dump(2) + "\n");
    };
  }

  FlowReport rep;
  try {
    rep = flow_run(cfg, hook, rc.snapshot_every);
  } catch (const std::invalid_argument& e) {
    std::cerr << "run: " << e.what() << "\n";
    return 2;
  }

  io::atomic_write(dir / "series.csv", io::series_csv(rep));
  io::atomic_write(dir / "report.json",
                   io::report_json(rep, rc.resolved, rc.seed).dump(2) + "\n");
  {
    GraphState final_state(cfg.grid, cfg.ambient, rep.final_u);
    GeometryFields geo;
    try {
      geo = compute_geometry(final_state);
      io::atomic_write(dir / "final_fields.csv", io::fields_csv(final_state, geo));
    } catch (const std::exception&) {
      // a guarded abort can leave a state whose fields are not computable
    }
    io::atomic_write(dir / "final_snapshot.json",
                     io::snapshot_json(final_state).dump(2) + "\n");
  }

  std::cout << "stop cause: " << to_string(rep.cause) << ", steps: " << rep.steps
            << ", residual: " << io::format_double(rep.residual_final) << "\n";
  switch (rep.cause) {
    case StopCause::converged: return 0;
    case StopCause::max_steps: return 3;
    default: return 2;
  }
}

inline int cmd_check_curvfun(const std::string& family, int n, int samples,
                             std::uint64_t seed) {
  SampleSpec spec;
  spec.count = samples;
  spec.seed = seed;
  const CurvatureFunction F = parse_family(family, n);
  const ClassReport rep = classify(F, spec);
  std::cout << rep.to_json().dump(2) << "\n";
  return 0;
}

inline int cmd_inspect_ambient(const std::string& config_path, double lambda, int points) {
  const RunConfig rc = load_config(config_path);
  const WarpedAmbient amb = make_ambient(rc);
  const Slab slab = amb.slab();
  std::cout << "t,kappa_bar,chi_pd(lambda)\n";
  for (int k = 0; k <= points; ++k) {
    const double t = slab.t_min + slab.width() * k / points;
    const auto chi = convex_chi(amb, {t, t}, lambda, 1, 512, rc.seed);
    std::cout << io::format_double(t) << "," << io::format_double(amb.kappa_bar(t)) << ","
              << (chi.positive_definite ? 1 : 0) << "\n";
  }
  return 0;
}

inline int cmd_barriers(const std::string& config_path) {
  const RunConfig rc = load_config(config_path);
  const FlowConfig cfg = make_flow_config(rc);
  const auto [lo, hi] = validate_barriers(cfg);
  auto to_json = [](const BarrierVerdict& v) {
    return nlohmann::json{{"valid", v.valid},
                          {"spacelike", v.spacelike},
                          {"sigma_empty", v.sigma_empty},
                          {"kappa_min", v.kappa_min},
                          {"worst_margin", v.worst_margin},
                          {"witness_node", v.witness_node},
                          {"reason", v.reason}};
  };
  const nlohmann::json out{{"lower", to_json(lo)}, {"upper", to_json(hi)}};
  std::cout << out.dump(2) << "\n";
  return lo.valid && hi.valid ? 0 : 2;
}

inline int cmd_verify(std::optional<int> only) {
  const auto results = acceptance::run_acceptance(only);
  acceptance::print_results(results, std::cout);
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}

}  // namespace detail

/// Entry point used by the binary and by in-process tests.
inline int dispatch(std::vector<std::string> args) {
  CLI::App app{"prescribed-curvature flow over a compact Cauchy hypersurface"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::string family = "K";
  int n = 2, samples = 10000, points = 32;
  std::uint64_t seed = 2024;
  double lambda = 10.0;
  int criterion = 0;

  bool unsafe_init = false;
  auto* run = app.add_subcommand("run", "integrate the flow for a configuration");
  run->add_option("--config", config_path, "configuration file (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--unsafe-init", unsafe_init,
                "demote barrier validation to warnings and allow custom initial data");

  auto* check = app.add_subcommand("check-curvfun", "certify a curvature function");
  check->add_option("--family", family, "family expression, e.g. product(power(sigma,2),K)")
      ->required();
  check->add_option("--n", n, "argument dimension (1..3)")->required();
  check->add_option("--samples", samples, "sample count");
  check->add_option("--seed", seed, "sampling seed");

  auto* inspect = app.add_subcommand("inspect-ambient", "tabulate level-set curvature");
  inspect->add_option("--config", config_path, "configuration file (JSON)")->required();
  inspect->add_option("--lambda", lambda, "chi exponent for the convexity column");
  inspect->add_option("--points", points, "table resolution");

  auto* barriers = app.add_subcommand("barriers", "validate the configured barrier pair");
  barriers->add_option("--config", config_path, "configuration file (JSON)")->required();

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--criterion", criterion, "run a single criterion (1..8)");

  try {
    std::reverse(args.begin(), args.end());  // CLI11 parses reversed vectors
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 64;
  }

  try {
    if (const char* env = std::getenv("PRESCURV_SEED")) seed = std::strtoull(env, nullptr, 10);
    if (run->parsed()) return detail::cmd_run(config_path, out_dir, unsafe_init);
    if (check->parsed()) return detail::cmd_check_curvfun(family, n, samples, seed);
    if (inspect->parsed()) return detail::cmd_inspect_ambient(config_path, lambda, points);
    if (barriers->parsed()) return detail::cmd_barriers(config_path);
    if (verify->parsed())
      return detail::cmd_verify(criterion > 0 ? std::optional<int>(criterion) : std::nullopt);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 64;
}

}  // namespace prescurv::cli
