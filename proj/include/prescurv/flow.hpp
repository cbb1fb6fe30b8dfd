#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prescurv/hypersurface.hpp"
#include "prescurv/prescription.hpp"

// The evolution problem
//
//     du/dt = -e^{-psi} v ( Phi(F) - Phi(f) ),      u(0) = u_upper,
//
// integrated with explicit Euler under a CFL-style step bound from the
// linearized parabolic scale.  Every invariant that holds for the continuum
// flow is monitored discretely: sign preservation of Phi(F) - Phi(f),
// nodewise monotone descent, barrier containment, strict convexity and the
// uniform gradient bound.  Guards abort instead of clamping; a guarded
// failure surfaces under-resolution rather than hiding it.

namespace prescurv {

enum class StopCause { converged, max_steps, spacelike_lost, convexity_lost, left_barriers };

inline const char* to_string(StopCause c) {
  switch (c) {
    case StopCause::converged: return "converged";
    case StopCause::max_steps: return "max_steps";
    case StopCause::spacelike_lost: return "spacelike_lost";
    case StopCause::convexity_lost: return "convexity_lost";
    default: return "left_barriers";
  }
}

struct MonitorConfig {
  bool sign_preservation = true;
  bool monotone_descent = true;
  bool containment = true;
  bool convexity = true;
  bool vtilde_bound = true;
  double sign_tol = 1e-10;
  double descent_tol = 1e-12;
  double containment_tol = 1e-9;
};

struct FlowConfig {
  WarpedAmbient ambient;
  PeriodicGrid grid;
  CurvatureFunction F;
  Prescription f;
  Phi phi;
  Field lower;  // u_1
  Field upper;  // u_2, also the initial hypersurface

  double dt_safety = 0.9;
  double tolerance = 1e-6;
  long max_steps = 500000;
  MonitorConfig monitors;
  std::uint64_t seed = 2024;
  bool unsafe_init = false;          // allow initial data other than the upper barrier
  std::optional<Field> initial;      // only honored with unsafe_init
  int series_stride = 1;
  double spacelike_floor = 1e-6;
  double barrier_tol = 1e-9;         // F-vs-f slack in barrier validation

  FlowConfig(WarpedAmbient amb, PeriodicGrid g, CurvatureFunction curv, Prescription presc,
             Phi p, Field lo, Field hi)
      : ambient(std::move(amb)),
        grid(std::move(g)),
        F(std::move(curv)),
        f(std::move(presc)),
        phi(p),
        lower(std::move(lo)),
        upper(std::move(hi)) {
    if (lower.size() != grid.node_count() || upper.size() != grid.node_count())
      throw std::invalid_argument("flow: barrier fields do not match the grid");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("flow: lower barrier must lie below the upper barrier");
  }
};

struct BarrierVerdict {
  bool valid = false;
  bool spacelike = false;
  bool sigma_empty = false;      // lower barrier: no strictly convex nodes
  double kappa_min = 0.0;
  double worst_margin = 0.0;     // min(F - f) for the upper, min(f - F) on Sigma for the lower
  std::size_t witness_node = 0;
  std::string reason;
};

namespace flowdetail {

inline std::vector<double> node_positions(const PeriodicGrid& grid) {
  std::vector<double> xs(grid.node_count() * 3, 0.0);
  for (std::size_t p = 0; p < grid.node_count(); ++p) grid.position(p, &xs[3 * p]);
  return xs;
}

constexpr double kConvexityTol = 1e-10;  // node counts as strictly convex above this

}  // namespace flowdetail

/// Upper barrier: strictly convex everywhere with F >= f.  Lower barrier:
/// F <= f on the strictly convex locus Sigma, which may be empty.
inline std::pair<BarrierVerdict, BarrierVerdict> validate_barriers(const FlowConfig& cfg) {
  const auto xs = flowdetail::node_positions(cfg.grid);
  BarrierVerdict out[2];
  for (int which = 0; which < 2; ++which) {
    BarrierVerdict& v = out[which];
    const Field& u = (which == 0) ? cfg.lower : cfg.upper;
    GraphState st(cfg.grid, cfg.ambient, u);
    GeometryFields geo;
    try {
      geo = compute_geometry(st, nullptr, cfg.spacelike_floor);
    } catch (const SpacelikeViolation& e) {
      v.valid = false;
      v.spacelike = false;
      v.witness_node = e.node;
      v.reason = e.what();
      continue;
    }
    v.spacelike = true;
    v.kappa_min = geo.kappa_min;
    v.worst_margin = std::numeric_limits<double>::infinity();
    v.sigma_empty = true;
    v.valid = true;

    for (std::size_t p = 0; p < cfg.grid.node_count(); ++p) {
      const double kap_min = geo.kappa[p * geo.dim];
      const bool convex = kap_min > flowdetail::kConvexityTol;
      const double fval = cfg.f.value(u[p], &xs[3 * p]);
      if (which == 1) {  // upper: strict convexity everywhere, F >= f
        if (!convex) {
          v.valid = false;
          v.witness_node = p;
          v.reason = "upper barrier not strictly convex";
          break;
        }
        double grad[3];
        const double Fval = cfg.F.value_and_gradient(geo.kappa.data() + p * geo.dim, grad);
        const double margin = Fval - fval;
        if (margin < v.worst_margin) {
          v.worst_margin = margin;
          v.witness_node = p;
        }
        if (margin < -cfg.barrier_tol) {
          v.valid = false;
          v.reason = "upper barrier has F < f";
        }
      } else if (convex) {  // lower: check only on Sigma
        v.sigma_empty = false;
        double grad[3];
        const double Fval = cfg.F.value_and_gradient(geo.kappa.data() + p * geo.dim, grad);
        const double margin = fval - Fval;
        if (margin < v.worst_margin) {
          v.worst_margin = margin;
          v.witness_node = p;
        }
        if (margin < -cfg.barrier_tol) {
          v.valid = false;
          v.reason = "lower barrier has F > f on its convex locus";
        }
      }
    }
    if (which == 1) v.sigma_empty = false;
  }
  return {out[0], out[1]};
}

struct SeriesRow {
  long step = 0;
  double t_flow = 0.0;
  double dt = 0.0;
  double residual = 0.0;
  double kappa_min = 0.0;
  double vtilde_max = 0.0;
  double dist_lower = 0.0;
  double dist_upper = 0.0;
};

struct MonitorReport {
  bool sign_ok = true;
  bool descent_ok = true;
  bool containment_ok = true;
  bool convexity_ok = true;
  bool vtilde_ok = true;
  double sign_worst = std::numeric_limits<double>::infinity();    // min of Phi(F) - Phi(f)
  double descent_worst = -std::numeric_limits<double>::infinity();  // max of u_new - u_old
  double containment_worst = std::numeric_limits<double>::infinity();
  double kappa_min_run = std::numeric_limits<double>::infinity();
  long first_violation_step = -1;

  void flag(long step) {
    if (first_violation_step < 0) first_violation_step = step;
  }
};

struct ProbeIntegral {
  std::size_t node = 0;
  double integral = 0.0;             // int_0^T |Phi - Phi(f)| dt
  bool crossed = false;              // residual dropped below 10 x tolerance
  double integral_at_crossing = 0.0;
  double t_crossing = 0.0;
};

struct FlowReport {
  StopCause cause = StopCause::max_steps;
  long steps = 0;
  double t_final = 0.0;
  double residual_final = std::numeric_limits<double>::infinity();
  std::vector<SeriesRow> series;
  MonitorReport monitors;
  Field final_u;
  std::vector<ProbeIntegral> probes;
  double vtilde_early_max = 0.0;  // over the first 10 steps
  double vtilde_run_max = 0.0;
  std::size_t witness_node = 0;
  std::string message;
};

/// Right-hand side du/dt = -e^{-psi} v (Phi(F) - Phi(f)) for a state with
/// geometry already assembled.
inline Field flow_rhs(const GraphState& state, const FlowConfig& cfg, const GeometryFields& geo,
                      const std::vector<double>& xs) {
  Field rhs(state.grid.node_count());
  for (std::size_t p = 0; p < rhs.size(); ++p) {
    const double fval = cfg.f.value(state.u[p], &xs[3 * p]);
    const double w = cfg.phi(geo.F[p]) - cfg.phi(fval);
    rhs[p] = -std::exp(-cfg.ambient.psi_value(state.u[p])) * geo.v[p] * w;
  }
  return rhs;
}

/// Convenience wrapper matching the scalar-flow operation: assembles geometry
/// and evaluates the right-hand side field.
inline Field flow_rhs(const GraphState& state, const FlowConfig& cfg) {
  const GeometryFields geo = compute_geometry(state, &cfg.F, cfg.spacelike_floor);
  return flow_rhs(state, cfg, geo, flowdetail::node_positions(state.grid));
}

namespace flowdetail {

/// Parabolic scale of the linearized operator at one node:
///   Lambda = e^{-psi} v Phi'(F) lambda_max(F^ij) lambda_max(g^ij) (2 n e^{psi} v),
/// with lambda_max(g^{ij}) = e^{-2 psi} / (sigma v^2) in closed form.
inline double parabolic_scale(const FlowConfig& cfg, const GraphState& state,
                              const GeometryFields& geo, std::size_t p) {
  const double t = state.u[p];
  const double sigma = cfg.ambient.sigma_coeff(t);
  const double e2psi = std::exp(2.0 * cfg.ambient.psi_value(t));
  const double lam_ginv = 1.0 / (e2psi * sigma * geo.v[p] * geo.v[p]);
  return 2.0 * cfg.grid.dim() * geo.v[p] * geo.v[p] * cfg.phi.d1(geo.F[p]) *
         geo.F_grad_max[p] * lam_ginv;
}

inline double stable_dt(const FlowConfig& cfg, const GraphState& state,
                        const GeometryFields& geo, const Field& rhs) {
  double lambda_max = 0.0;
  for (std::size_t p = 0; p < rhs.size(); ++p)
    lambda_max = std::max(lambda_max, parabolic_scale(cfg, state, geo, p));
  const double h = cfg.grid.min_spacing();
  double dt = cfg.dt_safety * h * h / std::max(lambda_max, 1e-300);

  // keep the predicted state inside the barriers (plus tolerance)
  const double slack = 0.5 * cfg.monitors.containment_tol;
  for (std::size_t p = 0; p < rhs.size(); ++p) {
    if (rhs[p] < 0.0) {
      const double room = state.u[p] - cfg.lower[p] + slack;
      dt = std::min(dt, room / (-rhs[p]));
    } else if (rhs[p] > 0.0) {
      const double room = cfg.upper[p] - state.u[p] + slack;
      dt = std::min(dt, room / rhs[p]);
    }
  }
  return dt;
}

}  // namespace flowdetail

struct StepResult {
  double dt = 0.0;
  double residual = 0.0;  // max |Phi(F) - Phi(f)| before the update
};

/// One explicit Euler step.  Throws SpacelikeViolation / ConvexityViolation
/// when the geometry leaves its admissible set.
inline StepResult flow_step(GraphState& state, const FlowConfig& cfg) {
  const auto xs = flowdetail::node_positions(state.grid);
  const GeometryFields geo = compute_geometry(state, &cfg.F, cfg.spacelike_floor);
  const Field rhs = flow_rhs(state, cfg, geo, xs);
  double residual = 0.0;
  for (std::size_t p = 0; p < rhs.size(); ++p) {
    const double w = cfg.phi(geo.F[p]) - cfg.phi(cfg.f.value(state.u[p], &xs[3 * p]));
    residual = std::max(residual, std::abs(w));
  }
  StepResult out;
  out.residual = residual;
  out.dt = flowdetail::stable_dt(cfg, state, geo, rhs);
  for (std::size_t p = 0; p < rhs.size(); ++p) state.u[p] += out.dt * rhs[p];
  state.t_flow += out.dt;
  return out;
}

using SnapshotHook = std::function<void(const GraphState&, long step)>;

/// Integrates from the upper barrier until max |Phi(F) - Phi(f)| < tolerance
/// or a guard fires.
inline FlowReport flow_run(const FlowConfig& cfg, const SnapshotHook& snapshot = {},
                           long snapshot_every = 0) {
  const auto [lo, hi] = validate_barriers(cfg);
  if (!cfg.unsafe_init) {
    if (!hi.valid)
      throw std::invalid_argument("flow: invalid upper barrier (" + hi.reason + ", node " +
                                  std::to_string(hi.witness_node) + ")");
    if (!lo.valid)
      throw std::invalid_argument("flow: invalid lower barrier (" + lo.reason + ", node " +
                                  std::to_string(lo.witness_node) + ")");
  }

  const auto xs = flowdetail::node_positions(cfg.grid);
  Field u0 = (cfg.unsafe_init && cfg.initial) ? *cfg.initial : cfg.upper;
  GraphState state(cfg.grid, cfg.ambient, std::move(u0));

  FlowReport rep;
  rep.probes.push_back({0, 0.0, false, 0.0, 0.0});
  rep.probes.push_back({cfg.grid.node_count() / 2, 0.0, false, 0.0, 0.0});

  DerivativeFields du_ws;
  GeometryFields geo;
  Field w(cfg.grid.node_count());  // Phi(F) - Phi(f)
  Field prev_u;

  for (long step = 0;; ++step) {
    try {
      compute_geometry(state, &cfg.F, du_ws, geo, cfg.spacelike_floor);
    } catch (const SpacelikeViolation& e) {
      rep.cause = StopCause::spacelike_lost;
      rep.witness_node = e.node;
      rep.message = e.what();
      break;
    } catch (const ConvexityViolation& e) {
      rep.cause = StopCause::convexity_lost;
      rep.monitors.convexity_ok = false;
      rep.witness_node = e.node;
      rep.message = e.what();
      break;
    }

    double residual = 0.0;
    double sign_min = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < w.size(); ++p) {
      w[p] = cfg.phi(geo.F[p]) - cfg.phi(cfg.f.value(state.u[p], &xs[3 * p]));
      residual = std::max(residual, std::abs(w[p]));
      sign_min = std::min(sign_min, w[p]);
    }

    // monitors on the current accepted state
    MonitorReport& mon = rep.monitors;
    mon.kappa_min_run = std::min(mon.kappa_min_run, geo.kappa_min);
    if (cfg.monitors.sign_preservation) {
      mon.sign_worst = std::min(mon.sign_worst, sign_min);
      if (sign_min < -cfg.monitors.sign_tol && mon.sign_ok) {
        mon.sign_ok = false;
        mon.flag(step);
      }
    }
    double dist_lower = std::numeric_limits<double>::infinity();
    double dist_upper = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < w.size(); ++p) {
      dist_lower = std::min(dist_lower, state.u[p] - cfg.lower[p]);
      dist_upper = std::min(dist_upper, cfg.upper[p] - state.u[p]);
    }
    const double contain = std::min(dist_lower, dist_upper);
    mon.containment_worst = std::min(mon.containment_worst, contain);
    if (cfg.monitors.containment && contain < -cfg.monitors.containment_tol) {
      mon.containment_ok = false;
      mon.flag(step);
      if (!cfg.unsafe_init) {
        rep.cause = StopCause::left_barriers;
        rep.message = "containment violated";
        break;
      }
    }
    rep.vtilde_run_max = std::max(rep.vtilde_run_max, geo.vtilde_max);
    if (step < 10) rep.vtilde_early_max = std::max(rep.vtilde_early_max, geo.vtilde_max);

    for (auto& probe : rep.probes)
      if (!probe.crossed && residual < 10.0 * cfg.tolerance) {
        probe.crossed = true;
        probe.integral_at_crossing = probe.integral;
        probe.t_crossing = state.t_flow;
      }

    const bool done = residual < cfg.tolerance;
    const bool out_of_steps = step >= cfg.max_steps;

    if (done || out_of_steps || step % cfg.series_stride == 0) {
      rep.series.push_back({step, state.t_flow, 0.0, residual, geo.kappa_min, geo.vtilde_max,
                            dist_lower, dist_upper});
    }
    if (snapshot && snapshot_every > 0 && step % snapshot_every == 0) snapshot(state, step);

    rep.steps = step;
    rep.residual_final = residual;
    rep.t_final = state.t_flow;
    if (done) {
      rep.cause = StopCause::converged;
      break;
    }
    if (out_of_steps) {
      rep.cause = StopCause::max_steps;
      break;
    }

    // advance
    const Field rhs = flow_rhs(state, cfg, geo, xs);
    const double dt = flowdetail::stable_dt(cfg, state, geo, rhs);
    if (!rep.series.empty() && rep.series.back().step == step) rep.series.back().dt = dt;

    prev_u = state.u;
    for (std::size_t p = 0; p < rhs.size(); ++p) state.u[p] += dt * rhs[p];
    state.t_flow += dt;

    for (auto& probe : rep.probes) probe.integral += dt * std::abs(w[probe.node]);

    if (cfg.monitors.monotone_descent) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < rhs.size(); ++p)
        worst = std::max(worst, state.u[p] - prev_u[p]);
      rep.monitors.descent_worst = std::max(rep.monitors.descent_worst, worst);
      if (worst > cfg.monitors.descent_tol && rep.monitors.descent_ok) {
        rep.monitors.descent_ok = false;
        rep.monitors.flag(step);
      }
    }
  }

  if (cfg.monitors.vtilde_bound && rep.steps >= 10 &&
      rep.vtilde_run_max > 2.0 * rep.vtilde_early_max)
    rep.monitors.vtilde_ok = false;
  rep.monitors.convexity_ok =
      rep.monitors.convexity_ok && rep.monitors.kappa_min_run > 0.0;

  // guards report the last state that passed all checks
  const bool guarded = rep.cause == StopCause::spacelike_lost ||
                       rep.cause == StopCause::convexity_lost ||
                       rep.cause == StopCause::left_barriers;
  rep.final_u = (guarded && !prev_u.empty()) ? prev_u : state.u;
  if (snapshot) snapshot(state, rep.steps);
  return rep;
}

}  // namespace prescurv
