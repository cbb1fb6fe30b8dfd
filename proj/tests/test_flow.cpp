#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "prescurv/evolution_checks.hpp"
#include "prescurv/flow.hpp"

using namespace prescurv;

namespace {

// FLRW-style setting: gauss_decay warp, so the level set at height t has
// kappa_bar(t) = t and the Gauss curvature of that level is t itself.
FlowConfig gauss_config(int res, double f_const, double lo = 1.0, double hi = 2.0) {
  WarpedAmbient amb(2, ScalarFunction::builtin("gauss_decay"), {0.25, 2.75});
  PeriodicGrid grid(2, {res, res, 1});
  FlowConfig cfg(amb, grid, CurvatureFunction::gauss(2), Prescription::constant(f_const),
                 Phi::log(), Field(grid.node_count(), lo), Field(grid.node_count(), hi));
  return cfg;
}

Field cosine_field(const PeriodicGrid& grid, double c, double eps) {
  Field u(grid.node_count());
  double x[3];
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    grid.position(p, x);
    double m = eps;
    for (int a = 0; a < grid.dim(); ++a) m *= std::cos(x[a]);
    u[p] = c + m;
  }
  return u;
}

}  // namespace

TEST_CASE("barrier validation") {
  SECTION("level sets at heights 1 and 2 bracket f = 1.5") {
    const auto cfg = gauss_config(16, 1.5);
    const auto [lo, hi] = validate_barriers(cfg);
    REQUIRE(lo.valid);
    REQUIRE(hi.valid);
    REQUIRE_FALSE(lo.sigma_empty);
    REQUIRE(hi.worst_margin == Catch::Approx(0.5).margin(1e-7));
  }
  SECTION("f = 2.5 invalidates the upper barrier (F = 2 < f)") {
    const auto cfg = gauss_config(16, 2.5);
    const auto [lo, hi] = validate_barriers(cfg);
    REQUIRE(lo.valid);
    REQUIRE_FALSE(hi.valid);
  }
  SECTION("saddle nodes of the lower barrier pass vacuously") {
    auto cfg = gauss_config(16, 2.0, 1.0, 2.2);
    // a short-wavelength wiggle pushes kappa_min below zero at some nodes
    Field wiggle(cfg.grid.node_count());
    double x[3];
    for (std::size_t p = 0; p < cfg.grid.node_count(); ++p) {
      cfg.grid.position(p, x);
      wiggle[p] = 1.0 + 0.12 * std::cos(2.0 * x[0]);
    }
    cfg.lower = wiggle;
    GraphState lower_state(cfg.grid, cfg.ambient, cfg.lower);
    const auto geo = compute_geometry(lower_state);
    REQUIRE(geo.kappa_min < 0.0);  // the wiggle does create non-convex nodes
    const auto [lo, hi] = validate_barriers(cfg);
    REQUIRE(lo.valid);
    REQUIRE(hi.valid);
  }
  SECTION("non-space-like barrier is invalid with a witness") {
    auto cfg = gauss_config(16, 1.5);
    Field bad = cfg.lower;
    double x[3];
    for (std::size_t p = 0; p < cfg.grid.node_count(); ++p) {
      cfg.grid.position(p, x);
      // gradient exceeds the light cone of the warped metric somewhere
      bad[p] = 1.3 + 0.5 * std::sin(x[0]);
    }
    cfg.lower = bad;
    const auto [lo, hi] = validate_barriers(cfg);
    REQUIRE_FALSE(lo.valid);
    REQUIRE_FALSE(lo.spacelike);
  }
}

TEST_CASE("flow right-hand side") {
  SECTION("stationary data: rhs = 0 identically") {
    auto cfg = gauss_config(16, 1.5);
    GraphState st(cfg.grid, cfg.ambient, Field(cfg.grid.node_count(), 1.5));
    const Field rhs = flow_rhs(st, cfg);
    for (double r : rhs) REQUIRE(std::abs(r) < 1e-13);
  }
  SECTION("constant data: rhs = -(log b - log c)") {
    auto cfg = gauss_config(16, 1.5);
    GraphState st(cfg.grid, cfg.ambient, Field(cfg.grid.node_count(), 2.0));
    const Field rhs = flow_rhs(st, cfg);
    const double want = -(std::log(2.0) - std::log(1.5));
    for (double r : rhs) REQUIRE(r == Catch::Approx(want).margin(1e-10));
  }
  SECTION("from a valid upper barrier the rhs is nonpositive") {
    auto cfg = gauss_config(16, 1.5);
    cfg.upper = cosine_field(cfg.grid, 2.0, 0.005);
    GraphState st(cfg.grid, cfg.ambient, cfg.upper);
    for (double r : flow_rhs(st, cfg)) REQUIRE(r <= 1e-12);
  }
}

TEST_CASE("single step") {
  SECTION("stationary state is a fixed point of the stepper") {
    auto cfg = gauss_config(16, 1.5);
    GraphState st(cfg.grid, cfg.ambient, Field(cfg.grid.node_count(), 1.5));
    const Field before = st.u;
    const auto step = flow_step(st, cfg);
    REQUIRE(step.residual < 1e-12);
    for (std::size_t p = 0; p < before.size(); ++p) REQUIRE(st.u[p] == before[p]);
  }
  SECTION("constant data reproduces the scalar Euler step to 1e-14") {
    auto cfg = gauss_config(16, 1.5);
    GraphState st(cfg.grid, cfg.ambient, Field(cfg.grid.node_count(), 2.0));
    const auto step = flow_step(st, cfg);
    const double euler = 2.0 + step.dt * (-(std::log(2.0) - std::log(1.5)));
    for (double u : st.u) REQUIRE(u == Catch::Approx(euler).margin(1e-14));
  }
  SECTION("monotone descent from the upper barrier") {
    auto cfg = gauss_config(16, 1.5);
    cfg.upper = cosine_field(cfg.grid, 2.0, 0.005);
    GraphState st(cfg.grid, cfg.ambient, cfg.upper);
    flow_step(st, cfg);
    for (std::size_t p = 0; p < st.u.size(); ++p) REQUIRE(st.u[p] <= cfg.upper[p] + 1e-12);
  }
}

TEST_CASE("flow run on a coarse certified scenario") {
  auto cfg = gauss_config(16, 1.5);
  cfg.tolerance = 1e-5;
  cfg.max_steps = 200000;
  cfg.series_stride = 10;
  const auto rep = flow_run(cfg);

  SECTION("converges to the stationary level set") {
    REQUIRE(rep.cause == StopCause::converged);
    for (double u : rep.final_u) REQUIRE(u == Catch::Approx(1.5).margin(2e-5));
  }
  SECTION("all monitors stay clean") {
    REQUIRE(rep.monitors.sign_ok);
    REQUIRE(rep.monitors.descent_ok);
    REQUIRE(rep.monitors.containment_ok);
    REQUIRE(rep.monitors.convexity_ok);
    REQUIRE(rep.monitors.vtilde_ok);
    REQUIRE(rep.monitors.kappa_min_run > 0.0);
  }
  SECTION("series timestamps strictly increase and residual eventually decreases") {
    for (std::size_t k = 1; k < rep.series.size(); ++k)
      REQUIRE(rep.series[k].t_flow > rep.series[k - 1].t_flow);
    const std::size_t half = rep.series.size() / 2;
    for (std::size_t k = half + 1; k < rep.series.size(); ++k)
      REQUIRE(rep.series[k].residual <=
              rep.series[k - 1].residual * (1.0 + 1e-12));
  }
  SECTION("partial integral is Cauchy once the residual crosses 10x tolerance") {
    for (const auto& probe : rep.probes) {
      REQUIRE(probe.crossed);
      const double tail = probe.integral - probe.integral_at_crossing;
      REQUIRE(tail >= 0.0);
      REQUIRE(tail < 1e-3);
    }
  }
  SECTION("zero-step convergence when f matches the initial level") {
    auto cfg2 = gauss_config(16, 2.0);
    // widen the upper barrier so F(upper) = 2.0 = f exactly at the start
    const auto rep2 = flow_run(cfg2);
    REQUIRE(rep2.cause == StopCause::converged);
    REQUIRE(rep2.steps == 0);
  }
}

TEST_CASE("flow guards") {
  SECTION("prescription below both barriers aborts on containment") {
    // f = 0.9 < F(lower level) = 1: the stationary point lies below the
    // lower barrier, so the dt cap parks the flow at the barrier and the
    // containment guard never fires; instead the flow stalls at max_steps.
    // Validation already rejects this pair (lower barrier has F > f), so the
    // run refuses to start outside unsafe mode.
    auto cfg = gauss_config(16, 0.9);
    REQUIRE_THROWS_AS(flow_run(cfg), std::invalid_argument);
  }
  SECTION("unsafe init demotes validation to a warning") {
    auto cfg = gauss_config(16, 1.5);
    cfg.unsafe_init = true;
    cfg.initial = Field(cfg.grid.node_count(), 1.8);
    cfg.tolerance = 1e-4;
    const auto rep = flow_run(cfg);
    REQUIRE(rep.cause == StopCause::converged);
  }
}

TEST_CASE("power-law rescaling keeps the monitor contracts") {
  // Phi(r) = -r^{-m}/m behind the same flow machinery as the logarithm
  WarpedAmbient amb(2, ScalarFunction::builtin("gauss_decay"), {0.25, 2.75});
  PeriodicGrid grid(2, {16, 16, 1});
  FlowConfig cfg(amb, grid, CurvatureFunction::gauss(2), Prescription::constant(1.5),
                 Phi::power(1.0), Field(grid.node_count(), 1.0), Field(grid.node_count(), 2.0));
  cfg.tolerance = 1e-5;
  const auto rep = flow_run(cfg);
  REQUIRE(rep.cause == StopCause::converged);
  REQUIRE(rep.monitors.sign_ok);
  REQUIRE(rep.monitors.descent_ok);
  REQUIRE(rep.monitors.containment_ok);
  REQUIRE(rep.monitors.convexity_ok);
  // residual 1e-5 in Phi units: |1/f - 1/F| ~ |u - f| / f^2
  for (double u : rep.final_u) REQUIRE(u == Catch::Approx(1.5).margin(3e-5));
}

TEST_CASE("scalar ODE oracle") {
  WarpedAmbient amb(2, ScalarFunction::builtin("gauss_decay"), {0.25, 2.75});
  const auto K = CurvatureFunction::gauss(2);

  SECTION("monotone decay to the fixed point u = f") {
    OdeOracle oracle(amb, K, Phi::log(), 1.5, 2.0);
    double prev = 2.0;
    for (double t : {1.0, 2.0, 5.0, 10.0, 30.0}) {
      const double u = oracle.advance_to(t);
      REQUIRE(u < prev);
      prev = u;
    }
    REQUIRE(oracle.advance_to(60.0) == Catch::Approx(1.5).margin(1e-9));
    REQUIRE(ode_fixed_point(amb, K, Phi::log(), 1.5, 0.3, 2.7) ==
            Catch::Approx(1.5).margin(1e-12));
  }
  SECTION("f at the initial level gives a constant trajectory") {
    OdeOracle oracle(amb, K, Phi::log(), 2.0, 2.0);
    REQUIRE(oracle.advance_to(5.0) == Catch::Approx(2.0).margin(1e-12));
  }
  SECTION("cone violation for nonpositive level curvature") {
    WarpedAmbient flat(2, ScalarFunction::builtin("const"), {-1.0, 1.0});
    REQUIRE_THROWS_AS(level_curvature_value(flat, K, 0.0), ConeViolation);
  }
  SECTION("PDE trajectory equals the Euler reduction and tracks the oracle") {
    auto cfg = gauss_config(16, 1.5);
    cfg.tolerance = 1e-4;
    GraphState st(cfg.grid, cfg.ambient, cfg.upper);
    OdeOracle oracle(amb, K, Phi::log(), 1.5, 2.0);
    double u_euler = 2.0;
    const auto rhs_scalar = scalar_flow_rhs(amb, K, Phi::log(), 1.5);
    double max_equiv = 0.0;
    for (int k = 0; k < 400; ++k) {
      const auto step = flow_step(st, cfg);
      u_euler += step.dt * rhs_scalar(u_euler);  // same dt sequence
      for (double u : st.u) max_equiv = std::max(max_equiv, std::abs(u - u_euler));
    }
    REQUIRE(max_equiv < 1e-10);  // the PDE pipeline reduces exactly
    // the adaptive oracle differs only by the Euler truncation error
    const double u_ref = oracle.advance_to(st.t_flow);
    REQUIRE(std::abs(u_euler - u_ref) < 5e-3);
  }
}

TEST_CASE("evolution identities") {
  SECTION("exactly zero on stationary data") {
    auto base = gauss_config(16, 1.5);
    GraphState st(base.grid, base.ambient, Field(base.grid.node_count(), 1.5));
    // pin f to the pipeline value of F so Phi(F) - Phi(f) is zero bitwise
    const auto geo = compute_geometry(st, &base.F);
    FlowConfig cfg(base.ambient, base.grid, base.F, Prescription::constant(geo.F[0]),
                   Phi::log(), base.lower, base.upper);
    const auto gres = verify_metric_evolution(st, cfg, 1e-4);
    const auto nres = verify_normal_evolution(st, cfg, 1e-4);
    REQUIRE(gres.absolute == 0.0);
    REQUIRE(nres.absolute == 0.0);
  }
  SECTION("constant data: residual below 1e-6 at dt = 1e-5") {
    auto cfg = gauss_config(16, 1.5);
    GraphState st(cfg.grid, cfg.ambient, Field(cfg.grid.node_count(), 2.0));
    const auto gres = verify_metric_evolution(st, cfg, 1e-5);
    REQUIRE(gres.absolute < 1e-6);
    const auto nres = verify_normal_evolution(st, cfg, 1e-5);
    REQUIRE(nres.absolute < 1e-6);
  }
  SECTION("order fit >= 0.9 in dt on varying data") {
    auto cfg = gauss_config(16, 1.5);
    WarpedAmbient amb = cfg.ambient;
    FlowConfig vcfg(amb, cfg.grid, CurvatureFunction::gauss(2),
                    Prescription::cosine(1.5, 0.1, {1, 2}), Phi::log(), cfg.lower, cfg.upper);
    GraphState st(vcfg.grid, vcfg.ambient, vcfg.upper);
    std::vector<double> dts = {4e-3, 2e-3, 1e-3, 5e-4};
    std::vector<double> gres, nres;
    for (double dt : dts) {
      gres.push_back(verify_metric_evolution(st, vcfg, dt).absolute);
      nres.push_back(verify_normal_evolution(st, vcfg, dt).absolute);
    }
    REQUIRE(fit_order_differences(dts, gres) >= 0.9);
    REQUIRE(fit_order_differences(dts, nres) >= 0.9);
  }
  SECTION("normal evolution residual hits the FD floor for constant f") {
    auto cfg = gauss_config(16, 1.5);
    GraphState st(cfg.grid, cfg.ambient, Field(cfg.grid.node_count(), 1.9));
    // spatially constant state and prescription: gradient of a constant
    const auto nres = verify_normal_evolution(st, cfg, 1e-6);
    REQUIRE(nres.absolute <= 1e-10);
  }
}
