#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "prescurv/flow.hpp"

// Verified evolution identities of the flow and the scalar ODE oracle.
//
// Under the material flow dx = (Phi - Phi(f)) nu dt the metric and normal of
// the flow hypersurfaces satisfy
//
//     dg_ij/dt = 2 (Phi - Phi(f)) h_ij
//     Dnu/dt   = g^{ij} (Phi - Phi(f))_i x_j
//
// with total (material) time derivatives.  The graph evolution moves nodes
// vertically, so the material derivative is reconstructed from the graph
// fields by adding the Lie transport along the tangential node velocity
// theta^i = (Phi - Phi(f)) nu^i.  Both checks roll a probe Euler step of
// length dt and evaluate the identity at the midpoint state, giving
// residuals of size O(dt^2) + O(h^2); on stationary data they vanish
// identically.

namespace prescurv {

struct EvolutionResidual {
  double absolute = 0.0;
  double relative = 0.0;  // absolute / (1 + max |rhs|)
};

namespace evodetail {

inline Field scalar_field_gradient_axis(const Field& s, const PeriodicGrid& grid, int axis) {
  Field out(grid.node_count());
  const double h = grid.spacing(axis);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    out[p] = (s[grid.shift(p, axis, +1)] - s[grid.shift(p, axis, -1)]) / (2.0 * h);
  return out;
}

struct FlowFields {
  GeometryFields geo;
  Field w;                    // Phi(F) - Phi(f)
  std::vector<Field> theta;   // tangential velocity components, dim entries
  Field rhs;                  // du/dt
};

inline FlowFields assemble_fields(const GraphState& state, const FlowConfig& cfg) {
  FlowFields out;
  out.geo = compute_geometry(state, &cfg.F, cfg.spacelike_floor);
  const auto xs = flowdetail::node_positions(state.grid);
  const std::size_t nodes = state.grid.node_count();
  const int dim = state.grid.dim();
  out.w.resize(nodes);
  out.rhs.resize(nodes);
  out.theta.assign(dim, Field(nodes));
  for (std::size_t p = 0; p < nodes; ++p) {
    const double fval = cfg.f.value(state.u[p], &xs[3 * p]);
    out.w[p] = cfg.phi(out.geo.F[p]) - cfg.phi(fval);
    out.rhs[p] = -std::exp(-cfg.ambient.psi_value(state.u[p])) * out.geo.v[p] * out.w[p];
    for (int i = 0; i < dim; ++i) out.theta[i][p] = out.w[p] * out.geo.nu[p * (dim + 1) + 1 + i];
  }
  return out;
}

}  // namespace evodetail

/// Residual of dg_ij/dt = 2 (Phi - Phi(f)) h_ij after one probe Euler step of
/// length dt, with the tangential Lie transport reconstructed from the graph
/// decomposition of the flow.
inline EvolutionResidual verify_metric_evolution(const GraphState& state, const FlowConfig& cfg,
                                                 double dt) {
  const PeriodicGrid& grid = state.grid;
  const int dim = grid.dim();
  const std::size_t nodes = grid.node_count();

  const auto now = evodetail::assemble_fields(state, cfg);

  GraphState next = state;
  for (std::size_t p = 0; p < nodes; ++p) next.u[p] += dt * now.rhs[p];
  const GeometryFields geo_next = compute_geometry(next, nullptr, cfg.spacelike_floor);

  GraphState mid = state;
  for (std::size_t p = 0; p < nodes; ++p) mid.u[p] += 0.5 * dt * now.rhs[p];
  const auto half = evodetail::assemble_fields(mid, cfg);

  // spatial derivatives of the metric components and of theta at the midpoint
  std::vector<std::vector<Field>> dgrad(dim, std::vector<Field>(dim * dim));
  Field comp(nodes);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      for (std::size_t p = 0; p < nodes; ++p) comp[p] = half.geo.g[p * dim * dim + i * dim + j];
      for (int m = 0; m < dim; ++m)
        dgrad[m][i * dim + j] = evodetail::scalar_field_gradient_axis(comp, grid, m);
    }
  std::vector<std::vector<Field>> dtheta(dim, std::vector<Field>(dim));
  for (int k = 0; k < dim; ++k)
    for (int m = 0; m < dim; ++m)
      dtheta[m][k] = evodetail::scalar_field_gradient_axis(half.theta[k], grid, m);

  EvolutionResidual res;
  double rhs_max = 0.0;
  for (std::size_t p = 0; p < nodes; ++p) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const double ddt = (geo_next.g[p * dim * dim + i * dim + j] -
                            now.geo.g[p * dim * dim + i * dim + j]) /
                           dt;
        double lie = 0.0;
        for (int k = 0; k < dim; ++k) {
          lie += half.theta[k][p] * dgrad[k][i * dim + j][p];
          lie += half.geo.g[p * dim * dim + k * dim + j] * dtheta[i][k][p];
          lie += half.geo.g[p * dim * dim + i * dim + k] * dtheta[j][k][p];
        }
        const double lhs = ddt + lie;
        const double rhs = 2.0 * half.w[p] * half.geo.h[p * dim * dim + i * dim + j];
        res.absolute = std::max(res.absolute, std::abs(lhs - rhs));
        rhs_max = std::max(rhs_max, std::abs(rhs));
      }
  }
  res.relative = res.absolute / (1.0 + rhs_max);
  return res;
}

/// Residual of Dnu/dt = g^{ij} (Phi - Phi(f))_i x_j, the covariant material
/// derivative of the past-directed normal.
inline EvolutionResidual verify_normal_evolution(const GraphState& state, const FlowConfig& cfg,
                                                 double dt) {
  const PeriodicGrid& grid = state.grid;
  const int dim = grid.dim();
  const std::size_t nodes = grid.node_count();

  const auto now = evodetail::assemble_fields(state, cfg);

  GraphState next = state;
  for (std::size_t p = 0; p < nodes; ++p) next.u[p] += dt * now.rhs[p];
  const GeometryFields geo_next = compute_geometry(next, nullptr, cfg.spacelike_floor);

  GraphState mid = state;
  for (std::size_t p = 0; p < nodes; ++p) mid.u[p] += 0.5 * dt * now.rhs[p];
  const auto half = evodetail::assemble_fields(mid, cfg);
  const auto du_mid = compute_derivatives(mid.u, grid);

  // gradient of w = Phi(F) - Phi(f) and of the normal components at midpoint
  std::vector<Field> dw(dim);
  for (int m = 0; m < dim; ++m) dw[m] = evodetail::scalar_field_gradient_axis(half.w, grid, m);
  std::vector<std::vector<Field>> dnu(dim, std::vector<Field>(dim + 1));
  Field comp(nodes);
  for (int a = 0; a <= dim; ++a) {
    for (std::size_t p = 0; p < nodes; ++p) comp[p] = half.geo.nu[p * (dim + 1) + a];
    for (int m = 0; m < dim; ++m) dnu[m][a] = evodetail::scalar_field_gradient_axis(comp, grid, m);
  }

  EvolutionResidual res;
  double rhs_max = 0.0;
  for (std::size_t p = 0; p < nodes; ++p) {
    const auto ch = cfg.ambient.christoffels(mid.u[p]);
    for (int a = 0; a <= dim; ++a) {
      // material derivative: components, tangential transport, connection term
      double lhs = (geo_next.nu[p * (dim + 1) + a] - now.geo.nu[p * (dim + 1) + a]) / dt;
      for (int k = 0; k < dim; ++k) lhs += half.theta[k][p] * dnu[k][a][p];
      for (int b = 0; b <= dim; ++b) {
        const double xdot_b = half.w[p] * half.geo.nu[p * (dim + 1) + b];
        for (int c = 0; c <= dim; ++c)
          lhs += ch.gamma(a, b, c) * xdot_b * half.geo.nu[p * (dim + 1) + c];
      }

      double rhs = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          const double xja = (a == 0) ? du_mid.first(j, p) : (a - 1 == j ? 1.0 : 0.0);
          rhs += half.geo.g_inv[p * dim * dim + i * dim + j] * dw[i][p] * xja;
        }
      res.absolute = std::max(res.absolute, std::abs(lhs - rhs));
      rhs_max = std::max(rhs_max, std::abs(rhs));
    }
  }
  res.relative = res.absolute / (1.0 + rhs_max);
  return res;
}

/// Curvature of the level hypersurface at height t as seen by F:
/// F(kappa_bar, ..., kappa_bar) = F(1,...,1) kappa_bar^{d0}.
inline double level_curvature_value(const WarpedAmbient& amb, const CurvatureFunction& F,
                                    double t) {
  const double kb = amb.kappa_bar(t);
  if (!(kb > 0.0)) throw ConeViolation(0, kb);
  return F.value(Eigen::VectorXd::Ones(F.arg_dimension()) * kb);
}

/// du/dt = -e^{-psi(u)} ( Phi(F(level u)) - Phi(f) ) for spatially constant
/// data; the graph flow reduces to this scalar ODE.
inline std::function<double(double)> scalar_flow_rhs(const WarpedAmbient& amb,
                                                     const CurvatureFunction& F, const Phi& phi,
                                                     double f_const) {
  const double ftilde = phi(f_const);
  return [amb, F, phi, ftilde](double u) {
    return -std::exp(-amb.psi_value(u)) * (phi(level_curvature_value(amb, F, u)) - ftilde);
  };
}

/// High-order adaptive reference trajectory of the scalar reduction,
/// relative error target 1e-10.
class OdeOracle {
 public:
  OdeOracle(const WarpedAmbient& amb, const CurvatureFunction& F, const Phi& phi, double f_const,
            double u0)
      : rhs_(scalar_flow_rhs(amb, F, phi, f_const)), t_(0.0), u_(u0) {}

  /// Integrates the internal state forward to time t and returns u(t).
  double advance_to(double t) {
    namespace ode = boost::numeric::odeint;
    if (t < t_) throw std::invalid_argument("ode oracle: time must be nondecreasing");
    if (t == t_) return u_;
    using state_t = std::array<double, 1>;
    auto sys = [this](const state_t& y, state_t& dydt, double) { dydt[0] = rhs_(y[0]); };
    state_t y{u_};
    auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<state_t>>(1e-12, 1e-10);
    ode::integrate_adaptive(stepper, sys, y, t_, t, std::min(1e-3, t - t_));
    t_ = t;
    u_ = y[0];
    return u_;
  }

  double time() const { return t_; }
  double value() const { return u_; }

 private:
  std::function<double(double)> rhs_;
  double t_;
  double u_;
};

/// Stationary height of the scalar reduction: Phi(F(level u)) = Phi(f),
/// bracketed bisection on a monotone level-curvature profile.
inline double ode_fixed_point(const WarpedAmbient& amb, const CurvatureFunction& F,
                              const Phi& phi, double f_const, double lo, double hi) {
  auto g = [&](double u) { return phi(level_curvature_value(amb, F, u)) - phi(f_const); };
  double glo = g(lo), ghi = g(hi);
  if (glo * ghi > 0.0) throw std::invalid_argument("fixed point: bracket does not straddle");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (gm * glo < 0.0) {
      hi = mid;
      ghi = gm;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  return 0.5 * (lo + hi);
}

/// Least-squares order of r(dt) ~ C dt^q fitted on successive differences,
/// which cancels any dt-independent floor in the residuals.
inline double fit_order_differences(const std::vector<double>& dts,
                                    const std::vector<double>& residuals) {
  if (dts.size() < 3 || dts.size() != residuals.size())
    throw std::invalid_argument("order fit: need at least 3 samples");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k + 1 < dts.size(); ++k) {
    const double dr = residuals[k] - residuals[k + 1];
    const double dd = dts[k] - dts[k + 1];
    if (dr <= 0.0 || dd <= 0.0) return 0.0;  // not decreasing; no positive order
    xs.push_back(std::log(dts[k]));
    ys.push_back(std::log(dr / dd));  // ~ (q-1) log dt + const for r = C dt^q
  }
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return slope + 1.0;
}

}  // namespace prescurv
