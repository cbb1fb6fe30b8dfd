#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "prescurv/ambient.hpp"
#include "prescurv/grid.hpp"
#include "prescurv/symfunc.hpp"

// Discrete geometry of the space-like graph M = { x^0 = u(x) } over the flat
// torus: induced metric, gradient function, past-directed normal, second
// fundamental form and principal curvatures, assembled node by node.
//
//   g_ij   = e^{2 psi} ( -u_i u_j + sigma_ij )
//   v^2    = 1 - sigma^{ij} u_i u_j
//   nu     = -v^{-1} e^{-psi} (1, u^i)                     (past directed)
//   e^{-psi} v^{-1} h_ij = -u_{;ij} - psi' u_i u_j - Gamma^0_ij
//
// with u_{;ij} covariant in the induced metric; the induced Christoffel
// symbols are assembled analytically by the chain rule through u_i, u_ij, so
// no second finite-difference cascade enters.  Principal curvatures solve
// h_ij w = kappa g_ij w through the Cholesky factor of g, which keeps the
// problem symmetric.

namespace prescurv {

class SpacelikeViolation : public std::runtime_error {
 public:
  SpacelikeViolation(std::size_t node, double v2)
      : std::runtime_error("space-like condition violated at node " + std::to_string(node) +
                           " (v^2 = " + std::to_string(v2) + ")"),
        node(node),
        v2(v2) {}
  std::size_t node;
  double v2;
};

class ConvexityViolation : public std::runtime_error {
 public:
  ConvexityViolation(std::size_t node, double kappa_min)
      : std::runtime_error("principal curvatures left the positive cone at node " +
                           std::to_string(node) + " (kappa_min = " + std::to_string(kappa_min) +
                           ")"),
        node(node),
        kappa_min(kappa_min) {}
  std::size_t node;
  double kappa_min;
};

struct GraphState {
  PeriodicGrid grid;
  WarpedAmbient ambient;
  Field u;
  double t_flow = 0.0;

  GraphState(PeriodicGrid g, WarpedAmbient amb, Field u0, double t0 = 0.0)
      : grid(std::move(g)), ambient(std::move(amb)), u(std::move(u0)), t_flow(t0) {
    if (u.size() != grid.node_count())
      throw std::invalid_argument("graph state: field size does not match grid");
    if (grid.dim() != ambient.dimension())
      throw std::invalid_argument("graph state: grid and ambient dimensions differ");
  }
};

/// Per-node geometry, stored as flat arrays (dim x dim blocks row-major).
struct GeometryFields {
  int dim = 0;
  std::size_t nodes = 0;
  std::vector<double> g, g_inv, h, h_mixed;  // dim*dim per node
  std::vector<double> v, vtilde;
  std::vector<double> nu;     // dim+1 per node, contravariant
  std::vector<double> kappa;  // dim per node, ascending
  std::vector<double> F;
  std::vector<double> F_grad;      // F_i at kappa: F^{ij} diagonalized in the h-eigenframe
  std::vector<double> F_grad_max;  // largest eigenvalue of F^i_j
  bool has_curvature = false;

  double v2_min = 0.0;
  double kappa_min = 0.0;
  double vtilde_max = 0.0;

  void resize(int d, std::size_t n, bool with_curvature) {
    dim = d;
    nodes = n;
    g.assign(n * d * d, 0.0);
    g_inv.assign(n * d * d, 0.0);
    h.assign(n * d * d, 0.0);
    h_mixed.assign(n * d * d, 0.0);
    v.assign(n, 0.0);
    vtilde.assign(n, 0.0);
    nu.assign(n * (d + 1), 0.0);
    kappa.assign(n * d, 0.0);
    has_curvature = with_curvature;
    if (with_curvature) {
      F.assign(n, 0.0);
      F_grad.assign(n * d, 0.0);
      F_grad_max.assign(n, 0.0);
    }
  }

  // all dim x dim blocks are stored row-major
  using BlockMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  BlockMap g_at(std::size_t p) const { return {g.data() + p * dim * dim, dim, dim}; }
  BlockMap g_inv_at(std::size_t p) const { return {g_inv.data() + p * dim * dim, dim, dim}; }
  BlockMap h_at(std::size_t p) const { return {h.data() + p * dim * dim, dim, dim}; }
  BlockMap h_mixed_at(std::size_t p) const { return {h_mixed.data() + p * dim * dim, dim, dim}; }
  Eigen::Map<const Eigen::VectorXd> nu_at(std::size_t p) const {
    return {nu.data() + p * (dim + 1), dim + 1};
  }
  Eigen::Map<const Eigen::VectorXd> kappa_at(std::size_t p) const {
    return {kappa.data() + p * dim, dim};
  }
};

namespace geodetail {

template <int N>
void assemble(const GraphState& state, const DerivativeFields& du, const CurvatureFunction* F,
              double spacelike_floor, GeometryFields& out) {
  using Mat = Eigen::Matrix<double, N, N>;
  using Vec = Eigen::Matrix<double, N, 1>;
  const WarpedAmbient& amb = state.ambient;
  const std::size_t nodes = state.grid.node_count();

  out.v2_min = std::numeric_limits<double>::infinity();
  out.kappa_min = std::numeric_limits<double>::infinity();
  out.vtilde_max = 0.0;

  for (std::size_t p = 0; p < nodes; ++p) {
    const double t = state.u[p];
    amb.require_in_slab(t);

    const double phi = amb.phi(t);
    const double dphi = amb.phi_d1(t);
    const double psi = amb.psi_value(t);
    const double dpsi = amb.psi_d1(t);
    const double sigma = phi * phi;
    const double e2psi = std::exp(2.0 * psi);
    const double epsi = std::exp(psi);

    Vec ui;
    Mat uij;
    for (int a = 0; a < N; ++a) {
      ui[a] = du.first(a, p);
      for (int b = 0; b < N; ++b) uij(a, b) = du.second(a, b, p);
    }

    const double du2 = ui.squaredNorm() / sigma;  // |Du|^2 in sigma
    const double v2 = 1.0 - du2;
    out.v2_min = std::min(out.v2_min, v2);
    if (v2 < spacelike_floor) throw SpacelikeViolation(p, v2);
    const double v = std::sqrt(v2);

    const Mat gmat = e2psi * (sigma * Mat::Identity() - ui * ui.transpose());
    const Vec u_up = ui / sigma;  // sigma^{ij} u_j
    const Mat ginv = (Mat::Identity() / sigma + (u_up * u_up.transpose()) / v2) / e2psi;

    // dg[m](i,j) = partial_m g_ij by the chain rule through u_m, u_im
    Mat dg[N];
    for (int m = 0; m < N; ++m) {
      Mat d = 2.0 * dpsi * ui[m] * gmat;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          double val = -uij(i, m) * ui[j] - ui[i] * uij(j, m);
          if (i == j) val += 2.0 * phi * dphi * ui[m];
          d(i, j) += e2psi * val;
        }
      dg[m] = d;
    }

    // u_{;ij} = u_ij - Gamma^k_ij u_k with induced Christoffel symbols
    Mat ucov = uij;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double corr = 0.0;
        for (int k = 0; k < N; ++k) {
          double gam = 0.0;
          for (int l = 0; l < N; ++l)
            gam += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          corr += gam * ui[k];
        }
        ucov(i, j) -= corr;
      }

    const double gamma0_ij_coeff = phi * dphi + dpsi * sigma;  // Gamma^0_ij = coeff * delta_ij
    Mat hmat;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double rhs = -ucov(i, j) - dpsi * ui[i] * ui[j];
        if (i == j) rhs -= gamma0_ij_coeff;
        hmat(i, j) = epsi * v * rhs;
      }

    const Mat hmix = ginv * hmat;

    // generalized symmetric eigenproblem via the Cholesky factor of g
    const Eigen::LLT<Mat> llt(gmat);
    const Mat l = llt.matrixL();
    const Mat a = l.template triangularView<Eigen::Lower>().solve(
        l.template triangularView<Eigen::Lower>().solve(hmat).transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig;
    eig.computeDirect(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    const Vec kap = eig.eigenvalues();

    out.v[p] = v;
    out.vtilde[p] = 1.0 / v;
    out.vtilde_max = std::max(out.vtilde_max, out.vtilde[p]);
    out.kappa_min = std::min(out.kappa_min, kap[0]);

    double* gp = out.g.data() + p * N * N;
    double* gip = out.g_inv.data() + p * N * N;
    double* hp = out.h.data() + p * N * N;
    double* hmp = out.h_mixed.data() + p * N * N;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        gp[i * N + j] = gmat(i, j);
        gip[i * N + j] = ginv(i, j);
        hp[i * N + j] = hmat(i, j);
        hmp[i * N + j] = hmix(i, j);
      }
    double* nup = out.nu.data() + p * (N + 1);
    const double nufac = -1.0 / (v * epsi);
    nup[0] = nufac;
    for (int i = 0; i < N; ++i) nup[1 + i] = nufac * u_up[i];
    for (int i = 0; i < N; ++i) out.kappa[p * N + i] = kap[i];

    if (F != nullptr) {
      if (kap[0] <= 0.0) throw ConvexityViolation(p, kap[0]);
      double grad[3];
      out.F[p] = F->value_and_gradient(kap.data(), grad);
      double gmax = grad[0];
      for (int i = 0; i < N; ++i) {
        out.F_grad[p * N + i] = grad[i];
        gmax = std::max(gmax, grad[i]);
      }
      out.F_grad_max[p] = gmax;
    }
  }
}

}  // namespace geodetail

/// Full geometry pass.  When `F` is given, principal curvatures must lie in
/// the open positive cone, and per-node F values and gradient bounds are
/// filled in for the flow.
inline GeometryFields compute_geometry(const GraphState& state,
                                       const CurvatureFunction* F = nullptr,
                                       double spacelike_floor = 1e-6) {
  GeometryFields out;
  out.resize(state.grid.dim(), state.grid.node_count(), F != nullptr);
  const DerivativeFields du = compute_derivatives(state.u, state.grid);
  switch (state.grid.dim()) {
    case 1:
      geodetail::assemble<1>(state, du, F, spacelike_floor, out);
      break;
    case 2:
      geodetail::assemble<2>(state, du, F, spacelike_floor, out);
      break;
    default:
      geodetail::assemble<3>(state, du, F, spacelike_floor, out);
      break;
  }
  return out;
}

/// Workspace-reusing variant for the flow loop.
inline void compute_geometry(const GraphState& state, const CurvatureFunction* F,
                             DerivativeFields& du_ws, GeometryFields& out,
                             double spacelike_floor = 1e-6) {
  out.resize(state.grid.dim(), state.grid.node_count(), F != nullptr);
  compute_derivatives(state.u, state.grid, du_ws);
  switch (state.grid.dim()) {
    case 1:
      geodetail::assemble<1>(state, du_ws, F, spacelike_floor, out);
      break;
    case 2:
      geodetail::assemble<2>(state, du_ws, F, spacelike_floor, out);
      break;
    default:
      geodetail::assemble<3>(state, du_ws, F, spacelike_floor, out);
      break;
  }
}

/// The gradient function vtilde = 1/v = (1 - |Du|^2)^{-1/2} and its maximum.
inline std::pair<Field, double> tilde_v(const GraphState& state) {
  const GeometryFields geo = compute_geometry(state);
  return {geo.vtilde, geo.vtilde_max};
}

}  // namespace prescurv
