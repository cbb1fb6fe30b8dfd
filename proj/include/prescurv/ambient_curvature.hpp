#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "prescurv/ambient.hpp"
#include "prescurv/rng.hpp"

// Curvature of the ambient manifold assembled numerically from the analytic
// Christoffel symbols, plus the verification operations built on it: the
// mean-curvature identity of the level foliation, the timelike-convergence
// sampler and the strictly convex function chi = e^{lambda t}.
//
// Sign convention: R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G G - G G, fixed
// by requiring the level-set identity
//     dH/dt = Ric(nu,nu) + |A|^2
// to hold in normal Gaussian coordinates.

namespace prescurv {

/// Dense R_{abcd} on spacetime indices 0..n.
class RiemannTensor {
 public:
  explicit RiemannTensor(int dim) : dim_(dim), data_(dim * dim * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int a, int b, int c, int d) {
    return data_[((a * dim_ + b) * dim_ + c) * dim_ + d];
  }
  double operator()(int a, int b, int c, int d) const {
    return data_[((a * dim_ + b) * dim_ + c) * dim_ + d];
  }

  /// max |R_{abcd} + R_{bacd}|, |R_{abcd} + R_{abdc}|, |R_{abcd} - R_{cdab}|.
  double symmetry_residual() const {
    double r = 0.0;
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b)
        for (int c = 0; c < dim_; ++c)
          for (int d = 0; d < dim_; ++d) {
            const double v = (*this)(a, b, c, d);
            r = std::max(r, std::abs(v + (*this)(b, a, c, d)));
            r = std::max(r, std::abs(v + (*this)(a, b, d, c)));
            r = std::max(r, std::abs(v - (*this)(c, d, a, b)));
          }
    return r;
  }

 private:
  int dim_;
  std::vector<double> data_;
};

namespace detail {

/// Central difference with one Richardson extrapolation step.
template <class F>
double fd_richardson(const F& f, double t, double h) {
  const double d1 = (f(t + h) - f(t - h)) / (2.0 * h);
  const double d2 = (f(t + 0.5 * h) - f(t - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

inline double fd_step(const WarpedAmbient& amb) { return amb.slab().width() * 1e-4; }

}  // namespace detail

/// Curvature tensor R_{abcd} at interior time t, assembled from finite
/// differences of the analytic Christoffel symbols.
inline RiemannTensor riemann_numeric(const WarpedAmbient& amb, double t) {
  const int d = amb.dimension() + 1;
  const double h = detail::fd_step(amb);
  amb.require_in_slab(t, 1.5 * h);

  const AmbientChristoffels ch = amb.christoffels(t);
  // dGamma^a_{bc}/dt
  std::vector<double> dch(d * d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        dch[(a * d + b) * d + c] = detail::fd_richardson(
            [&](double s) { return amb.christoffels(s).gamma(a, b, c); }, t, h);
  auto dgamma = [&](int a, int b, int c) { return dch[(a * d + b) * d + c]; };

  // R^a_{bcd}; only the time derivative contributes on the flat torus.
  RiemannTensor up(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double v = 0.0;
          if (c == 0) v += dgamma(a, e, b);
          if (e == 0) v -= dgamma(a, c, b);
          for (int m = 0; m < d; ++m)
            v += ch.gamma(a, c, m) * ch.gamma(m, e, b) - ch.gamma(a, e, m) * ch.gamma(m, c, b);
          up(a, b, c, e) = v;
        }

  const Eigen::MatrixXd g = amb.spacetime_metric(t);
  RiemannTensor low(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double v = 0.0;
          for (int m = 0; m < d; ++m) v += g(a, m) * up(m, b, c, e);
          low(a, b, c, e) = v;
        }
  return low;
}

/// Ricci tensor R_{bd} = g^{ac} R_{abcd}.
inline Eigen::MatrixXd ricci_numeric(const WarpedAmbient& amb, double t) {
  const int d = amb.dimension() + 1;
  const RiemannTensor riem = riemann_numeric(amb, t);
  const Eigen::MatrixXd ginv = amb.spacetime_metric(t).inverse();
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e) {
      double v = 0.0;
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) v += ginv(a, c) * riem(a, b, c, e);
      ric(b, e) = v;
    }
  return ric;
}

/// Residual of dH/dt = Ric(nu,nu) + |A|^2 for the level foliation, valid in
/// normal Gaussian coordinates (psi == 0).  Both sides are computed
/// independently: the left by differencing H(t) = sigma^{ij} \bar h_ij, the
/// right from the numeric Ricci tensor.
inline double verify_mean_curvature_identity(const WarpedAmbient& amb, double t) {
  if (!amb.psi_is_zero())
    throw std::invalid_argument("mean-curvature identity requires psi == 0");
  const double h = detail::fd_step(amb);
  amb.require_in_slab(t, 1.5 * h);
  const int n = amb.dimension();

  auto mean_curvature = [&](double s) { return n * amb.kappa_bar(s); };
  const double dH = detail::fd_richardson(mean_curvature, t, h);

  const double ric_nn = ricci_numeric(amb, t)(0, 0);  // past normal (-1,0,...,0)
  const double ratio = amb.phi_d1(t) / amb.phi(t);
  const double a_sq = n * ratio * ratio;  // \bar h_ij \bar h^{ij}
  return std::abs(dH - (ric_nn + a_sq));
}

struct TimelikeConvergenceReport {
  bool holds = true;
  double min_value = 0.0;
  Eigen::VectorXd witness;  // contravariant direction achieving the minimum
};

/// Samples timelike directions (reference-metric normalized) and reports the
/// minimum of Ric(xi,xi); a negative minimum violates the timelike
/// convergence condition and comes with a witness direction.
inline TimelikeConvergenceReport timelike_convergence_sample(const WarpedAmbient& amb, double t,
                                                             int samples = 4096,
                                                             std::uint64_t seed = 0) {
  const int d = amb.dimension() + 1;
  const Eigen::MatrixXd ric = ricci_numeric(amb, t);
  const Eigen::MatrixXd g = amb.spacetime_metric(t);
  const Eigen::MatrixXd gref = amb.reference_metric(t);

  TimelikeConvergenceReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();

  auto consider = [&](Eigen::VectorXd xi) {
    const double ref_norm2 = xi.dot(gref * xi);
    xi /= std::sqrt(ref_norm2);
    if (xi.dot(g * xi) >= 0.0) return;  // not timelike
    const double val = xi.dot(ric * xi);
    if (val < rep.min_value) {
      rep.min_value = val;
      rep.witness = xi;
    }
  };

  // The coordinate time axis first: the canonical witness direction.
  Eigen::VectorXd axis = Eigen::VectorXd::Zero(d);
  axis[0] = 1.0;
  consider(axis);
  for (int k = 0; k < samples; ++k)
    consider(rng::halton_unit_vector(static_cast<std::uint64_t>(seed * 0x10001 + k), d));

  rep.holds = rep.min_value >= -1e-10;
  return rep;
}

struct ChiReport {
  bool positive_definite = false;
  double c0 = 0.0;           // min generalized eigenvalue of (chi_ab, gref_ab) over the slab
  double sampled_min = 0.0;  // min chi(eta,eta) over quasi-random gref-unit directions
  double lambda = 0.0;
  // Verdict threshold on c0; sampling alone cannot certify a rank-one
  // degeneracy, so the decision uses the exact pencil eigenvalue.
  double pd_threshold = 1e-3;
};

/// Covariant Hessian of chi = e^{lambda t}:
///   chi_ab = lambda^2 e^{lambda t} t_a t_b + lambda e^{lambda t} t_ab,
/// with t_ab = -Gamma^0_ab the spacetime Hessian of the time function.
inline Eigen::MatrixXd chi_hessian(const WarpedAmbient& amb, double t, double lambda) {
  const int d = amb.dimension() + 1;
  const AmbientChristoffels ch = amb.christoffels(t);
  const double e = std::exp(lambda * t);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
  hess(0, 0) = lambda * lambda * e;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) hess(a, b) -= lambda * e * ch.gamma(0, a, b);
  return hess;
}

inline ChiReport convex_chi(const WarpedAmbient& amb, const Slab& region, double lambda,
                            int t_samples = 33, int directions = 4096, std::uint64_t seed = 0) {
  if (!(lambda > 0.0)) throw std::invalid_argument("convex_chi: lambda must be positive");
  const int d = amb.dimension() + 1;
  ChiReport rep;
  rep.lambda = lambda;
  rep.c0 = std::numeric_limits<double>::infinity();
  rep.sampled_min = std::numeric_limits<double>::infinity();

  for (int k = 0; k < t_samples; ++k) {
    const double t =
        (t_samples == 1) ? region.t_min : region.t_min + region.width() * k / (t_samples - 1);
    amb.require_in_slab(t);
    const Eigen::MatrixXd hess = chi_hessian(amb, t, lambda);
    const Eigen::MatrixXd gref = amb.reference_metric(t);

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, gref);
    rep.c0 = std::min(rep.c0, eig.eigenvalues().minCoeff());

    for (int s = 0; s < directions; ++s) {
      Eigen::VectorXd eta =
          rng::halton_unit_vector(static_cast<std::uint64_t>(seed * 0x10001 + s), d);
      eta /= std::sqrt(eta.dot(gref * eta));
      rep.sampled_min = std::min(rep.sampled_min, eta.dot(hess * eta));
    }
  }
  rep.positive_definite = rep.c0 > rep.pd_threshold;
  return rep;
}

}  // namespace prescurv
