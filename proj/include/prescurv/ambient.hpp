#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "prescurv/scalar_function.hpp"

// Ambient Lorentzian product manifold
//
//   ds^2 = e^{2 psi(t)} ( -dt^2 + sigma_ij dx^i dx^j ),   sigma_ij = phi(t)^2 delta_ij,
//
// over the flat torus [0,2pi)^n.  The coordinate system is future oriented
// (x^0 = t increases toward the future) and all level-set quantities are
// evaluated against the past-directed unit normal, so that strictly convex
// level sets of a contracting warp (phi' < 0) have positive curvature.

namespace prescurv {

struct Slab {
  double t_min = 0.0;
  double t_max = 1.0;

  double width() const { return t_max - t_min; }
  bool contains(double t, double margin = 0.0) const {
    return t >= t_min + margin && t <= t_max - margin;
  }
};

/// Christoffel symbols of the warped metric at a fixed time slice.
/// Spatial symbols vanish for the isotropic warped family on a flat torus.
struct AmbientChristoffels {
  int n = 0;
  double gamma0_00 = 0.0;        // = psi'
  Eigen::VectorXd gamma0_0i;     // = 0 for psi = psi(t)
  Eigen::MatrixXd gamma0_ij;     // = (phi phi' + psi' phi^2) delta_ij
  Eigen::MatrixXd gammai_0j;     // = (psi' + phi'/phi) delta^i_j
  std::vector<Eigen::MatrixXd> gammai_jk;  // zero on the flat torus

  /// Full symbol with spacetime indices in 0..n.
  double gamma(int a, int b, int c) const {
    if (b > c) std::swap(b, c);
    if (a == 0) {
      if (b == 0 && c == 0) return gamma0_00;
      if (b == 0) return gamma0_0i[c - 1];
      return gamma0_ij(b - 1, c - 1);
    }
    if (b == 0 && c == 0) return 0.0;  // g_00 is x-independent
    if (b == 0) return gammai_0j(a - 1, c - 1);
    return gammai_jk[a - 1](b - 1, c - 1);
  }
};

class WarpedAmbient {
 public:
  WarpedAmbient(int n, ScalarFunction warp, Slab slab,
                ScalarFunction psi = ScalarFunction::constant(0.0))
      : n_(n), warp_(std::move(warp)), psi_(std::move(psi)), slab_(slab) {
    if (n < 1 || n > 3) throw std::invalid_argument("ambient: dimension must be 1, 2 or 3");
    if (!(slab.t_min < slab.t_max)) throw std::invalid_argument("ambient: empty slab");
    // phi > 0 on the slab; checked on a dense sample at construction.
    for (int k = 0; k <= 256; ++k) {
      const double t = slab.t_min + slab.width() * k / 256.0;
      if (!(warp_(t) > 0.0))
        throw std::invalid_argument("ambient: warp must be positive on the slab");
    }
  }

  int dimension() const { return n_; }
  const Slab& slab() const { return slab_; }
  const ScalarFunction& warp() const { return warp_; }
  const ScalarFunction& psi() const { return psi_; }
  bool psi_is_zero() const { return psi_.is_zero(); }

  void require_in_slab(double t, double margin = 0.0) const {
    if (!slab_.contains(t, margin))
      throw std::domain_error("ambient: t = " + std::to_string(t) + " outside slab");
  }

  double phi(double t) const { return warp_(t); }
  double phi_d1(double t) const { return warp_.d1(t); }
  double phi_d2(double t) const { return warp_.d2(t); }
  double psi_value(double t) const { return psi_(t); }
  double psi_d1(double t) const { return psi_.d1(t); }

  /// sigma_ij = sigma(t) delta_ij with sigma(t) = phi(t)^2.
  double sigma_coeff(double t) const { return warp_(t) * warp_(t); }
  double sigma_dot_coeff(double t) const { return 2.0 * warp_(t) * warp_.d1(t); }

  /// Principal curvature of the level hypersurface {x^0 = t} with respect to
  /// the past-directed normal and the induced metric.  The warped family is
  /// isotropic, so all principal curvatures coincide.  For psi == 0 this is
  /// -phi'/phi.
  double kappa_bar(double t) const {
    require_in_slab(t);
    return std::exp(-psi_(t)) * (-warp_.d1(t) / warp_(t) - psi_.d1(t));
  }

  /// Second fundamental form \bar h_ij of the level hypersurface, defined by
  /// e^{-psi} \bar h_ij = -1/2 sigma_dot_ij - psi_dot sigma_ij.
  Eigen::MatrixXd level_second_fundamental(double t) const {
    require_in_slab(t);
    const double coeff =
        std::exp(psi_(t)) * (-0.5 * sigma_dot_coeff(t) - psi_.d1(t) * sigma_coeff(t));
    return coeff * Eigen::MatrixXd::Identity(n_, n_);
  }

  AmbientChristoffels christoffels(double t) const {
    require_in_slab(t);
    AmbientChristoffels ch;
    ch.n = n_;
    const double p = warp_(t);
    const double dp = warp_.d1(t);
    const double dpsi = psi_.d1(t);
    ch.gamma0_00 = dpsi;
    ch.gamma0_0i = Eigen::VectorXd::Zero(n_);
    ch.gamma0_ij = (p * dp + dpsi * p * p) * Eigen::MatrixXd::Identity(n_, n_);
    ch.gammai_0j = (dpsi + dp / p) * Eigen::MatrixXd::Identity(n_, n_);
    ch.gammai_jk.assign(n_, Eigen::MatrixXd::Zero(n_, n_));
    return ch;
  }

  /// Spacetime metric \bar g_{alpha beta} at time t, indices 0..n.
  Eigen::MatrixXd spacetime_metric(double t) const {
    const double e2psi = std::exp(2.0 * psi_(t));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
    g(0, 0) = -e2psi;
    for (int i = 1; i <= n_; ++i) g(i, i) = e2psi * sigma_coeff(t);
    return g;
  }

  /// Riemannian reference metric \tilde g = e^{2psi} ( dt^2 + sigma_ij dx^i dx^j ).
  Eigen::MatrixXd reference_metric(double t) const {
    require_in_slab(t);
    Eigen::MatrixXd g = spacetime_metric(t);
    g(0, 0) = -g(0, 0);
    return g;
  }

  std::string describe() const {
    return "warp=" + warp_.name() + " psi=" + psi_.name() + " n=" + std::to_string(n_) +
           " slab=[" + std::to_string(slab_.t_min) + "," + std::to_string(slab_.t_max) + "]";
  }

 private:
  int n_;
  ScalarFunction warp_;
  ScalarFunction psi_;
  Slab slab_;
};

}  // namespace prescurv
