#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "prescurv/symfunc.hpp"

// Evaluation of a curvature function on symmetric positive definite matrices.
// All second-derivative contractions are formed in the eigenframe of the
// argument:
//
//   F^{ij,kl} eta_ij eta_kl = F_ij eta^_ii eta^_jj
//                           + sum_{i != j} (F_i - F_j)/(kappa_i - kappa_j) (eta^_ij)^2,
//
// where the difference quotient is replaced by its limit F_ii - F_ij when
// eigenvalues collide.

namespace prescurv {

struct MatrixEval {
  double value = 0.0;
  double d0 = 0.0;
  Eigen::VectorXd kappa;       // eigenvalues, ascending
  Eigen::MatrixXd frame;       // Q with h = Q diag(kappa) Q^T
  Eigen::VectorXd grad_eigen;  // F_i at kappa
  Eigen::MatrixXd hess_eigen;  // F_ij at kappa
  Eigen::MatrixXd gradient;    // F^{ij} in the input frame

  /// eta expressed in the eigenframe of h.
  Eigen::MatrixXd to_eigenframe(const Eigen::MatrixXd& eta) const {
    return frame.transpose() * eta * frame;
  }

  /// F^{ij} eta_ij.
  double contract_gradient(const Eigen::MatrixXd& eta) const {
    return (gradient.array() * eta.array()).sum();
  }

  /// F^{ij,kl} eta_ij eta_kl.
  double quad_form(const Eigen::MatrixXd& eta) const {
    const int n = static_cast<int>(kappa.size());
    const Eigen::MatrixXd e = to_eigenframe(eta);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += hess_eigen(i, j) * e(i, i) * e(j, j);
    const double degenerate = 1e-8 * kappa[n - 1];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dk = kappa[i] - kappa[j];
        const double coeff = (std::abs(dk) < degenerate)
                                 ? hess_eigen(i, i) - hess_eigen(i, j)
                                 : (grad_eigen[i] - grad_eigen[j]) / dk;
        s += coeff * e(i, j) * e(i, j);
      }
    return s;
  }

  /// F^{ik} htilde^{jl} eta_ij eta_kl with htilde = h^{-1}.
  double gradient_inverse_term(const Eigen::MatrixXd& eta) const {
    const int n = static_cast<int>(kappa.size());
    const Eigen::MatrixXd e = to_eigenframe(eta);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += grad_eigen[i] / kappa[j] * e(i, j) * e(i, j);
    return s;
  }
};

inline MatrixEval eval_matrix(const CurvatureFunction& F, const Eigen::MatrixXd& h) {
  const int n = F.arg_dimension();
  if (h.rows() != n || h.cols() != n)
    throw std::invalid_argument("eval_matrix: wrong matrix dimension");
  if (!h.isApprox(h.transpose(), 1e-12))
    throw std::invalid_argument("eval_matrix: matrix must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  MatrixEval out;
  out.kappa = eig.eigenvalues();
  out.frame = eig.eigenvectors();
  if (out.kappa.minCoeff() <= 0.0)
    throw ConeViolation(0, out.kappa.minCoeff());

  const auto jet = F.jet(out.kappa);
  out.value = jet.value;
  out.d0 = F.homogeneity();
  out.grad_eigen = jet.grad;
  out.hess_eigen = jet.hess;
  out.gradient = out.frame * jet.grad.asDiagonal() * out.frame.transpose();
  return out;
}

}  // namespace prescurv
