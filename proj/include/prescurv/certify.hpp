#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "prescurv/matrix_eval.hpp"
#include "prescurv/rng.hpp"
#include "prescurv/symfunc.hpp"

// Numerical certifiers for membership of a curvature function in the classes
// (K) and (K*):
//
//   monotonicity          F_i > 0 on the cone
//   boundary vanishing    F -> 0 along rays approaching the cone boundary
//   concavity, c = 1      F^{ij,kl} eta eta <= F^{-1} (F^{ij} eta_ij)^2
//                                            - F^{ik} htilde^{jl} eta_ij eta_kl
//   largest-eigenvalue    the same with the htilde term relaxed to the
//   inequality            kappa_max^{-1} F^{ij} eta_ir eta_jr contraction
//   (K*) lower bound      eps0 F H <= F^{ij} h_ik h^k_j
//
// All checks are sampled; every sample is drawn from its own RNG stream so
// results are independent of iteration order.

namespace prescurv {

struct SampleSpec {
  int count = 10000;
  std::uint64_t seed = 2024;
  double log10_min = -1.0;  // eigenvalue range of sampled SPD matrices
  double log10_max = 1.0;
};

namespace certdetail {

inline Eigen::MatrixXd haar_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss01;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n * n; ++i) a(i / n, i % n) = gauss01(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

inline Eigen::VectorXd sample_eigenvalues(int n, const SampleSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> logk(spec.log10_min, spec.log10_max);
  Eigen::VectorXd kappa(n);
  for (int i = 0; i < n; ++i) kappa[i] = std::pow(10.0, logk(rng));
  return kappa;
}

inline Eigen::MatrixXd sample_spd(int n, const SampleSpec& spec, std::uint64_t id) {
  auto rng = rng::stream(spec.seed, id);
  const Eigen::VectorXd kappa = sample_eigenvalues(n, spec, rng);
  const Eigen::MatrixXd q = haar_rotation(n, rng);
  return q * kappa.asDiagonal() * q.transpose();
}

inline Eigen::MatrixXd sample_symmetric(int n, std::uint64_t seed, std::uint64_t id) {
  auto rng = rng::stream(seed ^ 0x5eed5eedull, id);
  std::normal_distribution<double> gauss01;
  Eigen::MatrixXd eta(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = gauss01(rng);
      eta(i, j) = v;
      eta(j, i) = v;
    }
  return eta / eta.norm();
}

/// kappa with its m smallest entries scaled by delta, renormalized to H = 1.
inline Eigen::VectorXd toward_boundary(Eigen::VectorXd kappa, int m, double delta) {
  std::sort(kappa.data(), kappa.data() + kappa.size());
  for (int i = 0; i < m; ++i) kappa[i] *= delta;
  return kappa / kappa.sum();
}

}  // namespace certdetail

struct Witness {
  Eigen::MatrixXd h;
  Eigen::MatrixXd eta;
  double margin = 0.0;
};

struct ConcavityReport {
  bool holds = true;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of rhs - lhs, scaled
  double equality_gap_max = 0.0;  // |lhs - rhs| at eta = h, must be ~0
  std::optional<Witness> witness;  // present when violated
  int samples = 0;
};

/// Concavity inequality with constant c = 1 over sampled SPD h and symmetric
/// eta.  Equality is attained at eta = h; the report tracks that gap
/// separately.
inline ConcavityReport check_concavity_c1(const CurvatureFunction& F,
                                          const SampleSpec& spec = {}) {
  const int n = F.arg_dimension();
  constexpr double kTol = 1e-9;
  ConcavityReport rep;
  rep.samples = spec.count;

  for (std::uint64_t id = 0; id < static_cast<std::uint64_t>(spec.count); ++id) {
    const Eigen::MatrixXd h = certdetail::sample_spd(n, spec, id);
    const Eigen::MatrixXd eta = certdetail::sample_symmetric(n, spec.seed, id);
    const MatrixEval ev = eval_matrix(F, h);

    const double lhs = ev.quad_form(eta);
    const double sq = ev.contract_gradient(eta);
    const double rhs = sq * sq / ev.value - ev.gradient_inverse_term(eta);
    const double scale = std::abs(lhs) + sq * sq / ev.value +
                         std::abs(ev.gradient_inverse_term(eta)) + 1e-30;
    const double margin = (rhs - lhs) / scale;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      if (margin < -kTol) rep.witness = Witness{h, eta, margin};
    }

    // equality gap at eta = h
    const double lhs_h = ev.quad_form(h);
    const double sq_h = ev.contract_gradient(h);
    const double rhs_h = sq_h * sq_h / ev.value - ev.gradient_inverse_term(h);
    const double gap = std::abs(lhs_h - rhs_h) / (1.0 + std::abs(lhs_h) + std::abs(rhs_h));
    rep.equality_gap_max = std::max(rep.equality_gap_max, gap);
  }
  rep.holds = rep.worst_margin >= -kTol;
  return rep;
}

struct OrderingReport {
  bool holds = true;
  // max over samples and pairs of (F_i kappa_i - F_j kappa_j) sign(kappa_i - kappa_j),
  // scaled; the condition asks F_i kappa_i to decrease along increasing kappa.
  double worst_signed_margin = -std::numeric_limits<double>::infinity();
  int samples = 0;
};

inline OrderingReport check_ordering_1_14(const CurvatureFunction& F,
                                          const SampleSpec& spec = {}) {
  const int n = F.arg_dimension();
  OrderingReport rep;
  rep.samples = spec.count;
  for (std::uint64_t id = 0; id < static_cast<std::uint64_t>(spec.count); ++id) {
    auto rng = rng::stream(spec.seed, id);
    const Eigen::VectorXd kappa = certdetail::sample_eigenvalues(n, spec, rng);
    const Eigen::VectorXd g = F.gradient(kappa);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (kappa[i] == kappa[j]) continue;
        const double fi = g[i] * kappa[i];
        const double fj = g[j] * kappa[j];
        const double sgn = (kappa[i] > kappa[j]) ? 1.0 : -1.0;
        const double margin = sgn * (fi - fj) / (std::abs(fi) + std::abs(fj) + 1e-30);
        rep.worst_signed_margin = std::max(rep.worst_signed_margin, margin);
      }
  }
  rep.holds = rep.worst_signed_margin <= 1e-10;
  return rep;
}

struct EpsilonReport {
  double interior_inf = std::numeric_limits<double>::infinity();
  double boundary_inf = std::numeric_limits<double>::infinity();
  bool companion_holds = true;  // F^{ij} h_ik h_j^k <= d0 F H
  Eigen::VectorXd argmin;       // eigenvalues achieving the infimum, H = 1
  int samples = 0;
};

/// Infimum of F^{ij} h_ik h^k_j / (F H) over SPD arguments.  The ratio is
/// rotation and scale invariant, so it is minimized over eigenvalue tuples
/// normalized to H = 1; boundary-approaching refinements drive any number of
/// eigenvalues toward zero to detect degenerating infima.
inline EpsilonReport estimate_epsilon0(const CurvatureFunction& F, const SampleSpec& spec = {},
                                       int boundary_refinement = 6) {
  const int n = F.arg_dimension();
  const double d0 = F.homogeneity();
  EpsilonReport rep;
  rep.samples = spec.count;

  auto ratio = [&](const Eigen::VectorXd& kappa) {
    const Eigen::VectorXd g = F.gradient(kappa);
    const double num = (g.array() * kappa.array().square()).sum();
    return num / (F.value(kappa) * kappa.sum());
  };

  auto consider_interior = [&](const Eigen::VectorXd& kappa) {
    const double r = ratio(kappa);
    if (r < rep.interior_inf) {
      rep.interior_inf = r;
      rep.argmin = kappa / kappa.sum();
    }
    if (r > d0 * (1.0 + 1e-9)) rep.companion_holds = false;
  };

  consider_interior(Eigen::VectorXd::Ones(n));  // the symmetric point
  const int boundary_bases = std::max(8, spec.count / 64);
  for (std::uint64_t id = 0; id < static_cast<std::uint64_t>(spec.count); ++id) {
    auto rng = rng::stream(spec.seed, id);
    const Eigen::VectorXd kappa = certdetail::sample_eigenvalues(n, spec, rng);
    consider_interior(kappa);

    if (id < static_cast<std::uint64_t>(boundary_bases)) {
      for (int m = 1; m < n; ++m)
        for (int level = 1; level <= boundary_refinement; ++level) {
          const Eigen::VectorXd kb =
              certdetail::toward_boundary(kappa, m, std::pow(10.0, -level));
          const double r = ratio(kb);
          rep.boundary_inf = std::min(rep.boundary_inf, r);
          if (r > d0 * (1.0 + 1e-9)) rep.companion_holds = false;
        }
    }
  }
  rep.boundary_inf = std::min(rep.boundary_inf, rep.interior_inf);
  return rep;
}

struct ClassReport {
  std::string family;
  int n = 0;
  double d0 = 0.0;
  bool monotone = false;
  bool boundary_vanishing = false;
  bool concavity_c1 = false;
  bool ordering_1_14 = false;
  bool largest_eigenvalue_1_31 = false;
  double concavity_worst_margin = 0.0;
  double concavity_equality_gap = 0.0;
  double ordering_worst_margin = 0.0;
  double kstar_epsilon0 = 0.0;   // estimated infimum of F^{ij} h_ik h^k_j / (F H)
  double boundary_ratio = 0.0;   // the same infimum under boundary refinement
  bool companion_bound = false;  // F^{ij} h_ik h_j^k <= d0 F H
  bool in_K = false;
  bool in_Kstar = false;
  double kstar_threshold = 1e-3;
  int samples = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"family", family},
                          {"n", n},
                          {"d0", d0},
                          {"monotone", monotone},
                          {"boundary_vanishing", boundary_vanishing},
                          {"concavity_c1", concavity_c1},
                          {"ordering_1_14", ordering_1_14},
                          {"largest_eigenvalue_1_31", largest_eigenvalue_1_31},
                          {"concavity_worst_margin", concavity_worst_margin},
                          {"concavity_equality_gap", concavity_equality_gap},
                          {"ordering_worst_margin", ordering_worst_margin},
                          {"kstar_epsilon0", kstar_epsilon0},
                          {"boundary_ratio", boundary_ratio},
                          {"companion_bound", companion_bound},
                          {"in_K", in_K},
                          {"in_Kstar", in_Kstar},
                          {"kstar_threshold", kstar_threshold},
                          {"samples", samples},
                          {"seed", seed}};
  }
};

namespace certdetail {

/// Relaxed inequality with the largest-eigenvalue contraction on the right.
inline bool check_largest_eigenvalue_1_31(const CurvatureFunction& F, const SampleSpec& spec) {
  const int n = F.arg_dimension();
  for (std::uint64_t id = 0; id < static_cast<std::uint64_t>(spec.count); ++id) {
    const Eigen::MatrixXd h = sample_spd(n, spec, id);
    const Eigen::MatrixXd eta = sample_symmetric(n, spec.seed, id);
    const MatrixEval ev = eval_matrix(F, h);
    const Eigen::MatrixXd e = ev.to_eigenframe(eta);
    const int r = n - 1;  // eigenvalues ascending; kappa_r is the largest
    double contraction = 0.0;
    for (int i = 0; i < n; ++i) contraction += ev.grad_eigen[i] * e(i, r) * e(i, r);

    const double lhs = ev.quad_form(eta);
    const double sq = ev.contract_gradient(eta);
    const double rhs = sq * sq / ev.value - contraction / ev.kappa[r];
    const double scale = std::abs(lhs) + std::abs(rhs) + 1e-30;
    if ((rhs - lhs) / scale < -1e-9) return false;
  }
  return true;
}

inline bool check_monotone(const CurvatureFunction& F, const SampleSpec& spec) {
  const int n = F.arg_dimension();
  for (std::uint64_t id = 0; id < static_cast<std::uint64_t>(spec.count); ++id) {
    auto rng = rng::stream(spec.seed, id);
    const Eigen::VectorXd kappa = sample_eigenvalues(n, spec, rng);
    if (F.gradient(kappa).minCoeff() <= 0.0) return false;
  }
  return true;
}

/// F -> 0 along every tested ray toward the cone boundary (any number of
/// eigenvalues collapsing).  Only a finite ray sample is available, so this
/// is reported rather than proved.
inline bool check_boundary_vanishing(const CurvatureFunction& F, const SampleSpec& spec) {
  const int n = F.arg_dimension();
  const double ref = F.value(Eigen::VectorXd::Ones(n) / n);
  if (n == 1) return true;  // every positive-degree family vanishes at kappa = 0
  const int bases = std::max(8, spec.count / 256);
  for (std::uint64_t id = 0; id < static_cast<std::uint64_t>(bases); ++id) {
    auto rng = rng::stream(spec.seed ^ 0xb0b0ull, id);
    const Eigen::VectorXd kappa = sample_eigenvalues(n, spec, rng);
    for (int m = 1; m < n; ++m) {
      const double val = F.value(toward_boundary(kappa, m, 1e-12));
      if (!(val <= 1e-2 * ref)) return false;
    }
  }
  return true;
}

}  // namespace certdetail

/// Runs every certifier and aggregates the class verdicts.  Membership in
/// (K*) additionally requires the sampled infimum to stay above the recorded
/// threshold and not to collapse under boundary refinement.
inline ClassReport classify(const CurvatureFunction& F, const SampleSpec& spec = {}) {
  ClassReport rep;
  rep.family = F.describe();
  rep.n = F.arg_dimension();
  rep.d0 = F.homogeneity();
  rep.samples = spec.count;
  rep.seed = spec.seed;

  rep.monotone = certdetail::check_monotone(F, spec);
  rep.boundary_vanishing = certdetail::check_boundary_vanishing(F, spec);

  const ConcavityReport conc = check_concavity_c1(F, spec);
  rep.concavity_c1 = conc.holds;
  rep.concavity_worst_margin = conc.worst_margin;
  rep.concavity_equality_gap = conc.equality_gap_max;

  const OrderingReport ord = check_ordering_1_14(F, spec);
  rep.ordering_1_14 = ord.holds;
  rep.ordering_worst_margin = ord.worst_signed_margin;

  rep.largest_eigenvalue_1_31 = certdetail::check_largest_eigenvalue_1_31(F, spec);

  const EpsilonReport eps = estimate_epsilon0(F, spec);
  rep.kstar_epsilon0 = std::min(eps.interior_inf, eps.boundary_inf);
  rep.boundary_ratio = eps.boundary_inf;
  rep.companion_bound = eps.companion_holds;

  rep.in_K = rep.monotone && rep.boundary_vanishing && rep.concavity_c1;
  rep.in_Kstar = rep.in_K && eps.interior_inf >= rep.kstar_threshold &&
                 eps.boundary_inf >= 0.5 * eps.interior_inf;
  return rep;
}

}  // namespace prescurv
