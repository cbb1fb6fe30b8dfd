#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "prescurv/matrix_eval.hpp"
#include "prescurv/rng.hpp"
#include "prescurv/symfunc.hpp"

using namespace prescurv;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<CurvatureFunction> builtin_families(int n) {
  std::vector<CurvatureFunction> fams;
  for (int k = 1; k <= n; ++k) {
    fams.push_back(CurvatureFunction::elem_sym(n, k));
    fams.push_back(CurvatureFunction::sigma_k(n, k));
    fams.push_back(CurvatureFunction::inv_sigma_k(n, k));
  }
  fams.push_back(CurvatureFunction::gauss(n));
  fams.push_back(CurvatureFunction::power(CurvatureFunction::gauss(n), 2.0));
  fams.push_back(CurvatureFunction::product(CurvatureFunction::sigma_k(n, 1),
                                            CurvatureFunction::gauss(n)));
  fams.push_back(CurvatureFunction::normalized(CurvatureFunction::elem_sym(n, n)));
  return fams;
}

Eigen::VectorXd random_cone_point(int n, std::uint64_t seed, std::uint64_t id) {
  auto rng = rng::stream(seed, id);
  std::uniform_real_distribution<double> logk(-1.0, 1.0);
  Eigen::VectorXd kappa(n);
  for (int i = 0; i < n; ++i) kappa[i] = std::pow(10.0, logk(rng));
  return kappa;
}

Eigen::VectorXd fd_gradient(const CurvatureFunction& F, const Eigen::VectorXd& kappa) {
  const int n = F.arg_dimension();
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(kappa[i]));
    Eigen::VectorXd kp = kappa, km = kappa;
    kp[i] += h;
    km[i] -= h;
    g[i] = (F.value(kp) - F.value(km)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("point evaluation of the built-in families") {
  REQUIRE(CurvatureFunction::sigma_k(3, 1).value(vec({1, 2, 3})) == Catch::Approx(6.0));
  REQUIRE(CurvatureFunction::sigma_k(3, 2).value(vec({1, 1, 1})) ==
          Catch::Approx(std::sqrt(3.0)));
  REQUIRE(CurvatureFunction::inv_sigma_k(2, 1).value(vec({2, 2})) == Catch::Approx(1.0));
  REQUIRE(CurvatureFunction::gauss(2).value(vec({2, 8})) == Catch::Approx(4.0));
  REQUIRE(CurvatureFunction::inv_sigma_k(3, 3).value(vec({1, 2, 4})) ==
          Catch::Approx(CurvatureFunction::gauss(3).value(vec({1, 2, 4}))));

  SECTION("cone violation") {
    REQUIRE_THROWS_AS(CurvatureFunction::gauss(2).value(vec({1.0, -0.5})), ConeViolation);
    REQUIRE_THROWS_AS(CurvatureFunction::sigma_k(2, 1).value(vec({0.0, 1.0})), ConeViolation);
  }
}

TEST_CASE("gradients") {
  SECTION("Gauss curvature at the diagonal") {
    const auto g = CurvatureFunction::gauss(2).gradient(vec({1, 1}));
    REQUIRE(g[0] == Catch::Approx(0.5));
    REQUIRE(g[1] == Catch::Approx(0.5));
  }
  SECTION("H_2 gradient is the deleted sum") {
    const auto g = CurvatureFunction::elem_sym(3, 2).gradient(vec({1, 2, 3}));
    REQUIRE(g[0] == Catch::Approx(5.0));
    REQUIRE(g[1] == Catch::Approx(4.0));
    REQUIRE(g[2] == Catch::Approx(3.0));
  }
  SECTION("finite differences confirm every family at 100 random cone points") {
    for (int n : {2, 3}) {
      for (const auto& F : builtin_families(n)) {
        for (std::uint64_t id = 0; id < 100; ++id) {
          const Eigen::VectorXd kappa = random_cone_point(n, 7, id);
          const Eigen::VectorXd g = F.gradient(kappa);
          const Eigen::VectorXd gfd = fd_gradient(F, kappa);
          const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
          REQUIRE((g - gfd).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("Euler relation and symmetry") {
  SECTION("F_i kappa_i = d0 F at every sampled cone point") {
    for (int n : {1, 2, 3}) {
      for (const auto& F : builtin_families(n)) {
        const double d0 = F.homogeneity();
        for (std::uint64_t id = 0; id < 200; ++id) {
          const Eigen::VectorXd kappa = random_cone_point(n, 11, id);
          const double val = F.value(kappa);
          const double euler = F.gradient(kappa).dot(kappa);
          REQUIRE(euler == Catch::Approx(d0 * val).epsilon(1e-8));
        }
      }
    }
  }
  SECTION("homogeneity by direct scaling") {
    const auto F = CurvatureFunction::product(CurvatureFunction::sigma_k(3, 2),
                                              CurvatureFunction::gauss(3));
    const Eigen::VectorXd kappa = vec({0.3, 1.0, 2.5});
    const double d0 = F.homogeneity();
    REQUIRE(F.value(2.0 * kappa) == Catch::Approx(std::pow(2.0, d0) * F.value(kappa)));
  }
  SECTION("permutation symmetry of value and gradient") {
    for (const auto& F : builtin_families(3)) {
      const Eigen::VectorXd kappa = vec({0.4, 1.7, 3.1});
      const Eigen::VectorXd perm = vec({1.7, 3.1, 0.4});
      REQUIRE(F.value(kappa) == Catch::Approx(F.value(perm)).epsilon(1e-12));
      const Eigen::VectorXd g = F.gradient(kappa);
      const Eigen::VectorXd gp = F.gradient(perm);
      REQUIRE(g[0] == Catch::Approx(gp[2]).epsilon(1e-12));
      REQUIRE(g[1] == Catch::Approx(gp[0]).epsilon(1e-12));
      REQUIRE(g[2] == Catch::Approx(gp[1]).epsilon(1e-12));
    }
  }
  SECTION("hessian matches finite differences of the gradient") {
    for (const auto& F : builtin_families(2)) {
      const Eigen::VectorXd kappa = vec({0.8, 2.2});
      const Eigen::MatrixXd hess = F.hessian(kappa);
      for (int j = 0; j < 2; ++j) {
        const double h = 1e-6;
        Eigen::VectorXd kp = kappa, km = kappa;
        kp[j] += h;
        km[j] -= h;
        const Eigen::VectorXd col = (F.gradient(kp) - F.gradient(km)) / (2.0 * h);
        REQUIRE((hess.col(j) - col).cwiseAbs().maxCoeff() < 1e-5);
      }
    }
  }
}

TEST_CASE("matrix evaluation") {
  const auto K2 = CurvatureFunction::gauss(2);

  SECTION("identity argument") {
    const auto ev = eval_matrix(K2, Eigen::MatrixXd::Identity(2, 2));
    REQUIRE(ev.value == Catch::Approx(1.0));
    REQUIRE(ev.gradient.isApprox(0.5 * Eigen::MatrixXd::Identity(2, 2), 1e-12));
  }
  SECTION("diag(2,8): F = 4, F^{ij} = diag(1, 1/4)") {
    Eigen::MatrixXd h = Eigen::Vector2d(2.0, 8.0).asDiagonal();
    const auto ev = eval_matrix(K2, h);
    REQUIRE(ev.value == Catch::Approx(4.0));
    REQUIRE(ev.gradient(0, 0) == Catch::Approx(1.0));
    REQUIRE(ev.gradient(1, 1) == Catch::Approx(0.25));
    REQUIRE(std::abs(ev.gradient(0, 1)) < 1e-14);
  }
  SECTION("value invariant under orthogonal conjugation") {
    auto rng = rng::stream(3, 0);
    std::normal_distribution<double> gauss01;
    for (int rep = 0; rep < 50; ++rep) {
      Eigen::MatrixXd a(3, 3);
      for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = gauss01(rng);
      const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
      Eigen::VectorXd kappa = random_cone_point(3, 5, rep);
      const Eigen::MatrixXd h = q * kappa.asDiagonal() * q.transpose();
      const auto F = CurvatureFunction::sigma_k(3, 2);
      std::sort(kappa.data(), kappa.data() + 3);
      REQUIRE(eval_matrix(F, h).value == Catch::Approx(F.value(kappa)).epsilon(1e-10));
    }
  }
  SECTION("non-SPD input rejected") {
    Eigen::MatrixXd h = Eigen::Vector2d(1.0, -2.0).asDiagonal();
    REQUIRE_THROWS_AS(eval_matrix(K2, h), ConeViolation);
  }
  SECTION("Gauss curvature satisfies F^{ij} = (1/n) F htilde^{ij}") {
    for (int n : {2, 3}) {
      const auto K = CurvatureFunction::gauss(n);
      auto rng = rng::stream(17, 0);
      std::normal_distribution<double> gauss01;
      for (int rep = 0; rep < 1000; ++rep) {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n * n; ++i) a(i / n, i % n) = gauss01(rng);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
        const Eigen::VectorXd kappa = random_cone_point(n, 19, rep);
        const Eigen::MatrixXd h = q * kappa.asDiagonal() * q.transpose();
        const auto ev = eval_matrix(K, h);
        const Eigen::MatrixXd want = ev.value / n * h.inverse();
        REQUIRE((ev.gradient - want).norm() / want.norm() < 1e-9);
      }
    }
  }
  SECTION("degenerate eigenvalues use the difference-quotient limit") {
    const auto F = CurvatureFunction::sigma_k(2, 2);
    Eigen::MatrixXd eta(2, 2);
    eta << 0.3, 1.1, 1.1, -0.7;
    const auto exact = eval_matrix(F, Eigen::Vector2d(1.0, 1.0).asDiagonal().toDenseMatrix());
    const auto near = eval_matrix(F, Eigen::Vector2d(1.0, 1.0 + 1e-11).asDiagonal().toDenseMatrix());
    REQUIRE(exact.quad_form(eta) == Catch::Approx(near.quad_form(eta)).margin(1e-6));
  }
}

TEST_CASE("expression labels round-trip the family structure") {
  const auto F = CurvatureFunction::product(
      CurvatureFunction::power(CurvatureFunction::sigma_k(2, 1), 2.0),
      CurvatureFunction::gauss(2));
  REQUIRE(F.describe() == "product(power(sigma(1),2),K)");
}
