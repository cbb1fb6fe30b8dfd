#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "prescurv/grid.hpp"

using namespace prescurv;

namespace {

Field sample(const PeriodicGrid& g, double (*f)(const double*)) {
  Field u(g.node_count());
  double x[3] = {0, 0, 0};
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    g.position(p, x);
    u[p] = f(x);
  }
  return u;
}

// least-squares slope of log(err) against log(h)
double order_fit(const std::vector<double>& h, const std::vector<double>& err) {
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("periodic grid indexing") {
  PeriodicGrid g(2, {8, 16, 1});
  REQUIRE(g.node_count() == 128);
  REQUIRE(g.spacing(0) == Catch::Approx(2.0 * M_PI / 8));

  SECTION("wrap is exact in both directions") {
    const std::size_t p = g.index({0, 0, 0});
    REQUIRE(g.shift(p, 0, -1) == g.index({7, 0, 0}));
    REQUIRE(g.shift(p, 1, 16) == p);
    REQUIRE(g.shift(g.shift(p, 0, 3), 0, -3) == p);
  }
  SECTION("coords round-trip") {
    for (std::size_t p = 0; p < g.node_count(); ++p) REQUIRE(g.index(g.coords(p)) == p);
  }
  SECTION("resolution floor") {
    REQUIRE_THROWS_AS(PeriodicGrid(1, {4, 1, 1}), std::invalid_argument);
  }
}

TEST_CASE("finite differences") {
  SECTION("constant field has zero derivatives") {
    PeriodicGrid g(2, {16, 16, 1});
    const auto d = compute_derivatives(Field(g.node_count(), 3.7), g);
    for (std::size_t p = 0; p < g.node_count(); ++p) {
      REQUIRE(d.first(0, p) == 0.0);
      REQUIRE(d.second(0, 1, p) == 0.0);
    }
  }
  SECTION("cos(x1): first derivative converges at order >= 1.9") {
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
      PeriodicGrid g(1, {n, 1, 1});
      const Field u = sample(g, [](const double* x) { return std::cos(x[0]); });
      const auto d = compute_derivatives(u, g);
      double err = 0.0;
      double x[1];
      for (std::size_t p = 0; p < g.node_count(); ++p) {
        g.position(p, x);
        err = std::max(err, std::abs(d.first(0, p) + std::sin(x[0])));
      }
      hs.push_back(g.spacing(0));
      errs.push_back(err);
    }
    REQUIRE(order_fit(hs, errs) >= 1.9);
  }
  SECTION("cos(x1)cos(x2): mixed partial matches the analytic value at O(h^2)") {
    std::vector<double> hs, errs;
    for (int n : {16, 32}) {
      PeriodicGrid g(2, {n, n, 1});
      const Field u = sample(g, [](const double* x) { return std::cos(x[0]) * std::cos(x[1]); });
      const auto d = compute_derivatives(u, g);
      double err = 0.0;
      double x[2];
      for (std::size_t p = 0; p < g.node_count(); ++p) {
        g.position(p, x);
        err = std::max(err, std::abs(d.second(0, 1, p) - std::sin(x[0]) * std::sin(x[1])));
      }
      hs.push_back(g.spacing(0));
      errs.push_back(err);
    }
    REQUIRE(order_fit(hs, errs) >= 1.9);
    REQUIRE(errs.back() < 2e-2);
  }
  SECTION("mixed partials are symmetric by construction") {
    PeriodicGrid g(3, {8, 8, 8});
    const Field u = sample(g, [](const double* x) {
      return std::sin(x[0]) * std::cos(2 * x[1]) + std::cos(x[2]) * std::sin(x[1]);
    });
    const auto d = compute_derivatives(u, g);
    for (std::size_t p = 0; p < g.node_count(); p += 7)
      REQUIRE(d.second(2, 0, p) == d.second(0, 2, p));
  }
}
