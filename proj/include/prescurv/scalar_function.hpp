#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Analytic scalar functions of one variable carrying their first two
// derivatives: warp factors, conformal factors and prescription profiles.

namespace prescurv {

namespace detail {

/// Natural cubic spline through (t_k, y_k), C^2, with analytic first and
/// second derivatives of the piecewise polynomial.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> t, std::vector<double> y)
      : t_(std::move(t)), y_(std::move(y)) {
    const std::size_t n = t_.size();
    if (n < 3 || y_.size() != n) throw std::invalid_argument("spline: need >= 3 knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(t_[i] < t_[i + 1])) throw std::invalid_argument("spline: knots must increase");

    // Second derivatives m_k from the tridiagonal natural-spline system.
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t_[i] - t_[i - 1];
      const double h1 = t_[i + 1] - t_[i];
      const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
      const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
      c[i] = h1 / diag;
      d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
  }

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }

  double eval(double t, int deriv) const {
    std::size_t hi = 1;
    while (hi + 1 < t_.size() && t_[hi] < t) ++hi;
    const std::size_t lo = hi - 1;
    const double h = t_[hi] - t_[lo];
    const double a = (t_[hi] - t) / h;
    const double b = (t - t_[lo]) / h;
    switch (deriv) {
      case 0:
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
      case 1:
        return (y_[hi] - y_[lo]) / h +
               h / 6.0 * ((3.0 * b * b - 1.0) * m_[hi] - (3.0 * a * a - 1.0) * m_[lo]);
      default:
        return a * m_[lo] + b * m_[hi];
    }
  }

 private:
  std::vector<double> t_, y_;
  std::vector<double> m_;
};

}  // namespace detail

class ScalarFunction {
 public:
  using Fn = std::function<double(double)>;

  ScalarFunction() { *this = constant(0.0); }

  static ScalarFunction analytic(std::string name, Fn f, Fn d1, Fn d2) {
    ScalarFunction s{bare_t{}};
    s.name_ = std::move(name);
    s.f_ = std::move(f);
    s.d1_ = std::move(d1);
    s.d2_ = std::move(d2);
    return s;
  }

  static ScalarFunction constant(double c) {
    ScalarFunction s = analytic(
        c == 0.0 ? "zero" : "const", [c](double) { return c; }, [](double) { return 0.0; },
        [](double) { return 0.0; });
    s.constant_value_ = c;
    return s;
  }

  /// Built-in warp factors by name: "exp_decay", "gauss_decay", "const".
  static ScalarFunction builtin(const std::string& name) {
    if (name == "exp_decay")
      return analytic(
          name, [](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); },
          [](double t) { return std::exp(-t); });
    if (name == "gauss_decay")
      return analytic(
          name, [](double t) { return std::exp(-0.5 * t * t); },
          [](double t) { return -t * std::exp(-0.5 * t * t); },
          [](double t) { return (t * t - 1.0) * std::exp(-0.5 * t * t); });
    if (name == "const" || name == "flat") {
      ScalarFunction s = constant(1.0);
      s.name_ = "const";
      return s;
    }
    if (name == "zero") return constant(0.0);
    throw std::invalid_argument("unknown built-in scalar function: " + name);
  }

  static ScalarFunction spline(std::vector<double> t, std::vector<double> y) {
    auto sp = std::make_shared<detail::CubicSpline>(std::move(t), std::move(y));
    ScalarFunction s{bare_t{}};
    s.name_ = "spline";
    s.f_ = [sp](double x) { return sp->eval(x, 0); };
    s.d1_ = [sp](double x) { return sp->eval(x, 1); };
    s.d2_ = [sp](double x) { return sp->eval(x, 2); };
    return s;
  }

  double operator()(double t) const { return f_(t); }
  double d1(double t) const { return d1_(t); }
  double d2(double t) const { return d2_(t); }

  const std::string& name() const { return name_; }
  bool is_zero() const { return constant_value_ && *constant_value_ == 0.0; }
  bool is_constant() const { return constant_value_.has_value(); }

 private:
  struct bare_t {};
  explicit ScalarFunction(bare_t) {}

  std::string name_;
  Fn f_, d1_, d2_;
  std::optional<double> constant_value_;
};

}  // namespace prescurv
