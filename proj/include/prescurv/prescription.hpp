#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prescurv {

/// Prescribed curvature value f > 0 as a field on slab x torus.  Built-ins
/// are time-independent; the callable form may depend on the height t = u(x).
class Prescription {
 public:
  static Prescription constant(double c) {
    require_positive(c);
    Prescription p;
    p.kind_ = Kind::Constant;
    p.c_ = c;
    return p;
  }

  /// c + eps * prod_{a in axes} cos(x^a); axes are 1-based.
  static Prescription cosine(double c, double eps, std::vector<int> axes) {
    require_positive(c - std::abs(eps));
    if (axes.empty()) throw std::invalid_argument("prescription: cosine needs axes");
    Prescription p;
    p.kind_ = Kind::Cosine;
    p.c_ = c;
    p.eps_ = eps;
    p.axes_ = std::move(axes);
    return p;
  }

  static Prescription callable(std::function<double(double, const double*)> fn,
                               std::string label = "callable") {
    Prescription p;
    p.kind_ = Kind::Callable;
    p.fn_ = std::move(fn);
    p.label_ = std::move(label);
    return p;
  }

  double value(double t, const double* x) const {
    switch (kind_) {
      case Kind::Constant:
        return c_;
      case Kind::Cosine: {
        double m = eps_;
        for (int a : axes_) m *= std::cos(x[a - 1]);
        return c_ + m;
      }
      default:
        return fn_(t, x);
    }
  }

  bool time_dependent() const { return kind_ == Kind::Callable; }

  std::string describe() const {
    switch (kind_) {
      case Kind::Constant:
        return "constant(" + std::to_string(c_) + ")";
      case Kind::Cosine: {
        std::string s = "cosine(" + std::to_string(c_) + "," + std::to_string(eps_) + ";axes=";
        for (int a : axes_) s += std::to_string(a);
        return s + ")";
      }
      default:
        return label_;
    }
  }

 private:
  enum class Kind { Constant, Cosine, Callable };

  static void require_positive(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("prescription: f must stay positive");
  }

  Kind kind_ = Kind::Constant;
  double c_ = 1.0;
  double eps_ = 0.0;
  std::vector<int> axes_;
  std::function<double(double, const double*)> fn_;
  std::string label_;
};

/// Monotone concave rescaling Phi applied to both sides of F = f.
class Phi {
 public:
  static Phi log() { return Phi{}; }

  static Phi power(double m) {
    if (!(m >= 1.0)) throw std::invalid_argument("phi: power exponent must be >= 1");
    Phi p;
    p.log_ = false;
    p.m_ = m;
    return p;
  }

  double operator()(double r) const {
    return log_ ? std::log(r) : -std::pow(r, -m_) / m_;
  }
  double d1(double r) const { return log_ ? 1.0 / r : std::pow(r, -m_ - 1.0); }

  std::string describe() const { return log_ ? "log" : "power(" + std::to_string(m_) + ")"; }

 private:
  bool log_ = true;
  double m_ = 1.0;
};

}  // namespace prescurv
