#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

// Symmetric curvature functions on the open positive cone in R^n (n <= 3),
// with exact first and second derivatives.
//
// Built-in families:
//   H(k)        elementary symmetric polynomial, homogeneous of degree k
//   sigma(k)    H_k^{1/k}
//   invsigma(k) 1 / sigma_k(1/kappa) = (H_n / H_{n-k})^{1/k}
//   K           Gauss curvature sigma_n
// closed under power, product and normalization.  Derivatives of H_k are the
// deleted elementary symmetric polynomials, recomputed from the deleted
// argument tuples; everything else is chain rule, so gradients are exact to
// roundoff uniformly on the cone.

namespace prescurv {

class ConeViolation : public std::domain_error {
 public:
  ConeViolation(int index, double value)
      : std::domain_error("curvature function evaluated outside the positive cone (kappa_" +
                          std::to_string(index + 1) + " = " + std::to_string(value) + ")"),
        index(index),
        value(value) {}
  int index;
  double value;
};

namespace symdetail {

constexpr int kMaxN = 3;

struct Jet {
  double v = 0.0;
  std::array<double, kMaxN> g{};
  std::array<double, kMaxN * kMaxN> h{};
};

class Node {
 public:
  virtual ~Node() = default;
  virtual double d0(int n) const = 0;
  virtual void jet(const double* kappa, int n, Jet& out) const = 0;
  virtual double value_grad(const double* kappa, int n, double* grad) const = 0;
  virtual std::string describe() const = 0;
};

using NodePtr = std::shared_ptr<const Node>;

/// Coefficients e_0..e_n of prod_i (x + kappa_i).
inline void elem_coeffs(const double* kappa, int n, double* c) {
  c[0] = 1.0;
  for (int m = 1; m <= n; ++m) c[m] = 0.0;
  for (int i = 0; i < n; ++i)
    for (int m = i + 1; m >= 1; --m) c[m] += kappa[i] * c[m - 1];
}

/// e_m of the arguments with index i removed.  Recomputed from the deleted
/// argument vector: on the positive cone every term is positive, so this is
/// stable arbitrarily close to the cone boundary (synthetic division of the
/// generating polynomial cancels catastrophically there).
inline void deleted_coeffs(const double* kappa, int n, int skip, double* out) {
  double rest[kMaxN];
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (i != skip) rest[m++] = kappa[i];
  elem_coeffs(rest, n - 1, out);
}

inline void deleted_coeffs2(const double* kappa, int n, int skip_a, int skip_b, double* out) {
  double rest[kMaxN];
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (i != skip_a && i != skip_b) rest[m++] = kappa[i];
  elem_coeffs(rest, n - 2, out);
}

class ElemNode final : public Node {
 public:
  explicit ElemNode(int k) : k_(k) {}

  double d0(int) const override { return static_cast<double>(k_); }

  void jet(const double* kappa, int n, Jet& out) const override {
    double c[kMaxN + 1], di[kMaxN], dij[kMaxN];
    elem_coeffs(kappa, n, c);
    out.v = c[k_];
    for (int i = 0; i < n; ++i) {
      deleted_coeffs(kappa, n, i, di);
      out.g[i] = (k_ >= 1) ? di[k_ - 1] : 0.0;
      out.h[i * kMaxN + i] = 0.0;
      for (int j = i + 1; j < n; ++j) {
        deleted_coeffs2(kappa, n, i, j, dij);
        const double v = (k_ >= 2) ? dij[k_ - 2] : 0.0;
        out.h[i * kMaxN + j] = v;
        out.h[j * kMaxN + i] = v;
      }
    }
  }

  double value_grad(const double* kappa, int n, double* grad) const override {
    double c[kMaxN + 1], di[kMaxN];
    elem_coeffs(kappa, n, c);
    for (int i = 0; i < n; ++i) {
      deleted_coeffs(kappa, n, i, di);
      grad[i] = (k_ >= 1) ? di[k_ - 1] : 0.0;
    }
    return c[k_];
  }

  std::string describe() const override { return "H(" + std::to_string(k_) + ")"; }

  int k() const { return k_; }

 private:
  int k_;
};

class PowerNode final : public Node {
 public:
  PowerNode(NodePtr base, double r) : base_(std::move(base)), r_(r) {}

  double d0(int n) const override { return r_ * base_->d0(n); }

  void jet(const double* kappa, int n, Jet& out) const override {
    Jet b;
    base_->jet(kappa, n, b);
    const double p = std::pow(b.v, r_);
    const double p1 = r_ * std::pow(b.v, r_ - 1.0);
    const double p2 = r_ * (r_ - 1.0) * std::pow(b.v, r_ - 2.0);
    out.v = p;
    for (int i = 0; i < n; ++i) out.g[i] = p1 * b.g[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.h[i * kMaxN + j] = p2 * b.g[i] * b.g[j] + p1 * b.h[i * kMaxN + j];
  }

  double value_grad(const double* kappa, int n, double* grad) const override {
    double bg[kMaxN];
    const double bv = base_->value_grad(kappa, n, bg);
    const double p1 = r_ * std::pow(bv, r_ - 1.0);
    for (int i = 0; i < n; ++i) grad[i] = p1 * bg[i];
    return std::pow(bv, r_);
  }

  std::string describe() const override {
    return "power(" + base_->describe() + "," + std::to_string(r_) + ")";
  }

 private:
  NodePtr base_;
  double r_;
};

class ProductNode final : public Node {
 public:
  ProductNode(NodePtr a, NodePtr b) : a_(std::move(a)), b_(std::move(b)) {}

  double d0(int n) const override { return a_->d0(n) + b_->d0(n); }

  void jet(const double* kappa, int n, Jet& out) const override {
    Jet a, b;
    a_->jet(kappa, n, a);
    b_->jet(kappa, n, b);
    out.v = a.v * b.v;
    for (int i = 0; i < n; ++i) out.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.h[i * kMaxN + j] = a.h[i * kMaxN + j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] +
                               a.v * b.h[i * kMaxN + j];
  }

  double value_grad(const double* kappa, int n, double* grad) const override {
    double ag[kMaxN], bg[kMaxN];
    const double av = a_->value_grad(kappa, n, ag);
    const double bv = b_->value_grad(kappa, n, bg);
    for (int i = 0; i < n; ++i) grad[i] = ag[i] * bv + av * bg[i];
    return av * bv;
  }

  std::string describe() const override {
    return "product(" + a_->describe() + "," + b_->describe() + ")";
  }

 private:
  NodePtr a_, b_;
};

class QuotientNode final : public Node {
 public:
  QuotientNode(NodePtr a, NodePtr b) : a_(std::move(a)), b_(std::move(b)) {}

  double d0(int n) const override { return a_->d0(n) - b_->d0(n); }

  void jet(const double* kappa, int n, Jet& out) const override {
    Jet a, b;
    a_->jet(kappa, n, a);
    b_->jet(kappa, n, b);
    const double inv = 1.0 / b.v;
    out.v = a.v * inv;
    for (int i = 0; i < n; ++i) out.g[i] = (a.g[i] - out.v * b.g[i]) * inv;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.h[i * kMaxN + j] =
            a.h[i * kMaxN + j] * inv - (a.g[i] * b.g[j] + a.g[j] * b.g[i]) * inv * inv -
            out.v * b.h[i * kMaxN + j] * inv + 2.0 * out.v * b.g[i] * b.g[j] * inv * inv;
  }

  double value_grad(const double* kappa, int n, double* grad) const override {
    double ag[kMaxN], bg[kMaxN];
    const double av = a_->value_grad(kappa, n, ag);
    const double bv = b_->value_grad(kappa, n, bg);
    const double inv = 1.0 / bv;
    for (int i = 0; i < n; ++i) grad[i] = (ag[i] - av * inv * bg[i]) * inv;
    return av * inv;
  }

  std::string describe() const override {
    return "quotient(" + a_->describe() + "," + b_->describe() + ")";
  }

 private:
  NodePtr a_, b_;
};

class ScaleNode final : public Node {
 public:
  ScaleNode(NodePtr a, double c, std::string label)
      : a_(std::move(a)), c_(c), label_(std::move(label)) {}

  double d0(int n) const override { return a_->d0(n); }

  void jet(const double* kappa, int n, Jet& out) const override {
    a_->jet(kappa, n, out);
    out.v *= c_;
    for (int i = 0; i < n; ++i) out.g[i] *= c_;
    for (int i = 0; i < n * kMaxN; ++i) out.h[i] *= c_;
  }

  double value_grad(const double* kappa, int n, double* grad) const override {
    const double v = a_->value_grad(kappa, n, grad);
    for (int i = 0; i < n; ++i) grad[i] *= c_;
    return c_ * v;
  }

  std::string describe() const override { return label_; }

 private:
  NodePtr a_;
  double c_;
  std::string label_;
};

}  // namespace symdetail

class CurvatureFunction {
 public:
  static CurvatureFunction elem_sym(int n, int k) {
    check_nk(n, k);
    return CurvatureFunction(n, std::make_shared<symdetail::ElemNode>(k), "H(" + std::to_string(k) + ")");
  }

  /// sigma_k = H_k^{1/k}, homogeneous of degree one.
  static CurvatureFunction sigma_k(int n, int k) {
    check_nk(n, k);
    auto node = std::make_shared<symdetail::PowerNode>(std::make_shared<symdetail::ElemNode>(k),
                                                       1.0 / k);
    return CurvatureFunction(n, node, "sigma(" + std::to_string(k) + ")");
  }

  /// invsigma_k(kappa) = 1 / sigma_k(1/kappa) = (H_n / H_{n-k})^{1/k}.
  static CurvatureFunction inv_sigma_k(int n, int k) {
    check_nk(n, k);
    auto quot = std::make_shared<symdetail::QuotientNode>(
        std::make_shared<symdetail::ElemNode>(n), std::make_shared<symdetail::ElemNode>(n - k));
    auto node = std::make_shared<symdetail::PowerNode>(quot, 1.0 / k);
    return CurvatureFunction(n, node, "invsigma(" + std::to_string(k) + ")");
  }

  /// Gauss curvature K = sigma_n = (kappa_1 ... kappa_n)^{1/n}.
  static CurvatureFunction gauss(int n) {
    CurvatureFunction f = sigma_k(n, n);
    f.name_ = "K";
    return f;
  }

  static CurvatureFunction power(const CurvatureFunction& f, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("power: exponent must be positive");
    return CurvatureFunction(f.n_, std::make_shared<symdetail::PowerNode>(f.node_, r),
                             "power(" + f.name_ + "," + format_exponent(r) + ")");
  }

  static CurvatureFunction product(const CurvatureFunction& a, const CurvatureFunction& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("product: mismatched argument dimensions");
    return CurvatureFunction(a.n_, std::make_shared<symdetail::ProductNode>(a.node_, b.node_),
                             "product(" + a.name_ + "," + b.name_ + ")");
  }

  /// F / F(1,...,1).
  static CurvatureFunction normalized(const CurvatureFunction& f) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(f.n_);
    const double scale = 1.0 / f.value(ones);
    return CurvatureFunction(
        f.n_, std::make_shared<symdetail::ScaleNode>(f.node_, scale, "normalized(" + f.name_ + ")"),
        "normalized(" + f.name_ + ")");
  }

  int arg_dimension() const { return n_; }
  double homogeneity() const { return node_->d0(n_); }
  const std::string& describe() const { return name_; }

  double value(const Eigen::VectorXd& kappa) const {
    check_cone(kappa);
    symdetail::Jet j;
    node_->jet(kappa.data(), n_, j);
    return j.v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& kappa) const {
    check_cone(kappa);
    double g[symdetail::kMaxN];
    node_->value_grad(kappa.data(), n_, g);
    return Eigen::Map<Eigen::VectorXd>(g, n_);
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& kappa) const {
    check_cone(kappa);
    symdetail::Jet j;
    node_->jet(kappa.data(), n_, j);
    Eigen::MatrixXd h(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) h(i, k) = j.h[i * symdetail::kMaxN + k];
    return h;
  }

  struct Jet {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
  };

  Jet jet(const Eigen::VectorXd& kappa) const {
    check_cone(kappa);
    symdetail::Jet j;
    node_->jet(kappa.data(), n_, j);
    Jet out;
    out.value = j.v;
    out.grad = Eigen::Map<Eigen::VectorXd>(j.g.data(), n_);
    out.hess.resize(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) out.hess(i, k) = j.h[i * symdetail::kMaxN + k];
    return out;
  }

  /// Allocation-free fast path for the flow loop.
  double value_and_gradient(const double* kappa, double* grad) const {
    for (int i = 0; i < n_; ++i)
      if (!(kappa[i] > 0.0)) throw ConeViolation(i, kappa[i]);
    return node_->value_grad(kappa, n_, grad);
  }

 private:
  CurvatureFunction(int n, symdetail::NodePtr node, std::string name)
      : n_(n), node_(std::move(node)), name_(std::move(name)) {}

  static void check_nk(int n, int k) {
    if (n < 1 || n > symdetail::kMaxN)
      throw std::invalid_argument("curvature function: n must be 1..3");
    if (k < 1 || k > n) throw std::invalid_argument("curvature function: need 1 <= k <= n");
  }

  static std::string format_exponent(double r) {
    if (r == std::floor(r) && std::abs(r) < 1e6)
      return std::to_string(static_cast<long long>(r));
    return std::to_string(r);
  }

  void check_cone(const Eigen::VectorXd& kappa) const {
    if (kappa.size() != n_)
      throw std::invalid_argument("curvature function: wrong argument dimension");
    for (int i = 0; i < n_; ++i)
      if (!(kappa[i] > 0.0)) throw ConeViolation(i, kappa[i]);
  }

  int n_;
  symdetail::NodePtr node_;
  std::string name_;
};

}  // namespace prescurv
