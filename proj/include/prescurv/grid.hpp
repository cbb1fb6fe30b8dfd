#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Uniform periodic grid on the flat torus [0, 2pi)^n and second-order
// centered finite differences with exact periodic wrap.

namespace prescurv {

class PeriodicGrid {
 public:
  PeriodicGrid(int dim, std::array<int, 3> resolution) : dim_(dim), res_{1, 1, 1} {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dimension must be 1..3");
    for (int a = 0; a < dim; ++a) {
      if (resolution[a] < 8) throw std::invalid_argument("grid: resolution must be >= 8");
      res_[a] = resolution[a];
    }
    strides_[dim_ - 1] = 1;
    for (int a = dim_ - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * res_[a + 1];
    nodes_ = 1;
    for (int a = 0; a < dim_; ++a) nodes_ *= static_cast<std::size_t>(res_[a]);
  }

  int dim() const { return dim_; }
  int res(int axis) const { return res_[axis]; }
  double spacing(int axis) const { return 2.0 * M_PI / res_[axis]; }
  double min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < dim_; ++a) h = std::min(h, spacing(a));
    return h;
  }
  std::size_t node_count() const { return nodes_; }

  std::size_t index(std::array<int, 3> c) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) {
      int i = c[a] % res_[a];
      if (i < 0) i += res_[a];
      idx += static_cast<std::size_t>(i) * strides_[a];
    }
    return idx;
  }

  std::array<int, 3> coords(std::size_t node) const {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      c[a] = static_cast<int>(node / strides_[a]);
      node %= strides_[a];
    }
    return c;
  }

  /// Node shifted by `step` cells along `axis`, with periodic wrap.
  std::size_t shift(std::size_t node, int axis, int step) const {
    auto c = coords(node);
    c[axis] += step;
    return index(c);
  }

  void position(std::size_t node, double* x) const {
    const auto c = coords(node);
    for (int a = 0; a < dim_; ++a) x[a] = c[a] * spacing(a);
  }

  bool operator==(const PeriodicGrid& o) const {
    return dim_ == o.dim_ && res_ == o.res_;
  }

 private:
  int dim_;
  std::array<int, 3> res_;
  std::array<std::size_t, 3> strides_{};
  std::size_t nodes_ = 0;
};

using Field = std::vector<double>;

/// First and second partial derivative fields of a scalar grid function.
struct DerivativeFields {
  int dim = 0;
  std::size_t nodes = 0;
  std::array<Field, 3> d1;
  std::array<std::array<Field, 3>, 3> d2;  // d2[a][b] == d2[b][a]

  void resize(int d, std::size_t n) {
    dim = d;
    nodes = n;
    for (int a = 0; a < d; ++a) {
      d1[a].assign(n, 0.0);
      for (int b = a; b < d; ++b) d2[a][b].assign(n, 0.0);  // only a <= b is stored
    }
  }

  double first(int a, std::size_t node) const { return d1[a][node]; }
  double second(int a, int b, std::size_t node) const {
    return a <= b ? d2[a][b][node] : d2[b][a][node];
  }
};

/// Second-order centered differences; mixed partials from the 4-point cross
/// stencil, so the discrete Hessian is symmetric by construction.
inline void compute_derivatives(const Field& u, const PeriodicGrid& grid,
                                DerivativeFields& out) {
  if (u.size() != grid.node_count()) throw std::invalid_argument("derivatives: field size");
  const int dim = grid.dim();
  out.resize(dim, grid.node_count());

  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    for (int a = 0; a < dim; ++a) {
      const double ha = grid.spacing(a);
      const std::size_t pa = grid.shift(p, a, +1);
      const std::size_t ma = grid.shift(p, a, -1);
      out.d1[a][p] = (u[pa] - u[ma]) / (2.0 * ha);
      out.d2[a][a][p] = (u[pa] - 2.0 * u[p] + u[ma]) / (ha * ha);
      for (int b = a + 1; b < dim; ++b) {
        const double hb = grid.spacing(b);
        const double upp = u[grid.shift(pa, b, +1)];
        const double upm = u[grid.shift(pa, b, -1)];
        const double ump = u[grid.shift(ma, b, +1)];
        const double umm = u[grid.shift(ma, b, -1)];
        out.d2[a][b][p] = (upp - upm - ump + umm) / (4.0 * ha * hb);
      }
    }
  }
}

inline DerivativeFields compute_derivatives(const Field& u, const PeriodicGrid& grid) {
  DerivativeFields out;
  compute_derivatives(u, grid, out);
  return out;
}

}  // namespace prescurv
