#pragma once

// Uniform rectangular node grids in 1-3 dimensions, node fields and node
// gradient fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "facetflow/errors.hpp"

namespace facetflow {

class Grid {
public:
  static constexpr std::size_t default_node_cap = 2000000;

  Grid() = default;

  Grid(int dim, const std::array<int, 3>& cells, const std::array<double, 3>& extent,
       std::size_t node_cap = default_node_cap)
      : dim_(dim), cells_{1, 1, 1}, extent_{1.0, 1.0, 1.0} {
    if (dim < 1 || dim > 3) {
      throw PreconditionError("grid dimension must be 1, 2 or 3");
    }
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
      if (cells[a] < 2) {
        throw PreconditionError("each axis needs at least 2 cells");
      }
      if (!(extent[a] > 0.0) || !std::isfinite(extent[a])) {
        throw PreconditionError("grid extent must be positive");
      }
      cells_[a] = cells[a];
      extent_[a] = extent[a];
      h_[a] = extent[a] / cells[a];
      total *= static_cast<std::size_t>(cells[a] + 1);
    }
    for (int a = dim; a < 3; ++a) {
      cells_[a] = 0;
      extent_[a] = 0.0;
      h_[a] = 1.0;
    }
    if (total > node_cap) {
      throw PreconditionError("grid exceeds the node cap (" + std::to_string(node_cap) + ")");
    }
    nodes_ = total;
    stride_[0] = 1;
    stride_[1] = static_cast<std::size_t>(cells_[0] + 1);
    stride_[2] = stride_[1] * static_cast<std::size_t>(cells_[1] + 1);
  }

  /// Same cell count and extent on every axis.
  static Grid cube(int dim, int cells, double extent) {
    return Grid(dim, {cells, cells, cells}, {extent, extent, extent});
  }

  int dim() const noexcept { return dim_; }
  int cells(int a) const noexcept { return cells_[a]; }
  double extent(int a) const noexcept { return extent_[a]; }
  double h(int a) const noexcept { return h_[a]; }
  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t stride(int a) const noexcept { return stride_[a]; }
  /// Volume of one cell.
  double cell_volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) {
      v *= h_[a];
    }
    return v;
  }
  double domain_volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) {
      v *= extent_[a];
    }
    return v;
  }

  std::size_t index(int i, int j = 0, int k = 0) const noexcept {
    return static_cast<std::size_t>(i) + stride_[1] * static_cast<std::size_t>(j) +
           stride_[2] * static_cast<std::size_t>(k);
  }

  std::array<int, 3> multi(std::size_t idx) const noexcept {
    std::array<int, 3> m{0, 0, 0};
    m[0] = static_cast<int>(idx % stride_[1]);
    if (dim_ > 1) {
      m[1] = static_cast<int>((idx / stride_[1]) % static_cast<std::size_t>(cells_[1] + 1));
    }
    if (dim_ > 2) {
      m[2] = static_cast<int>(idx / stride_[2]);
    }
    return m;
  }

  std::array<double, 3> coords(std::size_t idx) const noexcept {
    const auto m = multi(idx);
    return {m[0] * h_[0], dim_ > 1 ? m[1] * h_[1] : 0.0, dim_ > 2 ? m[2] * h_[2] : 0.0};
  }

  bool is_boundary(std::size_t idx) const noexcept {
    const auto m = multi(idx);
    for (int a = 0; a < dim_; ++a) {
      if (m[a] == 0 || m[a] == cells_[a]) {
        return true;
      }
    }
    return false;
  }

  bool same_as(const Grid& o) const noexcept {
    if (dim_ != o.dim_) {
      return false;
    }
    for (int a = 0; a < dim_; ++a) {
      if (cells_[a] != o.cells_[a] || extent_[a] != o.extent_[a]) {
        return false;
      }
    }
    return true;
  }

private:
  int dim_ = 1;
  std::array<int, 3> cells_{2, 0, 0};
  std::array<double, 3> extent_{1.0, 0.0, 0.0};
  std::array<double, 3> h_{0.5, 1.0, 1.0};
  std::array<std::size_t, 3> stride_{1, 3, 3};
  std::size_t nodes_ = 3;
};

/// One value per node at time t.
struct ScalarField {
  Grid grid;
  std::vector<double> values;
  double t = 0.0;

  ScalarField() = default;
  ScalarField(const Grid& g, double time = 0.0, double fill = 0.0) : grid(g), values(g.nodes(), fill), t(time) {}

  double sup_norm() const {
    double s = 0.0;
    for (double v : values) {
      s = std::max(s, std::abs(v));
    }
    return s;
  }

  bool finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
    return true;
  }
};

/// dim components per node, stored node-major.
struct VectorField {
  Grid grid;
  std::vector<double> data;
  double t = 0.0;

  VectorField() = default;
  explicit VectorField(const Grid& g, double time = 0.0)
      : grid(g), data(g.nodes() * static_cast<std::size_t>(g.dim()), 0.0), t(time) {}

  double& at(std::size_t node, int a) { return data[node * static_cast<std::size_t>(grid.dim()) + a]; }
  double at(std::size_t node, int a) const { return data[node * static_cast<std::size_t>(grid.dim()) + a]; }

  double norm_sq(std::size_t node) const {
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const double v = at(node, a);
      s += v * v;
    }
    return s;
  }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) {
    throw GridMismatchError("fields live on different grids");
  }
}

/// Node-centred gradient: central differences inside, second-order one-sided
/// differences on the boundary, written in difference form so constants give
/// exact zeros.
inline VectorField gradient_field(const ScalarField& u) {
  const Grid& g = u.grid;
  VectorField out(g, u.t);
  const auto& v = u.values;
  for (std::size_t idx = 0; idx < g.nodes(); ++idx) {
    const auto m = g.multi(idx);
    for (int a = 0; a < g.dim(); ++a) {
      const std::size_t s = g.stride(a);
      const double h = g.h(a);
      double d;
      if (m[a] == 0) {
        d = (4.0 * (v[idx + s] - v[idx]) - (v[idx + 2 * s] - v[idx])) / (2.0 * h);
      } else if (m[a] == g.cells(a)) {
        d = (4.0 * (v[idx] - v[idx - s]) - (v[idx] - v[idx - 2 * s])) / (2.0 * h);
      } else {
        d = (v[idx + s] - v[idx - s]) / (2.0 * h);
      }
      out.at(idx, a) = d;
    }
  }
  return out;
}

} // namespace facetflow
