#pragma once

// Data prescribed on the parabolic boundary: an initial slice and lateral
// values on the spatial boundary.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "facetflow/errors.hpp"
#include "facetflow/grid.hpp"

namespace facetflow {

using Point = std::array<double, 3>;

class BoundaryData {
public:
  enum class Kind { constant, affine, tabulated, function };

  /// u = c everywhere.
  static BoundaryData constant(double c) {
    BoundaryData b;
    b.kind_ = Kind::constant;
    b.lateral_ = [c](const Point&, double) { return c; };
    b.initial_ = [c](const Point&) { return c; };
    return b;
  }

  /// u = a + <slope, x>.
  static BoundaryData affine(double a, const Point& slope) {
    BoundaryData b;
    b.kind_ = Kind::affine;
    b.lateral_ = [a, slope](const Point& x, double) { return a + slope[0] * x[0] + slope[1] * x[1] + slope[2] * x[2]; };
    b.initial_ = [f = b.lateral_](const Point& x) { return f(x, 0.0); };
    return b;
  }

  /// Node samples on a fixed grid: the initial slice, and time-independent
  /// lateral values (read only at boundary nodes).
  static BoundaryData tabulated(const Grid& grid, std::vector<double> initial, std::vector<double> lateral) {
    if (initial.size() != grid.nodes() || lateral.size() != grid.nodes()) {
      throw IncompatibleDataError("tabulated boundary data does not match the grid");
    }
    BoundaryData b;
    b.kind_ = Kind::tabulated;
    b.grid_ = std::make_shared<Grid>(grid);
    auto ini = std::make_shared<std::vector<double>>(std::move(initial));
    auto lat = std::make_shared<std::vector<double>>(std::move(lateral));
    auto locate = [g = b.grid_](const Point& x) {
      int m[3] = {0, 0, 0};
      for (int a = 0; a < g->dim(); ++a) {
        m[a] = static_cast<int>(std::lround(x[a] / g->h(a)));
      }
      return g->index(m[0], m[1], m[2]);
    };
    b.lateral_ = [lat, locate](const Point& x, double) { return (*lat)[locate(x)]; };
    b.initial_ = [ini, locate](const Point& x) { return (*ini)[locate(x)]; };
    return b;
  }

  /// Arbitrary lateral data; when `initial` is empty the initial slice is the
  /// lateral formula evaluated at t = 0 throughout the domain.
  static BoundaryData function(std::function<double(const Point&, double)> lateral,
                               std::function<double(const Point&)> initial = {}, bool is_static = false) {
    BoundaryData b;
    b.kind_ = Kind::function;
    b.static_ = is_static;
    b.lateral_ = std::move(lateral);
    if (initial) {
      b.initial_ = std::move(initial);
    } else {
      b.initial_ = [f = b.lateral_](const Point& x) { return f(x, 0.0); };
    }
    return b;
  }

  Kind kind() const noexcept { return kind_; }
  /// Lateral data do not depend on time.
  bool is_static() const noexcept { return kind_ != Kind::function || static_; }

  double lateral(const Point& x, double t) const { return lateral_(x, t); }
  double initial(const Point& x) const { return initial_(x); }

  /// Tabulated data may only be used on the grid they were sampled on.
  void check_grid(const Grid& g) const {
    if (grid_ && !grid_->same_as(g)) {
      throw GridMismatchError("tabulated boundary data belong to a different grid");
    }
  }

  /// Initial slice on the grid; boundary nodes carry the lateral data at t = 0.
  ScalarField initial_field(const Grid& g) const {
    check_grid(g);
    ScalarField u(g, 0.0);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const Point x = g.coords(i);
      u.values[i] = g.is_boundary(i) ? lateral(x, 0.0) : initial(x);
    }
    return u;
  }

  /// Returns a copy shifted by a constant.
  BoundaryData shifted(double c) const {
    BoundaryData b = *this;
    b.lateral_ = [f = lateral_, c](const Point& x, double t) { return f(x, t) + c; };
    b.initial_ = [f = initial_, c](const Point& x) { return f(x) + c; };
    return b;
  }

private:
  Kind kind_ = Kind::constant;
  bool static_ = true;
  std::shared_ptr<Grid> grid_;
  std::function<double(const Point&, double)> lateral_;
  std::function<double(const Point&)> initial_;
};

} // namespace facetflow
