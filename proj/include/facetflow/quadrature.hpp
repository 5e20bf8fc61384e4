#pragma once

// One-dimensional quadrature rules used by the mollifier: a double-exponential
// (tanh-sinh) rule with level refinement, and Gauss-Legendre nodes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "facetflow/errors.hpp"

namespace facetflow::quad {

struct Node {
  double x;
  double w;
};

/// Tanh-sinh nodes on [a, b] with step h over t in [-t_max, t_max].
/// Abscissae near the endpoints are built from the complement so that
/// integrable endpoint singularities are sampled without cancellation.
inline std::vector<Node> tanh_sinh_nodes(double a, double b, double h, double t_max = 4.0) {
  std::vector<Node> nodes;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const auto k_max = static_cast<long>(std::ceil(t_max / h));
  nodes.reserve(static_cast<std::size_t>(2 * k_max + 1));
  for (long k = -k_max; k <= k_max; ++k) {
    const double t = static_cast<double>(k) * h;
    const double u = 0.5 * std::numbers::pi * std::sinh(std::abs(t));
    const double e = std::exp(-2.0 * u);
    // 1 - tanh(u) = 2e / (1 + e)
    const double comp = 2.0 * e / (1.0 + e);
    const double w = h * 0.5 * std::numbers::pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e)) * half;
    if (w == 0.0) {
      continue;
    }
    double x;
    if (k == 0) {
      x = mid;
    } else if (k < 0) {
      x = a + half * comp;
    } else {
      x = b - half * comp;
    }
    if (x <= a || x >= b) {
      continue;
    }
    nodes.push_back({x, w});
  }
  return nodes;
}

/// Integrates a vector-valued integrand over [a, b], halving the tanh-sinh step
/// until two successive levels agree to `tol` relative to max(floor, |I|) per
/// component. Nodes of coarser levels are reused. Throws QuadratureError when
/// `max_level` is reached first.
template <std::size_t K, class F>
std::array<double, K> tanh_sinh(F&& f, double a, double b, double tol, int max_level = 10,
                                double floor = 1.0) {
  std::array<double, K> sum{};
  sum.fill(0.0);
  if (!(b > a)) {
    return sum;
  }
  const double half = 0.5 * (b - a);
  const double t_max = 4.0;
  auto add_node = [&](double t) {
    const double u = 0.5 * std::numbers::pi * std::sinh(std::abs(t));
    const double e = std::exp(-2.0 * u);
    const double comp = 2.0 * e / (1.0 + e);
    const double w = 0.5 * std::numbers::pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e)) * half;
    if (w == 0.0) {
      return;
    }
    const double x = t == 0.0 ? 0.5 * (a + b) : (t < 0.0 ? a + half * comp : b - half * comp);
    if (x <= a || x >= b) {
      return;
    }
    const std::array<double, K> v = f(x);
    for (std::size_t i = 0; i < K; ++i) {
      sum[i] += w * v[i];
    }
  };
  double h = 0.5;
  const auto k0 = static_cast<long>(std::ceil(t_max / h));
  for (long k = -k0; k <= k0; ++k) {
    add_node(static_cast<double>(k) * h);
  }
  std::array<double, K> prev{};
  for (std::size_t i = 0; i < K; ++i) {
    prev[i] = h * sum[i];
  }
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    const auto km = static_cast<long>(std::ceil(t_max / h));
    for (long k = -km; k <= km; ++k) {
      if (k % 2 != 0) {
        add_node(static_cast<double>(k) * h);
      }
    }
    std::array<double, K> cur{};
    bool converged = true;
    for (std::size_t i = 0; i < K; ++i) {
      cur[i] = h * sum[i];
      if (std::abs(cur[i] - prev[i]) > tol * std::max(floor, std::abs(cur[i]))) {
        converged = false;
      }
    }
    if (converged && level >= 2) {
      return cur;
    }
    prev = cur;
  }
  throw QuadratureError("tanh-sinh quadrature did not reach tolerance " + std::to_string(tol));
}

/// Scalar convenience wrapper.
template <class F>
double tanh_sinh_scalar(F&& f, double a, double b, double tol, int max_level = 10,
                        double floor = 1.0) {
  return tanh_sinh<1>([&](double x) { return std::array<double, 1>{f(x)}; }, a, b, tol, max_level,
                      floor)[0];
}

/// Gauss-Legendre nodes mapped to [a, b].
inline std::vector<Node> gauss_legendre_nodes(int count, double a, double b) {
  std::vector<Node> nodes(static_cast<std::size_t>(count));
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const int m = (count + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < count; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      dp = count * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = {mid - half * x, w * half};
    nodes[static_cast<std::size_t>(count - 1 - i)] = {mid + half * x, w * half};
  }
  return nodes;
}

} // namespace facetflow::quad
