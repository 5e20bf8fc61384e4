#pragma once

// Friedrichs mollification of the radial density E = |z| + |z|^p/p against the
// standard bump. The radial profile r -> E^eps(r e1) and its first two radial
// derivatives are tabulated per component and interpolated by quintic Hermite
// splines, so that the returned gradient and Hessian are the exact derivatives
// of the interpolated density.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "facetflow/energy.hpp"
#include "facetflow/errors.hpp"
#include "facetflow/quadrature.hpp"

namespace facetflow {

struct QuadSpec {
  double tol = 1e-12;          // relative tolerance of every quadrature
  double r_max = 0.0;          // 0 selects 8 * (expected_grad + 1)
  double expected_grad = 1.0;  // expected sup |grad u|
  int spacing_divisor = 16;    // table spacing <= eps / spacing_divisor
  int max_level = 12;
};

enum class Component { total, one, p };

/// Surface area of the unit sphere in R^dim.
inline double unit_sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

namespace detail {

/// exp(-1/(1-|w|^2)) and its first two partial derivatives along e1.
inline std::array<double, 3> bump_partials(double w1, double w_sq) {
  const double q = 1.0 - w_sq;
  if (q <= 0.0) {
    return {0.0, 0.0, 0.0};
  }
  const double phi = std::exp(-1.0 / q);
  const double iq = 1.0 / q;
  const double iq2 = iq * iq;
  return {phi, -2.0 * w1 * iq2 * phi, phi * (-2.0 * iq2 + w1 * w1 * (4.0 * iq2 * iq2 - 8.0 * iq2 * iq))};
}

/// Integral of exp(-1/(1-|w|^2)) over the unit ball of R^n.
inline double bump_mass(int n, double tol) {
  const double radial = quad::tanh_sinh_scalar(
      [n](double s) { return std::exp(-1.0 / (1.0 - s * s)) * std::pow(s, n - 1); }, 0.0, 1.0, tol,
      14, 1e-3);
  return unit_sphere_area(n) * radial;
}

struct FarNode {
  double s;
  double cs; // s cos(theta)
  double ss; // s sin(theta)
  double w;
};

} // namespace detail

/// Tabulated radial profile: value, first and second radial derivative at r_i = i h.
struct RadialTable {
  std::vector<double> g;
  std::vector<double> g1;
  std::vector<double> g2;
};

class MollifiedDensity {
public:
  struct Profile {
    double g;
    double g1;
    double g2;
  };

  MollifiedDensity(const EnergyModel& model, double eps, const QuadSpec& spec = {})
      : n_(model.n), p_(model.p), eps_(eps), spec_(spec) {
    model.validate();
    if (model.kind != DensityKind::euclidean) {
      throw PreconditionError("mollified tables require a radial (Euclidean) density");
    }
    if (!(eps > 0.0) || !(eps < 1.0)) {
      throw PreconditionError("mollification radius must lie in (0, 1)");
    }
    if (!(spec.tol > 0.0) || spec.spacing_divisor < 1) {
      throw PreconditionError("invalid quadrature specification");
    }
    r_max_ = spec.r_max > 0.0 ? spec.r_max : 8.0 * (spec.expected_grad + 1.0);
    if (!(r_max_ > 2.0 * eps)) {
      throw PreconditionError("table range must exceed twice the mollification radius");
    }
    const double target = eps / spec.spacing_divisor;
    const auto intervals = static_cast<std::size_t>(std::ceil(r_max_ / target - 1e-9));
    h_ = r_max_ / static_cast<double>(intervals);
    mass_ = detail::bump_mass(n_, 1e-15);
    build(intervals + 1);
  }

  int dimension() const noexcept { return n_; }
  double p() const noexcept { return p_; }
  double eps() const noexcept { return eps_; }
  double r_max() const noexcept { return r_max_; }
  double spacing() const noexcept { return h_; }
  const QuadSpec& quad_spec() const noexcept { return spec_; }
  /// Normalising constant c of rho = c exp(-1/(1-|w|^2)).
  double bump_constant() const noexcept { return 1.0 / mass_; }
  /// Sizes of the far-field product rule (s nodes, theta nodes).
  std::array<std::size_t, 2> far_rule_size() const noexcept { return far_size_; }

  std::size_t size() const noexcept { return total_.g.size(); }
  double radius(std::size_t i) const noexcept { return static_cast<double>(i) * h_; }
  const RadialTable& table(Component c = Component::total) const noexcept {
    switch (c) {
    case Component::one:
      return one_;
    case Component::p:
      return pow_;
    default:
      return total_;
    }
  }

  /// Interpolated radial profile and its first two derivatives at r in [0, r_max].
  Profile radial(double r, Component c = Component::total) const {
    if (!(r <= r_max_) || r < 0.0) {
      throw OutOfTableError(r, r_max_);
    }
    const RadialTable& tb = table(c);
    const double x = r / h_;
    const std::size_t last = tb.g.size() - 2;
    const std::size_t i = std::min(static_cast<std::size_t>(x), last);
    const double t = x - static_cast<double>(i);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    const double t5 = t4 * t;

    const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    const double h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    const double h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    const double h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    const double h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    const double h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;

    const double d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    const double d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    const double d2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    const double d3 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    const double d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    const double d5 = -d0;

    const double s0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    const double s1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    const double s2 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3;
    const double s3 = 3.0 * t - 12.0 * t2 + 10.0 * t3;
    const double s4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    const double s5 = -s0;

    const double ga = tb.g[i], gb = tb.g[i + 1];
    const double fa = tb.g1[i], fb = tb.g1[i + 1];
    const double ca = tb.g2[i], cb = tb.g2[i + 1];
    const double h = h_;
    Profile out{};
    out.g = ga * h0 + gb * h5 + h * (fa * h1 + fb * h4) + h * h * (ca * h2 + cb * h3);
    out.g1 = (ga * d0 + gb * d5) / h + fa * d1 + fb * d4 + h * (ca * d2 + cb * d3);
    out.g2 = (ga * s0 + gb * s5) / (h * h) + (fa * s1 + fb * s4) / h + ca * s2 + cb * s3;
    return out;
  }

  double eval(const Eigen::VectorXd& z, Component c = Component::total) const {
    check_dim(z);
    return radial(z.norm(), c).g;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& z, Component c = Component::total) const {
    check_dim(z);
    const double r = z.norm();
    const Profile pr = radial(r, c);
    if (r == 0.0) {
      return Eigen::VectorXd::Zero(z.size());
    }
    return (pr.g1 / r) * z;
  }

  Eigen::MatrixXd hess(const Eigen::VectorXd& z, Component c = Component::total) const {
    check_dim(z);
    const double r = z.norm();
    const Profile pr = radial(r, c);
    const auto dim = z.size();
    if (r == 0.0) {
      return pr.g2 * Eigen::MatrixXd::Identity(dim, dim);
    }
    const Eigen::VectorXd u = z / r;
    const Eigen::MatrixXd proj = u * u.transpose();
    return pr.g2 * proj + (pr.g1 / r) * (Eigen::MatrixXd::Identity(dim, dim) - proj);
  }

private:
  void check_dim(const Eigen::VectorXd& z) const {
    if (z.size() != n_) {
      throw PreconditionError("vector dimension does not match the density");
    }
  }

  // Values (g, g1, g2) for E1 followed by Ep at radius r <= 2 eps, integrating
  // derivatives of the mollifier against E centred at the origin.
  std::array<double, 6> near_values(double r) const {
    const double rh = r / eps_;
    const double tol = spec_.tol;
    const int lvl = spec_.max_level;
    const double p = p_;
    std::array<double, 6> acc{};
    acc.fill(0.0);
    auto add = [&acc](const std::array<double, 6>& v) {
      for (std::size_t i = 0; i < 6; ++i) {
        acc[i] += v[i];
      }
    };
    if (n_ == 1) {
      auto f = [&](double xi) {
        const double w = rh - xi;
        const auto b = detail::bump_partials(w, w * w);
        const double f1 = std::abs(xi);
        const double fp = std::pow(f1, p);
        return std::array<double, 6>{f1 * b[0], f1 * b[1], f1 * b[2], fp * b[0], fp * b[1], fp * b[2]};
      };
      if (rh < 1.0) {
        add(quad::tanh_sinh<6>(f, rh - 1.0, 0.0, tol, lvl));
      }
      add(quad::tanh_sinh<6>(f, std::max(0.0, rh - 1.0), rh + 1.0, tol, lvl));
    } else {
      const int n = n_;
      auto inner = [&](double t) {
        double th_max = std::numbers::pi;
        if (t > 1.0 - rh) {
          const double c = (rh * rh + t * t - 1.0) / (2.0 * rh * t);
          th_max = std::acos(std::clamp(c, -1.0, 1.0));
        }
        return quad::tanh_sinh<3>(
            [&](double th) {
              const double ct = std::cos(th);
              const double st = std::sin(th);
              const double w1 = rh - t * ct;
              const double wsq = rh * rh + t * t - 2.0 * rh * t * ct;
              auto b = detail::bump_partials(w1, wsq);
              const double sw = n == 2 ? 1.0 : std::pow(st, n - 2);
              return std::array<double, 3>{b[0] * sw, b[1] * sw, b[2] * sw};
            },
            0.0, th_max, tol, lvl);
      };
      auto outer = [&](double t) {
        const auto in = inner(t);
        const double tn = std::pow(t, n - 1);
        const double f1 = tn * t;
        const double fp = tn * std::pow(t, p);
        return std::array<double, 6>{f1 * in[0], f1 * in[1], f1 * in[2], fp * in[0], fp * in[1], fp * in[2]};
      };
      if (rh < 1.0) {
        add(quad::tanh_sinh<6>(outer, 0.0, 1.0 - rh, tol, lvl));
        add(quad::tanh_sinh<6>(outer, 1.0 - rh, 1.0 + rh, tol, lvl));
      } else {
        add(quad::tanh_sinh<6>(outer, rh - 1.0, rh + 1.0, tol, lvl));
      }
      for (double& v : acc) {
        v *= unit_sphere_area(n - 1);
      }
    }
    const double c = 1.0 / mass_;
    const double s1 = c * eps_;
    const double sp = c * std::pow(eps_, p) / p;
    return {acc[0] * s1, acc[1] * s1 / eps_, acc[2] * s1 / (eps_ * eps_),
            acc[3] * sp, acc[4] * sp / eps_, acc[5] * sp / (eps_ * eps_)};
  }

  std::vector<detail::FarNode> far_rule(double hs, std::size_t m) const {
    std::vector<detail::FarNode> rule;
    const double c = 1.0 / mass_;
    if (n_ == 1) {
      for (const auto& s : quad::tanh_sinh_nodes(-1.0, 1.0, hs)) {
        rule.push_back({s.x, s.x, 0.0, c * std::exp(-1.0 / (1.0 - s.x * s.x)) * s.w});
      }
      return rule;
    }
    const double sphere = unit_sphere_area(n_ - 1);
    const auto th = quad::gauss_legendre_nodes(static_cast<int>(m), 0.0, std::numbers::pi);
    for (const auto& s : quad::tanh_sinh_nodes(0.0, 1.0, hs)) {
      const double radial = c * std::exp(-1.0 / (1.0 - s.x * s.x)) * std::pow(s.x, n_ - 1) * s.w * sphere;
      if (radial == 0.0) {
        continue;
      }
      for (const auto& a : th) {
        const double sw = n_ == 2 ? 1.0 : std::pow(std::sin(a.x), n_ - 2);
        rule.push_back({s.x, s.x * std::cos(a.x), s.x * std::sin(a.x), radial * sw * a.w});
      }
    }
    return rule;
  }

  // Values for r > 2 eps from the product rule in mollifier coordinates.
  std::array<double, 6> far_values(double r, const std::vector<detail::FarNode>& rule) const {
    std::array<double, 6> v{};
    v.fill(0.0);
    const double e = eps_;
    const double p = p_;
    for (const auto& nd : rule) {
      const double d = std::sqrt(r * r - 2.0 * r * e * nd.cs + e * e * nd.s * nd.s);
      const double a = (r - e * nd.cs) / d;
      // 1 - a^2 without cancellation
      const double b = e * e * nd.ss * nd.ss / (d * d);
      const double pd = std::pow(d, p - 2.0);
      v[0] += nd.w * d;
      v[1] += nd.w * a;
      v[2] += nd.w * b / d;
      v[3] += nd.w * d * d * pd / p;
      v[4] += nd.w * d * pd * a;
      v[5] += nd.w * ((p - 1.0) * pd * a * a + pd * b);
    }
    return v;
  }

  std::vector<detail::FarNode> select_far_rule() {
    const std::array<double, 4> probes{2.0 * eps_ + h_, 3.0 * eps_, 8.0 * eps_, r_max_};
    double hs = 0.25;
    std::size_t m = 8;
    auto coarse = far_rule(hs, m);
    for (int round = 0; round < 7; ++round) {
      auto fine = far_rule(0.5 * hs, 2 * m);
      bool ok = true;
      for (double r : probes) {
        const auto a = far_values(r, coarse);
        const auto b = far_values(r, fine);
        for (std::size_t k = 0; k < 6; ++k) {
          if (std::abs(a[k] - b[k]) > spec_.tol * std::max(std::abs(b[k]), 1e-300)) {
            ok = false;
          }
        }
      }
      if (ok) {
        far_size_ = {n_ == 1 ? coarse.size() : coarse.size() / m, n_ == 1 ? 1 : m};
        return coarse;
      }
      hs *= 0.5;
      m *= 2;
      coarse = std::move(fine);
    }
    throw QuadratureError("far-field product rule did not converge");
  }

  void build(std::size_t count) {
    for (RadialTable* tb : {&one_, &pow_, &total_}) {
      tb->g.assign(count, 0.0);
      tb->g1.assign(count, 0.0);
      tb->g2.assign(count, 0.0);
    }
    const auto rule = select_far_rule();
    for (std::size_t i = 0; i < count; ++i) {
      const double r = radius(i);
      const auto v = r <= 2.0 * eps_ ? near_values(r) : far_values(r, rule);
      one_.g[i] = v[0];
      one_.g1[i] = v[1];
      one_.g2[i] = v[2];
      pow_.g[i] = v[3];
      pow_.g1[i] = v[4];
      pow_.g2[i] = v[5];
    }
    one_.g1[0] = 0.0;
    pow_.g1[0] = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      total_.g[i] = one_.g[i] + pow_.g[i];
      total_.g1[i] = one_.g1[i] + pow_.g1[i];
      total_.g2[i] = one_.g2[i] + pow_.g2[i];
    }
  }

  int n_;
  double p_;
  double eps_;
  QuadSpec spec_;
  double r_max_ = 0.0;
  double h_ = 0.0;
  double mass_ = 1.0;
  std::array<std::size_t, 2> far_size_{0, 0};
  RadialTable one_;
  RadialTable pow_;
  RadialTable total_;
};

inline MollifiedDensity mollify_density(const EnergyModel& model, double eps, const QuadSpec& spec = {}) {
  return MollifiedDensity(model, eps, spec);
}

inline double eval_mollified(const MollifiedDensity& md, const Eigen::VectorXd& z) { return md.eval(z); }

inline Eigen::VectorXd grad_mollified(const MollifiedDensity& md, const Eigen::VectorXd& z) {
  return md.grad(z);
}

inline Eigen::MatrixXd hess_mollified(const MollifiedDensity& md, const Eigen::VectorXd& z) {
  return md.hess(z);
}

} // namespace facetflow
