#pragma once

// Truncated gradient maps, the regularised moduli V_eps and W_eps, and the
// critical exponents of the subcritical regime.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "facetflow/errors.hpp"

namespace facetflow {

struct TruncationParams {
  double delta = 0.1;
  double eps = 0.0;

  void validate() const {
    if (!(delta > 0.0) || !(delta < 1.0)) {
      throw PreconditionError("delta must lie in (0, 1)");
    }
    if (!(eps >= 0.0)) {
      throw PreconditionError("eps must be nonnegative");
    }
  }

  /// eps < delta / 8, required for the regularised truncation estimates.
  bool admissible_for_regularized() const { return eps < delta / 8.0; }
};

enum class TruncationMode { exact, regularized };

/// exact: (|z| - delta)_+ z/|z|; regularized: (sqrt(eps^2 + |z|^2) - 2 delta)_+ z/|z|.
/// z = 0 maps to 0.
inline Eigen::VectorXd truncate_gradient(const Eigen::VectorXd& z, const TruncationParams& tp, TruncationMode mode) {
  tp.validate();
  const double r = z.norm();
  if (r == 0.0) {
    return Eigen::VectorXd::Zero(z.size());
  }
  const double mag = mode == TruncationMode::exact ? r - tp.delta
                                                   : std::sqrt(tp.eps * tp.eps + r * r) - 2.0 * tp.delta;
  if (mag <= 0.0) {
    return Eigen::VectorXd::Zero(z.size());
  }
  return (mag / r) * z;
}

/// Modulus of the regularised truncation computed from V = sqrt(eps^2 + |z|^2).
inline double truncated_modulus(double v, double delta) { return std::max(0.0, v - 2.0 * delta); }

inline double v_eps(const Eigen::VectorXd& g, double eps) { return std::sqrt(eps * eps + g.squaredNorm()); }

/// Components (g_j - 1)_+ - (-g_j - 1)_+.
inline Eigen::VectorXd w_components(const Eigen::VectorXd& g) {
  Eigen::VectorXd w(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    w(j) = std::max(0.0, g(j) - 1.0) - std::max(0.0, -g(j) - 1.0);
  }
  return w;
}

inline double w_eps(const Eigen::VectorXd& g) { return std::sqrt(1.0 + w_components(g).squaredNorm()); }

/// Constant in V <= c_n W <= c_n (1 + V).
inline double compatibility_constant(int n) { return std::sqrt(static_cast<double>(n)) + 1.0; }

struct ExponentBook {
  int n = 3;
  double p = 1.1;

  /// n(2-p)/p
  double s_c() const { return n * (2.0 - p) / p; }
  /// n(2-p)/2
  double q_c() const { return n * (2.0 - p) / 2.0; }
  /// Exponents of the parabolic Sobolev step on u: kappa = 1 + p/n, gamma = p(1 + 1/(n+p)).
  double kappa_u() const { return 1.0 + p / n; }
  double gamma_u() const { return p * (1.0 + 1.0 / (n + p)); }
  /// Same for V: kappa = 1 + 2/n, gamma = 2(1 + 1/(n+2)).
  double kappa_v() const { return 1.0 + 2.0 / n; }
  double gamma_v() const { return 2.0 * (1.0 + 1.0 / (n + 2.0)); }
  bool subcritical() const { return n >= 3 && p > 1.0 && p <= 2.0 * n / (n + 2.0); }

  /// Throws unless s > s_c (only binding in the subcritical regime).
  void require_s(double s) const {
    if (!(s > s_c())) {
      throw PreconditionError("integrability exponent s must exceed s_c = n(2-p)/p");
    }
  }
};

} // namespace facetflow
