#pragma once

// Energy densities E = E1 + Ep with E1 positively one-homogeneous (Euclidean
// norm or an SPD-weighted norm) and Ep(z) = |z|^p / p.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "facetflow/errors.hpp"

namespace facetflow {

enum class DensityKind { euclidean, anisotropic };

struct EnergyModel {
  int n = 1;
  double p = 1.5;
  double lambda = 0.25;
  double Lambda = 2.0;
  double K = 2.0;
  DensityKind kind = DensityKind::euclidean;
  Eigen::MatrixXd A; // only meaningful for anisotropic densities

  /// Default structural constants: lambda = min(p-1, 1)/2, Lambda = 2, K = 2.
  static EnergyModel euclidean(int n, double p) {
    EnergyModel m;
    m.n = n;
    m.p = p;
    m.lambda = std::min(p - 1.0, 1.0) / 2.0;
    m.Lambda = 2.0;
    m.K = 2.0;
    m.kind = DensityKind::euclidean;
    m.A = Eigen::MatrixXd::Identity(n, n);
    m.validate();
    return m;
  }

  static EnergyModel anisotropic(const Eigen::MatrixXd& A, double p) {
    EnergyModel m = euclidean(static_cast<int>(A.rows()), p);
    m.kind = DensityKind::anisotropic;
    m.A = A;
    m.validate();
    m.K = std::max(m.K, m.one_homogeneous_bound());
    return m;
  }

  /// n >= 3 and 1 < p <= 2n/(n+2).
  bool subcritical() const { return n >= 3 && p > 1.0 && p <= 2.0 * n / (n + 2.0); }

  /// Smallest K0 with |grad E1| <= K0 and Hess E1(z) <= (K0/|z|) id.
  double one_homogeneous_bound() const {
    if (kind == DensityKind::euclidean) {
      return 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return std::max(std::sqrt(hi), hi / std::sqrt(lo));
  }

  void validate() const {
    if (n < 1) {
      throw PreconditionError("dimension n must be at least 1");
    }
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw PreconditionError("p must exceed 1");
    }
    if (!(lambda > 0.0) || !(Lambda >= lambda) || !(K > 0.0)) {
      throw PreconditionError("structural constants must satisfy 0 < lambda <= Lambda and K > 0");
    }
    if (kind == DensityKind::anisotropic) {
      if (A.rows() != n || A.cols() != n) {
        throw PreconditionError("anisotropy matrix must be n x n");
      }
      if ((A - A.transpose()).norm() > 1e-12 * std::max(1.0, A.norm())) {
        throw PreconditionError("anisotropy matrix must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
      if (!(es.eigenvalues().minCoeff() > 0.0)) {
        throw PreconditionError("anisotropy matrix must be positive definite");
      }
    }
  }
};

inline double eval_E1(const EnergyModel& m, const Eigen::VectorXd& z) {
  if (m.kind == DensityKind::euclidean) {
    return z.norm();
  }
  return std::sqrt(std::max(0.0, z.dot(m.A * z)));
}

inline double eval_Ep(const EnergyModel& m, const Eigen::VectorXd& z) {
  return std::pow(z.norm(), m.p) / m.p;
}

inline double eval_energy(const EnergyModel& m, const Eigen::VectorXd& z) {
  return eval_E1(m, z) + eval_Ep(m, z);
}

/// Subdifferential of E1: a singleton away from the origin, the dual unit
/// ball {zeta : zeta^T D zeta <= 1} at the origin (D = A^{-1}, or id).
struct SubgradientSet {
  enum class Kind { singleton, dual_ball };
  Kind kind = Kind::singleton;
  Eigen::VectorXd value;   // singleton member
  double radius = 1.0;     // dual ball radius
  Eigen::MatrixXd dual_norm;

  bool contains(const Eigen::VectorXd& zeta, double tol = 1e-12) const {
    if (kind == Kind::singleton) {
      return (zeta - value).norm() <= tol;
    }
    return std::sqrt(std::max(0.0, zeta.dot(dual_norm * zeta))) <= radius + tol;
  }

  /// Largest Euclidean norm of a member.
  double max_norm() const {
    if (kind == Kind::singleton) {
      return value.norm();
    }
    // max |zeta| over zeta^T D zeta <= r^2 is r / sqrt(lambda_min(D))
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dual_norm);
    return radius / std::sqrt(es.eigenvalues().minCoeff());
  }
};

inline Eigen::VectorXd gradient_E1(const EnergyModel& m, const Eigen::VectorXd& z) {
  const double e = eval_E1(m, z);
  if (e == 0.0) {
    return Eigen::VectorXd::Zero(z.size());
  }
  if (m.kind == DensityKind::euclidean) {
    return z / e;
  }
  return m.A * z / e;
}

inline SubgradientSet subdifferential_E1(const EnergyModel& m, const Eigen::VectorXd& z) {
  SubgradientSet s;
  if (z.squaredNorm() > 0.0) {
    s.kind = SubgradientSet::Kind::singleton;
    s.value = gradient_E1(m, z);
    return s;
  }
  s.kind = SubgradientSet::Kind::dual_ball;
  s.radius = 1.0;
  s.dual_norm = m.kind == DensityKind::euclidean ? Eigen::MatrixXd::Identity(m.n, m.n)
                                                 : Eigen::MatrixXd(m.A.inverse());
  return s;
}

/// Exact Hessian of E1 for z != 0.
inline Eigen::MatrixXd hessian_E1(const EnergyModel& m, const Eigen::VectorXd& z) {
  const double e = eval_E1(m, z);
  if (e == 0.0) {
    throw PreconditionError("Hessian of E1 is undefined at the origin");
  }
  if (m.kind == DensityKind::euclidean) {
    const Eigen::VectorXd u = z / e;
    return (Eigen::MatrixXd::Identity(m.n, m.n) - u * u.transpose()) / e;
  }
  const Eigen::VectorXd az = m.A * z;
  return m.A / e - az * az.transpose() / (e * e * e);
}

} // namespace facetflow
