#pragma once

// Sampling certifiers for the structural inequalities satisfied by the
// mollified density: gradient bound, Hessian eigenvalue sandwich, strong
// monotonicity of E_{p,eps} and E^eps, and the w = 0 coercivity form.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "facetflow/energy.hpp"
#include "facetflow/inequality.hpp"
#include "facetflow/mollifier.hpp"

namespace facetflow {

struct SampleSpec {
  std::size_t count = 10000;
  double radius = 3.0;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
};

using StructureReport = InequalityReport;

namespace detail {

/// Half of the points are uniform in the ball, half have log-uniform radius
/// in [1e-4 R, R] so that the region |z| ~ eps is well represented.
inline Eigen::VectorXd sample_point(std::mt19937_64& rng, int n, double radius, bool log_radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd dir(n);
  double norm = 0.0;
  while (norm < 1e-12) {
    for (int i = 0; i < n; ++i) {
      dir(i) = normal(rng);
    }
    norm = dir.norm();
  }
  dir /= norm;
  const double u = unif(rng);
  const double r = log_radius ? radius * std::pow(1e-4, 1.0 - u) : radius * std::pow(u, 1.0 / n);
  return r * dir;
}

} // namespace detail

inline StructureReport verify_structural(const MollifiedDensity& md, const EnergyModel& model,
                                         const SampleSpec& samples = {}) {
  if (model.n != md.dimension()) {
    throw PreconditionError("model and density dimensions differ");
  }
  if (samples.radius > md.r_max()) {
    throw PreconditionError("sample radius exceeds the table range");
  }
  const double eps = md.eps();
  const double p = model.p;
  const double lam = model.lambda;
  const double Lam = model.Lambda;
  const double K = model.K;
  const int n = model.n;

  InequalityResult grad_bound{"gradient_bound"};
  InequalityResult hess_lower{"hessian_lower"};
  InequalityResult hess_upper{"hessian_upper"};
  InequalityResult mono_p{"monotonicity_p"};
  InequalityResult mono_total{"monotonicity_total"};
  InequalityResult coercive{"coercivity_w0"};
  InequalityResult coercive_p{"coercivity_w0_p"};
  auto record = [](InequalityResult& r, double margin) {
    ++r.samples;
    r.worst_margin = std::min(r.worst_margin, margin);
  };

  std::mt19937_64 rng(samples.seed);
  for (std::size_t k = 0; k < samples.count; ++k) {
    const bool log_r = (k % 2) == 1;
    const Eigen::VectorXd z = detail::sample_point(rng, n, samples.radius, log_r);
    const Eigen::VectorXd w = detail::sample_point(rng, n, samples.radius, !log_r);
    const double rz2 = z.squaredNorm();

    const Eigen::VectorXd gz = md.grad(z);
    record(grad_bound, Lam * std::pow(eps + rz2, 0.5 * (p - 1.0)) + K - gz.norm());

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(md.hess(z), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    const double base = std::pow(eps * eps + rz2, 0.5 * p - 1.0);
    record(hess_lower, lo - lam * base);
    record(hess_upper, Lam * base + K / std::sqrt(eps * eps + rz2) - hi);

    const Eigen::VectorXd dz = z - w;
    const double weight = lam * std::pow(eps * eps + rz2 + w.squaredNorm(), 0.5 * p - 1.0) * dz.squaredNorm();
    const Eigen::VectorXd gpz = md.grad(z, Component::p);
    const Eigen::VectorXd gpw = md.grad(w, Component::p);
    record(mono_p, (gpz - gpw).dot(dz) - weight);
    record(mono_total, (gz - md.grad(w)).dot(dz) - weight);

    const double floor_term = lam * (std::pow(std::sqrt(rz2), p) - std::pow(eps, p));
    record(coercive, gz.dot(z) - floor_term);
    record(coercive_p, gpz.dot(z) - floor_term);
  }

  StructureReport rep;
  for (InequalityResult* r : {&grad_bound, &hess_lower, &hess_upper, &mono_p, &mono_total, &coercive, &coercive_p}) {
    r->pass = r->worst_margin >= -samples.tolerance;
    rep.add(*r);
  }
  return rep;
}

/// Extremal constants observed on a sample: the largest admissible lambda,
/// and the smallest Lambda and K making the gradient bound and the upper
/// eigenvalue bound hold (each with the other constant at its model value).
struct StructuralConstants {
  double lambda = 0.0;
  double Lambda = 0.0;
  double K = 0.0;
};

inline StructuralConstants estimate_structural_constants(const MollifiedDensity& md, const EnergyModel& model,
                                                         const SampleSpec& samples = {}) {
  const double eps = md.eps();
  const double p = model.p;
  StructuralConstants c;
  c.lambda = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(samples.seed);
  for (std::size_t k = 0; k < samples.count; ++k) {
    const Eigen::VectorXd z = detail::sample_point(rng, model.n, samples.radius, (k % 2) == 1);
    const Eigen::VectorXd w = detail::sample_point(rng, model.n, samples.radius, (k % 2) == 0);
    const double rz2 = z.squaredNorm();
    const double r = std::sqrt(rz2);
    const auto pr = md.radial(r);
    const double tang = r > 0.0 ? pr.g1 / r : pr.g2;
    const double lo = std::min(pr.g2, tang);
    const double hi = std::max(pr.g2, tang);
    const double base = std::pow(eps * eps + rz2, 0.5 * p - 1.0);
    c.lambda = std::min(c.lambda, lo / base);
    const Eigen::VectorXd dz = z - w;
    const double d2 = dz.squaredNorm();
    if (d2 > 0.0) {
      const double mono = (md.grad(z, Component::p) - md.grad(w, Component::p)).dot(dz);
      c.lambda = std::min(c.lambda, mono / (std::pow(eps * eps + rz2 + w.squaredNorm(), 0.5 * p - 1.0) * d2));
    }
    const double gb = std::pow(eps + rz2, 0.5 * (p - 1.0));
    c.Lambda = std::max(c.Lambda, (std::abs(pr.g1) - model.K) / gb);
    c.Lambda = std::max(c.Lambda, (hi - model.K / std::sqrt(eps * eps + rz2)) / base);
    c.K = std::max(c.K, std::abs(pr.g1) - model.Lambda * gb);
    c.K = std::max(c.K, (hi - model.Lambda * base) * std::sqrt(eps * eps + rz2));
  }
  c.Lambda = std::max(c.Lambda, 0.0);
  return c;
}

} // namespace facetflow
