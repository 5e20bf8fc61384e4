#pragma once

// Executable forms of the two iteration lemmas: the Moser recursion
// Y_{l+1}^{p_{l+1}} <= (A B^l Y_l^{p_l})^kappa run with equality, and the
// absorbing lemma for f(r1) <= theta f(r2) + A/(r2-r1)^alpha + B.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "facetflow/diagnostics.hpp"
#include "facetflow/errors.hpp"

namespace facetflow {

/// Moser instance with exponents p_l = mu (kappa^l - 1) + p0.
struct MoserInstance {
  double A = 1.0;
  double B = 1.0;
  double kappa = 2.0;
  double mu = 1.0;
  double p0 = 1.0;
  double Y0 = 1.0;
  int L = 40;

  double p_at(int l) const { return mu * (std::pow(kappa, l) - 1.0) + p0; }

  void validate() const {
    if (!(A >= 1.0) || !(B >= 1.0) || !std::isfinite(A) || !std::isfinite(B)) {
      throw PreconditionError("Moser instance needs A, B >= 1");
    }
    if (!(kappa > 1.0) || !std::isfinite(kappa)) {
      throw PreconditionError("Moser instance needs kappa > 1");
    }
    if (!(mu > 0.0) || !(p0 >= 1.0)) {
      throw PreconditionError("Moser instance needs mu > 0 and p0 >= 1");
    }
    if (!(Y0 >= 0.0) || !std::isfinite(Y0) || L < 0) {
      throw PreconditionError("Moser instance needs Y0 >= 0 and L >= 0");
    }
  }
};

struct MoserResult {
  double Y_L = 0.0;
  double bound = 0.0;
  double log_Y_L = 0.0;
  double log_bound = 0.0;
  bool pass = false;
};

/// Iterates the recursion with equality in log space (Z_l = p_l log Y_l) and
/// compares against A^{k'/mu} B^{k'^2/mu} Y0^{p0/mu}, k' = kappa/(kappa-1).
inline MoserResult moser_sequence(const MoserInstance& in) {
  in.validate();
  MoserResult res;
  const double kp = in.kappa / (in.kappa - 1.0);
  if (in.Y0 == 0.0) {
    res.log_Y_L = res.log_bound = -std::numeric_limits<double>::infinity();
    res.pass = true;
    return res;
  }
  const double la = std::log(in.A);
  const double lb = std::log(in.B);
  double z = in.p0 * std::log(in.Y0);
  for (int l = 0; l < in.L; ++l) {
    z = in.kappa * (la + l * lb + z);
  }
  res.log_Y_L = z / in.p_at(in.L);
  res.log_bound = (kp * la + kp * kp * lb + in.p0 * std::log(in.Y0)) / in.mu;
  res.Y_L = std::exp(res.log_Y_L);
  res.bound = std::exp(res.log_bound);
  res.pass = res.log_Y_L <= res.log_bound + std::log1p(1e-9);
  return res;
}

/// Absorbing-lemma instance: f sampled at increasing radii r[0] = R1 < ... < r[m-1] = R2.
struct AbsorbingInstance {
  double theta = 0.5;
  double A = 1.0;
  double alpha = 1.0;
  double B = 0.0;
  std::vector<double> r;
  std::vector<double> f;

  void validate() const {
    if (!(theta >= 0.0 && theta < 1.0)) {
      throw PreconditionError("theta must lie in [0, 1)");
    }
    if (!(alpha > 0.0) || !(A >= 0.0) || !(B >= 0.0)) {
      throw PreconditionError("need alpha > 0 and A, B >= 0");
    }
    if (r.size() < 2 || r.size() != f.size()) {
      throw PreconditionError("need at least two samples of f");
    }
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (!(r[i] > r[i - 1])) {
        throw PreconditionError("sample radii must increase");
      }
    }
    for (double v : f) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw PreconditionError("f must be nonnegative and finite");
      }
    }
  }
};

/// C(alpha, theta) = min over tau in (theta^{1/alpha}, 1) of
/// (1-tau)^{-alpha} / (1 - theta tau^{-alpha}), from the geometric radii
/// r_{i+1} = r_i + (1-tau) tau^i (R2 - R1).
inline double absorbing_constant(double alpha, double theta) {
  if (!(alpha > 0.0) || !(theta >= 0.0 && theta < 1.0)) {
    throw PreconditionError("need alpha > 0 and theta in [0, 1)");
  }
  if (theta == 0.0) {
    return 1.0;
  }
  auto c = [&](double tau) { return std::pow(1.0 - tau, -alpha) / (1.0 - theta * std::pow(tau, -alpha)); };
  // c is infinite at both ends and unimodal in between
  double lo = std::pow(theta, 1.0 / alpha);
  double hi = 1.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = c(x1);
  double f2 = c(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = c(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = c(x2);
    }
  }
  return std::min(f1, f2);
}

/// Checks the hypothesis on every sampled pair (throws PreconditionError when
/// it fails), then f(R1) <= C (A/(R2-R1)^alpha + B).
inline DiagnosticsReport absorbing_lemma_check(const AbsorbingInstance& in, double tol = 1e-12) {
  in.validate();
  const std::size_t m = in.r.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double rhs = in.theta * in.f[j] + in.A / std::pow(in.r[j] - in.r[i], in.alpha) + in.B;
      if (in.f[i] > rhs * (1.0 + tol)) {
        throw PreconditionError("absorbing hypothesis violated at sample pair (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
      }
    }
  }
  const double C = absorbing_constant(in.alpha, in.theta);
  const double span = in.r.back() - in.r.front();
  const double rhs = C * (in.A / std::pow(span, in.alpha) + in.B);
  DiagnosticsReport rep;
  rep.check = "absorbing_lemma";
  rep.params = {{"theta", in.theta}, {"alpha", in.alpha}, {"A", in.A}, {"B", in.B}};
  rep.fitted["C"] = C;
  rep.margins["lhs"] = in.f.front();
  rep.margins["rhs"] = rhs;
  rep.margins["margin"] = rhs - in.f.front();
  rep.set_pass(in.f.front() <= rhs * (1.0 + tol));
  return rep;
}

/// kappa in (1,3), A, B in (1,10), Y0 in (0,5), mu in [1,4], p0 = mu.
inline MoserInstance random_moser_instance(std::mt19937_64& rng, int L = 40) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MoserInstance in;
  in.kappa = 1.0 + 2.0 * u(rng);
  in.A = 1.0 + 9.0 * u(rng);
  in.B = 1.0 + 9.0 * u(rng);
  in.Y0 = 5.0 * u(rng);
  in.mu = 1.0 + 3.0 * u(rng);
  in.p0 = in.mu;
  in.L = L;
  return in;
}

/// Random piecewise-linear f on [R1, R2], sampled at `samples` radii, with B
/// chosen as the smallest value making the hypothesis hold on every pair.
inline AbsorbingInstance random_absorbing_instance(std::mt19937_64& rng, std::size_t samples = 65) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AbsorbingInstance in;
  in.theta = 0.9 * u(rng);
  in.alpha = 0.5 + 3.0 * u(rng);
  in.A = 0.1 + 2.0 * u(rng);
  const double R1 = 0.1 + u(rng);
  const double R2 = R1 + 0.2 + u(rng);
  const int knots = 2 + static_cast<int>(6 * u(rng));
  std::vector<double> kv(static_cast<std::size_t>(knots) + 1);
  for (double& v : kv) {
    v = 10.0 * u(rng);
  }
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
    in.r.push_back(R1 + s * (R2 - R1));
    const double x = s * knots;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(x), static_cast<std::size_t>(knots) - 1);
    const double w = x - static_cast<double>(k);
    in.f.push_back((1.0 - w) * kv[k] + w * kv[k + 1]);
  }
  double B = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = i + 1; j < samples; ++j) {
      B = std::max(B, in.f[i] - in.theta * in.f[j] - in.A / std::pow(in.r[j] - in.r[i], in.alpha));
    }
  }
  in.B = B;
  return in;
}

} // namespace facetflow
