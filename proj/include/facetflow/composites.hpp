#pragma once

// Truncated power families psi_{alpha,M}, tilde-psi_{alpha,M}, their primitives
// Psi(s) = int_0^s tau psi(tau) dtau in closed form, and sampling checkers for
// the inequalities relating them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "facetflow/errors.hpp"
#include "facetflow/inequality.hpp"

namespace facetflow {

enum class PsiVariant { plain, tilde };

struct PsiSpec {
  PsiVariant variant = PsiVariant::plain;
  double alpha = 1.0;
  double M = 2.0;

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
      throw PreconditionError("alpha must be nonnegative");
    }
    if (!(M > 1.0) || !std::isfinite(M)) {
      throw PreconditionError("M must exceed 1");
    }
  }
};

namespace detail {

// sigma^a with the convention 0^0 = 1
inline double pow0(double sigma, double a) { return a == 0.0 ? 1.0 : std::pow(sigma, a); }

} // namespace detail

inline double psi_eval(const PsiSpec& s, double sigma) {
  s.validate();
  if (!(sigma >= 0.0)) {
    throw PreconditionError("sigma must be nonnegative");
  }
  const double a = s.alpha;
  const double c = std::min(sigma, s.M);
  if (s.variant == PsiVariant::plain) {
    return detail::pow0(c, a);
  }
  if (c <= 1.0) {
    return 0.0;
  }
  return detail::pow0(c, a) - detail::pow0(c, a - 1.0);
}

/// Derivative of psi; at the kinks sigma in {1, M} the left derivative.
inline double psi_prime(const PsiSpec& s, double sigma) {
  s.validate();
  if (!(sigma >= 0.0)) {
    throw PreconditionError("sigma must be nonnegative");
  }
  const double a = s.alpha;
  if (sigma > s.M) {
    return 0.0;
  }
  if (s.variant == PsiVariant::plain) {
    return a == 0.0 ? 0.0 : a * detail::pow0(sigma, a - 1.0);
  }
  if (sigma <= 1.0) {
    return 0.0;
  }
  return (a == 0.0 ? 0.0 : a * detail::pow0(sigma, a - 1.0)) - (a - 1.0) * detail::pow0(sigma, a - 2.0);
}

/// Psi(sigma) = int_0^sigma tau psi(tau) dtau, piecewise closed form.
inline double Psi_eval(const PsiSpec& s, double sigma) {
  s.validate();
  if (!(sigma >= 0.0)) {
    throw PreconditionError("sigma must be nonnegative");
  }
  const double a = s.alpha;
  const double M = s.M;
  const double c = std::min(sigma, M);
  const double tail = sigma > M ? 0.5 * (sigma * sigma - M * M) * psi_eval(s, M) : 0.0;
  if (s.variant == PsiVariant::plain) {
    return std::pow(c, a + 2.0) / (a + 2.0) + tail;
  }
  if (c <= 1.0) {
    return tail;
  }
  auto prim = [a](double t) { return std::pow(t, a + 2.0) / (a + 2.0) - std::pow(t, a + 1.0) / (a + 1.0); };
  return prim(c) - prim(1.0) + tail;
}

/// Pointwise limits as M -> infinity.
inline double psi_limit(PsiVariant v, double alpha, double sigma) {
  if (v == PsiVariant::plain) {
    return detail::pow0(sigma, alpha);
  }
  return sigma > 1.0 ? detail::pow0(sigma, alpha) * (1.0 - 1.0 / sigma) : 0.0;
}

inline double Psi_limit_plain(double alpha, double sigma) { return std::pow(sigma, alpha + 2.0) / (alpha + 2.0); }

/// Checks, on samples away from the kinks {1, M}:
///  r_inequality:       psi^{1-r} (psi')^r sigma^r <= alpha^r psi for the plain family,
///                      an identity for sigma < M (reported relative to max(1, |RHS|));
///  r_inequality_literal: the form with the exponents r and 1-r swapped, reported
///                      for information and expected to fail for large sigma;
///  tilde_inequality:   tilde-psi + sigma tilde-psi' <= (alpha+1) psi chi_{sigma>1};
///  domination:         sigma^{alpha+2} <= 1 + sigma^{alpha+p} + sigma^2 lim tilde-psi;
///  Psi_bound:          Psi(sigma) <= sigma^2 psi(sigma) for the given variant.
/// The last two margins are relative to max(1, |RHS|).
/// The literal form does not contribute to the overall pass flag.
inline InequalityReport check_composite_inequalities(const PsiSpec& spec, double r, const std::vector<double>& sigmas,
                                                     double p, double tol = 1e-12) {
  spec.validate();
  if (!(r > 1.0)) {
    throw PreconditionError("r must exceed 1");
  }
  if (!(p > 1.0)) {
    throw PreconditionError("p must exceed 1");
  }
  const double a = spec.alpha;
  const double M = spec.M;
  const PsiSpec plain{PsiVariant::plain, a, M};
  const PsiSpec tilde{PsiVariant::tilde, a, M};

  InequalityResult r_ineq{"r_inequality"};
  InequalityResult r_literal{"r_inequality_literal"};
  InequalityResult tilde_ineq{"tilde_inequality"};
  InequalityResult domination{"domination"};
  InequalityResult psi_bound{"Psi_bound"};
  double worst_equality = 0.0;
  auto record = [](InequalityResult& res, double margin) {
    ++res.samples;
    res.worst_margin = std::min(res.worst_margin, margin);
  };

  for (double sigma : sigmas) {
    if (!(sigma > 0.0) || sigma == 1.0 || sigma == M) {
      continue;
    }
    const double ps = psi_eval(plain, sigma);
    const double dps = psi_prime(plain, sigma);
    const double rhs = std::pow(a, r) * ps;
    const double lhs = (dps == 0.0 ? 0.0 : std::pow(ps, 1.0 - r) * std::pow(dps, r) * std::pow(sigma, r));
    const double scale = std::max(1.0, std::abs(rhs));
    record(r_ineq, (rhs - lhs) / scale);
    if (sigma < M) {
      worst_equality = std::max(worst_equality, std::abs(rhs - lhs) / scale);
    }
    // psi' = 0 beyond M makes this form infinite
    const double lit = std::pow(ps, r) * std::pow(dps, 1.0 - r) * std::pow(sigma, r);
    record(r_literal, (rhs - lit) / scale);

    const double pt = psi_eval(tilde, sigma);
    const double dpt = psi_prime(tilde, sigma);
    record(tilde_ineq, (sigma > 1.0 ? (a + 1.0) * ps : 0.0) - (pt + sigma * dpt));

    const double top = std::pow(sigma, a + 2.0);
    record(domination, (1.0 + std::pow(sigma, a + p) + sigma * sigma * psi_limit(PsiVariant::tilde, a, sigma) - top) /
                           std::max(1.0, top));

    const double cap = sigma * sigma * psi_eval(spec, sigma);
    record(psi_bound, (cap - Psi_eval(spec, sigma)) / std::max(1.0, cap));
  }

  InequalityReport rep;
  r_ineq.pass = r_ineq.worst_margin >= -tol && worst_equality < tol;
  char buf[96];
  std::snprintf(buf, sizeof buf, "max relative deviation from equality below M: %.3e", worst_equality);
  r_ineq.note = buf;
  rep.add(r_ineq);
  r_literal.pass = r_literal.worst_margin >= -tol;
  r_literal.note = "informational; not part of the overall verdict";
  tilde_ineq.pass = tilde_ineq.worst_margin >= -tol;
  domination.pass = domination.worst_margin >= -tol;
  psi_bound.pass = psi_bound.worst_margin >= -tol;
  rep.add(tilde_ineq);
  rep.add(domination);
  rep.add(psi_bound);
  rep.results.push_back(r_literal);
  return rep;
}

} // namespace facetflow
