#pragma once

// Diagnostics evaluated on stored runs: maximum and comparison principles,
// convergence in eps, local boundedness ratios, gradient bounds, truncated
// gradient moduli and facet statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "facetflow/diagnostics.hpp"
#include "facetflow/errors.hpp"
#include "facetflow/mollifier.hpp"
#include "facetflow/solver.hpp"
#include "facetflow/truncation.hpp"

namespace facetflow {

/// B_R(center) x (t0 - R^2, t0].
struct ParabolicCylinder {
  Point center{0.0, 0.0, 0.0};
  double t0 = 0.0;
  double R = 0.25;
};

/// Nodes and snapshot indices of a run inside a scaled copy of a cylinder.
struct CylinderPoints {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> snaps;
  double radius = 0.0;
  double volume = 0.0; // |B_r| r^2

  std::size_t size() const { return nodes.size() * snaps.size(); }
};

namespace detail {

constexpr double geom_slack = 1e-12;

inline double dist(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    s += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(s);
}

inline double v_at(const RunResult& run, std::size_t snap, std::size_t node) {
  const double e = run.eps();
  return std::sqrt(e * e + run.gradients[snap].norm_sq(node));
}

} // namespace detail

/// Throws GeometryError unless the cylinder lies in the space-time domain of the run.
inline void check_cylinder(const RunResult& run, const ParabolicCylinder& Q) {
  const Grid& g = run.grid;
  if (!(Q.R > 0.0)) {
    throw GeometryError("cylinder radius must be positive");
  }
  for (int a = 0; a < g.dim(); ++a) {
    if (Q.center[a] - Q.R < -detail::geom_slack || Q.center[a] + Q.R > g.extent(a) + detail::geom_slack) {
      throw GeometryError("cylinder ball leaves the spatial domain along axis " + std::to_string(a));
    }
  }
  const double t_first = run.snapshots.empty() ? 0.0 : run.snapshots.front().t;
  const double t_last = run.snapshots.empty() ? 0.0 : run.snapshots.back().t;
  if (Q.t0 - Q.R * Q.R < t_first - detail::geom_slack || Q.t0 > t_last + detail::geom_slack) {
    throw GeometryError("cylinder time interval leaves the simulated interval");
  }
}

inline CylinderPoints cylinder_points(const RunResult& run, const ParabolicCylinder& Q, double factor = 1.0) {
  check_cylinder(run, Q);
  CylinderPoints cp;
  const Grid& g = run.grid;
  const double r = Q.R * factor;
  cp.radius = r;
  cp.volume = unit_sphere_area(g.dim()) / g.dim() * std::pow(r, g.dim()) * r * r;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    if (detail::dist(g.coords(i), Q.center, g.dim()) <= r + detail::geom_slack) {
      cp.nodes.push_back(i);
    }
  }
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const double t = run.snapshots[k].t;
    if (t > Q.t0 - r * r + detail::geom_slack && t <= Q.t0 + detail::geom_slack) {
      cp.snaps.push_back(k);
    }
  }
  if (cp.nodes.empty() || cp.snaps.empty()) {
    throw GeometryError("cylinder contains no grid nodes or no snapshots");
  }
  return cp;
}

inline DiagnosticsReport check_max_principle(const RunResult& run, double tol = 1e-10) {
  DiagnosticsReport rep;
  rep.check = "max_principle";
  rep.run_ids = {run.name};
  double worst_sup = std::numeric_limits<double>::infinity();
  double worst_order = std::numeric_limits<double>::infinity();
  std::size_t where_node = 0;
  double where_t = 0.0;
  for (const auto& s : run.snapshots) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const double v = s.values[i];
      const double m = std::min(v - run.bc_min, run.bc_max - v);
      if (m < worst_order) {
        worst_order = m;
        where_node = i;
        where_t = s.t;
      }
      worst_sup = std::min(worst_sup, run.bc_sup - std::abs(v));
    }
  }
  for (const auto& st : run.series) {
    worst_sup = std::min(worst_sup, run.bc_sup - st.sup_u);
  }
  rep.margins["sup_margin"] = worst_sup;
  rep.margins["order_margin"] = worst_order;
  rep.params["bc_sup"] = run.bc_sup;
  rep.params["tolerance"] = tol;
  rep.set_pass(worst_sup >= -tol && worst_order >= -tol);
  if (!rep.pass) {
    const auto x = run.grid.coords(where_node);
    rep.detail = "worst violation at node " + std::to_string(where_node) + " (x = " + std::to_string(x[0]) + ", " +
                 std::to_string(x[1]) + ", " + std::to_string(x[2]) + "), t = " + std::to_string(where_t);
  }
  return rep;
}

namespace detail {

inline void require_compatible(const RunResult& a, const RunResult& b, bool same_eps) {
  if (!a.grid.same_as(b.grid)) {
    throw IncompatibleDataError("runs use different grids");
  }
  if (a.snapshots.size() != b.snapshots.size()) {
    throw IncompatibleDataError("runs have different snapshot counts");
  }
  if (a.config.dt != b.config.dt || a.config.t_end != b.config.t_end ||
      a.config.snapshot_every != b.config.snapshot_every) {
    throw IncompatibleDataError("runs use different time discretisations");
  }
  if (a.model.p != b.model.p || a.model.n != b.model.n) {
    throw IncompatibleDataError("runs use different energy models");
  }
  if (same_eps && a.eps() != b.eps()) {
    throw IncompatibleDataError("runs use different mollification radii");
  }
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    if (std::abs(a.snapshots[k].t - b.snapshots[k].t) > 1e-12) {
      throw IncompatibleDataError("snapshot times differ");
    }
  }
}

} // namespace detail

/// Requires data of run_a <= data of run_b on the discrete parabolic boundary.
inline DiagnosticsReport check_comparison(const RunResult& run_a, const RunResult& run_b, double tol = 1e-8) {
  detail::require_compatible(run_a, run_b, true);
  const Grid& g = run_a.grid;
  const auto& a0 = run_a.snapshots.front().values;
  const auto& b0 = run_b.snapshots.front().values;
  for (std::size_t i = 0; i < a0.size(); ++i) {
    if (a0[i] > b0[i] + 1e-14) {
      throw IncompatibleDataError("initial data are not ordered");
    }
  }
  for (std::size_t k = 0; k < run_a.snapshots.size(); ++k) {
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      if (g.is_boundary(i) && run_a.snapshots[k].values[i] > run_b.snapshots[k].values[i] + 1e-14) {
        throw IncompatibleDataError("lateral data are not ordered");
      }
    }
  }
  DiagnosticsReport rep;
  rep.check = "comparison";
  rep.run_ids = {run_a.name, run_b.name};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < run_a.snapshots.size(); ++k) {
    const auto& ua = run_a.snapshots[k].values;
    const auto& ub = run_b.snapshots[k].values;
    for (std::size_t i = 0; i < ua.size(); ++i) {
      worst = std::min(worst, ub[i] - ua[i]);
    }
  }
  rep.margins["min_difference"] = worst;
  rep.params["tolerance"] = tol;
  rep.set_pass(worst >= -tol);
  return rep;
}

/// ||grad u_a - grad u_b||_{L^p(Omega x (0, t_max])} with trapezoidal node
/// weights in space and snapshot spacing in time.
inline double gradient_lp_difference(const RunResult& a, const RunResult& b, double p, double t_max) {
  detail::require_compatible(a, b, false);
  const Grid& g = a.grid;
  std::vector<double> w(g.nodes(), g.cell_volume());
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const auto m = g.multi(i);
    for (int ax = 0; ax < g.dim(); ++ax) {
      if (m[ax] == 0 || m[ax] == g.cells(ax)) {
        w[i] *= 0.5;
      }
    }
  }
  double acc = 0.0;
  for (std::size_t k = 1; k < a.snapshots.size(); ++k) {
    const double t = a.snapshots[k].t;
    if (t > t_max + 1e-12) {
      break;
    }
    const double tau = t - a.snapshots[k - 1].t;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      double s = 0.0;
      for (int ax = 0; ax < g.dim(); ++ax) {
        const double d = a.gradients[k].at(i, ax) - b.gradients[k].at(i, ax);
        s += d * d;
      }
      acc += tau * w[i] * std::pow(s, 0.5 * p);
    }
  }
  return std::pow(acc, 1.0 / p);
}

/// Pairwise gradient differences over Omega x (0, T - tau] for runs ordered by
/// decreasing eps; passes when consecutive differences do not increase. A
/// failure is reported as inconclusive, since convergence along the whole
/// family is stronger than what is guaranteed.
inline DiagnosticsReport epsilon_convergence_from_runs(const std::vector<const RunResult*>& runs, double tau_fraction = 0.1) {
  DiagnosticsReport rep;
  rep.check = "epsilon_convergence";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    rep.run_ids.push_back(runs[i]->name);
    rep.series.push_back(runs[i]->eps());
    if (i > 0 && !(runs[i]->eps() < runs[i - 1]->eps())) {
      throw PreconditionError("eps list must be strictly decreasing");
    }
  }
  if (runs.size() < 2) {
    rep.set_pass(true);
    rep.detail = "fewer than two runs: nothing to compare";
    return rep;
  }
  const double p = runs.front()->model.p;
  const double T = runs.front()->config.t_end;
  const double t_max = T - tau_fraction * T;
  rep.params["p"] = p;
  rep.params["t_max"] = t_max;
  rep.matrix.assign(runs.size(), std::vector<double>(runs.size(), 0.0));
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      const double d = gradient_lp_difference(*runs[i], *runs[j], p, t_max);
      rep.matrix[i][j] = d;
      rep.matrix[j][i] = d;
    }
  }
  bool ok = true;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const double d = rep.matrix[i][i + 1];
    rep.margins["consecutive_" + std::to_string(i)] = d;
    if (i > 0 && d > rep.matrix[i - 1][i]) {
      ok = false;
    }
  }
  rep.set_pass(ok, "inconclusive");
  return rep;
}

/// Runs the solver for each eps of the list and compares the gradients.
inline DiagnosticsReport epsilon_convergence_study(const SolverConfig& cfg, const EnergyModel& model,
                                                   const BoundaryData& bc, const Grid& grid,
                                                   const std::vector<double>& eps_list, const QuadSpec& quad = {},
                                                   double tau_fraction = 0.1,
                                                   std::vector<RunResult>* keep_runs = nullptr) {
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 1.0) || (i > 0 && !(eps_list[i] < eps_list[i - 1]))) {
      throw PreconditionError("eps list must be strictly decreasing inside (0, 1)");
    }
  }
  std::vector<RunResult> runs;
  runs.reserve(eps_list.size());
  const ScalarField u0 = bc.initial_field(grid);
  for (double e : eps_list) {
    auto md = std::make_shared<const MollifiedDensity>(model, e, quad);
    runs.push_back(run_simulation(cfg, model, md, bc, u0, "eps_" + std::to_string(e)));
  }
  std::vector<const RunResult*> ptrs;
  for (const auto& r : runs) {
    ptrs.push_back(&r);
  }
  auto rep = epsilon_convergence_from_runs(ptrs, tau_fraction);
  if (keep_runs) {
    *keep_runs = std::move(runs);
  }
  return rep;
}

/// sup_{Q_{R/2}} |u| against (R^{-s_c} avg_{Q_R} (|u|+1)^s)^{1/(s - s_c)}.
inline DiagnosticsReport sup_estimate_ratio(const RunResult& run, const ParabolicCylinder& Q, double s) {
  const ExponentBook book{run.model.n, run.model.p};
  book.require_s(s);
  if (!(Q.R < 1.0)) {
    throw PreconditionError("cylinder radius must be below 1");
  }
  const auto full = cylinder_points(run, Q, 1.0);
  const auto half = cylinder_points(run, Q, 0.5);
  double lhs = 0.0;
  for (std::size_t k : half.snaps) {
    for (std::size_t i : half.nodes) {
      lhs = std::max(lhs, std::abs(run.snapshots[k].values[i]));
    }
  }
  double mean = 0.0;
  for (std::size_t k : full.snaps) {
    for (std::size_t i : full.nodes) {
      mean += std::pow(std::abs(run.snapshots[k].values[i]) + 1.0, s);
    }
  }
  mean /= static_cast<double>(full.size());
  const double sc = book.s_c();
  const double rhs = std::pow(std::pow(Q.R, -sc) * mean, 1.0 / (s - sc));
  DiagnosticsReport rep;
  rep.check = "sup_estimate_ratio";
  rep.run_ids = {run.name};
  rep.params = {{"s", s}, {"s_c", sc}, {"R", Q.R}, {"eps", run.eps()}};
  rep.margins = {{"lhs", lhs}, {"rhs", rhs}};
  rep.fitted["C"] = lhs / rhs;
  rep.set_pass(std::isfinite(lhs / rhs) && rhs > 0.0);
  return rep;
}

/// int_{Q_{R/2}} V^q against int_{Q_R} (V^p + 1).
inline DiagnosticsReport reversed_holder_ratio(const RunResult& run, double q, const ParabolicCylinder& Q) {
  const double p = run.model.p;
  if (!(q > p)) {
    throw PreconditionError("q must exceed p");
  }
  const auto full = cylinder_points(run, Q, 1.0);
  const auto half = cylinder_points(run, Q, 0.5);
  double num = 0.0;
  for (std::size_t k : half.snaps) {
    for (std::size_t i : half.nodes) {
      num += std::pow(detail::v_at(run, k, i), q);
    }
  }
  num = num / static_cast<double>(half.size()) * half.volume;
  double den = 0.0;
  for (std::size_t k : full.snaps) {
    for (std::size_t i : full.nodes) {
      den += std::pow(detail::v_at(run, k, i), p) + 1.0;
    }
  }
  den = den / static_cast<double>(full.size()) * full.volume;
  DiagnosticsReport rep;
  rep.check = "reversed_holder_ratio";
  rep.run_ids = {run.name};
  rep.params = {{"q", q}, {"p", p}, {"R", Q.R}, {"eps", run.eps()}};
  rep.margins = {{"lhs", num}, {"rhs", den}};
  rep.fitted["C"] = num / den;
  rep.set_pass(std::isfinite(num / den) && den > 0.0);
  return rep;
}

/// sup_{Q_{R/2}} V against (avg_{Q_R} (1+V)^q)^{1/(q - q_c)}.
inline DiagnosticsReport sup_vq_ratio(const RunResult& run, double q, const ParabolicCylinder& Q) {
  const ExponentBook book{run.model.n, run.model.p};
  const double qc = book.q_c();
  if (!(q > qc) || !(q >= 2.0)) {
    throw PreconditionError("q must exceed q_c = n(2-p)/2 and be at least 2");
  }
  const auto full = cylinder_points(run, Q, 1.0);
  const auto half = cylinder_points(run, Q, 0.5);
  double lhs = 0.0;
  for (std::size_t k : half.snaps) {
    for (std::size_t i : half.nodes) {
      lhs = std::max(lhs, detail::v_at(run, k, i));
    }
  }
  double mean = 0.0;
  for (std::size_t k : full.snaps) {
    for (std::size_t i : full.nodes) {
      mean += std::pow(1.0 + detail::v_at(run, k, i), q);
    }
  }
  mean /= static_cast<double>(full.size());
  const double rhs = std::pow(mean, 1.0 / (q - qc));
  DiagnosticsReport rep;
  rep.check = "sup_vq_ratio";
  rep.run_ids = {run.name};
  rep.params = {{"q", q}, {"q_c", qc}, {"R", Q.R}, {"eps", run.eps()}};
  rep.margins = {{"lhs", lhs}, {"rhs", rhs}};
  rep.fitted["C"] = lhs / rhs;
  rep.set_pass(std::isfinite(lhs / rhs) && rhs > 0.0);
  return rep;
}

/// Passes when the fitted constants C of the given reports stay within a
/// factor `factor` of each other.
inline DiagnosticsReport ratio_stability(const std::vector<DiagnosticsReport>& reports, double factor = 2.0) {
  DiagnosticsReport rep;
  rep.check = reports.empty() ? "ratio_stability" : reports.front().check + "_stability";
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool ok = true;
  for (const auto& r : reports) {
    auto it = r.fitted.find("C");
    if (it == r.fitted.end() || !std::isfinite(it->second) || !(it->second > 0.0)) {
      ok = false;
      continue;
    }
    rep.series.push_back(it->second);
    rep.run_ids.insert(rep.run_ids.end(), r.run_ids.begin(), r.run_ids.end());
    lo = std::min(lo, it->second);
    hi = std::max(hi, it->second);
  }
  const double spread = ok && !reports.empty() ? hi / lo : std::numeric_limits<double>::infinity();
  rep.params["factor"] = factor;
  rep.fitted["spread"] = spread;
  rep.set_pass(ok && spread <= factor);
  return rep;
}

/// sup over Q of V_eps for each run of an eps sweep; bounded when max/min <= ratio.
inline DiagnosticsReport gradient_sup_series(const std::vector<const RunResult*>& runs, const ParabolicCylinder& Q,
                                             double ratio = 1.2) {
  DiagnosticsReport rep;
  rep.check = "gradient_sup_series";
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (r > 0) {
      detail::require_compatible(*runs[0], *runs[r], false);
    }
    const auto cp = cylinder_points(*runs[r], Q, 1.0);
    double sup = 0.0;
    for (std::size_t k : cp.snaps) {
      for (std::size_t i : cp.nodes) {
        sup = std::max(sup, detail::v_at(*runs[r], k, i));
      }
    }
    rep.run_ids.push_back(runs[r]->name);
    rep.series.push_back(sup);
    lo = std::min(lo, sup);
    hi = std::max(hi, sup);
  }
  rep.params["ratio"] = ratio;
  rep.fitted["max_over_min"] = runs.empty() ? 1.0 : hi / lo;
  rep.set_pass(runs.empty() || hi <= ratio * lo);
  return rep;
}

struct HolderOptions {
  std::size_t pairs = 20000;
  std::uint64_t seed = 7;
  int bins = 12;
  int local_reach = 3; // max node / snapshot offset for the local half of the pairs
};

/// Empirical Hoelder modulus of the regularised truncated gradient on Q.
inline DiagnosticsReport holder_modulus_estimate(const RunResult& run, const TruncationParams& tp,
                                                 const ParabolicCylinder& Q, const HolderOptions& opt = {}) {
  tp.validate();
  if (!(run.eps() < tp.delta / 8.0)) {
    throw PreconditionError("requires eps < delta / 8");
  }
  const auto cp = cylinder_points(run, Q, 1.0);
  const Grid& g = run.grid;
  const int dim = g.dim();
  const double eps = run.eps();
  const std::size_t nn = cp.nodes.size();
  const std::size_t ns = cp.snaps.size();

  // truncated gradient at every point of the cylinder
  std::vector<double> G(nn * ns * static_cast<std::size_t>(dim));
  double sup_v = 0.0;
  double sup_g = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < nn; ++a) {
      const std::size_t node = cp.nodes[a];
      const auto& gr = run.gradients[cp.snaps[s]];
      const double r = std::sqrt(gr.norm_sq(node));
      const double v = std::sqrt(eps * eps + r * r);
      const double mod = truncated_modulus(v, tp.delta);
      sup_v = std::max(sup_v, v);
      sup_g = std::max(sup_g, mod);
      for (int d = 0; d < dim; ++d) {
        G[(s * nn + a) * dim + d] = r > 0.0 ? mod * gr.at(node, d) / r : 0.0;
      }
    }
  }
  DiagnosticsReport rep;
  rep.check = "holder_modulus";
  rep.run_ids = {run.name};
  rep.params = {{"delta", tp.delta}, {"eps", eps}, {"R", Q.R}, {"pairs", static_cast<double>(opt.pairs)}};
  const double bound = std::max(0.0, sup_v - 2.0 * tp.delta);
  rep.margins["sup_bound_margin"] = bound - sup_g;
  rep.margins["sup_V"] = sup_v;
  rep.margins["sup_G"] = sup_g;
  const bool bound_ok = sup_g <= bound;

  // point lookup by (node offset, snapshot)
  std::vector<std::int64_t> slot(g.nodes(), -1);
  for (std::size_t a = 0; a < nn; ++a) {
    slot[cp.nodes[a]] = static_cast<std::int64_t>(a);
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick_node(0, nn - 1);
  std::uniform_int_distribution<std::size_t> pick_snap(0, ns - 1);
  std::uniform_int_distribution<int> offset(-opt.local_reach, opt.local_reach);
  std::vector<double> logd;
  std::vector<double> logdiff;
  std::size_t zero_pairs = 0;
  std::size_t sampled = 0;
  std::size_t attempts = 0;
  while (sampled < opt.pairs && attempts < 50 * opt.pairs) {
    ++attempts;
    const std::size_t a1 = pick_node(rng);
    const std::size_t s1 = pick_snap(rng);
    std::size_t a2;
    std::size_t s2;
    if (sampled % 2 == 0) {
      a2 = pick_node(rng);
      s2 = pick_snap(rng);
    } else {
      auto m = g.multi(cp.nodes[a1]);
      bool inside = true;
      for (int d = 0; d < dim; ++d) {
        m[d] += offset(rng);
        if (m[d] < 0 || m[d] > g.cells(d)) {
          inside = false;
        }
      }
      const long so = static_cast<long>(s1) + offset(rng);
      if (!inside || so < 0 || so >= static_cast<long>(ns)) {
        continue;
      }
      const std::int64_t sl = slot[g.index(m[0], m[1], m[2])];
      if (sl < 0) {
        continue;
      }
      a2 = static_cast<std::size_t>(sl);
      s2 = static_cast<std::size_t>(so);
    }
    if (a1 == a2 && s1 == s2) {
      continue;
    }
    ++sampled;
    const double dx = detail::dist(g.coords(cp.nodes[a1]), g.coords(cp.nodes[a2]), dim);
    const double dt = std::abs(run.snapshots[cp.snaps[s1]].t - run.snapshots[cp.snaps[s2]].t);
    const double dp = std::max(dx, std::sqrt(dt));
    double diff = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double e = G[(s1 * nn + a1) * dim + d] - G[(s2 * nn + a2) * dim + d];
      diff += e * e;
    }
    diff = std::sqrt(diff);
    if (diff == 0.0) {
      ++zero_pairs;
      continue;
    }
    logd.push_back(std::log(dp));
    logdiff.push_back(std::log(diff));
  }
  rep.params["sampled_pairs"] = static_cast<double>(sampled);
  rep.params["zero_pairs"] = static_cast<double>(zero_pairs);

  if (logd.empty()) {
    rep.set_pass(bound_ok);
    rep.detail = "truncated gradient is constant on the cylinder: trivially Hoelder";
    rep.fitted["trivial"] = 1.0;
    return rep;
  }
  // upper envelope: maximum log difference in equal-width bins of log d_p
  const auto [mn, mx] = std::minmax_element(logd.begin(), logd.end());
  const double lo = *mn;
  const double width = (*mx - lo) / opt.bins;
  std::vector<double> env(static_cast<std::size_t>(opt.bins), -std::numeric_limits<double>::infinity());
  std::vector<double> centre(static_cast<std::size_t>(opt.bins), 0.0);
  std::vector<double> xs;
  std::vector<double> ys;
  if (width > 0.0) {
    for (std::size_t k = 0; k < logd.size(); ++k) {
      auto b = static_cast<std::size_t>(std::min<double>(opt.bins - 1, std::floor((logd[k] - lo) / width)));
      if (logdiff[k] > env[b]) {
        env[b] = logdiff[k];
        centre[b] = logd[k];
      }
    }
    for (int b = 0; b < opt.bins; ++b) {
      if (std::isfinite(env[static_cast<std::size_t>(b)])) {
        xs.push_back(centre[static_cast<std::size_t>(b)]);
        ys.push_back(env[static_cast<std::size_t>(b)]);
      }
    }
  }
  if (xs.size() < 2) {
    rep.set_pass(bound_ok);
    rep.detail = "too few distinct distances for a fit";
    rep.fitted["trivial"] = 1.0;
    return rep;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / m;
  rep.fitted["alpha"] = slope;
  rep.fitted["C"] = std::exp(icpt);
  rep.fitted["bins_used"] = m;
  rep.set_pass(bound_ok && slope > 0.0);
  return rep;
}

/// Fraction of nodes with V_eps <= delta at each snapshot (series), with the
/// snapshot times in `params` keys t_<k>.
inline DiagnosticsReport facet_fraction(const RunResult& run, double delta) {
  DiagnosticsReport rep;
  rep.check = "facet_fraction";
  rep.run_ids = {run.name};
  rep.params["delta"] = delta;
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < run.grid.nodes(); ++i) {
      if (detail::v_at(run, k, i) <= delta) {
        ++count;
      }
    }
    rep.series.push_back(static_cast<double>(count) / static_cast<double>(run.grid.nodes()));
    rep.matrix.push_back({run.snapshots[k].t, rep.series.back()});
  }
  rep.fitted["final"] = rep.series.empty() ? 0.0 : rep.series.back();
  rep.set_pass(true);
  return rep;
}

/// V <= c_n W <= c_n (1 + V) everywhere and W <= sqrt(2) V where |grad u| > 1.
inline DiagnosticsReport vw_compatibility(const RunResult& run) {
  const int dim = run.grid.dim();
  const double cn = compatibility_constant(dim);
  const double eps = run.eps();
  double m1 = std::numeric_limits<double>::infinity();
  double m2 = std::numeric_limits<double>::infinity();
  double m3 = std::numeric_limits<double>::infinity();
  Eigen::VectorXd gv(dim);
  for (std::size_t k = 0; k < run.gradients.size(); ++k) {
    for (std::size_t i = 0; i < run.grid.nodes(); ++i) {
      for (int d = 0; d < dim; ++d) {
        gv(d) = run.gradients[k].at(i, d);
      }
      const double V = v_eps(gv, eps);
      const double W = w_eps(gv);
      m1 = std::min(m1, cn * W - V);
      m2 = std::min(m2, cn * (1.0 + V) - cn * W);
      if (gv.norm() > 1.0) {
        m3 = std::min(m3, std::sqrt(2.0) * V - W);
      }
    }
  }
  DiagnosticsReport rep;
  rep.check = "vw_compatibility";
  rep.run_ids = {run.name};
  rep.params["c_n"] = cn;
  rep.margins["V_le_cW"] = m1;
  rep.margins["cW_le_c1V"] = m2;
  rep.margins["W_le_sqrt2V"] = std::isfinite(m3) ? m3 : 0.0;
  rep.set_pass(m1 >= 0.0 && m2 >= 0.0 && (!std::isfinite(m3) || m3 >= 0.0));
  return rep;
}

/// sup over stored gradients of |<grad E_{1,eps}(z) | z> - |z||, against 2 K eps.
inline DiagnosticsReport euler_identity_residual(const RunResult& run, double quad_tol = 1e-9) {
  const double eps = run.eps();
  double worst = 0.0;
  for (const auto& gr : run.gradients) {
    for (std::size_t i = 0; i < run.grid.nodes(); ++i) {
      const double r = std::sqrt(gr.norm_sq(i));
      const double res = std::abs(run.density->radial(r, Component::one).g1 * r - r);
      worst = std::max(worst, res);
    }
  }
  const double bound = 2.0 * run.model.K * eps + quad_tol;
  DiagnosticsReport rep;
  rep.check = "euler_identity_residual";
  rep.run_ids = {run.name};
  rep.params = {{"eps", eps}, {"K", run.model.K}};
  rep.margins["residual"] = worst;
  rep.margins["bound"] = bound;
  rep.set_pass(worst <= bound);
  return rep;
}

/// Energy series nonincreasing up to `slack` (only meaningful for static data).
inline DiagnosticsReport energy_monotonicity(const RunResult& run, double slack = 1e-12) {
  DiagnosticsReport rep;
  rep.check = "energy_monotone";
  rep.run_ids = {run.name};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < run.series.size(); ++k) {
    worst = std::min(worst, run.series[k - 1].energy - run.series[k].energy);
  }
  rep.params["slack"] = slack;
  rep.params["static_bc"] = run.static_bc ? 1.0 : 0.0;
  rep.margins["min_decrease"] = std::isfinite(worst) ? worst : 0.0;
  rep.set_pass(!std::isfinite(worst) || worst >= -slack);
  return rep;
}

} // namespace facetflow
