#pragma once

// Backward-Euler finite-difference solver for u_t = div(grad E^eps(grad u))
// with Dirichlet data on the parabolic boundary. Fluxes live on cell faces:
// the normal derivative comes from the two adjacent nodes, tangential
// derivatives from averaged central differences, and grad E^eps is applied to
// the reconstructed face gradient.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "facetflow/boundary.hpp"
#include "facetflow/energy.hpp"
#include "facetflow/errors.hpp"
#include "facetflow/grid.hpp"
#include "facetflow/mollifier.hpp"

namespace facetflow {

enum class LinearSolverKind { automatic, direct, iterative };

struct SolverConfig {
  double dt = 0.01;
  double t_end = 0.1;
  double newton_tol = 1e-10;
  int newton_max_iter = 40;
  double damping = 0.5;    // step factor applied on each failed line-search trial
  int max_damping_steps = 20;
  bool picard_fallback = true;
  int picard_max_iter = 2000;
  int snapshot_every = 1;
  LinearSolverKind linear = LinearSolverKind::automatic;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw PreconditionError("dt must be positive");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
      throw PreconditionError("t_end must be positive");
    }
    if (!(newton_tol > 0.0)) {
      throw PreconditionError("newton_tol must be positive");
    }
    if (newton_max_iter < 1 || picard_max_iter < 1) {
      throw PreconditionError("iteration caps must be positive");
    }
    if (!(damping > 0.0) || !(damping < 1.0)) {
      throw PreconditionError("damping factor must lie in (0, 1)");
    }
    if (snapshot_every < 1) {
      throw PreconditionError("snapshot cadence must be positive");
    }
  }
};

struct StepStats {
  int iterations = 0;
  bool picard_used = false;
  std::vector<double> residual_history;
};

/// Face flux discretisation on a fixed grid.
class FaceOperator {
public:
  struct Face {
    int axis;
    std::uint32_t lo;
    std::uint32_t hi;
    int ntang;
    std::array<int, 2> tang_axis;
    // {lo + e_b, lo - e_b, hi + e_b, hi - e_b} per tangential axis b
    std::array<std::array<std::uint32_t, 4>, 2> tang;
  };

  FaceOperator(const Grid& grid, std::shared_ptr<const MollifiedDensity> md) : grid_(grid), md_(std::move(md)) {
    if (!md_) {
      throw PreconditionError("missing mollified density");
    }
    if (md_->dimension() != grid.dim()) {
      throw PreconditionError("density dimension differs from grid dimension");
    }
    const std::size_t nn = grid.nodes();
    interior_.assign(nn, -1);
    for (std::size_t i = 0; i < nn; ++i) {
      if (!grid.is_boundary(i)) {
        interior_[i] = static_cast<std::int64_t>(interior_nodes_.size());
        interior_nodes_.push_back(static_cast<std::uint32_t>(i));
      }
    }
    const int d = grid.dim();
    for (std::size_t i = 0; i < nn; ++i) {
      const auto m = grid.multi(i);
      for (int a = 0; a < d; ++a) {
        if (m[a] == grid.cells(a)) {
          continue;
        }
        const std::size_t j = i + grid.stride(a);
        if (interior_[i] < 0 && interior_[j] < 0) {
          // face inside a boundary plane: trapezoid weight over the tangential axes
          double w = 1.0;
          for (int b = 0; b < d; ++b) {
            if (b != a && (m[b] == 0 || m[b] == grid.cells(b))) {
              w *= 0.5;
            }
          }
          plane_faces_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), a, w});
          continue;
        }
        Face f{};
        f.axis = a;
        f.lo = static_cast<std::uint32_t>(i);
        f.hi = static_cast<std::uint32_t>(j);
        f.ntang = 0;
        for (int b = 0; b < d; ++b) {
          if (b == a) {
            continue;
          }
          const std::size_t s = grid.stride(b);
          // one endpoint is interior, so the tangential index is interior too
          f.tang_axis[f.ntang] = b;
          f.tang[f.ntang] = {static_cast<std::uint32_t>(i + s), static_cast<std::uint32_t>(i - s),
                             static_cast<std::uint32_t>(j + s), static_cast<std::uint32_t>(j - s)};
          ++f.ntang;
        }
        faces_.push_back(f);
      }
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const MollifiedDensity& density() const noexcept { return *md_; }
  std::shared_ptr<const MollifiedDensity> density_ptr() const noexcept { return md_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  std::size_t unknowns() const noexcept { return interior_nodes_.size(); }
  const std::vector<std::uint32_t>& interior_nodes() const noexcept { return interior_nodes_; }
  std::int64_t interior_index(std::size_t node) const noexcept { return interior_[node]; }

  /// Reconstructed gradient on face f.
  std::array<double, 3> face_gradient(const Face& f, const std::vector<double>& u) const {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    g[f.axis] = (u[f.hi] - u[f.lo]) / grid_.h(f.axis);
    for (int k = 0; k < f.ntang; ++k) {
      const auto& t = f.tang[k];
      g[f.tang_axis[k]] = (u[t[0]] - u[t[1]] + u[t[2]] - u[t[3]]) / (4.0 * grid_.h(f.tang_axis[k]));
    }
    return g;
  }

  /// Normal component of grad E^eps on every face.
  std::vector<double> face_flux(const std::vector<double>& u) const {
    std::vector<double> flux(faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
      const Face& f = faces_[k];
      const auto g = face_gradient(f, u);
      const double r = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
      flux[k] = r > 0.0 ? md_->radial(r).g1 / r * g[f.axis] : 0.0;
    }
    return flux;
  }

  /// Discrete divergence of the face flux at every node (zero on the boundary).
  std::vector<double> divergence(const std::vector<double>& u) const {
    std::vector<double> div(grid_.nodes(), 0.0);
    const auto flux = face_flux(u);
    for (std::size_t k = 0; k < faces_.size(); ++k) {
      const Face& f = faces_[k];
      const double q = flux[k] / grid_.h(f.axis);
      div[f.lo] += q;
      div[f.hi] -= q;
    }
    for (std::size_t i = 0; i < div.size(); ++i) {
      if (interior_[i] < 0) {
        div[i] = 0.0;
      }
    }
    return div;
  }

  /// u_new - u_old - dt div_h F(u_new) at interior nodes, zero elsewhere.
  std::vector<double> residual(const std::vector<double>& u_new, const std::vector<double>& u_old, double dt) const {
    auto r = divergence(u_new);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = interior_[i] < 0 ? 0.0 : u_new[i] - u_old[i] - dt * r[i];
    }
    return r;
  }

  /// Jacobian of the residual with respect to interior values.
  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u, double dt) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(faces_.size() * 2 * (2 + 4 * (grid_.dim() - 1)) + unknowns());
    for (std::size_t k = 0; k < unknowns(); ++k) {
      trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
    }
    std::array<std::uint32_t, 10> cols{};
    std::array<double, 10> vals{};
    for (const Face& f : faces_) {
      const auto g = face_gradient(f, u);
      const double r = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
      const auto pr = md_->radial(r);
      const int a = f.axis;
      // row a of the Hessian at g
      std::array<double, 3> hrow{0.0, 0.0, 0.0};
      if (r > 0.0) {
        const double tang = pr.g1 / r;
        for (int b = 0; b < grid_.dim(); ++b) {
          const double proj = g[a] * g[b] / (r * r);
          hrow[b] = pr.g2 * proj + tang * ((a == b ? 1.0 : 0.0) - proj);
        }
      } else {
        hrow[a] = pr.g2;
      }
      int nc = 0;
      const double ha = grid_.h(a);
      cols[nc] = f.lo;
      vals[nc++] = -hrow[a] / ha;
      cols[nc] = f.hi;
      vals[nc++] = hrow[a] / ha;
      for (int t = 0; t < f.ntang; ++t) {
        const int b = f.tang_axis[t];
        const double c = hrow[b] / (4.0 * grid_.h(b));
        cols[nc] = f.tang[t][0];
        vals[nc++] = c;
        cols[nc] = f.tang[t][1];
        vals[nc++] = -c;
        cols[nc] = f.tang[t][2];
        vals[nc++] = c;
        cols[nc] = f.tang[t][3];
        vals[nc++] = -c;
      }
      const std::int64_t rlo = interior_[f.lo];
      const std::int64_t rhi = interior_[f.hi];
      const double s = dt / ha;
      for (int c = 0; c < nc; ++c) {
        const std::int64_t col = interior_[cols[c]];
        if (col < 0) {
          continue;
        }
        if (rlo >= 0) {
          trip.emplace_back(static_cast<int>(rlo), static_cast<int>(col), -s * vals[c]);
        }
        if (rhi >= 0) {
          trip.emplace_back(static_cast<int>(rhi), static_cast<int>(col), s * vals[c]);
        }
      }
    }
    const auto n = static_cast<int>(unknowns());
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  /// Frozen-coefficient system: with c_f = g1(|G_f|)/|G_f| taken at u, the
  /// matrix of u -> u - dt div(c grad_normal u) on interior unknowns, and the
  /// right-hand side u_old + dt * (boundary couplings).
  void picard_system(const std::vector<double>& u, const std::vector<double>& u_old, double dt,
                     Eigen::SparseMatrix<double>& A, Eigen::VectorXd& rhs) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(faces_.size() * 4 + unknowns());
    rhs.resize(static_cast<Eigen::Index>(unknowns()));
    for (std::size_t k = 0; k < unknowns(); ++k) {
      trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
      rhs(static_cast<Eigen::Index>(k)) = u_old[interior_nodes_[k]];
    }
    for (const Face& f : faces_) {
      const auto g = face_gradient(f, u);
      const double r = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
      const auto pr = md_->radial(r);
      const double c = r > 0.0 ? pr.g1 / r : pr.g2;
      const double ha = grid_.h(f.axis);
      const double w = dt * c / (ha * ha);
      const std::int64_t lo = interior_[f.lo];
      const std::int64_t hi = interior_[f.hi];
      if (lo >= 0) {
        trip.emplace_back(static_cast<int>(lo), static_cast<int>(lo), w);
        if (hi >= 0) {
          trip.emplace_back(static_cast<int>(lo), static_cast<int>(hi), -w);
        } else {
          rhs(lo) += w * u[f.hi];
        }
      }
      if (hi >= 0) {
        trip.emplace_back(static_cast<int>(hi), static_cast<int>(hi), w);
        if (lo >= 0) {
          trip.emplace_back(static_cast<int>(hi), static_cast<int>(lo), -w);
        } else {
          rhs(hi) += w * u[f.lo];
        }
      }
    }
    const auto n = static_cast<int>(unknowns());
    A.resize(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
  }

  /// Discrete energy (1/dim) |cell| sum_f w_f E^eps(G_f). Flux faces have
  /// weight 1; faces inside boundary planes use only the normal difference,
  /// so they depend on lateral data alone, and carry trapezoid weights that
  /// make constant data give |Omega| E^eps(0).
  double energy(const std::vector<double>& u) const {
    double e = 0.0;
    for (const Face& f : faces_) {
      const auto g = face_gradient(f, u);
      e += md_->radial(std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])).g;
    }
    for (const PlaneFace& f : plane_faces_) {
      e += f.weight * md_->radial(std::abs(u[f.hi] - u[f.lo]) / grid_.h(f.axis)).g;
    }
    return e * grid_.cell_volume() / grid_.dim();
  }

private:
  Grid grid_;
  std::shared_ptr<const MollifiedDensity> md_;
  std::vector<std::int64_t> interior_;
  std::vector<std::uint32_t> interior_nodes_;
  std::vector<Face> faces_;
  struct PlaneFace {
    std::uint32_t lo;
    std::uint32_t hi;
    int axis;
    double weight;
  };
  std::vector<PlaneFace> plane_faces_;
};

/// Face flux of a field (normal components, in the order of FaceOperator::faces()).
inline std::vector<double> face_flux(const ScalarField& u, std::shared_ptr<const MollifiedDensity> md) {
  return FaceOperator(u.grid, std::move(md)).face_flux(u.values);
}

inline ScalarField step_residual(const ScalarField& u_new, const ScalarField& u_old, double dt,
                                 std::shared_ptr<const MollifiedDensity> md) {
  require_same_grid(u_new.grid, u_old.grid);
  FaceOperator op(u_new.grid, std::move(md));
  ScalarField r(u_new.grid, u_new.t);
  r.values = op.residual(u_new.values, u_old.values, dt);
  return r;
}

inline double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s = std::max(s, std::abs(x));
  }
  return s;
}

/// Nonlinear solver for one implicit step on a fixed operator.
class TimeStepper {
public:
  TimeStepper(const FaceOperator& op, const SolverConfig& cfg) : op_(op), cfg_(cfg) { cfg.validate(); }

  /// Solves for u_new given u_old; `guess` carries the boundary values at the
  /// new time and the initial interior iterate.
  std::vector<double> solve(const std::vector<double>& u_old, std::vector<double> guess, double dt,
                            StepStats& stats) {
    stats = StepStats{};
    if (dt == 0.0) {
      return u_old;
    }
    std::vector<double> u = std::move(guess);
    auto res = op_.residual(u, u_old, dt);
    double rn = sup_abs(res);
    stats.residual_history.push_back(rn);
    if (rn <= cfg_.newton_tol) {
      stats.iterations = 1;
      return u;
    }
    bool picard = false;
    int newton_fail_budget = std::max(1, cfg_.newton_max_iter / 2);
    int newton_iters = 0;
    int picard_iters = 0;
    while (true) {
      if (!picard && newton_iters >= newton_fail_budget) {
        if (!cfg_.picard_fallback) {
          if (newton_iters >= cfg_.newton_max_iter) {
            break;
          }
        } else {
          picard = true;
          stats.picard_used = true;
        }
      }
      if (picard && picard_iters >= cfg_.picard_max_iter) {
        break;
      }
      Eigen::VectorXd dir;
      bool ok = true;
      if (!picard) {
        ++newton_iters;
        ok = newton_direction(u, res, dt, dir);
      } else {
        ++picard_iters;
        ok = picard_direction(u, u_old, dt, dir);
      }
      ++stats.iterations;
      if (!ok) {
        if (picard || !cfg_.picard_fallback) {
          break;
        }
        picard = true;
        stats.picard_used = true;
        continue;
      }
      // damped update with sufficient decrease of the Euclidean residual norm
      const double base = l2(res);
      double lambda = 1.0;
      bool accepted = false;
      std::vector<double> trial(u.size());
      std::vector<double> trial_res;
      for (int k = 0; k <= cfg_.max_damping_steps; ++k) {
        trial = u;
        const auto& nodes = op_.interior_nodes();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          trial[nodes[i]] += lambda * dir(static_cast<Eigen::Index>(i));
        }
        try {
          trial_res = op_.residual(trial, u_old, dt);
        } catch (const OutOfTableError&) {
          lambda *= cfg_.damping;
          continue;
        }
        if (l2(trial_res) <= (1.0 - 1e-4 * lambda) * base || sup_abs(trial_res) <= cfg_.newton_tol) {
          accepted = true;
          break;
        }
        lambda *= cfg_.damping;
      }
      if (!accepted) {
        if (picard) {
          // Picard iterates are fixed-point updates; accept the full step.
          try {
            trial = u;
            const auto& nodes = op_.interior_nodes();
            for (std::size_t i = 0; i < nodes.size(); ++i) {
              trial[nodes[i]] += dir(static_cast<Eigen::Index>(i));
            }
            trial_res = op_.residual(trial, u_old, dt);
          } catch (const OutOfTableError&) {
            break;
          }
        } else if (cfg_.picard_fallback) {
          picard = true;
          stats.picard_used = true;
          continue;
        } else {
          break;
        }
      }
      u = std::move(trial);
      res = std::move(trial_res);
      rn = sup_abs(res);
      stats.residual_history.push_back(rn);
      if (rn <= cfg_.newton_tol) {
        return u;
      }
    }
    throw NonconvergenceError("implicit step did not converge (last residual " + std::to_string(rn) + ")",
                              stats.residual_history);
  }

private:
  static double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
      s += x * x;
    }
    return std::sqrt(s);
  }

  bool use_direct() const {
    if (cfg_.linear == LinearSolverKind::direct) {
      return true;
    }
    if (cfg_.linear == LinearSolverKind::iterative) {
      return false;
    }
    return op_.grid().dim() < 3;
  }

  bool solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
    if (!use_direct()) {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>> it;
      it.setTolerance(1e-10);
      it.setMaxIterations(4000);
      it.compute(A);
      if (it.info() == Eigen::Success) {
        x = it.solve(b);
        if (it.info() == Eigen::Success && x.allFinite()) {
          return true;
        }
      }
    }
    if (!lu_analyzed_ || A.nonZeros() != lu_nnz_) {
      lu_.analyzePattern(A);
      lu_analyzed_ = true;
      lu_nnz_ = A.nonZeros();
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) {
      return false;
    }
    x = lu_.solve(b);
    return lu_.info() == Eigen::Success && x.allFinite();
  }

  bool newton_direction(const std::vector<double>& u, const std::vector<double>& res, double dt,
                        Eigen::VectorXd& dir) {
    const auto J = op_.jacobian(u, dt);
    const auto& nodes = op_.interior_nodes();
    Eigen::VectorXd b(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      b(static_cast<Eigen::Index>(i)) = -res[nodes[i]];
    }
    return solve_linear(J, b, dir);
  }

  bool picard_direction(const std::vector<double>& u, const std::vector<double>& u_old, double dt,
                        Eigen::VectorXd& dir) {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd rhs;
    op_.picard_system(u, u_old, dt, A, rhs);
    Eigen::VectorXd x;
    if (!solve_linear(A, rhs, x)) {
      return false;
    }
    const auto& nodes = op_.interior_nodes();
    dir.resize(x.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      dir(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(i)) - u[nodes[i]];
    }
    return true;
  }

  const FaceOperator& op_;
  SolverConfig cfg_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool lu_analyzed_ = false;
  Eigen::Index lu_nnz_ = 0;
};

/// Boundary nodes of `u` set to the lateral data at time t.
inline void apply_lateral(std::vector<double>& u, const Grid& g, const BoundaryData& bc, double t) {
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    if (g.is_boundary(i)) {
      u[i] = bc.lateral(g.coords(i), t);
    }
  }
}

/// One implicit step from u_old to time u_old.t + dt.
inline ScalarField solve_timestep(const ScalarField& u_old, double dt, std::shared_ptr<const MollifiedDensity> md,
                                  const BoundaryData& bc, const SolverConfig& cfg, StepStats* stats = nullptr) {
  if (!u_old.finite()) {
    throw PreconditionError("previous time level contains non-finite values");
  }
  if (dt == 0.0) {
    if (stats) {
      *stats = StepStats{};
    }
    return u_old;
  }
  bc.check_grid(u_old.grid);
  FaceOperator op(u_old.grid, std::move(md));
  TimeStepper stepper(op, cfg);
  ScalarField out(u_old.grid, u_old.t + dt);
  std::vector<double> guess = u_old.values;
  apply_lateral(guess, u_old.grid, bc, u_old.t + dt);
  StepStats local;
  out.values = stepper.solve(u_old.values, std::move(guess), dt, local);
  if (stats) {
    *stats = local;
  }
  return out;
}

struct StepRecord {
  double t = 0.0;
  double energy = 0.0;
  double sup_u = 0.0;
  double sup_V = 0.0;
  int newton_iters = 0;
  double residual = 0.0;
  bool picard_used = false;
};

struct RunResult {
  std::string name;
  SolverConfig config;
  EnergyModel model;
  std::shared_ptr<const MollifiedDensity> density;
  Grid grid;
  std::vector<ScalarField> snapshots;
  std::vector<VectorField> gradients;
  std::vector<StepRecord> series;
  double bc_sup = 0.0; // sup of the data on the discrete parabolic boundary
  double bc_min = 0.0;
  double bc_max = 0.0;
  bool static_bc = true;
  double wall_seconds = 0.0;

  double eps() const { return density ? density->eps() : 0.0; }
};

/// Marches from `initial` to cfg.t_end. Every step is recorded in the series;
/// snapshots (with node gradients) are kept every cfg.snapshot_every steps and
/// at the final time.
inline RunResult run_simulation(const SolverConfig& cfg, const EnergyModel& model,
                                std::shared_ptr<const MollifiedDensity> md, const BoundaryData& bc,
                                const ScalarField& initial, const std::string& name = "run") {
  cfg.validate();
  model.validate();
  const auto start = std::chrono::steady_clock::now();
  const Grid& g = initial.grid;
  bc.check_grid(g);
  if (!initial.finite()) {
    throw PreconditionError("initial field contains non-finite values");
  }
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    if (!g.is_boundary(i)) {
      continue;
    }
    const double want = bc.lateral(g.coords(i), initial.t);
    if (std::abs(initial.values[i] - want) > 1e-12 * std::max(1.0, std::abs(want))) {
      throw IncompatibleDataError("initial field disagrees with the lateral data at node " + std::to_string(i));
    }
  }

  FaceOperator op(g, md);
  TimeStepper stepper(op, cfg);
  RunResult rr;
  rr.name = name;
  rr.config = cfg;
  rr.model = model;
  rr.density = md;
  rr.grid = g;
  rr.static_bc = bc.is_static();
  rr.bc_min = *std::min_element(initial.values.begin(), initial.values.end());
  rr.bc_max = *std::max_element(initial.values.begin(), initial.values.end());

  const double eps = md->eps();
  auto record = [&](const ScalarField& u, const VectorField& grad, int iters, double resid, bool picard) {
    StepRecord s;
    s.t = u.t;
    s.energy = op.energy(u.values);
    s.sup_u = u.sup_norm();
    double sv = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      sv = std::max(sv, grad.norm_sq(i));
    }
    s.sup_V = std::sqrt(eps * eps + sv);
    s.newton_iters = iters;
    s.residual = resid;
    s.picard_used = picard;
    rr.series.push_back(s);
  };

  ScalarField u = initial;
  {
    const VectorField grad = gradient_field(u);
    record(u, grad, 0, 0.0, false);
    rr.snapshots.push_back(u);
    rr.gradients.push_back(grad);
  }
  const auto steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double t_new = std::min(static_cast<double>(k) * cfg.dt, cfg.t_end);
    const double dt = t_new - u.t;
    std::vector<double> guess = u.values;
    apply_lateral(guess, g, bc, t_new);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      if (g.is_boundary(i)) {
        rr.bc_min = std::min(rr.bc_min, guess[i]);
        rr.bc_max = std::max(rr.bc_max, guess[i]);
      }
    }
    StepStats stats;
    ScalarField next(g, t_new);
    next.values = stepper.solve(u.values, std::move(guess), dt, stats);
    u = std::move(next);
    const VectorField grad = gradient_field(u);
    record(u, grad, stats.iterations, stats.residual_history.empty() ? 0.0 : stats.residual_history.back(),
           stats.picard_used);
    if (k % cfg.snapshot_every == 0 || k == steps) {
      rr.snapshots.push_back(u);
      rr.gradients.push_back(grad);
    }
  }
  rr.bc_sup = std::max(std::abs(rr.bc_min), std::abs(rr.bc_max));
  rr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rr;
}

} // namespace facetflow
