// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "facetflow/facetflow.hpp"

using namespace facetflow;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir = FACETFLOW_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const MollifiedDensity> density_for(const ExperimentConfig& c, double eps) {
  return std::make_shared<const MollifiedDensity>(make_model(c), eps, make_quad(c));
}

RunResult run_config(const ExperimentConfig& c, const std::string& name) {
  const Grid g = make_grid(c);
  const auto bc = make_boundary(c, g);
  return run_simulation(make_solver_config(c), make_model(c), density_for(c, c.mollifier.eps), bc,
                        bc.initial_field(g), name);
}

// Bingham cavity runs shared by several criteria, keyed by "N/eps".
struct Cavity {
  ExperimentConfig base = parse_config(source_dir / "configs/bingham_cavity.ini");
  std::map<std::string, RunResult> runs;

  const RunResult& get(int cells, double eps) {
    const std::string key = std::to_string(cells) + "/" + fmt("%g", eps);
    auto it = runs.find(key);
    if (it == runs.end()) {
      auto c = base;
      c.grid.cells = {cells};
      c.mollifier.eps = eps;
      it = runs.emplace(key, run_config(c, "cavity_" + key)).first;
    }
    return it->second;
  }
};

Outcome structural() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = INFINITY;
  for (double p : {1.1, 1.3}) {
    for (double eps : {0.1, 0.05}) {
      for (int n : {2, 3}) {
        const auto model = EnergyModel::euclidean(n, p);
        const MollifiedDensity md(model, eps, QuadSpec{1e-12, 3.5});
        const auto rep = verify_structural(md, model, SampleSpec{10000, 3.0, 17, 1e-6});
        for (const auto& r : rep.results) {
          worst = std::min(worst, r.worst_margin);
          o.require(r.pass, r.name + fmt(" fails at p=%g", p) + fmt(" eps=%g", eps) + fmt(" n=%g", n));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 120.0, fmt("took %.0f s", secs));
  o.detail = fmt("worst margin %.3e, %.1f s", worst, secs) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome oracle_consistency() {
  Outcome o;
  double worst_g = 0.0;
  double worst_h = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {2, 3}) {
    const auto model = EnergyModel::euclidean(n, 1.3);
    const MollifiedDensity md(model, 0.1, QuadSpec{1e-12, 4.0});
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i) {
        z(i) = 1.5 * u(rng);
      }
      const Eigen::VectorXd g = md.grad(z);
      const Eigen::MatrixXd H = md.hess(z);
      Eigen::VectorXd gfd(n);
      Eigen::MatrixXd hfd(n, n);
      const double h = 1e-4;
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(i) = h;
        gfd(i) = (md.eval(z + e) - md.eval(z - e)) / (2 * h);
        hfd.col(i) = (md.grad(z + e) - md.grad(z - e)) / (2 * h);
      }
      worst_g = std::max(worst_g, (g - gfd).norm() / std::max(g.norm(), 1e-300));
      worst_h = std::max(worst_h, (H - hfd).norm() / H.norm());
    }
  }
  o.require(worst_g < 1e-6, "gradient mismatch");
  o.require(worst_h < 1e-4, "Hessian mismatch");
  o.detail = fmt("gradient rel %.2e, Hessian rel %.2e", worst_g, worst_h) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome composite_suite() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const PsiSpec& spec : {PsiSpec{PsiVariant::plain, 2.0, 5.0}, PsiSpec{PsiVariant::tilde, 2.0, 5.0},
                              PsiSpec{PsiVariant::plain, 0.5, 3.0}, PsiSpec{PsiVariant::tilde, 1.0, 8.0}}) {
    std::vector<double> sig;
    for (int k = 0; k < 1000; ++k) {
      sig.push_back(2.0 * spec.M * std::pow(1e-4, u(rng)));
    }
    const auto rep = check_composite_inequalities(spec, 1.5, sig, 1.3);
    for (const auto& r : rep.results) {
      if (r.name != "r_inequality_literal") {
        o.require(r.pass, r.name + fmt(" fails for alpha=%g M=%g", spec.alpha, spec.M));
      }
    }
    // monotone convergence of Psi in M towards the plain limit
    for (double s : {0.5, 2.0, 9.0}) {
      double prev = 0.0;
      for (double M : {1.5, 3.0, 6.0, 12.0, 24.0}) {
        const double v = Psi_eval(PsiSpec{PsiVariant::plain, spec.alpha, M}, s);
        o.require(v >= prev, "Psi not monotone in M");
        prev = v;
      }
      o.require(std::abs(prev - Psi_limit_plain(spec.alpha, s)) <= 1e-12 * std::max(1.0, prev), "Psi limit");
    }
  }
  if (o.pass) {
    o.detail = "4 families x 1000 samples";
  }
  return o;
}

Outcome solver_invariants(Cavity& cav) {
  Outcome o;
  // exact fixed points
  for (int dim : {1, 2, 3}) {
    const Grid g = Grid::cube(dim, dim == 3 ? 8 : 16, 1.0);
    const auto md = std::make_shared<const MollifiedDensity>(EnergyModel::euclidean(dim, 1.3), 0.05, QuadSpec{1e-12, 4.0});
    ScalarField aff(g);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const auto x = g.coords(i);
      aff.values[i] = 0.3 + 0.7 * x[0] - 0.4 * x[1] + 1.1 * x[2];
    }
    o.require(sup_abs(step_residual(aff, aff, 0.01, md).values) < 1e-12, fmt("affine residual in %gD", dim));
    const ScalarField cst(g, 0.0, -2.0);
    o.require(sup_abs(step_residual(cst, cst, 0.01, md).values) < 1e-12, fmt("constant residual in %gD", dim));
  }
  // maximum principle and energy decay on every shipped scenario
  std::vector<RunResult> shipped;
  for (const char* name : {"constant_1d", "affine_1d", "pipe_2d"}) {
    shipped.push_back(run_config(parse_config(source_dir / "configs" / (std::string(name) + ".ini")), name));
  }
  shipped.push_back(cav.get(24, cav.base.mollifier.eps));
  double worst_mp = INFINITY;
  for (const auto& r : shipped) {
    const auto mp = check_max_principle(r);
    worst_mp = std::min({worst_mp, mp.margins.at("sup_margin"), mp.margins.at("order_margin")});
    o.require(mp.pass, "maximum principle fails on " + r.name);
    if (r.static_bc) {
      o.require(energy_monotonicity(r).pass, "energy increases on " + r.name);
    }
  }
  // steady state in 1D is the affine interpolant
  const Grid g = Grid::cube(1, 64, 1.0);
  const auto bc = BoundaryData::function([](const Point& x, double) { return 0.2 + 1.5 * x[0]; },
                                         [](const Point& x) { return 0.2 + 1.5 * x[0] + std::sin(std::numbers::pi * x[0]); },
                                         true);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 10.0;
  cfg.snapshot_every = 1000;
  const auto md = std::make_shared<const MollifiedDensity>(EnergyModel::euclidean(1, 1.3), 0.05, QuadSpec{1e-12, 8.0});
  const auto run = run_simulation(cfg, EnergyModel::euclidean(1, 1.3), md, bc, bc.initial_field(g), "steady");
  double dev = 0.0;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    dev = std::max(dev, std::abs(run.snapshots.back().values[i] - (0.2 + 1.5 * g.coords(i)[0])));
  }
  o.require(dev < 1e-6, "steady state deviates from the affine interpolant");
  o.detail = fmt("worst max-principle margin %.2e, steady-state deviation %.2e", worst_mp, dev) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome comparison() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::pair<int, double>, std::shared_ptr<const MollifiedDensity>> cache;
  double worst = INFINITY;
  for (int dim : {1, 2}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double p = std::vector<double>{1.2, 1.5, 1.8}[seed % 3];
      auto& md = cache[{dim, p}];
      if (!md) {
        md = std::make_shared<const MollifiedDensity>(EnergyModel::euclidean(dim, p), 0.05, QuadSpec{1e-12, 16.0});
      }
      // A: random smooth data; B = A + nonnegative lift on the whole parabolic boundary
      const double a0 = u(rng) - 0.5, a1 = u(rng) - 0.5, a2 = u(rng) - 0.5, w = 1.0 + 2.0 * u(rng);
      const double lift = 0.3 * u(rng), bump = 0.8 * u(rng), drift = u(rng);
      auto lat_a = [=](const Point& x, double t) { return a0 + a1 * x[0] + a2 * x[1] + 0.3 * std::sin(w * t); };
      // vanishes on the spatial boundary, so initial and lateral data agree at t = 0
      auto interior = [dim](const Point& x) {
        double s = 1.0;
        for (int a = 0; a < dim; ++a) {
          s *= std::sin(std::numbers::pi * x[a]);
        }
        return s;
      };
      auto ini_a = [=](const Point& x) {
        return a0 + a1 * x[0] + a2 * x[1] + 0.5 * interior(x) * std::cos(w * (x[0] + x[1]));
      };
      auto lat_b = [=](const Point& x, double t) { return lat_a(x, t) + lift + drift * t; };
      auto ini_b = [=](const Point& x) { return ini_a(x) + lift + bump * interior(x); };
      const auto bca = BoundaryData::function(lat_a, ini_a);
      const auto bcb = BoundaryData::function(lat_b, ini_b);
      const Grid g = Grid::cube(dim, dim == 1 ? 32 : 16, 1.0);
      SolverConfig cfg;
      cfg.dt = 0.01;
      cfg.t_end = 0.05;
      const auto model = EnergyModel::euclidean(dim, p);
      const auto ra = run_simulation(cfg, model, md, bca, bca.initial_field(g), "A");
      const auto rb = run_simulation(cfg, model, md, bcb, bcb.initial_field(g), "B");
      const auto rep = check_comparison(ra, rb);
      worst = std::min(worst, rep.margins.at("min_difference"));
      o.require(rep.pass, fmt("pair %g in %gD unordered", static_cast<double>(seed), dim));
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 300.0, fmt("took %.0f s", secs));
  o.detail = fmt("min(u_B - u_A) = %.3e over 20 pairs, %.1f s", worst, secs) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

std::vector<const RunResult*> sweep(Cavity& cav) {
  std::vector<const RunResult*> runs;
  for (double e : cav.base.experiment.eps_list) {
    runs.push_back(&cav.get(24, e));
  }
  return runs;
}

Outcome eps_convergence(Cavity& cav) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto runs = sweep(cav);
  const auto rep = epsilon_convergence_from_runs(runs, cav.base.experiment.tau_fraction);
  const double secs = seconds_since(t0);
  o.require(rep.pass, "differences do not decrease (" + rep.status + ")");
  o.require(runs.size() == 4, "expected three halvings");
  o.require(secs < 1200.0, fmt("took %.0f s", secs));
  std::string d = "differences";
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    d += fmt(" %.3e", rep.matrix[i][i + 1]);
  }
  o.detail = d + fmt(", %.0f s", secs) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome gradient_bound(Cavity& cav) {
  Outcome o;
  const auto rep = gradient_sup_series(sweep(cav), make_cylinder(cav.base), 1.2);
  o.require(rep.pass, "sup V varies by more than 20%");
  o.detail = fmt("sup V from %.4f to %.4f", rep.series.front(), rep.series.back()) +
             fmt(", max/min %.4f", rep.fitted.at("max_over_min")) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome boundedness_ratios(Cavity& cav) {
  Outcome o;
  // off-centre cylinder: the central half-cylinder sits inside the facet,
  // where V = eps and the ratios degenerate
  const ParabolicCylinder Q{{0.25, 0.25, 0.5}, cav.base.time.t_end, 0.25};
  const double e = cav.base.mollifier.eps;
  const std::vector<const RunResult*> runs{&cav.get(24, e), &cav.get(32, e), &cav.get(24, e / 2)};
  std::vector<DiagnosticsReport> sup, rh, vq;
  for (const auto* r : runs) {
    sup.push_back(sup_estimate_ratio(*r, Q, cav.base.experiment.s));
    rh.push_back(reversed_holder_ratio(*r, cav.base.experiment.q, Q));
    vq.push_back(sup_vq_ratio(*r, cav.base.experiment.q, Q));
  }
  std::string d;
  for (auto* set : {&sup, &rh, &vq}) {
    const auto st = ratio_stability(*set, 2.0);
    o.require(st.pass, st.check + " spread too large");
    d += (d.empty() ? "" : ", ") + set->front().check + fmt(" spread %.3f", st.fitted.at("spread"));
  }
  o.detail = d + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome iteration_lemmas() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  MoserInstance eq;
  eq.mu = eq.p0 = 1.7;
  eq.kappa = 1.4;
  eq.Y0 = 2.5;
  eq.L = 60;
  const auto er = moser_sequence(eq);
  const double rel = std::abs(er.Y_L - er.bound) / er.bound;
  o.require(rel <= 1e-12, fmt("equality case off by %.2e", rel));
  std::mt19937_64 rng(2718);
  int fails = 0;
  for (int k = 0; k < 100; ++k) {
    fails += !moser_sequence(random_moser_instance(rng)).pass;
    fails += !absorbing_lemma_check(random_absorbing_instance(rng)).pass;
  }
  o.require(fails == 0, fmt("%g failing instances", fails));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, fmt("took %.1f s", secs));
  o.detail = fmt("equality rel err %.1e, %.2f s", rel, secs) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome holder_stability(Cavity& cav) {
  Outcome o;
  const double delta = cav.base.experiment.delta;
  // largest dyadic pair strictly below delta / 8
  const std::vector<double> eps{delta / 16.0, delta / 32.0};
  std::vector<double> alpha;
  for (double e : eps) {
    const auto& run = cav.get(24, e);
    const auto rep = holder_modulus_estimate(run, TruncationParams{delta, e}, make_cylinder(cav.base));
    o.require(rep.margins.at("sup_bound_margin") >= 0.0, fmt("sup bound violated at eps=%g", e));
    o.require(rep.fitted.count("alpha") == 1, fmt("no fit at eps=%g", e));
    const double a = rep.fitted.count("alpha") ? rep.fitted.at("alpha") : 0.0;
    o.require(a > 0.0, fmt("nonpositive exponent at eps=%g", e));
    alpha.push_back(a);
  }
  o.require(std::abs(alpha[0] - alpha[1]) <= 0.1, "exponent changes by more than 0.1");
  o.detail = fmt("alpha %.4f -> %.4f", alpha[0], alpha[1]) + fmt(" at eps %g/%g", eps[0], eps[1]) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome facets(Cavity& cav) {
  Outcome o;
  const double delta = cav.base.experiment.delta;
  const double f = facet_fraction(cav.get(24, cav.base.mollifier.eps), delta).fitted.at("final");
  o.require(f > 0.0 && f < 1.0, "cavity facet fraction not in (0,1)");
  const auto cst = run_config(parse_config(source_dir / "configs/constant_1d.ini"), "constant_1d");
  bool all_one = true;
  for (double v : facet_fraction(cst, delta).series) {
    all_one = all_one && v == 1.0;
  }
  o.require(all_one, "constant run has non-facet nodes");
  o.detail = fmt("cavity final fraction %.4f, constant run fraction 1 at every snapshot", f) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

} // namespace

int main() {
  Cavity cav;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"structural certificates", structural},
      {"oracle consistency", oracle_consistency},
      {"composite-function suite", composite_suite},
      {"solver invariants", [&] { return solver_invariants(cav); }},
      {"comparison principle", comparison},
      {"eps-convergence on the cavity", [&] { return eps_convergence(cav); }},
      {"uniform gradient bound", [&] { return gradient_bound(cav); }},
      {"local boundedness ratios", [&] { return boundedness_ratios(cav); }},
      {"iteration lemmas", iteration_lemmas},
      {"Hoelder-modulus stability", [&] { return holder_stability(cav); }},
      {"facet formation", [&] { return facets(cav); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
