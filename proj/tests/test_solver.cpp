#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

#include "facetflow/solver.hpp"

using namespace facetflow;

namespace {

std::shared_ptr<const MollifiedDensity> density(int n, double p, double eps, double r_max = 6.0) {
  return std::make_shared<const MollifiedDensity>(EnergyModel::euclidean(n, p), eps, QuadSpec{1e-12, r_max});
}

ScalarField sample(const Grid& g, const std::function<double(const Point&)>& f) {
  ScalarField u(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    u.values[i] = f(g.coords(i));
  }
  return u;
}

// product of sin(pi x_a) over the first dim axes
std::function<double(const Point&)> bump(int dim, double amp = 1.0, double shift = 0.0) {
  return [=](const Point& x) {
    double v = amp;
    for (int a = 0; a < dim; ++a) {
      v *= std::sin(std::numbers::pi * x[a]);
    }
    return v + shift;
  };
}

} // namespace

TEST(Flux, AffineFieldHasUniformFluxAndZeroResidual) {
  const auto md = density(2, 1.3, 0.1);
  const Grid g = Grid::cube(2, 8, 1.0);
  const auto u = sample(g, [](const Point& x) { return 0.2 + 0.6 * x[0] - 0.8 * x[1]; });
  const auto flux = face_flux(u, md);
  const double g1 = md->radial(1.0).g1;
  FaceOperator op(g, md);
  for (std::size_t k = 0; k < flux.size(); ++k) {
    const double comp = op.faces()[k].axis == 0 ? 0.6 : -0.8;
    EXPECT_NEAR(flux[k], g1 * comp, 1e-13);
  }
  EXPECT_LT(sup_abs(step_residual(u, u, 0.01, md).values), 1e-12);
  EXPECT_EQ(sup_abs(step_residual(ScalarField(g, 0.0, 3.0), ScalarField(g, 0.0, 3.0), 0.01, md).values), 0.0);
}

TEST(Flux, DivergenceIsSecondOrderIn1D) {
  // exact: d/dx g1(u') = g2(u') u'' for u' > 0
  const auto md = density(1, 1.3, 0.5);
  auto err = [&](int n) {
    const Grid g = Grid::cube(1, n, 1.0);
    const auto u = sample(g, [](const Point& x) { return x[0] + 0.3 * x[0] * x[0]; });
    const auto div = FaceOperator(g, md).divergence(u.values);
    double e = 0.0;
    for (std::size_t i = 1; i + 1 < g.nodes(); ++i) {
      const double x = g.coords(i)[0];
      e = std::max(e, std::abs(div[i] - md->radial(1.0 + 0.6 * x).g2 * 0.6));
    }
    return e;
  };
  const double ratio = err(32) / err(64);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Flux, PerturbationIsDetected) {
  const auto md = density(2, 1.5, 0.1);
  const Grid g = Grid::cube(2, 8, 1.0);
  ScalarField u(g, 0.0, 1.0);
  ScalarField v = u;
  v.values[g.index(4, 4)] += 1e-3;
  EXPECT_GT(sup_abs(step_residual(v, u, 0.01, md).values), 1e-10);
}

TEST(Step, ConstantStateNeedsOneIteration) {
  const auto md = density(2, 1.3, 0.1);
  const Grid g = Grid::cube(2, 8, 1.0);
  const ScalarField u(g, 0.0, 0.5);
  StepStats st;
  const auto next = solve_timestep(u, 0.01, md, BoundaryData::constant(0.5), SolverConfig{}, &st);
  EXPECT_EQ(st.iterations, 1);
  EXPECT_EQ(next.values, u.values);
  EXPECT_DOUBLE_EQ(next.t, 0.01);
}

TEST(Step, ZeroStepReturnsInput) {
  const auto md = density(1, 1.3, 0.1);
  const auto u = sample(Grid::cube(1, 16, 1.0), bump(1));
  const auto next = solve_timestep(u, 0.0, md, BoundaryData::constant(0.0), SolverConfig{});
  EXPECT_EQ(next.values, u.values);
  EXPECT_EQ(next.t, u.t);
}

TEST(Step, NewtonConvergesQuickly) {
  // The first step, where the facet forms out of smooth data, takes 12
  // damped iterations (recorded); later steps stay within 10.
  const auto md = density(1, 1.3, 0.1);
  const Grid g = Grid::cube(1, 64, 1.0);
  auto u = sample(g, bump(1));
  for (int k = 0; k < 5; ++k) {
    StepStats st;
    const auto next = solve_timestep(u, g.h(0), md, BoundaryData::constant(0.0), SolverConfig{}, &st);
    EXPECT_LE(st.iterations, k == 0 ? 12 : 10) << "step " << k;
    EXPECT_FALSE(st.picard_used);
    EXPECT_LE(sup_abs(step_residual(next, u, g.h(0), md).values), 1e-10);
    u = next;
  }
}

TEST(Step, NonconvergenceCarriesHistory) {
  const auto md = density(1, 1.3, 0.1);
  const auto u = sample(Grid::cube(1, 32, 1.0), bump(1));
  SolverConfig cfg;
  cfg.newton_max_iter = 1;
  cfg.newton_tol = 1e-300;
  cfg.picard_fallback = false;
  try {
    solve_timestep(u, 0.05, md, BoundaryData::constant(0.0), cfg);
    FAIL() << "expected NonconvergenceError";
  } catch (const NonconvergenceError& e) {
    EXPECT_GE(e.history().size(), 2u);
  }
}

TEST(Run, ConstantDataKeepEnergyAtDensityFloor) {
  for (int dim : {1, 2}) {
    const auto md = density(dim, 1.3, 0.1);
    const Grid g = Grid::cube(dim, 8, 1.5);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 0.2;
    const auto run = run_simulation(cfg, EnergyModel::euclidean(dim, 1.3), md, BoundaryData::constant(0.75),
                                    ScalarField(g, 0.0, 0.75));
    const double expected = g.domain_volume() * md->radial(0.0).g;
    ASSERT_EQ(run.series.size(), 5u);
    for (const auto& s : run.series) {
      EXPECT_NEAR(s.energy, expected, 1e-13 * expected) << "dim " << dim;
      EXPECT_EQ(s.sup_u, 0.75);
    }
  }
}

TEST(Run, ShiftedDataShiftTheSolution) {
  const auto md = density(2, 1.5, 0.1);
  const Grid g = Grid::cube(2, 12, 1.0);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.03;
  cfg.newton_tol = 1e-12;
  const auto bc = BoundaryData::affine(0.0, {0.5, 0.0, 0.0});
  const auto b2 = bump(2);
  ScalarField init = sample(g, [&](const Point& x) { return 0.5 * x[0] + b2(x); });
  const auto a = run_simulation(cfg, EnergyModel::euclidean(2, 1.5), md, bc, init);
  for (double& v : init.values) {
    v += 2.0;
  }
  const auto b = run_simulation(cfg, EnergyModel::euclidean(2, 1.5), md, bc.shifted(2.0), init);
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    EXPECT_NEAR(b.snapshots.back().values[i] - a.snapshots.back().values[i], 2.0, 1e-9);
  }
}

TEST(Run, IncompatibleInitialFieldIsRejected) {
  const auto md = density(1, 1.3, 0.1);
  const Grid g = Grid::cube(1, 8, 1.0);
  EXPECT_THROW(run_simulation(SolverConfig{}, EnergyModel::euclidean(1, 1.3), md, BoundaryData::constant(1.0),
                              ScalarField(g, 0.0, 0.0)),
               IncompatibleDataError);
}

TEST(Run, DiscreteMaximumPrincipleAndEnergyDecay) {
  const auto md = density(2, 1.3, 0.05, 16.0);
  const Grid g = Grid::cube(2, 16, 1.0);
  SolverConfig cfg;
  cfg.dt = 0.005;
  cfg.t_end = 0.05;
  const auto init = sample(g, bump(2, 2.0, -0.3));
  const auto bc = BoundaryData::constant(-0.3);
  const auto run = run_simulation(cfg, EnergyModel::euclidean(2, 1.3), md, bc, init);
  const double hi = *std::max_element(init.values.begin(), init.values.end());
  for (const auto& s : run.snapshots) {
    for (double v : s.values) {
      EXPECT_LE(v, hi + 1e-12);
      EXPECT_GE(v, -0.3 - 1e-12);
    }
  }
  for (std::size_t k = 1; k < run.series.size(); ++k) {
    EXPECT_LE(run.series[k].energy, run.series[k - 1].energy + 1e-12);
  }
  EXPECT_LT(run.snapshots.back().sup_norm(), init.sup_norm());
}
