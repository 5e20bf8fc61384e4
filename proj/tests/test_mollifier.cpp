#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "facetflow/mollifier.hpp"

using namespace facetflow;

namespace {

// Radial moment int_0^1 r^k exp(-1/(1-r^2)) dr by the composite trapezoid
// rule with one Richardson step. The integrand is flat to all orders at r = 1;
// for odd k the odd derivatives at r = 0 leave an h^2 term, which the
// extrapolation removes. Independent of the library's tanh-sinh code.
double trapezoid(int k, int m) {
  double s = 0.0;
  for (int i = 1; i < m; ++i) {
    const double r = static_cast<double>(i) / m;
    s += std::pow(r, k) * std::exp(-1.0 / (1.0 - r * r));
  }
  s += 0.5 * (k == 0 ? std::exp(-1.0) : 0.0);
  return s / m;
}

double bump_moment(int k) { return (4.0 * trapezoid(k, 40000) - trapezoid(k, 20000)) / 3.0; }

// int rho(w) |w|^j dw for the normalised bump in R^n
double rho_moment(int n, int j) { return bump_moment(n - 1 + j) / bump_moment(n - 1); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) {
    z(i++) = x;
  }
  return z;
}

} // namespace

TEST(Mollifier, OneHomogeneousPartAtOriginIsEpsTimesFirstMoment) {
  // frozen values of int rho |w| dw recorded from this oracle
  const double frozen[4] = {0.0, 0.334453997709975, 0.472751521424205, 0.552745346293834};
  for (int n = 1; n <= 3; ++n) {
    const double c_rho = rho_moment(n, 1);
    EXPECT_NEAR(c_rho, frozen[n], 1e-12);
    const double eps = 0.1;
    const MollifiedDensity md(EnergyModel::euclidean(n, 1.5), eps, QuadSpec{1e-12, 4.0});
    EXPECT_NEAR(md.radial(0.0, Component::one).g, eps * c_rho, 1e-11) << "n = " << n;
  }
}

TEST(Mollifier, QuadraticPartHasClosedForm) {
  // p = 2: (rho_eps * |.|^2/2)(z) = |z|^2/2 + eps^2 M2 / 2
  for (int n = 2; n <= 3; ++n) {
    const double eps = 0.2;
    const MollifiedDensity md(EnergyModel::euclidean(n, 2.0), eps, QuadSpec{1e-12, 12.0});
    const double m2 = rho_moment(n, 2);
    for (double r : {0.0, 0.013, 0.1, 0.37, 0.4, 1.0, 3.3, 11.5}) {
      const auto pr = md.radial(r, Component::p);
      EXPECT_NEAR(pr.g, 0.5 * r * r + 0.5 * eps * eps * m2, 1e-10 * std::max(1.0, r * r)) << "r = " << r;
      EXPECT_NEAR(pr.g1, r, 1e-9 * std::max(1.0, r));
      EXPECT_NEAR(pr.g2, 1.0, 1e-7);
    }
  }
}

TEST(Mollifier, TableProperties) {
  const double eps = 0.1;
  const auto model = EnergyModel::euclidean(2, 1.2);
  const MollifiedDensity md(model, eps, QuadSpec{1e-12, 6.0});
  EXPECT_EQ(md.table().g1[0], 0.0);
  EXPECT_LE(md.spacing(), eps / 16.0 + 1e-15);
  const auto& t = md.table();
  for (std::size_t i = 0; i < md.size(); i += 7) {
    const double r = md.radius(i);
    // Jensen: E^eps >= E
    EXPECT_GE(t.g[i], r + std::pow(r, 1.2) / 1.2 - 1e-12);
    // convex and nondecreasing in r
    EXPECT_GE(t.g1[i], 0.0);
    EXPECT_GE(t.g2[i], -1e-10);
    // one-homogeneous part stays within eps of |z|
    const double e1 = md.table(Component::one).g[i];
    EXPECT_GE(e1, r - 1e-12);
    EXPECT_LE(e1, r + eps);
  }
}

TEST(Mollifier, GradientAndHessianAtOrigin) {
  const MollifiedDensity md(EnergyModel::euclidean(3, 1.3), 0.1, QuadSpec{1e-12, 4.0});
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  EXPECT_EQ(md.grad(z).norm(), 0.0);
  const Eigen::MatrixXd H = md.hess(z);
  const double c = H(0, 0);
  EXPECT_GT(c, 0.0);
  EXPECT_NEAR((H - c * Eigen::MatrixXd::Identity(3, 3)).norm(), 0.0, 1e-14);
}

TEST(Mollifier, GradientMatchesFiniteDifferences) {
  const MollifiedDensity md(EnergyModel::euclidean(2, 1.5), 0.1, QuadSpec{1e-12, 4.0});
  const Eigen::VectorXd z = vec({0.3, -0.2});
  const double h = 1e-5;
  const Eigen::VectorXd g = grad_mollified(md, z);
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e(i) = h;
    const double fd = (eval_mollified(md, z + e) - eval_mollified(md, z - e)) / (2 * h);
    EXPECT_NEAR(g(i), fd, 1e-6 * g.norm());
  }
}

TEST(Mollifier, EigenvalueSandwichAtUnitVector) {
  const double eps = 0.1;
  const double p = 1.2;
  const auto model = EnergyModel::euclidean(2, p);
  const MollifiedDensity md(model, eps, QuadSpec{1e-12, 4.0});
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess_mollified(md, vec({1.0, 0.0})));
  const double base = std::pow(eps * eps + 1.0, p / 2 - 1);
  EXPECT_GE(es.eigenvalues().minCoeff(), model.lambda * base);
  EXPECT_LE(es.eigenvalues().maxCoeff(), model.Lambda * base + model.K / std::sqrt(eps * eps + 1.0));
}

TEST(Mollifier, Errors) {
  const auto model = EnergyModel::euclidean(2, 1.5);
  EXPECT_THROW(MollifiedDensity(model, 0.0), PreconditionError);
  EXPECT_THROW(MollifiedDensity(model, 1.0), PreconditionError);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  A(0, 0) = 2.0;
  EXPECT_THROW(MollifiedDensity(EnergyModel::anisotropic(A, 1.5), 0.1), PreconditionError);
  const MollifiedDensity md(model, 0.1, QuadSpec{1e-12, 2.0});
  EXPECT_THROW(md.radial(2.5), OutOfTableError);
  EXPECT_THROW(md.grad(vec({1.0, 0.0, 0.0})), PreconditionError);
}
