#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "facetflow/truncation.hpp"

using namespace facetflow;

namespace {
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd z(2);
  z << a, b;
  return z;
}
} // namespace

TEST(Truncation, KillsSmallGradients) {
  const TruncationParams tp{0.5, 0.01};
  EXPECT_EQ(truncate_gradient(vec2(0.3, 0.2), tp, TruncationMode::exact).norm(), 0.0);
  EXPECT_EQ(truncate_gradient(vec2(0.0, 0.0), tp, TruncationMode::regularized).norm(), 0.0);
}

TEST(Truncation, ExactMode) {
  // (5 - 0.5)/5 * (3, 4)
  const auto g = truncate_gradient(vec2(3.0, 4.0), TruncationParams{0.5, 0.0}, TruncationMode::exact);
  EXPECT_NEAR(g(0), 2.7, 1e-15);
  EXPECT_NEAR(g(1), 3.6, 1e-15);
}

TEST(Truncation, RegularizedAtZeroEpsMatchesExactWithDoubledRadius) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd z = vec2(u(rng), u(rng));
    const auto a = truncate_gradient(z, TruncationParams{0.2, 0.0}, TruncationMode::regularized);
    const auto b = truncate_gradient(z, TruncationParams{0.4, 0.0}, TruncationMode::exact);
    EXPECT_NEAR((a - b).norm(), 0.0, 1e-14);
  }
}

TEST(Truncation, ModulusFormula) {
  EXPECT_EQ(truncated_modulus(0.15, 0.1), 0.0);
  EXPECT_NEAR(truncated_modulus(0.5, 0.1), 0.3, 1e-15);
  EXPECT_TRUE((TruncationParams{0.1, 0.0124}.admissible_for_regularized()));
  EXPECT_FALSE((TruncationParams{0.1, 0.0125}.admissible_for_regularized()));
  EXPECT_THROW((TruncationParams{1.0, 0.0}.validate()), PreconditionError);
}

TEST(VW, Examples) {
  EXPECT_DOUBLE_EQ(v_eps(vec2(0, 0), 0.1), 0.1);
  EXPECT_DOUBLE_EQ(w_eps(vec2(0, 0)), 1.0);
  EXPECT_NEAR(w_eps(vec2(2, 0)), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(v_eps(vec2(2, 0), 0.0), 2.0);
  EXPECT_LE(w_eps(vec2(2, 0)), std::sqrt(2.0) * v_eps(vec2(2, 0), 0.0));
  const double V = v_eps(vec2(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(w_eps(vec2(0.5, 0.5)), 1.0);
  EXPECT_NEAR(V, std::sqrt(0.5), 1e-15);
  EXPECT_GE(w_eps(vec2(0.5, 0.5)), V / compatibility_constant(2));
}

TEST(VW, CompatibilityChainOnRandomGradients) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::uniform_real_distribution<double> e(0.0, 1.0);
  for (int n = 1; n <= 3; ++n) {
    const double c = compatibility_constant(n);
    for (int k = 0; k < 5000; ++k) {
      Eigen::VectorXd g(n);
      for (int j = 0; j < n; ++j) {
        g(j) = u(rng) * std::pow(e(rng), 3);
      }
      const double eps = 0.2 * e(rng);
      const double V = v_eps(g, eps);
      const double W = w_eps(g);
      EXPECT_LE(V, c * W + 1e-12);
      EXPECT_LE(W, 1.0 + V + 1e-12);
      if (g.norm() > 1.0) {
        EXPECT_LE(W, std::sqrt(2.0) * V + 1e-12);
      }
    }
  }
}

TEST(Exponents, CriticalValues) {
  const ExponentBook b{3, 1.1};
  EXPECT_NEAR(b.s_c(), 27.0 / 11.0, 1e-14);
  EXPECT_NEAR(b.q_c(), 27.0 / 20.0, 1e-14);
  EXPECT_TRUE(b.subcritical());
  EXPECT_THROW(b.require_s(b.s_c()), PreconditionError);
  EXPECT_NO_THROW(b.require_s(4.0));
  EXPECT_FALSE((ExponentBook{3, 1.3}.subcritical()));
}
