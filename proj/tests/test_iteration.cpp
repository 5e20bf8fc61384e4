#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "facetflow/iteration.hpp"

using namespace facetflow;

TEST(Moser, EqualityCaseMeetsTheBound) {
  // A = B = 1 and p0 = mu give Y_L = Y0 for every L
  MoserInstance in;
  in.mu = in.p0 = 2.5;
  in.kappa = 1.7;
  in.Y0 = 3.0;
  in.L = 60;
  const auto r = moser_sequence(in);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.Y_L, 3.0, 1e-12);
  EXPECT_NEAR(r.Y_L / r.bound, 1.0, 1e-12);
}

TEST(Moser, MatchesDirectIterationForShortChains) {
  MoserInstance in;
  in.A = 2.0;
  in.B = 1.5;
  in.kappa = 1.5;
  in.mu = 1.2;
  in.p0 = 1.2;
  in.Y0 = 0.8;
  in.L = 6;
  double y = in.Y0;
  for (int l = 0; l < in.L; ++l) {
    const double rhs = std::pow(in.A * std::pow(in.B, l) * std::pow(y, in.p_at(l)), in.kappa);
    y = std::pow(rhs, 1.0 / in.p_at(l + 1));
  }
  const auto r = moser_sequence(in);
  EXPECT_NEAR(r.Y_L, y, 1e-12 * y);
  EXPECT_TRUE(r.pass);
}

TEST(Moser, RandomInstancesStayBelowTheBound) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 100; ++k) {
    const auto in = random_moser_instance(rng);
    EXPECT_TRUE(moser_sequence(in).pass) << "instance " << k;
  }
}

TEST(Moser, ZeroStartAndValidation) {
  MoserInstance in;
  in.Y0 = 0.0;
  EXPECT_TRUE(moser_sequence(in).pass);
  in.A = 0.5;
  EXPECT_THROW(moser_sequence(in), PreconditionError);
}

TEST(Absorbing, ConstantClosedForm) {
  EXPECT_EQ(absorbing_constant(2.0, 0.0), 1.0);
  // alpha = 1, theta = 1/2: min of tau / ((1 - tau)(tau - 1/2))
  EXPECT_NEAR(absorbing_constant(1.0, 0.5), 6.0 + 4.0 * std::sqrt(2.0), 1e-9);
  // brute-force minimum on a fine grid
  const double a = 2.3;
  const double th = 0.3;
  double best = INFINITY;
  const double lo = std::pow(th, 1.0 / a);
  for (int i = 1; i < 200000; ++i) {
    const double tau = lo + (1.0 - lo) * i / 200000.0;
    best = std::min(best, std::pow(1.0 - tau, -a) / (1.0 - th * std::pow(tau, -a)));
  }
  EXPECT_NEAR(absorbing_constant(a, th), best, 1e-6 * best);
  EXPECT_LE(absorbing_constant(a, th), best);
}

TEST(Absorbing, RandomInstancesSatisfyTheConclusion) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 1000; ++k) {
    const auto in = random_absorbing_instance(rng);
    EXPECT_TRUE(absorbing_lemma_check(in).pass) << "instance " << k;
  }
}

TEST(Absorbing, ConstantFunction) {
  AbsorbingInstance in;
  in.theta = 0.4;
  in.A = 0.0;
  in.alpha = 1.0;
  in.B = 0.6 * 5.0;
  in.r = {1.0, 1.5, 2.0};
  in.f = {5.0, 5.0, 5.0};
  const auto rep = absorbing_lemma_check(in);
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.fitted.at("C"), 1.0 / (1.0 - in.theta));
}

TEST(Absorbing, ViolatedHypothesisThrows) {
  AbsorbingInstance in;
  in.theta = 0.1;
  in.A = 0.01;
  in.B = 0.0;
  in.r = {1.0, 2.0};
  in.f = {10.0, 0.0};
  EXPECT_THROW(absorbing_lemma_check(in), PreconditionError);
  in.f = {0.0, 1.0};
  in.theta = 1.0;
  EXPECT_THROW(absorbing_lemma_check(in), PreconditionError);
}
