#include <gtest/gtest.h>

#include <cmath>

#include "facetflow/structure.hpp"

using namespace facetflow;

TEST(Structure, RandomPairsInBallOfRadius3) {
  const auto model = EnergyModel::euclidean(2, 1.1);
  const MollifiedDensity md(model, 0.1, QuadSpec{1e-12, 4.0});
  const auto rep = verify_structural(md, model, SampleSpec{10000, 3.0, 1, 1e-6});
  for (const auto& r : rep.results) {
    EXPECT_TRUE(r.pass) << r.name << " worst margin " << r.worst_margin;
    EXPECT_EQ(r.samples, 10000u);
  }
  EXPECT_TRUE(rep.pass);
  ASSERT_NE(rep.find("coercivity_w0"), nullptr);
}

TEST(Structure, OriginInTheW0Form) {
  // <grad E^eps(0) | 0> = 0 >= lambda (0 - eps^p)
  const auto model = EnergyModel::euclidean(3, 1.3);
  const double eps = 0.05;
  const MollifiedDensity md(model, eps, QuadSpec{1e-12, 2.0});
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  const double margin = md.grad(z).dot(z) - model.lambda * (0.0 - std::pow(eps, model.p));
  EXPECT_DOUBLE_EQ(margin, model.lambda * std::pow(eps, model.p));
}

TEST(Structure, DegeneratePairHasZeroMonotonicityMargin) {
  const auto model = EnergyModel::euclidean(2, 1.3);
  const MollifiedDensity md(model, 0.1, QuadSpec{1e-12, 4.0});
  Eigen::VectorXd z(2);
  z << 0.7, -1.2;
  const Eigen::VectorXd dz = z - z;
  EXPECT_EQ((md.grad(z) - md.grad(z)).dot(dz) - model.lambda * dz.squaredNorm(), 0.0);
}

TEST(Structure, EstimatedConstantsAreCompatibleWithDefaults) {
  const auto model = EnergyModel::euclidean(3, 1.3);
  const MollifiedDensity md(model, 0.1, QuadSpec{1e-12, 4.0});
  const auto c = estimate_structural_constants(md, model, SampleSpec{3000, 3.0, 2});
  EXPECT_GE(c.lambda, model.lambda * (1.0 - 1e-6));
  EXPECT_LE(c.Lambda, model.Lambda);
  EXPECT_LE(c.K, model.K);
  EXPECT_GT(c.lambda, 0.0);
}

TEST(Structure, RejectsRadiusBeyondTable) {
  const auto model = EnergyModel::euclidean(2, 1.5);
  const MollifiedDensity md(model, 0.1, QuadSpec{1e-12, 2.0});
  EXPECT_THROW(verify_structural(md, model, SampleSpec{10, 3.0}), PreconditionError);
}
