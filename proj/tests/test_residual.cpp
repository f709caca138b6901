#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gimvi/residual.hpp"

using gimvi::VectorXd;

namespace {

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

gimvi::Problem scaled_identity_problem(double c, Eigen::Index d) {
  using Op = gimvi::OperatorSpec<double>;
  return gimvi::Problem::make("scaled", Op::identity(), Op::scalar_linear(c), gimvi::ConvexFunctionSpec<double>::zero(),
                              gimvi::FeasibleSetSpec<double>::whole_space(d), 1.0, c, VectorXd::Zero(d));
}

}  // namespace

TEST(Residual, ReferenceExampleAtSolution) {
  const auto p = gimvi::paper_example_problem();
  EXPECT_EQ(gimvi::residual_value(p, scalar(0.0))(0), 0.0);
  EXPECT_TRUE(gimvi::is_solution(p, scalar(0.0), 1e-12));
}

TEST(Residual, ReferenceExampleAtHundred) {
  const auto p = gimvi::paper_example_problem();
  // T = 75, T - 1.4 g = 5, prox(5) = (5 - 2.8)/3.8.
  const double expected = 75.0 - 2.2 / 3.8;
  EXPECT_NEAR(gimvi::residual_value(p, scalar(100.0))(0), expected, 1e-12);
  const auto ev = gimvi::residual_A(p, scalar(100.0));
  EXPECT_NEAR(ev.norm, expected, 1e-12);
  ASSERT_TRUE(ev.inner_with_error);
  EXPECT_NEAR(*ev.inner_with_error, 100.0 * expected, 1e-9);
}

TEST(Residual, LocallyLinearNearSolution) {
  const auto p = gimvi::paper_example_problem();
  // For 0 < w < 2.8/0.05 = 56 the prox is clamped at zero, so A(w) = 0.75 w.
  for (double w : {1e-6, 0.5, 10.0, 55.0}) EXPECT_NEAR(gimvi::residual_value(p, scalar(w))(0), 0.75 * w, 1e-12 * w);
  EXPECT_FALSE(gimvi::is_solution(p, scalar(1.0), 1e-6));
}

TEST(Residual, DimensionMismatch) {
  EXPECT_THROW(gimvi::residual_value(gimvi::paper_example_problem(), VectorXd(VectorXd::Zero(2))), gimvi::DimensionMismatch);
}

TEST(LemmaBounds, ReferenceExampleAtHundred) {
  const auto p = gimvi::paper_example_problem();
  const auto c = gimvi::constants_for(p);
  const auto r = gimvi::lemma_bounds_check(p, c, scalar(100.0), scalar(0.0));
  EXPECT_TRUE(r.satisfied) << r;
  ASSERT_EQ(r.details.size(), 4u);
  for (const auto& d : r.details) EXPECT_GT(d.margin, 0.0) << d.name;
}

TEST(LemmaBounds, RandomPointsOnReferenceExample) {
  const auto p = gimvi::paper_example_problem();
  const auto c = gimvi::constants_for(p);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1000, 1000);
  for (int i = 0; i < 2000; ++i) {
    const auto r = gimvi::lemma_bounds_check(p, c, scalar(u(rng)), scalar(0.0));
    ASSERT_TRUE(r.satisfied) << r;
  }
}

TEST(LemmaBounds, ScaledIdentityInMoreDimensions) {
  const auto p = scaled_identity_problem(100.0, 4);
  const auto c = gimvi::constants_for(p);
  EXPECT_NEAR(c.a, 50.0, 1e-12);
  EXPECT_NEAR(c.tau, 102.0, 1e-12);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 10);
  for (int i = 0; i < 200; ++i) {
    VectorXd w(4);
    for (int j = 0; j < 4; ++j) w(j) = n(rng);
    EXPECT_TRUE(gimvi::lemma_bounds_check(p, c, w, VectorXd(VectorXd::Zero(4))).satisfied);
  }
}

TEST(LemmaBounds, NotASolutionRejected) {
  const auto p = gimvi::paper_example_problem();
  EXPECT_THROW(gimvi::lemma_bounds_check(p, gimvi::constants_for(p), scalar(1.0), scalar(1.0)),
               gimvi::InvalidArgument);
}

TEST(LemmaBounds, InapplicableWhenANonPositive) {
  const auto p = gimvi::paper_example_problem();
  const auto bad = gimvi::derive_constants(1.0, 1.0, 0.0, 0.0, 0.0, 1.4);
  const auto r = gimvi::lemma_bounds_check(p, bad, scalar(5.0), scalar(0.0));
  EXPECT_FALSE(r.applicable);
  EXPECT_FALSE(r.satisfied);
}
