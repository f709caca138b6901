#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gimvi/dynamics.hpp"

using gimvi::IntegrateOptions;
using gimvi::Integrator;
using gimvi::SchedulePair;
using gimvi::VectorXd;
using Op = gimvi::OperatorSpec<double>;

namespace {

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

// T = I, g = c I, f = 0, K = R^d, gamma = 1, so A(w) = c w.
gimvi::Problem linear_problem(double c, Eigen::Index d = 1) {
  return gimvi::Problem::make("linear", Op::identity(), Op::scalar_linear(c), gimvi::ConvexFunctionSpec<double>::zero(),
                              gimvi::FeasibleSetSpec<double>::whole_space(d), 1.0, c, VectorXd::Zero(d));
}

// Closed-form solution of w'' + k w' + q w = 0 with overdamped parameters.
double damped_oscillator(double t, double k, double q, double w0, double v0) {
  const double s = std::sqrt(k * k - 4 * q);
  const double r1 = (-k + s) / 2, r2 = (-k - s) / 2;
  const double c1 = (v0 - r2 * w0) / (r1 - r2);
  const double c2 = w0 - c1;
  return c1 * std::exp(r1 * t) + c2 * std::exp(r2 * t);
}

double final_error(const gimvi::Problem& p, double kappa, double rho, double h, Integrator m) {
  IntegrateOptions opt;
  opt.h = h;
  opt.t_end = 2.0;
  opt.method = m;
  const auto tr = gimvi::integrate(p, SchedulePair<double>::constant(kappa, rho), scalar(1.0), scalar(0.5), opt);
  return std::abs(tr.last().w(0) - damped_oscillator(2.0, kappa, rho, 1.0, 0.5));
}

}  // namespace

TEST(VectorField, ReferenceExampleValues) {
  const auto p = gimvi::paper_example_problem();
  const auto [dw, dv] = gimvi::vector_field_B(p, SchedulePair<double>::constant(2.0, 0.1), 0.0, scalar(100.0), scalar(1.0));
  EXPECT_EQ(dw(0), 1.0);
  EXPECT_NEAR(dv(0), -2.0 - 0.1 * (75.0 - 2.2 / 3.8), 1e-12);
  EXPECT_THROW(gimvi::vector_field_B(p, SchedulePair<double>::constant(2.0, 0.1), -1.0, scalar(0.0), scalar(0.0)),
               gimvi::InvalidArgument);
}

TEST(Integrate, Rk4FourthOrderOnLinearOracle) {
  const auto p = linear_problem(1.0);
  const double e1 = final_error(p, 3.0, 1.0, 0.1, Integrator::kRk4);
  const double e2 = final_error(p, 3.0, 1.0, 0.05, Integrator::kRk4);
  EXPECT_GE(e1 / e2, 12.0) << e1 << " " << e2;
  EXPECT_LT(e2, 1e-6);
}

TEST(Integrate, EulerFirstOrder) {
  const auto p = linear_problem(1.0);
  const double ratio = final_error(p, 3.0, 1.0, 0.01, Integrator::kEuler) /
                       final_error(p, 3.0, 1.0, 0.005, Integrator::kEuler);
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(Integrate, ZeroResidualHasClosedForm) {
  const auto p = gimvi::Problem::make("zero", Op::zero(), Op::zero(), gimvi::ConvexFunctionSpec<double>::zero(),
                                      gimvi::FeasibleSetSpec<double>::whole_space(1), 1.0);
  IntegrateOptions opt;
  opt.h = 0.01;
  opt.t_end = 3.0;
  const auto tr = gimvi::integrate(p, SchedulePair<double>::constant(2.0, 1.0), scalar(1.0), scalar(4.0), opt);
  EXPECT_NEAR(tr.last().w(0), 1.0 + 4.0 * (1 - std::exp(-6.0)) / 2.0, 1e-10);
  EXPECT_NEAR(tr.last().v(0), 4.0 * std::exp(-6.0), 1e-10);
}

TEST(Integrate, EquilibriumIsInvariant) {
  const auto p = gimvi::paper_example_problem();
  IntegrateOptions opt;
  opt.h = 0.01;
  opt.t_end = 5.0;
  const auto tr = gimvi::integrate(p, SchedulePair<double>::constant(2.0, 0.5), scalar(0.0), scalar(0.0), opt);
  for (const auto& r : tr.rows) {
    EXPECT_EQ(r.w(0), 0.0);
    EXPECT_EQ(r.v(0), 0.0);
  }
  EXPECT_EQ(tr.stop, gimvi::StopReason::kHorizonReached);
}

TEST(Integrate, PartialLastStepAndSampling) {
  const auto p = linear_problem(1.0);
  IntegrateOptions opt;
  opt.h = 0.1;
  opt.t_end = 1.05;
  opt.sample_every = 4;
  const auto tr = gimvi::integrate(p, SchedulePair<double>::constant(3.0, 1.0), scalar(1.0), scalar(0.0), opt);
  // 11 steps: rows at 0, 4, 8 and the final one.
  ASSERT_EQ(tr.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(tr.last().t, 1.05);
  EXPECT_NEAR(tr.last().w(0), damped_oscillator(1.05, 3.0, 1.0, 1.0, 0.0), 1e-5);
}

TEST(Integrate, InvalidOptions) {
  const auto p = linear_problem(1.0);
  IntegrateOptions opt;
  opt.h = 0.0;
  EXPECT_THROW(gimvi::integrate(p, SchedulePair<double>::constant(1.0, 1.0), scalar(1.0), scalar(0.0), opt),
               gimvi::InvalidArgument);
  opt.h = 0.1;
  EXPECT_THROW(gimvi::integrate(p, SchedulePair<double>::constant(1.0, 1.0), VectorXd(VectorXd::Zero(2)), scalar(0.0), opt),
               gimvi::DimensionMismatch);
}

TEST(Integrate, BlowUpAbortsWithDiagnostic) {
  // A(w) = gamma g(w) = -w^3, so w'' = w^3 escapes in finite time.
  const auto g = Op::callback([](const VectorXd& w) -> VectorXd { return -w.array().cube().matrix(); });
  const auto p = gimvi::Problem::make("blowup", Op::identity(), g, gimvi::ConvexFunctionSpec<double>::zero(),
                                      gimvi::FeasibleSetSpec<double>::whole_space(1), 1.0);
  IntegrateOptions opt;
  opt.h = 0.01;
  opt.t_end = 10.0;
  const auto tr = gimvi::integrate(p, SchedulePair<double>::constant(0.0, 1.0), scalar(10.0), scalar(0.0), opt);
  EXPECT_EQ(tr.stop, gimvi::StopReason::kNonFinite);
  EXPECT_TRUE(tr.aborted());
  EXPECT_LT(tr.last().t, 10.0);
  EXPECT_NE(tr.diagnostic.find("last finite residual"), std::string::npos);
}

TEST(Integrate, HighDimensionStoresNorms) {
  const auto p = linear_problem(1.0, 20);
  IntegrateOptions opt;
  opt.h = 0.1;
  opt.t_end = 0.5;
  const auto tr =
      gimvi::integrate(p, SchedulePair<double>::constant(3.0, 1.0), VectorXd(VectorXd::Ones(20)), VectorXd(VectorXd::Zero(20)), opt);
  EXPECT_EQ(tr.last().w.size(), 0);
  EXPECT_EQ(tr.last().v.size(), 1);
  EXPECT_GT(tr.last().w_norm, 0.0);
}

TEST(Lyapunov, SyntheticProblemSatisfiesContinuousConditions) {
  // a = 50, tau = 102, a1 = 50/102^2; kappa = 40, rho = 3.5 lie in the admissible window.
  const auto p = linear_problem(100.0, 2);
  const auto c = gimvi::constants_for(p);
  EXPECT_NEAR(c.a, 50.0, 1e-12);
  const auto sched = SchedulePair<double>::constant(40.0, 3.5);
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.02 * i);
  const auto cond = gimvi::check_continuous_conditions(sched.kappa, sched.rho, std::span<const double>(grid), c, 40.0);
  ASSERT_TRUE(cond.satisfied) << cond;

  IntegrateOptions opt;
  opt.h = 1e-3;
  opt.t_end = 2.0;
  VectorXd w0(2), w1(2);
  w0 << 1.0, -2.0;
  w1 << 0.5, 0.5;
  const auto tr = gimvi::integrate(p, sched, w0, w1, opt);
  const auto rep = gimvi::lyapunov_monitor(tr, c, sched);
  EXPECT_TRUE(rep.energy_nonincreasing) << "worst " << rep.worst_increase;
  EXPECT_TRUE(rep.xi_monotone_tail);

  const auto fit = gimvi::fit_exponential_rate(tr, VectorXd(VectorXd::Zero(2)));
  // Slow root of x^2 + 40x + 350.
  EXPECT_LT(fit.rate, 0.0);
  EXPECT_NEAR(fit.rate, -20.0 + std::sqrt(50.0), 0.05);
}

TEST(Lyapunov, AnalyticEnergyColumnMatchesMonitor) {
  const auto p = linear_problem(100.0, 1);
  const auto sched = SchedulePair<double>::constant(40.0, 3.5);
  IntegrateOptions opt;
  opt.h = 1e-3;
  opt.t_end = 0.5;
  const auto tr = gimvi::integrate(p, sched, scalar(1.0), scalar(0.0), opt);
  const auto rep = gimvi::lyapunov_monitor(tr, gimvi::constants_for(p), sched);
  for (std::size_t i = 1; i + 1 < tr.rows.size(); i += 50)
    EXPECT_NEAR(rep.energy[i], tr.rows[i].energy, 5e-4 * (1 + std::abs(tr.rows[i].energy)));
}

TEST(Lyapunov, RequiresThreeRows) {
  const auto p = linear_problem(1.0);
  IntegrateOptions opt;
  opt.h = 0.5;
  opt.t_end = 0.5;
  const auto tr = gimvi::integrate(p, SchedulePair<double>::constant(3.0, 1.0), scalar(1.0), scalar(0.0), opt);
  EXPECT_THROW(gimvi::lyapunov_monitor(tr, gimvi::constants_for(p), SchedulePair<double>::constant(3.0, 1.0)),
               gimvi::InvalidArgument);
}

TEST(FiniteDifference, CentralInteriorOneSidedEnds) {
  const std::vector<double> t{0, 1, 2, 3}, y{0, 1, 4, 9};
  const auto d = gimvi::finite_difference<double>(t, y);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_DOUBLE_EQ(d[1], 2.0);
  EXPECT_DOUBLE_EQ(d[2], 4.0);
  EXPECT_DOUBLE_EQ(d[3], 5.0);
}
