#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gimvi/bench.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

gimvi::RunPlan paper_plan(const fs::path& out) {
  auto plan = gimvi::parse_config_string_unchecked(gimvi::paper_plan_text());
  plan.output = out;
  return plan;
}

}  // namespace

TEST(Bench, ReferencePlanReproducesTables) {
  const fs::path out = fs::temp_directory_path() / "gimvi_test_bench_paper";
  fs::remove_all(out);
  const auto summary = gimvi::run_experiment(paper_plan(out));
  ASSERT_FALSE(summary.any_failed());
  ASSERT_EQ(summary.runs.size(), 8u);
  EXPECT_NEAR(summary.runs[1].final_error, 3.5502140699e-28, 1e-37);
  EXPECT_NEAR(summary.runs[7].final_error, 8.0263714274e-2, 1e-11);
  EXPECT_EQ(summary.runs[0].iterations, 499);
  EXPECT_EQ(summary.runs[3].iterations, 500);

  for (const char* f : {"summary.csv", "summary.txt", "conditions.txt", "timing.csv", "report.txt",
                        "inertial_k0.1_rho0.09.csv", "projection_rho0.0019.series.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  const std::string report = slurp(out / "report.txt");
  EXPECT_NE(report.find("Inertial (kappa = 0.59) | 3.5502140699e-28"), std::string::npos) << report;
  EXPECT_NE(report.find("Standard (No inertia)   | 8.0263714274e-02"), std::string::npos) << report;

  const std::string series = slurp(out / "inertial_k0.59_rho0.09.series.csv");
  EXPECT_EQ(series.rfind("n,log10_error\n1,2\n", 0), 0u);
  fs::remove_all(out);
}

TEST(Bench, OutputsAreDeterministic) {
  const fs::path a = fs::temp_directory_path() / "gimvi_test_bench_a";
  const fs::path b = fs::temp_directory_path() / "gimvi_test_bench_b";
  fs::remove_all(a);
  fs::remove_all(b);
  gimvi::run_experiment(paper_plan(a), {4, true});
  gimvi::run_experiment(paper_plan(b), {1, true});
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "timing.csv") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
    ++compared;
  }
  // 8 traces, 8 series, summary.csv, summary.txt, conditions.txt, report.txt.
  EXPECT_EQ(compared, 20u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Bench, ConditionReportsForReferenceRuns) {
  const auto problem = gimvi::paper_example_problem();
  const auto plan = paper_plan("unused");
  const auto reports = gimvi::run_condition_reports(problem, plan.runs[1]);
  ASSERT_EQ(reports.size(), 2u);
  // The reference step sizes exceed the sufficient bound.
  EXPECT_FALSE(reports[0].satisfied);
  EXPECT_FALSE(reports[1].satisfied);
  const auto problem_reports = gimvi::problem_condition_reports(problem);
  ASSERT_EQ(problem_reports.size(), 2u);
  EXPECT_TRUE(problem_reports[0].satisfied);
  EXPECT_TRUE(problem_reports[1].satisfied);
}

TEST(Bench, ContinuousRunCarriesLyapunovReport) {
  using Op = gimvi::OperatorSpec<double>;
  gimvi::RunSpec r;
  r.label = "synthetic";
  r.solver = gimvi::SolverKind::kContinuous;
  r.kappa = 40;
  r.rho = 3.5;
  r.h = 1e-3;
  r.t_end = 1.0;
  r.sample_every = 10;
  r.w0 = gimvi::VectorXd::Ones(2);
  const auto p = gimvi::Problem::make("synthetic", Op::identity(), Op::scalar_linear(100.0),
                                      gimvi::ConvexFunctionSpec<double>::zero(),
                                      gimvi::FeasibleSetSpec<double>::whole_space(2), 1.0, 100.0,
                                      gimvi::VectorXd::Zero(2));
  const auto out = gimvi::execute_run(p, r);
  ASSERT_FALSE(out.failed) << out.message;
  ASSERT_TRUE(out.lyapunov);
  EXPECT_TRUE(out.lyapunov->energy_nonincreasing);
  EXPECT_LT(out.fitted_rate, 0.0);
  EXPECT_EQ(out.iterations, 1000);
  ASSERT_EQ(out.conditions.size(), 1u);
  EXPECT_TRUE(out.conditions[0].satisfied) << out.conditions[0];
}

TEST(Bench, SweepPlanLabelsAndBaseline) {
  gimvi::RunSpec base;
  base.w0 = gimvi::VectorXd::Constant(1, 100.0);
  base.max_iters = 50;
  const auto plan = gimvi::make_sweep_plan(gimvi::paper_example_problem(), {0.5, 1.0}, {0.09}, base, "unused", 3);
  ASSERT_EQ(plan.runs.size(), 2u);
  EXPECT_EQ(plan.runs[0].label, "sweep_k0.5_rho0.09");
  EXPECT_EQ(plan.runs[1].solver, gimvi::SolverKind::kProjection);
  EXPECT_EQ(plan.seed, 3u);
  const auto summary = gimvi::run_experiment(plan, {0, false});
  EXPECT_FALSE(summary.any_failed());
  EXPECT_THROW(gimvi::make_sweep_plan(gimvi::paper_example_problem(), {}, {0.09}, base, "x", 0),
               gimvi::InvalidArgument);
}

TEST(Bench, FailedRunIsReportedNotThrown) {
  gimvi::RunSpec r;
  r.label = "bad";
  r.solver = gimvi::SolverKind::kInertial;
  r.kappa = 0.5;
  r.rho = 10.0;
  r.max_iters = 10000;
  r.w0 = gimvi::VectorXd::Constant(1, -1.0);
  const auto out = gimvi::execute_run(gimvi::paper_example_problem(), r);
  EXPECT_TRUE(out.failed);
  EXPECT_NE(out.message.find("diverged"), std::string::npos);
}
