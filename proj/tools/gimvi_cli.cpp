// Command-line front end: condition checks, discrete solves, continuous
// simulation, the bundled benchmark and (kappa, rho) sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gimvi/bench.hpp"
#include "gimvi/config.hpp"
#include "gimvi/gimvi.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<long> iters;
  std::optional<double> kappa;
  std::optional<double> rho;
  std::optional<double> h;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> metric;
  std::vector<double> w0;
};

gimvi::RunPlan load_plan(const CommonFlags& flags) {
  if (flags.config.empty()) {
    gimvi::RunPlan plan = gimvi::parse_config_string_unchecked(gimvi::paper_plan_text(), "<bundled reference plan>");
    if (!flags.out.empty()) plan.output = flags.out;
    return plan;
  }
  gimvi::RunPlan plan = gimvi::parse_config(flags.config);
  if (!flags.out.empty()) plan.output = flags.out;
  return plan;
}

/// First run of the requested family in the plan, used as a template for one-off runs.
gimvi::RunSpec base_run(const gimvi::RunPlan& plan, bool continuous) {
  for (const auto& r : plan.runs)
    if ((r.solver == gimvi::SolverKind::kContinuous) == continuous) return r;
  gimvi::RunSpec r;
  r.w0 = plan.runs.front().w0;
  if (continuous) r.solver = gimvi::SolverKind::kContinuous;
  return r;
}

void apply_flags(gimvi::RunSpec& r, const CommonFlags& f, Eigen::Index d) {
  if (f.kappa) r.kappa = *f.kappa;
  if (f.rho) r.rho = *f.rho;
  if (f.iters) r.max_iters = *f.iters;
  if (f.h) r.h = *f.h;
  if (f.t_end) r.t_end = *f.t_end;
  if (f.metric) {
    if (*f.metric == "error_norm") r.metric = gimvi::ErrorMetric::kErrorNorm;
    else if (*f.metric == "error_norm_squared") r.metric = gimvi::ErrorMetric::kErrorNormSquared;
    else throw gimvi::ConfigError("--metric", 0, "expected error_norm or error_norm_squared");
  }
  if (!f.w0.empty()) {
    if (Eigen::Index(f.w0.size()) != d)
      throw gimvi::ConfigError("--w0", 0, "expected " + std::to_string(d) + " entries");
    r.w0 = Eigen::Map<const gimvi::VectorXd>(f.w0.data(), d);
    r.w1.reset();
  }
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_run_flags) {
  cmd->add_option("--config", f.config, "Run plan (YAML); defaults to the bundled reference plan");
  cmd->add_option("--out", f.out, "Output directory (overrides the plan's 'output')");
  cmd->add_option("--seed", f.seed, "Seed for sampled checks");
  if (!with_run_flags) return;
  cmd->add_option("--kappa", f.kappa, "Damping kappa");
  cmd->add_option("--rho", f.rho, "Relaxation rho");
  cmd->add_option("--iters", f.iters, "Iteration budget for discrete solvers");
  cmd->add_option("--step", f.h, "Integrator step h");
  cmd->add_option("--t-end", f.t_end, "Integration horizon");
  cmd->add_option("--metric", f.metric, "error_norm | error_norm_squared");
  cmd->add_option("--w0", f.w0, "Starting point (comma separated)")->delimiter(',');
}

int report_outcome(const gimvi::ExperimentSummary& summary) {
  std::cout << gimvi::format_summary_table(summary);
  return summary.any_failed() ? kExitRunFailure : kExitOk;
}

int cmd_check(const CommonFlags& f) {
  const gimvi::RunPlan plan = load_plan(f);
  const gimvi::Problem& p = plan.problem;
  std::cout << "problem: " << p.id << " (d=" << p.dimension << ", gamma=" << gimvi::format_real(p.gamma)
            << ")\n";
  try {
    const auto c = gimvi::constants_for(p);
    std::cout << "constants: eta=" << c.eta << " beta=" << c.beta << " lambda=" << c.lambda
              << " alpha=" << c.alpha << " zeta=" << c.zeta << "\n"
              << "           a=" << gimvi::format_real(c.a) << " a1=" << gimvi::format_real(c.a1)
              << " tau=" << gimvi::format_real(c.tau) << (c.a_positive() ? "" : "  (a <= 0)") << "\n\n";
  } catch (const gimvi::InvalidArgument& e) {
    std::cout << "constants unavailable: " << e.what() << "\n\n";
  }
  for (const auto& r : gimvi::problem_condition_reports(p)) std::cout << r;

  // Empirical sanity check of the declared moduli on [-10, 10]^d.
  gimvi::SampleBox<double> box{gimvi::VectorXd::Constant(p.dimension, -10.0),
                               gimvi::VectorXd::Constant(p.dimension, 10.0), f.seed.value_or(plan.seed)};
  const auto t_est = gimvi::estimate_moduli_empirical(p.T, box, 64, &p.g);
  const auto g_est = gimvi::estimate_moduli_empirical(p.g, box, 64);
  std::cout << "\nempirical moduli on [-10,10]^d (64 samples):\n"
            << "  T: lipschitz >= " << t_est.lipschitz_lower << ", strong monotone <= "
            << t_est.strong_monotone_upper << "\n"
            << "  g: lipschitz >= " << g_est.lipschitz_lower << ", strong monotone <= "
            << g_est.strong_monotone_upper << "\n"
            << "  (T, g) coupled monotone <= " << *t_est.coupled_monotone_upper << "\n";

  std::vector<gimvi::RunSpec> runs = plan.runs;
  if (f.kappa || f.rho) {
    gimvi::RunSpec r = base_run(plan, false);
    apply_flags(r, f, p.dimension);
    r.label = "command_line";
    runs = {r};
  }
  for (const auto& r : runs) {
    std::cout << "\nrun: " << r.label << " (" << gimvi::to_string(r.solver)
              << ", kappa=" << gimvi::format_real(r.kappa) << ", rho=" << gimvi::format_real(r.rho) << ")\n";
    for (const auto& c : gimvi::run_condition_reports(p, r)) std::cout << c;
  }
  return kExitOk;
}

int cmd_solve(const CommonFlags& f) {
  gimvi::RunPlan plan = load_plan(f);
  gimvi::RunSpec r = base_run(plan, false);
  apply_flags(r, f, plan.problem.dimension);
  r.solver = r.kappa == 1.0 ? gimvi::SolverKind::kProjection : gimvi::SolverKind::kInertial;
  r.label = "solve";
  plan.runs = {r};
  if (f.out.empty()) plan.output = "out/solve";
  return report_outcome(gimvi::run_experiment(plan));
}

int cmd_simulate(const CommonFlags& f) {
  gimvi::RunPlan plan = load_plan(f);
  gimvi::RunSpec r = base_run(plan, true);
  r.solver = gimvi::SolverKind::kContinuous;
  if (!f.kappa && !r.w1) r.kappa = 2.0;
  apply_flags(r, f, plan.problem.dimension);
  r.label = "simulate";
  plan.runs = {r};
  if (f.out.empty()) plan.output = "out/simulate";
  return report_outcome(gimvi::run_experiment(plan));
}

int cmd_bench(const CommonFlags& f) {
  gimvi::RunPlan plan = load_plan(f);
  if (f.seed) plan.seed = *f.seed;
  if (f.iters)
    for (auto& r : plan.runs) r.max_iters = *f.iters;
  const auto summary = gimvi::run_experiment(plan);
  std::cout << gimvi::format_report(summary) << '\n';
  std::cout << "outputs written to " << plan.output.string() << '\n';
  return summary.any_failed() ? kExitRunFailure : kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::vector<double>& kappas, const std::vector<double>& rhos) {
  const gimvi::RunPlan base_plan = load_plan(f);
  gimvi::RunSpec base = base_run(base_plan, false);
  apply_flags(base, f, base_plan.problem.dimension);
  const auto plan = gimvi::make_sweep_plan(base_plan.problem, kappas, rhos, base,
                                           f.out.empty() ? std::filesystem::path("out/sweep") : std::filesystem::path(f.out),
                                           f.seed.value_or(base_plan.seed));
  return report_outcome(gimvi::run_experiment(plan));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial projection methods for generalized inverse mixed variational inequalities"};
  app.require_subcommand(1);

  CommonFlags check_f, solve_f, sim_f, bench_f, sweep_f;
  std::vector<double> sweep_kappas, sweep_rhos;

  auto* check = app.add_subcommand("check", "Print constants and sufficient-condition reports");
  add_common(check, check_f, true);
  auto* solve = app.add_subcommand("solve", "Run the inertial (or, with kappa=1, projection) iteration");
  add_common(solve, solve_f, true);
  auto* simulate = app.add_subcommand("simulate", "Integrate the second-order dynamical system");
  add_common(simulate, sim_f, true);
  auto* bench = app.add_subcommand("bench", "Run the bundled reference plan (or --config)");
  add_common(bench, bench_f, false);
  bench->add_option("--iters", bench_f.iters, "Override every run's iteration budget");
  auto* sweep = app.add_subcommand("sweep", "Grid of discrete runs over kappa and rho");
  add_common(sweep, sweep_f, false);
  sweep->add_option("--kappa", sweep_kappas, "Comma-separated kappa values")->delimiter(',')->required();
  sweep->add_option("--rho", sweep_rhos, "Comma-separated rho values")->delimiter(',')->required();
  sweep->add_option("--iters", sweep_f.iters, "Iteration budget");
  sweep->add_option("--metric", sweep_f.metric, "error_norm | error_norm_squared");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*check) return cmd_check(check_f);
    if (*solve) return cmd_solve(solve_f);
    if (*simulate) return cmd_simulate(sim_f);
    if (*bench) return cmd_bench(bench_f);
    if (*sweep) return cmd_sweep(sweep_f, sweep_kappas, sweep_rhos);
  } catch (const gimvi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const gimvi::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitOk;
}
