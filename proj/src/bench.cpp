#include "gimvi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "gimvi/discrete.hpp"
#include "gimvi/residual.hpp"

namespace gimvi {

bool ExperimentSummary::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.failed; });
}

namespace {

std::string scientific(double v, int digits = 10) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits, v);
  return buf;
}

double log10_floored(double v) {
  if (!(v > 0)) return kLog10Floor;
  return std::max(kLog10Floor, std::log10(v));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::optional<Constants> try_constants(const Problem& p) {
  try {
    return constants_for(p);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<ConditionReport> problem_condition_reports(const Problem& problem) {
  std::vector<ConditionReport> out;
  if (const auto c = try_constants(problem)) {
    ConditionReport a;
    a.condition_id = "constant_a_positive";
    a.add("a > 0", c->a, true,
          "a = " + format_real(c->a) + ", a1 = " + format_real(c->a1) + ", tau = " + format_real(c->tau));
    out.push_back(a.finish());
    out.push_back(check_existence_uniqueness(*c));
  }
  return out;
}

std::vector<ConditionReport> run_condition_reports(const Problem& problem, const RunSpec& spec) {
  std::vector<ConditionReport> out;
  const auto c = try_constants(problem);
  if (!c) return out;
  if (spec.solver == SolverKind::kContinuous) {
    std::vector<double> grid;
    const int n = 101;
    for (int i = 0; i < n; ++i) grid.push_back(spec.t_end * double(i) / double(n - 1));
    out.push_back(check_continuous_conditions(ParamSchedule<double>::constant(spec.kappa),
                                              ParamSchedule<double>::constant(spec.rho),
                                              std::span<const double>(grid), *c, spec.kappa));
    return out;
  }
  const double kappa = spec.solver == SolverKind::kProjection ? 1.0 : spec.kappa;
  ConditionReport discrete = check_discrete_conditions(kappa, spec.rho, *c);
  out.push_back(discrete);
  ConditionReport eps;
  eps.condition_id = "epsilon_exists";
  const EpsilonSearch found = find_epsilon(kappa, spec.rho, *c);
  if (found.epsilon) {
    eps.details.push_back({"epsilon > 1 found", true, *found.epsilon - 1.0,
                           "epsilon = " + format_real(*found.epsilon)});
  } else {
    eps.details.push_back({"epsilon > 1 found", false, -1.0, found.reason});
  }
  out.push_back(eps.finish());
  return out;
}

RunOutcome execute_run(const Problem& problem, const RunSpec& spec) {
  RunOutcome out;
  out.spec = spec;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (spec.solver) {
      case SolverKind::kInertial:
        out.trace = solve_inertial(problem, spec.solver_config(), spec.w0, spec.second_point());
        break;
      case SolverKind::kProjection:
        out.trace = solve_projection(problem, spec.solver_config(), spec.w0);
        break;
      case SolverKind::kContinuous:
        out.trace = integrate(problem, SchedulePair<double>::constant(spec.kappa, spec.rho), spec.w0,
                              spec.second_point(), spec.integrate_options());
        break;
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.message = e.what();
    out.fitted_rate = std::numeric_limits<double>::quiet_NaN();
    out.final_error = std::numeric_limits<double>::quiet_NaN();
    out.final_residual = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const TraceRow<double>& last = out.trace.last();
  out.final_error = last.error;
  out.final_residual = last.residual_norm;
  out.failed = out.trace.aborted();
  out.message = out.trace.diagnostic;
  out.fitted_rate = std::numeric_limits<double>::quiet_NaN();

  if (spec.solver == SolverKind::kContinuous) {
    out.iterations = long(std::llround(double(last.t) / spec.h));
    if (problem.known_solution) {
      try {
        out.fitted_rate = fit_exponential_rate(out.trace, *problem.known_solution).rate;
      } catch (const InvalidArgument&) {
      }
      if (const auto c = try_constants(problem); c && out.trace.rows.size() >= 3 && spec.rho > 0) {
        LyapunovOptions lo;
        lo.h = spec.h;
        out.lyapunov = lyapunov_monitor(out.trace, *c, SchedulePair<double>::constant(spec.kappa, spec.rho), lo);
      }
    }
  } else {
    const long offset = out.trace.rows.front().index;
    out.iterations = last.index - offset;
    if (problem.known_solution) {
      try {
        out.fitted_rate = fit_linear_rate(out.trace, *problem.known_solution).rate;
      } catch (const InvalidArgument&) {
      }
    }
  }
  out.conditions = run_condition_reports(problem, spec);
  return out;
}

ExperimentSummary run_experiment(const RunPlan& plan, const ExperimentOptions& options) {
  ExperimentSummary summary;
  summary.problem_id = plan.problem.id;
  summary.problem_conditions = problem_condition_reports(plan.problem);
  summary.runs.resize(plan.runs.size());

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, unsigned(std::max<std::size_t>(1, plan.runs.size())));
  std::size_t next = 0;
  while (next < plan.runs.size()) {
    std::vector<std::pair<std::size_t, std::future<RunOutcome>>> batch;
    for (unsigned t = 0; t < threads && next < plan.runs.size(); ++t, ++next) {
      batch.emplace_back(next, std::async(std::launch::async, execute_run, std::cref(plan.problem),
                                          std::cref(plan.runs[next])));
    }
    for (auto& [index, fut] : batch) summary.runs[index] = fut.get();
  }

  if (!options.write_files) return summary;
  const auto& dir = plan.output;
  std::filesystem::create_directories(dir);
  std::ostringstream timing;
  timing << "label,wall_seconds\n";
  for (const RunOutcome& r : summary.runs) {
    if (!r.trace.rows.empty()) {
      std::ostringstream csv;
      write_csv(csv, r.trace);
      write_file(dir / (r.spec.label + ".csv"), csv.str());
    }
    timing << r.spec.label << ',' << format_real(r.wall_seconds) << '\n';
  }
  write_file(dir / "summary.csv", format_summary_csv(summary));
  write_file(dir / "summary.txt", format_summary_table(summary));
  write_file(dir / "conditions.txt", format_conditions(summary));
  write_file(dir / "timing.csv", timing.str());
  emit_report(summary, dir);
  return summary;
}

std::string format_summary_csv(const ExperimentSummary& summary) {
  std::ostringstream os;
  os << "label,solver,kappa,rho,final_error,final_residual,fitted_rate,iterations,status\n";
  for (const RunOutcome& r : summary.runs) {
    os << r.spec.label << ',' << to_string(r.spec.solver) << ',' << format_real(r.spec.kappa) << ','
       << format_real(r.spec.rho) << ',' << format_real(r.final_error) << ','
       << format_real(r.final_residual) << ',' << format_real(r.fitted_rate) << ',' << r.iterations
       << ',' << (r.failed ? "failed" : to_string(r.trace.stop)) << '\n';
  }
  return os.str();
}

std::string format_summary_table(const ExperimentSummary& summary) {
  std::size_t width = 5;
  for (const RunOutcome& r : summary.runs) width = std::max(width, r.spec.label.size());
  std::ostringstream os;
  os << "problem: " << summary.problem_id << '\n';
  os << std::left << std::setw(int(width)) << "label" << "  " << std::setw(11) << "solver" << "  "
     << std::setw(17) << "final_error" << "  " << std::setw(17) << "final_residual" << "  "
     << std::setw(17) << "fitted_rate" << "  " << std::setw(10) << "iterations" << "  status\n";
  for (const RunOutcome& r : summary.runs) {
    os << std::left << std::setw(int(width)) << r.spec.label << "  " << std::setw(11)
       << to_string(r.spec.solver) << "  " << std::setw(17) << scientific(r.final_error) << "  "
       << std::setw(17) << scientific(r.final_residual) << "  " << std::setw(17)
       << scientific(r.fitted_rate) << "  " << std::setw(10) << r.iterations << "  "
       << (r.failed ? "failed: " + r.message : std::string(to_string(r.trace.stop))) << '\n';
  }
  return os.str();
}

std::string format_conditions(const ExperimentSummary& summary) {
  std::ostringstream os;
  os << "problem: " << summary.problem_id << "\n\n";
  for (const auto& c : summary.problem_conditions) os << c;
  for (const RunOutcome& r : summary.runs) {
    os << "\nrun: " << r.spec.label << " (" << to_string(r.spec.solver)
       << ", kappa=" << format_real(r.spec.kappa) << ", rho=" << format_real(r.spec.rho) << ")\n";
    for (const auto& c : r.conditions) os << c;
    if (r.lyapunov) {
      os << "lyapunov_monitor: energy " << (r.lyapunov->energy_nonincreasing ? "nonincreasing" : "INCREASES")
         << " (worst excess " << scientific(r.lyapunov->worst_increase, 3) << ", tol_E per step "
         << scientific(r.lyapunov->tol_per_step, 3) << "), Xi tail "
         << (r.lyapunov->xi_monotone_tail ? "monotone" : "NOT monotone") << '\n';
    }
  }
  return os.str();
}

std::string format_report(const ExperimentSummary& summary) {
  std::ostringstream os;
  // Discrete runs grouped by rho, in order of first appearance.
  std::vector<double> rhos;
  for (const RunOutcome& r : summary.runs) {
    if (r.spec.solver == SolverKind::kContinuous) continue;
    if (std::find(rhos.begin(), rhos.end(), r.spec.rho) == rhos.end()) rhos.push_back(r.spec.rho);
  }
  int table = 0;
  for (double rho : rhos) {
    std::vector<std::pair<std::string, const RunOutcome*>> rows;
    long iters = -1;
    for (const RunOutcome& r : summary.runs) {
      if (r.spec.solver == SolverKind::kContinuous || r.spec.rho != rho) continue;
      std::string method = r.spec.solver == SolverKind::kProjection
                               ? "Standard (No inertia)"
                               : "Inertial (kappa = " + format_real(r.spec.kappa) + ")";
      rows.emplace_back(std::move(method), &r);
      iters = std::max(iters, r.spec.max_iters);
    }
    std::size_t width = 6;
    for (const auto& [m, r] : rows) width = std::max(width, m.size());
    os << "Table " << ++table << ": final errors with rho=" << format_real(rho) << " ("
       << iters << " iterations)\n";
    const std::string rule = "+-" + std::string(width, '-') + "-+-" + std::string(18, '-') + "-+\n";
    os << rule << "| " << std::left << std::setw(int(width)) << "Method" << " | " << std::setw(18)
       << "Error value" << " |\n"
       << rule;
    for (const auto& [m, r] : rows) {
      os << "| " << std::left << std::setw(int(width)) << m << " | " << std::setw(18)
         << (r->failed ? "failed" : scientific(r->final_error)) << " |\n";
    }
    os << rule << '\n';
  }

  bool header = false;
  for (const RunOutcome& r : summary.runs) {
    if (r.spec.solver != SolverKind::kContinuous) continue;
    if (!header) {
      os << "Continuous runs\n";
      header = true;
    }
    const double xi = r.trace.rows.empty() ? std::numeric_limits<double>::quiet_NaN() : r.trace.last().xi;
    os << "  " << r.spec.label << ": kappa=" << format_real(r.spec.kappa)
       << " rho=" << format_real(r.spec.rho) << " t_end=" << format_real(r.spec.t_end)
       << " final Xi=" << scientific(xi) << " exponential rate=" << scientific(r.fitted_rate, 6);
    if (r.lyapunov)
      os << " energy " << (r.lyapunov->energy_nonincreasing ? "nonincreasing" : "increases");
    os << '\n';
  }
  return os.str();
}

void emit_report(const ExperimentSummary& summary, const std::filesystem::path& dir) {
  require(!summary.runs.empty(), "emit_report: summary is empty");
  std::filesystem::create_directories(dir);
  write_file(dir / "report.txt", format_report(summary));
  for (const RunOutcome& r : summary.runs) {
    std::ostringstream os;
    if (r.spec.solver == SolverKind::kContinuous) {
      os << "t,log10_xi\n";
      for (const auto& row : r.trace.rows)
        os << format_real(row.t) << ',' << format_real(log10_floored(row.xi)) << '\n';
    } else {
      os << "n,log10_error\n";
      for (const auto& row : r.trace.rows)
        os << row.index << ',' << format_real(log10_floored(row.error)) << '\n';
    }
    write_file(dir / (r.spec.label + ".series.csv"), os.str());
  }
}

RunPlan make_sweep_plan(const Problem& problem, const std::vector<double>& kappas,
                        const std::vector<double>& rhos, const RunSpec& base,
                        const std::filesystem::path& output, std::uint64_t seed) {
  require(!kappas.empty() && !rhos.empty(), "sweep: need at least one kappa and one rho");
  RunPlan plan;
  plan.problem = problem;
  plan.output = output;
  plan.seed = seed;
  for (double rho : rhos) {
    for (double kappa : kappas) {
      RunSpec r = base;
      r.kappa = kappa;
      r.rho = rho;
      r.solver = kappa == 1.0 ? SolverKind::kProjection : SolverKind::kInertial;
      r.label = "sweep_k" + format_real(kappa) + "_rho" + format_real(rho);
      plan.runs.push_back(std::move(r));
    }
  }
  return plan;
}

}  // namespace gimvi
