#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gimvi/conditions.hpp"
#include "gimvi/config.hpp"
#include "gimvi/dynamics.hpp"
#include "gimvi/trace.hpp"

namespace gimvi {

struct RunOutcome {
  RunSpec spec;
  Trace trace;
  double final_error = 0;
  double final_residual = 0;
  /// Per-iteration contraction (discrete) or exponential slope (continuous); NaN when not fitted.
  double fitted_rate = 0;
  /// Number of updates (discrete) or integration steps (continuous).
  long iterations = 0;
  double wall_seconds = 0;
  bool failed = false;
  std::string message;
  std::vector<ConditionReport> conditions;
  std::optional<LyapunovReport> lyapunov;
};

struct ExperimentSummary {
  std::string problem_id;
  std::vector<ConditionReport> problem_conditions;
  std::vector<RunOutcome> runs;

  bool any_failed() const;
};

struct ExperimentOptions {
  /// Worker threads for independent runs; 0 picks the hardware concurrency.
  unsigned threads = 0;
  bool write_files = true;
};

/// Executes every run of the plan (concurrently when allowed), then writes into
/// plan.output: one trace CSV per run (<label>.csv), summary.csv and summary.txt,
/// conditions.txt, timing.csv, plus everything emit_report produces. All files
/// except timing.csv are a deterministic function of the plan.
ExperimentSummary run_experiment(const RunPlan& plan, const ExperimentOptions& options = {});

/// Executes a single run without touching the filesystem.
RunOutcome execute_run(const Problem& problem, const RunSpec& spec);

/// Writes report.txt (tables of final errors grouped by rho, plus continuous runs)
/// and per-run figure data <label>.series.csv: (n, log10 error) for discrete runs,
/// (t, log10 Xi) for continuous ones, floored at -308.
void emit_report(const ExperimentSummary& summary, const std::filesystem::path& dir);

std::string format_report(const ExperimentSummary& summary);
std::string format_summary_table(const ExperimentSummary& summary);
std::string format_summary_csv(const ExperimentSummary& summary);
std::string format_conditions(const ExperimentSummary& summary);

/// Condition reports for the problem itself (existence and uniqueness).
std::vector<ConditionReport> problem_condition_reports(const Problem& problem);

/// Condition reports relevant to one run configuration.
std::vector<ConditionReport> run_condition_reports(const Problem& problem, const RunSpec& spec);

/// One inertial run per (kappa, rho) pair; kappa == 1 becomes the projection baseline.
RunPlan make_sweep_plan(const Problem& problem, const std::vector<double>& kappas,
                        const std::vector<double>& rhos, const RunSpec& base,
                        const std::filesystem::path& output, std::uint64_t seed);

inline constexpr double kLog10Floor = -308.0;

}  // namespace gimvi
