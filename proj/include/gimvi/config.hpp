#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gimvi/discrete.hpp"
#include "gimvi/dynamics.hpp"
#include "gimvi/problem.hpp"

namespace gimvi {

inline constexpr int kSchemaVersion = 1;

/// Schema violation in a run plan. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, const std::string& message)
      : std::runtime_error(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                           message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class SolverKind { kInertial, kProjection, kContinuous };

const char* to_string(SolverKind kind);

struct RunSpec {
  std::string label;
  SolverKind solver = SolverKind::kInertial;

  /// Constant damping / relaxation for every solver kind.
  double kappa = 1.0;
  double rho = 0.1;

  // Discrete solvers.
  long max_iters = 1000;
  double tol = 0.0;
  ErrorMetric metric = ErrorMetric::kErrorNorm;
  long record_every = 1;
  IterationCounting counting = IterationCounting::kUpdates;

  // Continuous solver.
  double h = 1e-3;
  double t_end = 10.0;
  Integrator method = Integrator::kRk4;
  long sample_every = 1;

  VectorXd w0;
  /// Second iterate (inertial) or initial velocity (continuous). When absent it
  /// defaults to w0 for the inertial scheme and to zero velocity otherwise.
  std::optional<VectorXd> w1;

  SolverConfig solver_config() const;
  IntegrateOptions integrate_options() const;
  VectorXd second_point() const;
};

struct RunPlan {
  int schema_version = kSchemaVersion;
  Problem problem = paper_example_problem();
  std::vector<RunSpec> runs;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
};

/// Parses and validates a plan. Problem invariants, label uniqueness and the
/// writability of the output directory (created if missing) are enforced here.
RunPlan parse_config(const std::filesystem::path& path);
RunPlan parse_config_string(const std::string& text, const std::string& origin = "<string>");

/// Same as parse_config_string but skips the output-directory check.
RunPlan parse_config_string_unchecked(const std::string& text, const std::string& origin = "<string>");

/// Serializes a plan in the same schema; parse_config_string(emit_config(p)) reproduces p.
std::string emit_config(const RunPlan& plan);

/// The bundled reference comparison: four methods at
/// rho = 0.09 (500 iterations) and at rho = 0.0019 (5000 iterations).
std::string paper_plan_text();

}  // namespace gimvi
