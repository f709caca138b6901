#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gimvi/rate_fit.hpp"
#include "gimvi/residual.hpp"
#include "gimvi/trace.hpp"

namespace gimvi {

enum class ErrorMetric { kErrorNorm, kErrorNormSquared };

/// How `max_iters` is counted.
///   kUpdates:      max_iters applications of the update rule.
///   kIterateIndex: stop at iterate w_{max_iters}; the inertial scheme starts
///                  from the pair (w0, w1), so it performs max_iters - 1 updates
///                  and its rows are labelled by iterate index starting at 1.
enum class IterationCounting { kUpdates, kIterateIndex };

inline const char* to_string(ErrorMetric m) {
  return m == ErrorMetric::kErrorNorm ? "error_norm" : "error_norm_squared";
}
inline const char* to_string(IterationCounting c) {
  return c == IterationCounting::kUpdates ? "updates" : "iterate_index";
}

struct SolverConfig {
  double kappa = 1.0;
  double rho = 0.1;
  long max_iters = 1000;
  /// Stop once |A(w_n)| <= tol.
  double tol = 0.0;
  ErrorMetric error_metric = ErrorMetric::kErrorNorm;
  long record_every = 1;
  IterationCounting counting = IterationCounting::kUpdates;

  void validate() const {
    require(max_iters >= 1, "solver config: max_iters must be >= 1");
    require(tol >= 0, "solver config: tol must be >= 0");
    require(record_every >= 1, "solver config: record_every must be >= 1");
  }
};

/// Error growth factor (relative to the initial error) treated as divergence.
inline constexpr double kDivergenceFactor = 1e12;

template <typename Scalar>
struct InertialStep {
  Vector<Scalar> u;
  Vector<Scalar> w_next;
};

/// u_n = w_n + (1 - kappa)(w_n - w_{n-1}),  w_{n+1} = u_n - rho A(w_n).
/// A is evaluated at w_n, not at the extrapolated point.
template <typename Scalar>
InertialStep<Scalar> step_inertial(const ProblemSpec<Scalar>& p, Scalar kappa, Scalar rho,
                                   const Vector<Scalar>& w_n, const Vector<Scalar>& w_prev) {
  require_dimension("step_inertial: w_prev", w_n.size(), w_prev.size());
  InertialStep<Scalar> s;
  s.u = w_n + (1 - kappa) * (w_n - w_prev);
  s.w_next = s.u - rho * residual_value(p, w_n);
  return s;
}

namespace detail {

template <typename Scalar>
Scalar metric_error(const ProblemSpec<Scalar>& p, const Vector<Scalar>& w, ErrorMetric metric) {
  if (!p.known_solution) return std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar e = (w - *p.known_solution).norm();
  return metric == ErrorMetric::kErrorNorm ? e : e * e;
}

/// Shared driver: `advance(w, w_prev, A)` returns the next iterate.
template <typename Scalar, typename Advance>
TrajectoryTrace<Scalar> run_discrete(const ProblemSpec<Scalar>& p, const SolverConfig& cfg,
                                     const Vector<Scalar>& w_start, const Vector<Scalar>& w_before,
                                     long updates, long index_offset, std::string solver_id,
                                     Advance advance) {
  TrajectoryTrace<Scalar> trace;
  trace.kind = TraceKind::kDiscrete;
  trace.problem_id = p.id;
  trace.solver_id = std::move(solver_id);
  trace.dimension = p.dimension;
  {
    std::ostringstream c;
    c << "kappa=" << format_real(cfg.kappa) << " rho=" << format_real(cfg.rho)
      << " max_iters=" << cfg.max_iters << " tol=" << format_real(cfg.tol)
      << " metric=" << to_string(cfg.error_metric) << " counting=" << to_string(cfg.counting);
    trace.config = c.str();
  }

  Vector<Scalar> w = w_start;
  Vector<Scalar> w_prev = w_before;
  Vector<Scalar> a = residual_value(p, w);
  // Divergence is judged on the error when w* is known, else on the residual.
  auto size_of = [&](const Vector<Scalar>& x, const Vector<Scalar>& ax) -> double {
    return p.known_solution ? double((x - *p.known_solution).norm()) : double(ax.norm());
  };
  const double initial_size = size_of(w, a);

  auto record = [&](long k) {
    TraceRow<Scalar> row;
    row.index = k + index_offset;
    row.t = Scalar(row.index);
    row.w_norm = w.norm();
    if (trace.full_vectors()) {
      row.w = w;
      row.v = w_prev;
    }
    row.residual_norm = a.norm();
    row.error = metric_error(p, w, cfg.error_metric);
    if (p.known_solution) row.xi = (w - *p.known_solution).squaredNorm() / 2;
    trace.rows.push_back(std::move(row));
  };

  for (long k = 0;; ++k) {
    const bool converged = a.norm() <= Scalar(cfg.tol);
    const bool exhausted = k >= updates;
    if (converged || exhausted) {
      record(k);
      trace.stop = converged ? StopReason::kConverged : StopReason::kMaxIterations;
      break;
    }
    if (k % cfg.record_every == 0) record(k);

    Vector<Scalar> next = advance(w, w_prev, a);
    if (!next.allFinite()) {
      if (trace.rows.empty() || trace.rows.back().index != k + index_offset) record(k);
      trace.stop = StopReason::kNonFinite;
      std::ostringstream msg;
      msg << "non-finite iterate at n=" << (k + 1 + index_offset) << "; last finite residual "
          << format_real(a.norm());
      trace.diagnostic = msg.str();
      break;
    }
    w_prev = std::move(w);
    w = std::move(next);
    a = residual_value(p, w);
    if (!a.allFinite()) {
      record(k + 1);
      trace.stop = StopReason::kNonFinite;
      trace.diagnostic = "non-finite residual at n=" + std::to_string(k + 1 + index_offset);
      break;
    }
    const double size = size_of(w, a);
    if (initial_size > 0 && size > kDivergenceFactor * initial_size) {
      record(k + 1);
      trace.stop = StopReason::kDiverged;
      std::ostringstream msg;
      msg << "diverged at n=" << (k + 1 + index_offset) << " (growth beyond "
          << format_real(kDivergenceFactor) << "x initial); last finite residual "
          << format_real(a.norm());
      trace.diagnostic = msg.str();
      break;
    }
  }
  return trace;
}

}  // namespace detail

/// Inertial projection iteration started from (w0, w1); stops on |A(w_n)| <= tol or
/// after the iteration budget. The terminal row is always recorded.
template <typename Scalar>
TrajectoryTrace<Scalar> solve_inertial(const ProblemSpec<Scalar>& p, const SolverConfig& cfg,
                                       const Vector<Scalar>& w0, const Vector<Scalar>& w1) {
  cfg.validate();
  require_dimension("solve_inertial: w0", p.dimension, w0.size());
  require_dimension("solve_inertial: w1", p.dimension, w1.size());
  const bool by_index = cfg.counting == IterationCounting::kIterateIndex;
  const Scalar kappa = Scalar(cfg.kappa);
  const Scalar rho = Scalar(cfg.rho);
  return detail::run_discrete<Scalar>(
      p, cfg, w1, w0, by_index ? cfg.max_iters - 1 : cfg.max_iters, by_index ? 1 : 0, "inertial",
      [&](const Vector<Scalar>& w, const Vector<Scalar>& w_prev, const Vector<Scalar>& a) {
        return Vector<Scalar>(w + (1 - kappa) * (w - w_prev) - rho * a);
      });
}

/// Non-inertial baseline w_{n+1} = w_n - rho A(w_n); cfg.kappa is ignored.
template <typename Scalar>
TrajectoryTrace<Scalar> solve_projection(const ProblemSpec<Scalar>& p, const SolverConfig& cfg,
                                         const Vector<Scalar>& w0) {
  cfg.validate();
  require_dimension("solve_projection: w0", p.dimension, w0.size());
  const Scalar rho = Scalar(cfg.rho);
  return detail::run_discrete<Scalar>(
      p, cfg, w0, w0, cfg.max_iters, 0, "projection",
      [&](const Vector<Scalar>& w, const Vector<Scalar>&, const Vector<Scalar>& a) {
        return Vector<Scalar>(w - rho * a);
      });
}

/// Forward, backward and second differences of a sequence w_0, ..., w_{m-1}:
///   delta(n) = w_{n+1} - w_n,  nabla(n) = w_n - w_{n-1},  delta_nabla(n) = w_{n+1} - 2 w_n + w_{n-1}.
template <typename Scalar>
class DifferenceOps {
 public:
  explicit DifferenceOps(std::vector<Vector<Scalar>> seq) : seq_(std::move(seq)) {
    require(seq_.size() >= 3, "difference_ops: need at least 3 terms");
  }

  std::size_t size() const { return seq_.size(); }
  const Vector<Scalar>& operator[](std::size_t n) const { return seq_.at(n); }

  /// Valid for n in [0, m-2].
  Vector<Scalar> delta(std::size_t n) const {
    require(n + 1 < seq_.size(), "difference_ops: delta index out of range");
    return seq_[n + 1] - seq_[n];
  }
  /// Valid for n in [1, m-1].
  Vector<Scalar> nabla(std::size_t n) const {
    require(n >= 1 && n < seq_.size(), "difference_ops: nabla index out of range");
    return seq_[n] - seq_[n - 1];
  }
  /// Valid for n in [1, m-2].
  Vector<Scalar> delta_nabla(std::size_t n) const {
    require(n >= 1 && n + 1 < seq_.size(), "difference_ops: delta_nabla index out of range");
    return seq_[n + 1] - 2 * seq_[n] + seq_[n - 1];
  }

  std::vector<Vector<Scalar>> deltas() const {
    std::vector<Vector<Scalar>> out;
    for (std::size_t n = 0; n + 1 < seq_.size(); ++n) out.push_back(delta(n));
    return out;
  }
  std::vector<Vector<Scalar>> nablas() const {
    std::vector<Vector<Scalar>> out;
    for (std::size_t n = 1; n < seq_.size(); ++n) out.push_back(nabla(n));
    return out;
  }
  std::vector<Vector<Scalar>> delta_nablas() const {
    std::vector<Vector<Scalar>> out;
    for (std::size_t n = 1; n + 1 < seq_.size(); ++n) out.push_back(delta_nabla(n));
    return out;
  }

 private:
  std::vector<Vector<Scalar>> seq_;
};

template <typename Scalar>
DifferenceOps<Scalar> difference_ops(std::vector<Vector<Scalar>> seq) {
  return DifferenceOps<Scalar>(std::move(seq));
}

/// Largest root modulus of x^2 - (2 - kappa - rho*slope) x + (1 - kappa): the
/// asymptotic per-iteration rate of the inertial scheme when A is locally slope*I.
inline double characteristic_root_rate(double kappa, double rho, double slope) {
  const double b = 2.0 - kappa - rho * slope;
  const double c = 1.0 - kappa;
  const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * c));
  const std::complex<double> r1 = (b + disc) / 2.0;
  const std::complex<double> r2 = (b - disc) / 2.0;
  return std::max(std::abs(r1), std::abs(r2));
}

/// Symmetric difference quotient of a 1-D residual at w*.
template <typename Scalar>
double local_residual_slope(const ProblemSpec<Scalar>& p, const Vector<Scalar>& w_star,
                            double delta = 1e-6) {
  require(p.dimension == 1, "local_residual_slope: only defined for 1-D problems");
  Vector<Scalar> plus = w_star, minus = w_star;
  plus(0) += Scalar(delta);
  minus(0) -= Scalar(delta);
  return double((residual_value(p, plus)(0) - residual_value(p, minus)(0)) / (2 * delta));
}

struct LinearRateFit {
  /// e^s for the least-squares slope s of log(error) against the iteration index.
  double rate = 0;
  double slope = 0;
  double r_squared = 1;
  std::size_t tail_start = 0;
  /// Characteristic-root prediction, when requested.
  std::optional<double> predicted_rate;
};

struct RatePrediction {
  double kappa;
  double rho;
  double slope;
};

/// Fits the per-iteration contraction over the trailing half of the trace (or of
/// its prefix before the error first hits zero).
template <typename Scalar>
LinearRateFit fit_linear_rate(const TrajectoryTrace<Scalar>& trace, const Vector<Scalar>& w_star,
                              std::optional<RatePrediction> prediction = std::nullopt) {
  std::vector<double> err;
  for (const auto& r : trace.rows) {
    err.push_back(r.w.size() == w_star.size() ? double((r.w - w_star).norm()) : double(r.error));
  }
  std::size_t end = 0;
  while (end < err.size() && err[end] > 0) ++end;
  require(end >= 20, "fit_linear_rate: need at least 20 rows with positive error");
  const std::size_t start = end / 2;
  std::vector<double> x, y;
  for (std::size_t i = start; i < end; ++i) {
    x.push_back(double(trace.rows[i].index));
    y.push_back(std::log(err[i]));
  }
  const LineFit line = fit_line(x, y);
  LinearRateFit fit;
  fit.slope = line.slope;
  fit.rate = std::exp(line.slope);
  fit.r_squared = line.r_squared;
  fit.tail_start = start;
  if (prediction)
    fit.predicted_rate = characteristic_root_rate(prediction->kappa, prediction->rho, prediction->slope);
  return fit;
}

}  // namespace gimvi
