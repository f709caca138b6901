#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "gimvi/types.hpp"

namespace gimvi {

enum class StopReason { kConverged, kMaxIterations, kHorizonReached, kDiverged, kNonFinite };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kConverged: return "converged";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kHorizonReached: return "horizon_reached";
    case StopReason::kDiverged: return "diverged";
    case StopReason::kNonFinite: return "non_finite";
  }
  return "unknown";
}

inline bool is_abort(StopReason r) {
  return r == StopReason::kDiverged || r == StopReason::kNonFinite;
}

/// Vectors are kept in full only up to this dimension; above it rows carry norms.
inline constexpr Eigen::Index kFullVectorDimension = 16;

template <typename Scalar>
struct TraceRow {
  /// Iteration index for discrete runs; 0 for continuous ones.
  long index = 0;
  /// Simulation time for continuous runs; equals `index` for discrete ones.
  Scalar t = 0;
  Vector<Scalar> w;
  /// Velocity for continuous runs, previous iterate for discrete ones.
  Vector<Scalar> v;
  Scalar w_norm = 0;
  Scalar residual_norm = 0;
  /// |w - w*| (or its square); NaN when no solution is known.
  Scalar error = std::numeric_limits<Scalar>::quiet_NaN();
  /// 0.5 |w - w*|^2; NaN when no solution is known.
  Scalar xi = std::numeric_limits<Scalar>::quiet_NaN();
  /// e^t dXi/dt + (kappa - 1) e^t Xi + n e^t |v|^2 for constant schedules; NaN otherwise.
  Scalar energy = std::numeric_limits<Scalar>::quiet_NaN();
};

enum class TraceKind { kContinuous, kDiscrete };

template <typename Scalar>
struct TrajectoryTrace {
  TraceKind kind = TraceKind::kDiscrete;
  std::string problem_id;
  std::string solver_id;
  std::string config;
  Eigen::Index dimension = 0;
  std::vector<TraceRow<Scalar>> rows;
  StopReason stop = StopReason::kMaxIterations;
  std::string diagnostic;

  bool full_vectors() const { return dimension <= kFullVectorDimension; }
  bool aborted() const { return is_abort(stop); }
  const TraceRow<Scalar>& last() const { return rows.back(); }
};

using Trace = TrajectoryTrace<double>;

/// Shortest decimal that parses back to the same value.
template <typename Scalar>
std::string format_real(Scalar value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) return std::to_string(value);
  return std::string(buf, res.ptr);
}

template <typename Scalar>
void write_trace_footer(std::ostream& os, const TrajectoryTrace<Scalar>& trace) {
  os << "# stop: " << to_string(trace.stop);
  if (!trace.diagnostic.empty()) os << "; " << trace.diagnostic;
  os << '\n';
}

/// Columns: t, w[0..d), v[0..d), residual_norm, error, xi, energy.
template <typename Scalar>
void write_continuous_csv(std::ostream& os, const TrajectoryTrace<Scalar>& trace) {
  const bool full = trace.full_vectors();
  os << 't';
  if (full) {
    for (Eigen::Index i = 0; i < trace.dimension; ++i) os << ",w" << i;
    for (Eigen::Index i = 0; i < trace.dimension; ++i) os << ",v" << i;
  } else {
    os << ",|w|,|v|";
  }
  os << ",residual_norm,error,xi,energy\n";
  for (const auto& r : trace.rows) {
    os << format_real(r.t);
    if (full) {
      for (Eigen::Index i = 0; i < r.w.size(); ++i) os << ',' << format_real(r.w(i));
      for (Eigen::Index i = 0; i < r.v.size(); ++i) os << ',' << format_real(r.v(i));
    } else {
      os << ',' << format_real(r.w_norm) << ',' << format_real(r.v.norm());
    }
    os << ',' << format_real(r.residual_norm) << ',' << format_real(r.error) << ','
       << format_real(r.xi) << ',' << format_real(r.energy) << '\n';
  }
  write_trace_footer(os, trace);
}

/// Columns: n, w[0..d) (or |w| above the full-vector dimension), residual_norm, error.
template <typename Scalar>
void write_discrete_csv(std::ostream& os, const TrajectoryTrace<Scalar>& trace) {
  const bool full = trace.full_vectors();
  os << 'n';
  if (full) {
    for (Eigen::Index i = 0; i < trace.dimension; ++i) os << ",w" << i;
  } else {
    os << ",|w|";
  }
  os << ",residual_norm,error\n";
  for (const auto& r : trace.rows) {
    os << r.index;
    if (full) {
      for (Eigen::Index i = 0; i < r.w.size(); ++i) os << ',' << format_real(r.w(i));
    } else {
      os << ',' << format_real(r.w_norm);
    }
    os << ',' << format_real(r.residual_norm) << ',' << format_real(r.error) << '\n';
  }
  write_trace_footer(os, trace);
}

template <typename Scalar>
void write_csv(std::ostream& os, const TrajectoryTrace<Scalar>& trace) {
  if (trace.kind == TraceKind::kContinuous) {
    write_continuous_csv(os, trace);
  } else {
    write_discrete_csv(os, trace);
  }
}

}  // namespace gimvi
