#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gimvi/conditions.hpp"
#include "gimvi/rate_fit.hpp"
#include "gimvi/residual.hpp"
#include "gimvi/schedule.hpp"
#include "gimvi/trace.hpp"

namespace gimvi {

/// Position and velocity of the second-order system at time t.
template <typename Scalar>
struct PhaseState {
  Scalar t;
  Vector<Scalar> w;
  Vector<Scalar> v;
};

/// Right-hand side of the first-order reduction: B(t, x, y) = (y, -kappa(t) y - rho(t) A(x)).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> vector_field_B(const ProblemSpec<Scalar>& p,
                                                         const SchedulePair<Scalar>& schedule,
                                                         Scalar t, const Vector<Scalar>& x,
                                                         const Vector<Scalar>& y) {
  require(t >= 0, "vector_field_B: t must be >= 0");
  require_dimension("vector_field_B: velocity", x.size(), y.size());
  const Scalar kappa = schedule.kappa(t);
  const Scalar rho = schedule.rho(t);
  Vector<Scalar> dy = -kappa * y;
  if (rho != 0) dy -= rho * residual_value(p, x);
  return {y, std::move(dy)};
}

enum class Integrator { kRk4, kEuler };

inline const char* to_string(Integrator m) { return m == Integrator::kRk4 ? "rk4" : "euler"; }

struct IntegrateOptions {
  double h = 1e-3;
  double t_end = 1.0;
  Integrator method = Integrator::kRk4;
  /// Record every n-th step; the final state is always recorded.
  long sample_every = 1;
  /// a1 for the energy column; derived from the problem's declared moduli when unset.
  std::optional<double> a1;
};

namespace detail {

template <typename Scalar>
bool all_finite(const Vector<Scalar>& v) {
  return v.allFinite();
}

template <typename Scalar>
std::optional<Scalar> energy_a1(const ProblemSpec<Scalar>& p, const std::optional<double>& given) {
  if (given) return Scalar(*given);
  try {
    return constants_for(p).a1;
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// e^t dXi/dt + (kappa - 1) e^t Xi + n e^t |v|^2 with n = a1 kappa / (2 rho).
template <typename Scalar>
Scalar lyapunov_energy(Scalar t, Scalar xi, Scalar xi_dot, Scalar speed_sq, Scalar kappa,
                       Scalar rho, Scalar a1) {
  using std::exp;
  const Scalar n = a1 * kappa / (2 * rho);
  return exp(t) * (xi_dot + (kappa - 1) * xi + n * speed_sq);
}

/// Fixed-step integration of w'' + kappa(t) w' + rho(t) A(w) = 0 with w(0) = w0, w'(0) = w1.
/// Aborts with a truncated trace on the first non-finite state.
template <typename Scalar>
TrajectoryTrace<Scalar> integrate(const ProblemSpec<Scalar>& p, const SchedulePair<Scalar>& schedule,
                                  const Vector<Scalar>& w0, const Vector<Scalar>& w1,
                                  const IntegrateOptions& opt) {
  require(opt.h > 0, "integrate: step h must be > 0");
  require(opt.t_end > 0, "integrate: t_end must be > 0");
  require(opt.sample_every >= 1, "integrate: sample_every must be >= 1");
  require_dimension("integrate: w0", p.dimension, w0.size());
  require_dimension("integrate: w1", p.dimension, w1.size());

  TrajectoryTrace<Scalar> trace;
  trace.kind = TraceKind::kContinuous;
  trace.problem_id = p.id;
  trace.solver_id = std::string("continuous-") + to_string(opt.method);
  trace.dimension = p.dimension;
  {
    std::ostringstream cfg;
    cfg << "h=" << format_real(opt.h) << " t_end=" << format_real(opt.t_end)
        << " sample_every=" << opt.sample_every;
    trace.config = cfg.str();
  }

  const auto kappa_const = schedule.kappa.constant_value();
  const auto rho_const = schedule.rho.constant_value();
  const auto a1 = detail::energy_a1(p, opt.a1);
  const bool with_energy = kappa_const && rho_const && *rho_const > 0 && a1 &&
                           p.known_solution.has_value();

  auto record = [&](Scalar t, const Vector<Scalar>& w, const Vector<Scalar>& v) {
    TraceRow<Scalar> row;
    row.t = t;
    row.index = long(trace.rows.size());
    row.w_norm = w.norm();
    if (trace.full_vectors()) {
      row.w = w;
      row.v = v;
    } else {
      row.v = Vector<Scalar>::Constant(1, v.norm());
    }
    row.residual_norm = residual_value(p, w).norm();
    if (p.known_solution) {
      const Vector<Scalar> e = w - *p.known_solution;
      row.error = e.norm();
      row.xi = e.squaredNorm() / 2;
      if (with_energy)
        row.energy = lyapunov_energy(t, row.xi, e.dot(v), v.squaredNorm(), *kappa_const,
                                     *rho_const, *a1);
    }
    trace.rows.push_back(std::move(row));
  };

  const Scalar h = Scalar(opt.h);
  const long steps = std::max<long>(1, long(std::ceil(opt.t_end / opt.h - 1e-9)));
  Vector<Scalar> w = w0;
  Vector<Scalar> v = w1;
  record(Scalar(0), w, v);
  trace.stop = StopReason::kHorizonReached;

  for (long k = 0; k < steps; ++k) {
    const Scalar t = Scalar(k) * h;
    const Scalar dt = k + 1 == steps ? Scalar(opt.t_end) - t : h;
    if (opt.method == Integrator::kRk4) {
      const auto [k1w, k1v] = vector_field_B(p, schedule, t, w, v);
      const auto [k2w, k2v] =
          vector_field_B(p, schedule, t + dt / 2, Vector<Scalar>(w + dt / 2 * k1w), Vector<Scalar>(v + dt / 2 * k1v));
      const auto [k3w, k3v] =
          vector_field_B(p, schedule, t + dt / 2, Vector<Scalar>(w + dt / 2 * k2w), Vector<Scalar>(v + dt / 2 * k2v));
      const auto [k4w, k4v] =
          vector_field_B(p, schedule, t + dt, Vector<Scalar>(w + dt * k3w), Vector<Scalar>(v + dt * k3v));
      w += dt / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
      v += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    } else {
      const auto [dw, dv] = vector_field_B(p, schedule, t, w, v);
      w += dt * dw;
      v += dt * dv;
    }
    const Scalar t_next = k + 1 == steps ? Scalar(opt.t_end) : Scalar(k + 1) * h;
    if (!detail::all_finite(w) || !detail::all_finite(v)) {
      trace.stop = StopReason::kNonFinite;
      std::ostringstream msg;
      msg << "non-finite state at t=" << format_real(t_next) << "; last finite residual "
          << format_real(trace.rows.back().residual_norm) << " at t="
          << format_real(trace.rows.back().t);
      trace.diagnostic = msg.str();
      break;
    }
    if ((k + 1) % opt.sample_every == 0 || k + 1 == steps) record(t_next, w, v);
  }
  return trace;
}

struct LyapunovOptions {
  /// Integrator step; inferred as the smallest row spacing when unset.
  std::optional<double> h;
  /// Multiplier C in tol_E = C h^2 (1 + max Xi) per step.
  double tolerance_factor = 10.0;
};

struct LyapunovReport {
  /// Xi nonincreasing over the trailing half of the trace.
  bool xi_monotone_tail = true;
  bool energy_nonincreasing = true;
  /// Largest energy increase beyond the allowance between consecutive rows (<= 0 when none).
  double worst_increase = -std::numeric_limits<double>::infinity();
  double tol_per_step = 0;
  std::vector<double> xi;
  std::vector<double> xi_dot;
  std::vector<double> energy;
};

/// Energy t -> e^t Xi' + (kappa(t) - 1) e^t Xi + n(t) e^t |w'|^2 along a recorded
/// trajectory, with Xi' from finite differences of the Xi column.
template <typename Scalar>
LyapunovReport lyapunov_monitor(const TrajectoryTrace<Scalar>& trace, const ConstantsBundle<Scalar>& c,
                                const SchedulePair<Scalar>& schedule, const LyapunovOptions& opt = {}) {
  require(trace.rows.size() >= 3, "lyapunov_monitor: trace needs at least 3 rows");
  const std::size_t n = trace.rows.size();
  std::vector<double> t(n), xi(n), speed(n);
  double max_xi = 0;
  double min_dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = trace.rows[i];
    require(!std::isnan(double(r.xi)), "lyapunov_monitor: trace has no Xi column (unknown solution)");
    t[i] = double(r.t);
    xi[i] = double(r.xi);
    speed[i] = double(r.v.squaredNorm());
    max_xi = std::max(max_xi, xi[i]);
    if (i > 0) {
      require(t[i] > t[i - 1], "lyapunov_monitor: times must be strictly increasing");
      min_dt = std::min(min_dt, t[i] - t[i - 1]);
    }
  }
  const double h = opt.h.value_or(min_dt);

  LyapunovReport rep;
  rep.xi = xi;
  rep.xi_dot = finite_difference<double>(t, xi);
  rep.energy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double kappa = double(schedule.kappa(Scalar(t[i])));
    const double rho = double(schedule.rho(Scalar(t[i])));
    rep.energy[i] = lyapunov_energy(t[i], xi[i], rep.xi_dot[i], speed[i], kappa, rho, double(c.a1));
  }
  rep.tol_per_step = opt.tolerance_factor * h * h * (1.0 + max_xi);
  for (std::size_t i = 1; i < n; ++i) {
    const double steps = std::max(1.0, std::round((t[i] - t[i - 1]) / h));
    const double excess = rep.energy[i] - rep.energy[i - 1] - steps * rep.tol_per_step;
    rep.worst_increase = std::max(rep.worst_increase, excess);
    if (excess > 0) rep.energy_nonincreasing = false;
  }
  for (std::size_t i = n / 2 + 1; i < n; ++i)
    if (xi[i] > xi[i - 1]) rep.xi_monotone_tail = false;
  return rep;
}

struct ExponentialFit {
  /// Slope of log|w(t) - w*| against t; negative means decay.
  double rate = 0;
  double intercept = 0;
  double r_squared = 1;
  std::size_t rows_used = 0;
};

namespace detail {

template <typename Scalar>
std::vector<double> row_errors(const TrajectoryTrace<Scalar>& trace, const Vector<Scalar>& w_star) {
  std::vector<double> err;
  err.reserve(trace.rows.size());
  for (const auto& r : trace.rows) {
    if (r.w.size() == w_star.size()) {
      err.push_back(double((r.w - w_star).norm()));
    } else {
      err.push_back(double(r.error));
    }
  }
  return err;
}

/// Rows before the first exact zero error.
inline std::size_t positive_prefix(const std::vector<double>& err) {
  std::size_t end = 0;
  while (end < err.size() && err[end] > 0) ++end;
  return end;
}

}  // namespace detail

/// Least-squares line through (t, log|w(t) - w*|) over the trailing half of the
/// trace (or of its prefix before the error first hits zero).
template <typename Scalar>
ExponentialFit fit_exponential_rate(const TrajectoryTrace<Scalar>& trace, const Vector<Scalar>& w_star) {
  const std::vector<double> err = detail::row_errors(trace, w_star);
  const std::size_t end = detail::positive_prefix(err);
  require(end >= 10, "fit_exponential_rate: need at least 10 rows with positive error");
  const std::size_t start = end / 2;
  std::vector<double> x, y;
  for (std::size_t i = start; i < end; ++i) {
    x.push_back(double(trace.rows[i].t));
    y.push_back(std::log(err[i]));
  }
  const LineFit line = fit_line(x, y);
  return {line.slope, line.intercept, line.r_squared, end - start};
}

}  // namespace gimvi
