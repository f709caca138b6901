#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "gimvi/problem.hpp"
#include "gimvi/types.hpp"

namespace gimvi {

enum class ProxMethod { kClosedForm, kNumeric };

template <typename Scalar>
struct ProxResult {
  Vector<Scalar> point;
  /// gamma*f(v) + 0.5*|x - v|^2 at `point`.
  Scalar objective_value;
  ProxMethod method;
};

template <typename Scalar>
Scalar prox_objective(const Vector<Scalar>& x, const Vector<Scalar>& v, Scalar gamma,
                      const ConvexFunctionSpec<Scalar>& f) {
  return gamma * f(v) + (x - v).squaredNorm() / 2;
}

namespace detail {

template <typename Scalar>
void check_prox_inputs(const Vector<Scalar>& x, Scalar gamma, const ConvexFunctionSpec<Scalar>& f,
                       const FeasibleSetSpec<Scalar>& K) {
  require(gamma > 0, "prox: gamma must be > 0");
  require_dimension("prox: feasible set", x.size(), K.dimension());
  if (f.dimension() >= 0) require_dimension("prox: convex function", x.size(), f.dimension());
}

}  // namespace detail

/// Generalized f-projection argmin_{v in K} gamma*f(v) + 0.5*|x - v|^2.
///
/// Closed form for the catalog (separable quadratic or zero f over a box):
/// v_i = clamp((x_i - gamma*lin_i) / (1 + 2*gamma*quad_i), lower_i, upper_i).
template <typename Scalar>
ProxResult<Scalar> prox(const Vector<Scalar>& x, Scalar gamma, const ConvexFunctionSpec<Scalar>& f,
                        const FeasibleSetSpec<Scalar>& K) {
  detail::check_prox_inputs(x, gamma, f, K);
  Vector<Scalar> v;
  if (const auto* q = f.quadratic()) {
    v = ((x - gamma * q->lin).array() / (Scalar(1) + 2 * gamma * q->quad.array())).matrix();
  } else {
    v = x;
  }
  v = K.project(v);
  const Scalar value = prox_objective(x, v, gamma, f);
  return {std::move(v), value, ProxMethod::kClosedForm};
}

/// Independent numerical prox: per-coordinate golden-section search of the
/// strictly convex 1-D objective on [max(lower, x_i - R), min(upper, x_i + R)],
/// R = |x| + gamma*(1 + |lin|) + 1, stopped once the bracket is narrower than `tol`.
///
/// Function values are compared through increments relative to the bracket
/// midpoint so that the comparison does not lose digits to the objective's
/// magnitude.
template <typename Scalar>
ProxResult<Scalar> prox_numeric_oracle(const Vector<Scalar>& x, Scalar gamma,
                                       const ConvexFunctionSpec<Scalar>& f,
                                       const FeasibleSetSpec<Scalar>& K, Scalar tol) {
  detail::check_prox_inputs(x, gamma, f, K);
  require(tol > 0, "prox_numeric_oracle: tol must be > 0");
  using std::max;
  using std::min;
  using std::sqrt;

  const auto* q = f.quadratic();
  const Scalar lin_norm = q ? q->lin.norm() : Scalar(0);
  const Scalar radius = x.norm() + gamma * (1 + lin_norm) + 1;
  const Scalar inv_phi = (sqrt(Scalar(5)) - 1) / 2;

  Vector<Scalar> v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar quad = q ? q->quad(i) : Scalar(0);
    const Scalar lin = q ? q->lin(i) : Scalar(0);
    const Scalar xi = x(i);
    // phi(r + s) - phi(r) for phi(v) = gamma*(quad v^2 + lin v) + 0.5 (x_i - v)^2.
    auto increment = [&](Scalar r, Scalar s) {
      return s * (gamma * (quad * (2 * r + s) + lin) + (r - xi) + s / 2);
    };

    Scalar lo = max(K.lower()(i), xi - radius);
    Scalar hi = min(K.upper()(i), xi + radius);
    if (lo > hi) {
      // The box lies entirely on one side of the search window.
      v(i) = K.lower()(i) > xi + radius ? K.lower()(i) : K.upper()(i);
      continue;
    }
    for (int iter = 0; iter < 500 && hi - lo > tol; ++iter) {
      const Scalar mid = (lo + hi) / 2;
      const Scalar c = hi - inv_phi * (hi - lo);
      const Scalar d = lo + inv_phi * (hi - lo);
      if (increment(mid, c - mid) < increment(mid, d - mid)) {
        hi = d;
      } else {
        lo = c;
      }
    }
    v(i) = (lo + hi) / 2;
  }
  v = K.project(v);
  const Scalar value = prox_objective(x, v, gamma, f);
  return {std::move(v), value, ProxMethod::kNumeric};
}

template <typename Scalar>
struct VariationalCheck {
  bool holds;
  /// Minimum over probes of <candidate - x, v - candidate> + gamma f(v) - gamma f(candidate).
  Scalar worst;
};

/// candidate = prox(x) iff <candidate - x, v - candidate> + gamma f(v) - gamma f(candidate) >= 0
/// for every v in K; evaluated over the given probes.
template <typename Scalar>
VariationalCheck<Scalar> check_variational_characterization(
    const Vector<Scalar>& x, const Vector<Scalar>& candidate, Scalar gamma,
    const ConvexFunctionSpec<Scalar>& f, const FeasibleSetSpec<Scalar>& K,
    std::span<const Vector<Scalar>> probes, Scalar tol) {
  detail::check_prox_inputs(x, gamma, f, K);
  require_dimension("variational check: candidate", x.size(), candidate.size());
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  const Scalar f_candidate = f(candidate);
  for (const auto& probe : probes) {
    require_dimension("variational check: probe", x.size(), probe.size());
    if (!K.contains(probe)) throw InvalidArgument("variational check: probe lies outside K");
    const Scalar lhs = (candidate - x).dot(probe - candidate) + gamma * f(probe) - gamma * f_candidate;
    worst = std::min(worst, lhs);
  }
  return {worst >= -tol, worst};
}

}  // namespace gimvi
