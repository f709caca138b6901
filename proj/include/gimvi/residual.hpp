#pragma once

#include <optional>
#include <string>

#include "gimvi/conditions.hpp"
#include "gimvi/problem.hpp"
#include "gimvi/prox.hpp"

namespace gimvi {

template <typename Scalar>
struct ResidualEvaluation {
  Vector<Scalar> value;
  Scalar norm;
  /// <A(w), w - w*> when the problem has a known solution.
  std::optional<Scalar> inner_with_error;
};

/// A(w) = T(w) - P_K^{gamma f}(T(w) - gamma g(w)); its zeros are exactly the solutions.
template <typename Scalar>
Vector<Scalar> residual_value(const ProblemSpec<Scalar>& p, const Vector<Scalar>& w) {
  require_dimension("residual_A", p.dimension, w.size());
  const Vector<Scalar> tw = apply_operator(p.T, w);
  const Vector<Scalar> shifted = tw - p.gamma * apply_operator(p.g, w);
  return tw - prox(shifted, p.gamma, p.f, p.K).point;
}

template <typename Scalar>
ResidualEvaluation<Scalar> residual_A(const ProblemSpec<Scalar>& p, const Vector<Scalar>& w) {
  ResidualEvaluation<Scalar> r;
  r.value = residual_value(p, w);
  r.norm = r.value.norm();
  if (p.known_solution) r.inner_with_error = r.value.dot(w - *p.known_solution);
  return r;
}

template <typename Scalar>
bool is_solution(const ProblemSpec<Scalar>& p, const Vector<Scalar>& w, Scalar tol) {
  return residual_value(p, w).norm() <= tol;
}

/// Checks, at a single point w, the estimates implied by a > 0:
///   <w - w*, A(w)> >= a1 |A(w)|^2
///   a |w - w*| <= |A(w)|
///   <-A(w), w - w*> <= -a |w - w*|^2
///   |A(w)| <= (2 eta + gamma beta) |w - w*|
/// Margins are lhs-vs-rhs slacks; each passes at >= -1e-9 (1 + |w - w*|^2).
template <typename Scalar>
ConditionReport lemma_bounds_check(const ProblemSpec<Scalar>& p, const ConstantsBundle<Scalar>& c,
                                   const Vector<Scalar>& w, const Vector<Scalar>& w_star) {
  require_dimension("lemma_bounds_check: w", p.dimension, w.size());
  require_dimension("lemma_bounds_check: w_star", p.dimension, w_star.size());
  if (!is_solution(p, w_star, Scalar(1e-10)))
    throw InvalidArgument("lemma_bounds_check: w_star is not a solution (|A(w*)| > 1e-10)");

  ConditionReport r;
  r.condition_id = "residual_estimates";
  if (!c.a_positive()) {
    r.applicable = false;
    r.details.push_back({"a > 0", false, double(c.a), "estimates inapplicable: a <= 0"});
    return r.finish();
  }

  const Vector<Scalar> A = residual_value(p, w);
  const Vector<Scalar> e = w - w_star;
  const Scalar inner = e.dot(A);
  const Scalar a_norm = A.norm();
  const Scalar e_norm = e.norm();
  const double tol = 1e-9 * (1.0 + double(e.squaredNorm()));

  auto add = [&](const char* name, Scalar margin) {
    r.details.push_back({name, double(margin) >= -tol, double(margin), {}});
  };
  add("<w-w*, A(w)> >= a1 |A(w)|^2", inner - c.a1 * a_norm * a_norm);
  add("a |w-w*| <= |A(w)|", a_norm - c.a * e_norm);
  add("<-A(w), w-w*> <= -a |w-w*|^2", inner - c.a * e_norm * e_norm);
  add("|A(w)| <= (2 eta + gamma beta) |w-w*|", c.tau * e_norm - a_norm);
  r.finish();
  // Margins are judged against the scaled tolerance rather than zero.
  r.satisfied = true;
  for (const auto& d : r.details) r.satisfied = r.satisfied && d.satisfied;
  return r;
}

}  // namespace gimvi
