#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gimvi/problem.hpp"
#include "gimvi/schedule.hpp"
#include "gimvi/types.hpp"

namespace gimvi {

/// How the g-Lipschitz term enters `a`. kVerbatim (the default) uses
/// gamma^2*beta/2; kSquared uses gamma^2*beta^2/2, which is what a Lipschitz
/// argument would produce.
enum class BetaTerm { kVerbatim, kSquared };

template <typename Scalar>
struct ConstantsBundle {
  Scalar eta{0};
  Scalar beta{0};
  Scalar lambda{0};
  Scalar alpha{0};
  Scalar zeta{0};
  Scalar gamma{1};
  Scalar a{0};
  Scalar a1{0};
  Scalar tau{0};
  BetaTerm beta_term{BetaTerm::kVerbatim};

  bool a_positive() const { return a > 0; }
};

using Constants = ConstantsBundle<double>;

/// a = lambda + gamma*alpha - eta^2/2 - gamma^2*beta/2 - 1/2, tau = 2*eta + gamma*beta,
/// a1 = a / tau^2. A non-positive `a` is reported through a_positive(), not rejected.
template <typename Scalar>
ConstantsBundle<Scalar> derive_constants(Scalar eta, Scalar beta, Scalar lambda, Scalar alpha,
                                         Scalar zeta, Scalar gamma,
                                         BetaTerm beta_term = BetaTerm::kVerbatim) {
  require(gamma > 0, "derive_constants: gamma must be > 0");
  require(eta >= 0 && beta >= 0 && lambda >= 0 && alpha >= 0 && zeta >= 0,
          "derive_constants: moduli must be >= 0");
  ConstantsBundle<Scalar> c;
  c.eta = eta;
  c.beta = beta;
  c.lambda = lambda;
  c.alpha = alpha;
  c.zeta = zeta;
  c.gamma = gamma;
  c.beta_term = beta_term;
  const Scalar beta_power = beta_term == BetaTerm::kVerbatim ? beta : beta * beta;
  c.a = lambda + gamma * alpha - eta * eta / 2 - gamma * gamma * beta_power / 2 - Scalar(1) / 2;
  c.tau = 2 * eta + gamma * beta;
  c.a1 = c.a / (c.tau * c.tau);
  return c;
}

/// Constants from a problem's declared moduli (T: eta, lambda; g: beta, zeta; pair: alpha).
template <typename Scalar>
ConstantsBundle<Scalar> constants_for(const ProblemSpec<Scalar>& p,
                                      BetaTerm beta_term = BetaTerm::kVerbatim) {
  const auto& t = p.T.moduli();
  const auto& g = p.g.moduli();
  if (!p.coupled_monotone)
    throw InvalidArgument("problem '" + p.id + "' does not declare a coupled monotonicity modulus");
  return derive_constants(t.lipschitz, g.lipschitz, t.strong_monotone, *p.coupled_monotone,
                          g.strong_monotone, p.gamma, beta_term);
}

struct SubCondition {
  std::string name;
  bool satisfied;
  double margin;
  std::string detail;
};

struct ConditionReport {
  std::string condition_id;
  bool satisfied{false};
  /// Smallest sub-margin; positive means satisfied.
  double margin{0};
  bool applicable{true};
  std::vector<SubCondition> details;

  void add(std::string name, double margin, bool strict, std::string detail = {}) {
    const bool ok = strict ? margin > kStrictTolerance : margin >= 0;
    details.push_back({std::move(name), ok, margin, std::move(detail)});
  }

  /// Recomputes the aggregate fields from the sub-conditions.
  ConditionReport& finish() {
    satisfied = applicable && !details.empty();
    margin = std::numeric_limits<double>::infinity();
    for (const auto& d : details) {
      satisfied = satisfied && d.satisfied;
      margin = std::min(margin, d.margin);
    }
    if (details.empty()) margin = std::numeric_limits<double>::quiet_NaN();
    return *this;
  }

  const SubCondition* find(const std::string& name) const {
    for (const auto& d : details)
      if (d.name == name) return &d;
    return nullptr;
  }
};

inline std::ostream& operator<<(std::ostream& os, const ConditionReport& r) {
  os << r.condition_id << ": "
     << (!r.applicable ? "INAPPLICABLE" : (r.satisfied ? "satisfied" : "NOT satisfied"))
     << " (margin " << r.margin << ")\n";
  for (const auto& d : r.details) {
    os << "  [" << (d.satisfied ? "ok" : "FAIL") << "] " << d.name << "  margin=" << d.margin;
    if (!d.detail.empty()) os << "  " << d.detail;
    os << '\n';
  }
  return os;
}

/// sqrt(eta^2 + beta^2 - 2 alpha) + sqrt(1 - 2 zeta + beta^2) < 1, with both
/// radicands required non-negative.
template <typename Scalar>
ConditionReport check_existence_uniqueness(const ConstantsBundle<Scalar>& c) {
  ConditionReport r;
  r.condition_id = "existence_uniqueness";
  const double first = double(c.eta * c.eta + c.beta * c.beta - 2 * c.alpha);
  const double second = double(1 - 2 * c.zeta + c.beta * c.beta);
  r.add("alpha < (beta^2 + eta^2)/2", first, true,
        first < 0 ? "negative radicand eta^2 + beta^2 - 2 alpha" : "");
  r.add("zeta < (1 + beta^2)/2", second, true,
        second < 0 ? "negative radicand 1 - 2 zeta + beta^2" : "");
  if (first >= 0 && second >= 0) {
    const double sum = std::sqrt(first) + std::sqrt(second);
    r.add("sqrt(eta^2+beta^2-2alpha) + sqrt(1-2zeta+beta^2) < 1", 1.0 - sum, true,
          "sum = " + std::to_string(sum));
  } else {
    r.add("sqrt(eta^2+beta^2-2alpha) + sqrt(1-2zeta+beta^2) < 1",
          -std::numeric_limits<double>::infinity(), true, "undefined: negative radicand");
  }
  return r.finish();
}

/// Upper bound on rho from (A2): a1 * min{(1-kappa)/4, kappa^2/(4-kappa)}.
template <typename Scalar>
Scalar discrete_rho_bound(Scalar kappa, const ConstantsBundle<Scalar>& c) {
  using std::min;
  return c.a1 * min((1 - kappa) / 4, kappa * kappa / (4 - kappa));
}

/// (A1) 0 < kappa < 1 and (A2) 0 < rho < a1 * min{(1-kappa)/4, kappa^2/(4-kappa)}.
template <typename Scalar>
ConditionReport check_discrete_conditions(Scalar kappa, Scalar rho,
                                          const ConstantsBundle<Scalar>& c) {
  ConditionReport r;
  r.condition_id = "discrete_linear_convergence";
  if (!c.a_positive()) {
    r.applicable = false;
    r.details.push_back({"a > 0", false, double(c.a), "conditions inapplicable: a <= 0"});
    return r.finish();
  }
  r.add("A1: kappa > 0", double(kappa), true);
  r.add("A1: kappa < 1", double(1 - kappa), true);
  r.add("A2: rho > 0", double(rho), true);
  const Scalar bound = discrete_rho_bound(kappa, c);
  r.add("A2: rho < a1*min{(1-kappa)/4, kappa^2/(4-kappa)}", double(bound - rho), true,
        "bound = " + std::to_string(double(bound)));
  if (rho > 0) {
    const double implied = double(c.a1 * (1 - kappa) / rho);
    r.add("implied: a1(1-kappa)/rho >= 4", implied - 4.0, false,
          "value = " + std::to_string(implied));
  }
  return r.finish();
}

struct EpsilonSearch {
  std::optional<double> epsilon;
  std::string reason;
};

struct EpsilonGrid {
  double initial_step = 1e-4;
  double min_step = 1e-14;
  /// Points scanned per refinement level.
  long max_points = 10000;
};

/// The three strict inequalities on epsilon used by the linear-rate argument.
template <typename Scalar>
bool epsilon_admissible(Scalar eps, Scalar kappa, Scalar rho, const ConstantsBundle<Scalar>& c) {
  const Scalar c1 = c.a1 * kappa / rho + 1;
  const Scalar first = eps * (kappa * c1 - 4) - (eps - 1) * c1;
  const Scalar second = eps * c.a * rho - kappa * eps * (eps - 1) + (eps - 1) * (eps - 1);
  const Scalar third = 1 - eps * eps * (1 - kappa);
  return first > 0 && second > 0 && third > 0;
}

/// Smallest grid point eps in (1, 1/sqrt(1-kappa)) admissible for the linear rate.
/// The grid 1 + k*step is scanned with step = initial_step, then refined by 10x
/// down to min_step while nothing is found.
template <typename Scalar>
EpsilonSearch find_epsilon(Scalar kappa, Scalar rho, const ConstantsBundle<Scalar>& c,
                           const EpsilonGrid& grid = {}) {
  const ConditionReport pre = check_discrete_conditions(kappa, rho, c);
  if (!pre.satisfied)
    return {std::nullopt, pre.applicable ? "conditions A1-A2 not satisfied"
                                         : "conditions inapplicable: a <= 0"};
  using std::sqrt;
  const double upper = double(1 / sqrt(1 - kappa));
  for (double step = grid.initial_step; step >= grid.min_step * 0.999; step /= 10) {
    for (long k = 1; k <= grid.max_points; ++k) {
      const double eps = 1.0 + double(k) * step;
      if (!(eps < upper)) break;
      if (epsilon_admissible(Scalar(eps), kappa, rho, c)) return {eps, ""};
    }
  }
  return {std::nullopt, "search grid exhausted"};
}

/// rho interval [(kappa-1)/(a^2 a1), a1 (kappa^2 - kappa)/2] on which conditions
/// (i) and (iii) of the continuous-time theorem can hold for a given kappa.
template <typename Scalar>
std::pair<Scalar, Scalar> continuous_rho_window(Scalar kappa, const ConstantsBundle<Scalar>& c) {
  return {(kappa - 1) / (c.a * c.a * c.a1), c.a1 * (kappa * kappa - kappa) / 2};
}

struct ContinuousCheckOptions {
  /// Slack allowed on the finite-difference derivative conditions.
  double derivative_tolerance = 1e-9;
  /// Schedule used in the d/dt(kappa/mu) condition. The condition as usually stated
  /// never defines mu; when unset it is read as rho and the report says so.
  std::optional<ParamSchedule<double>> mu;
};

/// Conditions of the exponential-convergence theorem on a sampled time grid:
///   (i)   1 < kappa_lower <= kappa(t) <= a^2 a1 rho(t) + 1
///   (ii)  d/dt kappa(t) <= 0 and d/dt (kappa(t)/mu(t)) <= 0
///   (iii) kappa(t)^2 - kappa(t) - 2 rho(t)/a1 >= 0
/// Reports the worst margin of each over the grid.
template <typename Scalar>
ConditionReport check_continuous_conditions(const ParamSchedule<Scalar>& kappa,
                                            const ParamSchedule<Scalar>& rho,
                                            std::span<const Scalar> grid,
                                            const ConstantsBundle<Scalar>& c, Scalar kappa_lower,
                                            const ContinuousCheckOptions& options = {}) {
  require(grid.size() >= 2, "check_continuous_conditions: grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], "check_continuous_conditions: grid must be strictly increasing");

  ConditionReport r;
  r.condition_id = "continuous_exponential_convergence";
  if (!c.a_positive()) {
    r.applicable = false;
    r.details.push_back({"a > 0", false, double(c.a), "conditions inapplicable: a <= 0"});
    return r.finish();
  }

  const std::vector<Scalar> k = kappa.sample(grid);
  const std::vector<Scalar> p = rho.sample(grid);
  std::vector<Scalar> mu;
  std::string mu_note;
  if (options.mu) {
    for (Scalar t : grid) mu.push_back(Scalar((*options.mu)(double(t))));
    mu_note = "mu(t) supplied explicitly";
  } else {
    mu = p;
    mu_note = "mu(t) interpreted as rho(t)";
  }

  const double inf = std::numeric_limits<double>::infinity();
  double lower_vs_kappa = inf, upper_gap = inf, cond_iii = inf, window = inf;
  bool mu_positive = true;
  std::vector<Scalar> ratio(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lower_vs_kappa = std::min(lower_vs_kappa, double(k[i] - kappa_lower));
    upper_gap = std::min(upper_gap, double(c.a * c.a * c.a1 * p[i] + 1 - k[i]));
    cond_iii = std::min(cond_iii, double(k[i] * k[i] - k[i] - 2 * p[i] / c.a1));
    const auto [lo, hi] = continuous_rho_window(k[i], c);
    window = std::min(window, double(hi - lo));
    if (!(mu[i] > 0)) mu_positive = false;
    ratio[i] = mu[i] > 0 ? k[i] / mu[i] : Scalar(0);
  }

  const std::vector<Scalar> dk = finite_difference<Scalar>(grid, k);
  double max_dk = -inf, max_dratio = -inf;
  for (Scalar v : dk) max_dk = std::max(max_dk, double(v));
  if (mu_positive) {
    for (Scalar v : finite_difference<Scalar>(grid, ratio)) max_dratio = std::max(max_dratio, double(v));
  }

  r.add("i: kappa_lower > 1", double(kappa_lower - 1), true);
  r.add("i: kappa(t) >= kappa_lower", lower_vs_kappa, false);
  r.add("i: kappa(t) <= a^2 a1 rho(t) + 1", upper_gap, false);
  r.add("ii: d/dt kappa(t) <= 0", options.derivative_tolerance - max_dk, false,
        "max derivative = " + std::to_string(max_dk));
  if (mu_positive) {
    r.add("ii: d/dt (kappa(t)/mu(t)) <= 0", options.derivative_tolerance - max_dratio, false,
          mu_note + "; max derivative = " + std::to_string(max_dratio));
  } else {
    r.details.push_back({"ii: d/dt (kappa(t)/mu(t)) <= 0", false, -inf,
                         mu_note + "; mu(t) must be > 0 on the grid"});
  }
  r.add("iii: kappa^2 - kappa - 2 rho/a1 >= 0", cond_iii, false);
  r.add("rho window non-empty", window, false,
        "[(kappa-1)/(a^2 a1), a1 (kappa^2-kappa)/2] must contain rho(t)");
  return r.finish();
}

}  // namespace gimvi
