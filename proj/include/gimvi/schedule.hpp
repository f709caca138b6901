#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "gimvi/types.hpp"

namespace gimvi {

/// A time-varying damping or relaxation parameter t -> kappa(t) / rho(t).
template <typename Scalar>
class ParamSchedule {
 public:
  struct Constant {
    Scalar value;
  };
  struct Knot {
    Scalar t;
    Scalar value;
  };
  /// Linear between knots, held constant outside them.
  struct PiecewiseLinear {
    std::vector<Knot> knots;
  };
  struct Callback {
    std::function<Scalar(Scalar)> fn;
  };
  using Kind = std::variant<Constant, PiecewiseLinear, Callback>;

  static ParamSchedule constant(Scalar value) {
    require(value >= 0, "schedule values must be >= 0");
    return ParamSchedule(Constant{value});
  }

  static ParamSchedule piecewise_linear(std::vector<Knot> knots) {
    require(!knots.empty(), "piecewise-linear schedule needs at least one knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      require(knots[i].value >= 0, "schedule values must be >= 0");
      if (i > 0) require(knots[i].t > knots[i - 1].t, "schedule knots must be strictly increasing");
    }
    return ParamSchedule(PiecewiseLinear{std::move(knots)});
  }

  static ParamSchedule callback(std::function<Scalar(Scalar)> fn) {
    require(static_cast<bool>(fn), "callback schedule needs a callable");
    return ParamSchedule(Callback{std::move(fn)});
  }

  const Kind& kind() const { return kind_; }

  std::optional<Scalar> constant_value() const {
    if (const auto* c = std::get_if<Constant>(&kind_)) return c->value;
    return std::nullopt;
  }

  Scalar operator()(Scalar t) const {
    if (const auto* c = std::get_if<Constant>(&kind_)) return c->value;
    if (const auto* cb = std::get_if<Callback>(&kind_)) return cb->fn(t);
    const auto& knots = std::get<PiecewiseLinear>(kind_).knots;
    if (t <= knots.front().t) return knots.front().value;
    if (t >= knots.back().t) return knots.back().value;
    const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                     [](Scalar x, const Knot& k) { return x < k.t; });
    const auto lo = hi - 1;
    const Scalar s = (t - lo->t) / (hi->t - lo->t);
    return lo->value + s * (hi->value - lo->value);
  }

  std::vector<Scalar> sample(std::span<const Scalar> grid) const {
    std::vector<Scalar> out;
    out.reserve(grid.size());
    for (Scalar t : grid) out.push_back((*this)(t));
    return out;
  }

 private:
  explicit ParamSchedule(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

template <typename Scalar>
struct SchedulePair {
  ParamSchedule<Scalar> kappa;
  ParamSchedule<Scalar> rho;

  static SchedulePair constant(Scalar kappa, Scalar rho) {
    return {ParamSchedule<Scalar>::constant(kappa), ParamSchedule<Scalar>::constant(rho)};
  }
};

/// Central differences in the interior, one-sided at the endpoints.
template <typename Scalar>
std::vector<Scalar> finite_difference(std::span<const Scalar> grid,
                                      std::span<const Scalar> values) {
  require(grid.size() == values.size(), "finite_difference: grid/value length mismatch");
  require(grid.size() >= 2, "finite_difference: need at least two points");
  const std::size_t n = grid.size();
  std::vector<Scalar> d(n);
  d[0] = (values[1] - values[0]) / (grid[1] - grid[0]);
  d[n - 1] = (values[n - 1] - values[n - 2]) / (grid[n - 1] - grid[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    d[i] = (values[i + 1] - values[i - 1]) / (grid[i + 1] - grid[i - 1]);
  return d;
}

}  // namespace gimvi
