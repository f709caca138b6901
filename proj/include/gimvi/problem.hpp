#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gimvi/types.hpp"

namespace gimvi {

template <typename Scalar>
struct Moduli {
  Scalar lipschitz{0};
  Scalar strong_monotone{0};
};

/// A single-valued operator H -> H. Affine and scalar-linear kinds carry moduli
/// that are verified against their coefficients on construction; callbacks may
/// leave them undeclared.
template <typename Scalar>
class OperatorSpec {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;
  using Function = std::function<Vec(const Vec&)>;

  struct Affine {
    Mat matrix;
    Vec offset;
  };
  struct ScalarLinear {
    Scalar slope;
  };
  struct Callback {
    Function fn;
    std::ptrdiff_t dimension;
  };
  using Kind = std::variant<Affine, ScalarLinear, Callback>;

  static OperatorSpec affine(Mat matrix, Vec offset,
                             std::optional<Moduli<Scalar>> declared = std::nullopt) {
    require(matrix.rows() == matrix.cols(), "affine operator matrix must be square");
    require_dimension("affine operator offset", matrix.rows(), offset.size());
    const Moduli<Scalar> actual = affine_moduli(matrix);
    return OperatorSpec(Affine{std::move(matrix), std::move(offset)},
                        checked(declared, actual, "affine operator"));
  }

  static OperatorSpec scalar_linear(Scalar slope,
                                    std::optional<Moduli<Scalar>> declared = std::nullopt) {
    using std::abs;
    using std::max;
    const Moduli<Scalar> actual{abs(slope), max(slope, Scalar(0))};
    return OperatorSpec(ScalarLinear{slope}, checked(declared, actual, "scalar-linear operator"));
  }

  static OperatorSpec identity() { return scalar_linear(Scalar(1)); }
  static OperatorSpec zero() { return scalar_linear(Scalar(0)); }

  /// `dimension` < 0 accepts any input size.
  static OperatorSpec callback(Function fn, std::ptrdiff_t dimension = -1,
                               std::optional<Moduli<Scalar>> declared = std::nullopt) {
    require(static_cast<bool>(fn), "callback operator needs a callable");
    if (declared) validate_moduli(*declared);
    return OperatorSpec(Callback{std::move(fn), dimension}, declared);
  }

  const Kind& kind() const { return kind_; }
  const std::optional<Moduli<Scalar>>& declared_moduli() const { return moduli_; }

  /// Declared moduli; throws for a callback that never declared them.
  const Moduli<Scalar>& moduli() const {
    if (!moduli_) throw InvalidArgument("operator has no declared moduli (callback kind)");
    return *moduli_;
  }

  /// Input dimension the operator is bound to, or -1 when it accepts any.
  std::ptrdiff_t dimension() const {
    if (const auto* a = std::get_if<Affine>(&kind_)) return a->matrix.rows();
    if (const auto* c = std::get_if<Callback>(&kind_)) return c->dimension;
    return -1;
  }

  bool is_callback() const { return std::holds_alternative<Callback>(kind_); }

 private:
  OperatorSpec(Kind kind, std::optional<Moduli<Scalar>> moduli)
      : kind_(std::move(kind)), moduli_(std::move(moduli)) {}

  static Moduli<Scalar> affine_moduli(const Mat& m) {
    if (m.size() == 0) return {Scalar(0), Scalar(0)};
    Eigen::JacobiSVD<Mat> svd(m);
    const Mat sym = (m + m.transpose()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
    using std::max;
    return {svd.singularValues()(0), max(eig.eigenvalues()(0), Scalar(0))};
  }

  static void validate_moduli(const Moduli<Scalar>& m) {
    require(m.lipschitz >= 0 && m.strong_monotone >= 0, "declared moduli must be >= 0");
  }

  static bool close(Scalar declared, Scalar actual) {
    using std::abs;
    using std::max;
    return abs(declared - actual) <= Scalar(kModuliTolerance) * max(Scalar(1), abs(actual));
  }

  static Moduli<Scalar> checked(const std::optional<Moduli<Scalar>>& declared,
                                const Moduli<Scalar>& actual, const char* what) {
    if (!declared) return actual;
    validate_moduli(*declared);
    if (!close(declared->lipschitz, actual.lipschitz))
      throw InvalidArgument(std::string(what) + ": declared lipschitz modulus " +
                            std::to_string(double(declared->lipschitz)) +
                            " does not match coefficients (" +
                            std::to_string(double(actual.lipschitz)) + ")");
    if (!close(declared->strong_monotone, actual.strong_monotone))
      throw InvalidArgument(std::string(what) + ": declared strong-monotonicity modulus " +
                            std::to_string(double(declared->strong_monotone)) +
                            " does not match coefficients (" +
                            std::to_string(double(actual.strong_monotone)) + ")");
    return *declared;
  }

  Kind kind_;
  std::optional<Moduli<Scalar>> moduli_;
};

template <typename Scalar>
Vector<Scalar> apply_operator(const OperatorSpec<Scalar>& op, const Vector<Scalar>& w) {
  using Op = OperatorSpec<Scalar>;
  return std::visit(
      [&](const auto& k) -> Vector<Scalar> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, typename Op::Affine>) {
          require_dimension("apply_operator", k.matrix.cols(), w.size());
          return k.matrix * w + k.offset;
        } else if constexpr (std::is_same_v<K, typename Op::ScalarLinear>) {
          return k.slope * w;
        } else {
          if (k.dimension >= 0) require_dimension("apply_operator", k.dimension, w.size());
          Vector<Scalar> out = k.fn(w);
          require_dimension("callback operator output", w.size(), out.size());
          return out;
        }
      },
      op.kind());
}

/// f(v) = sum_i quad_i v_i^2 + lin_i v_i + constant, or f = 0.
template <typename Scalar>
class ConvexFunctionSpec {
 public:
  using Vec = Vector<Scalar>;

  struct Zero {};
  struct SeparableQuadratic {
    Vec quad;
    Vec lin;
    Scalar constant;
  };
  using Kind = std::variant<Zero, SeparableQuadratic>;

  static ConvexFunctionSpec zero() { return ConvexFunctionSpec(Zero{}); }

  static ConvexFunctionSpec separable_quadratic(Vec quad, Vec lin, Scalar constant = 0) {
    require_dimension("separable quadratic linear term", quad.size(), lin.size());
    for (Eigen::Index i = 0; i < quad.size(); ++i)
      require(quad(i) >= 0, "separable quadratic coefficients must be >= 0 (convexity)");
    return ConvexFunctionSpec(SeparableQuadratic{std::move(quad), std::move(lin), constant});
  }

  const Kind& kind() const { return kind_; }
  bool is_zero() const { return std::holds_alternative<Zero>(kind_); }
  const SeparableQuadratic* quadratic() const { return std::get_if<SeparableQuadratic>(&kind_); }

  std::ptrdiff_t dimension() const {
    if (const auto* q = quadratic()) return q->quad.size();
    return -1;
  }

  Scalar operator()(const Vec& v) const {
    if (const auto* q = quadratic()) {
      require_dimension("convex function argument", q->quad.size(), v.size());
      return (q->quad.array() * v.array().square()).sum() + q->lin.dot(v) + q->constant;
    }
    return Scalar(0);
  }

 private:
  explicit ConvexFunctionSpec(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Closed convex box; infinite bounds are stored as +/-infinity.
template <typename Scalar>
class FeasibleSetSpec {
 public:
  using Vec = Vector<Scalar>;

  static FeasibleSetSpec box(Vec lower, Vec upper) {
    require_dimension("box upper bounds", lower.size(), upper.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      require(!std::isnan(double(lower(i))) && !std::isnan(double(upper(i))),
              "box bounds must not be NaN");
      require(lower(i) <= upper(i), "box requires lower[i] <= upper[i] (coordinate " +
                                        std::to_string(i) + ")");
    }
    return FeasibleSetSpec(std::move(lower), std::move(upper));
  }

  static FeasibleSetSpec whole_space(Eigen::Index d) {
    return box(Vec::Constant(d, -infinity<Scalar>()), Vec::Constant(d, infinity<Scalar>()));
  }

  static FeasibleSetSpec nonnegative_orthant(Eigen::Index d) {
    return box(Vec::Zero(d), Vec::Constant(d, infinity<Scalar>()));
  }

  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  Eigen::Index dimension() const { return lower_.size(); }

  bool contains(const Vec& v, Scalar tol = Scalar(0)) const {
    require_dimension("box membership", dimension(), v.size());
    return ((v.array() >= lower_.array() - tol) && (v.array() <= upper_.array() + tol)).all();
  }

  Vec project(const Vec& v) const {
    require_dimension("box projection", dimension(), v.size());
    return v.cwiseMax(lower_).cwiseMin(upper_);
  }

 private:
  FeasibleSetSpec(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {}
  Vec lower_;
  Vec upper_;
};

/// Find w* with T(w*) in K and <g(w*), y - T(w*)> + f(y) - f(T(w*)) >= 0 for all y in K.
template <typename Scalar>
struct ProblemSpec {
  using Vec = Vector<Scalar>;

  std::string id;
  OperatorSpec<Scalar> T;
  OperatorSpec<Scalar> g;
  ConvexFunctionSpec<Scalar> f;
  FeasibleSetSpec<Scalar> K;
  Scalar gamma;
  Eigen::Index dimension;
  /// Declared alpha with <T(w)-T(v), g(w)-g(v)> >= alpha |w-v|^2.
  std::optional<Scalar> coupled_monotone;
  std::optional<Vec> known_solution;

  static ProblemSpec make(std::string id, OperatorSpec<Scalar> T, OperatorSpec<Scalar> g,
                          ConvexFunctionSpec<Scalar> f, FeasibleSetSpec<Scalar> K, Scalar gamma,
                          std::optional<Scalar> coupled_monotone = std::nullopt,
                          std::optional<Vec> known_solution = std::nullopt) {
    ProblemSpec p{std::move(id),   std::move(T),     std::move(g),
                  std::move(f),    std::move(K),     gamma,
                  0,               coupled_monotone, std::move(known_solution)};
    p.dimension = p.K.dimension();
    p.validate();
    return p;
  }

  void validate() const {
    require(gamma > 0, "problem requires gamma > 0");
    require(dimension > 0, "problem dimension must be positive");
    require_dimension("feasible set", dimension, K.dimension());
    if (T.dimension() >= 0) require_dimension("operator T", dimension, T.dimension());
    if (g.dimension() >= 0) require_dimension("operator g", dimension, g.dimension());
    if (f.dimension() >= 0) require_dimension("convex function f", dimension, f.dimension());
    if (known_solution) require_dimension("known solution", dimension, known_solution->size());
    if (coupled_monotone) require(*coupled_monotone >= 0, "coupled monotonicity must be >= 0");
  }
};

using Problem = ProblemSpec<double>;

/// d = 1, K = [0, inf), T(w) = 3w/4, g(w) = w/2, f(w) = w^2 + 2w + 1, gamma = 1.4, w* = 0.
template <typename Scalar = double>
ProblemSpec<Scalar> paper_example_problem() {
  using Vec = Vector<Scalar>;
  const Scalar three_quarters = Scalar(3) / Scalar(4);
  const Scalar half = Scalar(1) / Scalar(2);
  return ProblemSpec<Scalar>::make(
      "paper_example",
      OperatorSpec<Scalar>::scalar_linear(three_quarters, Moduli<Scalar>{three_quarters, three_quarters}),
      OperatorSpec<Scalar>::scalar_linear(half, Moduli<Scalar>{half, half}),
      ConvexFunctionSpec<Scalar>::separable_quadratic(Vec::Constant(1, Scalar(1)),
                                                      Vec::Constant(1, Scalar(2)), Scalar(1)),
      FeasibleSetSpec<Scalar>::nonnegative_orthant(1), Scalar(14) / Scalar(10),
      Scalar(3) / Scalar(8), Vec::Zero(1));
}

}  // namespace gimvi
