#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gimvi {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

/// Slack required for a strict inequality `x > 0` to count as satisfied.
inline constexpr double kStrictTolerance = 1e-12;

/// Relative tolerance used when checking declared moduli against coefficients.
inline constexpr double kModuliTolerance = 1e-12;

template <typename Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidArgument {
 public:
  DimensionMismatch(std::string what, std::ptrdiff_t expected, std::ptrdiff_t actual)
      : InvalidArgument(what + ": expected dimension " + std::to_string(expected) + ", got " +
                        std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::ptrdiff_t expected() const { return expected_; }
  std::ptrdiff_t actual() const { return actual_; }

 private:
  std::ptrdiff_t expected_;
  std::ptrdiff_t actual_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline void require_dimension(const char* what, std::ptrdiff_t expected, std::ptrdiff_t actual) {
  if (expected != actual) throw DimensionMismatch(what, expected, actual);
}

}  // namespace gimvi
