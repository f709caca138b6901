#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "gimvi/problem.hpp"

namespace gimvi {

/// Uniform sampling box for empirical moduli checks; bounds must be finite.
template <typename Scalar>
struct SampleBox {
  Vector<Scalar> lower;
  Vector<Scalar> upper;
  std::uint64_t seed = 0;
};

struct EmpiricalModuli {
  /// max |Op(w) - Op(v)| / |w - v|, a lower bound on the Lipschitz modulus.
  double lipschitz_lower = 0;
  /// min <Op(w) - Op(v), w - v> / |w - v|^2, an upper bound on the strong-monotonicity modulus.
  double strong_monotone_upper = 0;
  /// min <T(w) - T(v), g(w) - g(v)> / |w - v|^2 when a partner operator is given.
  std::optional<double> coupled_monotone_upper;
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;
};

/// Ratios over all pairs of `n_samples` points drawn uniformly from the box.
/// Pairs with |w - v| = 0 are skipped.
template <typename Scalar>
EmpiricalModuli estimate_moduli_empirical(const OperatorSpec<Scalar>& op, const SampleBox<Scalar>& box,
                                          int n_samples,
                                          const OperatorSpec<Scalar>* partner = nullptr) {
  require(n_samples >= 2, "estimate_moduli_empirical: n_samples must be >= 2");
  require_dimension("estimate_moduli_empirical: box", box.lower.size(), box.upper.size());
  require(box.lower.allFinite() && box.upper.allFinite(),
          "estimate_moduli_empirical: sample box must be finite");
  const Eigen::Index d = box.lower.size();

  std::mt19937_64 rng(box.seed);
  std::vector<Vector<Scalar>> points, images, partner_images;
  for (int s = 0; s < n_samples; ++s) {
    Vector<Scalar> w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      std::uniform_real_distribution<double> u(double(box.lower(i)), double(box.upper(i)));
      w(i) = Scalar(u(rng));
    }
    images.push_back(apply_operator(op, w));
    if (partner) partner_images.push_back(apply_operator(*partner, w));
    points.push_back(std::move(w));
  }

  EmpiricalModuli out;
  out.lipschitz_lower = -std::numeric_limits<double>::infinity();
  out.strong_monotone_upper = std::numeric_limits<double>::infinity();
  double coupled = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const Vector<Scalar> dw = points[i] - points[j];
      const Scalar dist_sq = dw.squaredNorm();
      if (dist_sq == 0) {
        ++out.pairs_skipped;
        continue;
      }
      ++out.pairs_used;
      const Vector<Scalar> dop = images[i] - images[j];
      out.lipschitz_lower = std::max(out.lipschitz_lower, double(dop.norm() / dw.norm()));
      out.strong_monotone_upper = std::min(out.strong_monotone_upper, double(dop.dot(dw) / dist_sq));
      if (partner) {
        const Vector<Scalar> dg = partner_images[i] - partner_images[j];
        coupled = std::min(coupled, double(dop.dot(dg) / dist_sq));
      }
    }
  }
  if (out.pairs_used == 0)
    throw InvalidArgument("estimate_moduli_empirical: every sampled pair was degenerate");
  if (partner) out.coupled_monotone_upper = coupled;
  return out;
}

}  // namespace gimvi
