#pragma once

#include <cmath>
#include <span>

#include "gimvi/types.hpp"

namespace gimvi {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;
};

/// Ordinary least squares y ~ intercept + slope * x. A perfectly flat series
/// reports r_squared = 1.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit_line: length mismatch");
  require(x.size() >= 2, "fit_line: need at least two points");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0, "fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace gimvi
