#pragma once

#include <vector>

namespace she {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// Half-width of the 95% Student-t interval for the slope (0 when n < 3).
  double slope_ci = 0.0;
};

/// Ordinary least squares y = intercept + slope x on centered data.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

double t_quantile_975(int dof);

}  // namespace she
