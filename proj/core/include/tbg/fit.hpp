#pragma once

#include <vector>

namespace tbg {

/// Least-squares line y = slope * x + intercept[group].
struct LineFit {
  double slope = 0.0;
  double slope_ci95 = 0.0;  // half-width from the Student t quantile
  std::vector<double> intercepts;
  std::vector<double> residuals;
  double residual_rms = 0.0;
  double r_squared = 0.0;  // of the pooled fit against per-group means
  int dof = 0;
};

/// Common-slope fit with one intercept per group (groups are 0..G-1).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<int>& group);
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// log y = slope * log x + c; inputs must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, const std::vector<int>& group = {});

/// log y = slope * x + c.
LineFit fit_loglinear(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tbg
