#include "tbg/fit.hpp"

#include "tbg/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace tbg {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<int>& group) {
  const std::size_t n = x.size();
  if (y.size() != n || group.size() != n) throw DimensionMismatchError("fit inputs differ in length");
  if (n == 0) throw PreconditionError("fit needs data");
  const int g = *std::max_element(group.begin(), group.end()) + 1;
  if (*std::min_element(group.begin(), group.end()) < 0) throw PreconditionError("group ids must be >= 0");

  // Demean within each group, then a single slope through the origin.
  std::vector<double> mx(static_cast<std::size_t>(g), 0.0), my(mx), cnt(mx);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(group[i]);
    mx[k] += x[i];
    my[k] += y[i];
    cnt[k] += 1.0;
  }
  for (std::size_t k = 0; k < mx.size(); ++k) {
    if (cnt[k] == 0.0) throw PreconditionError("empty fit group");
    mx[k] /= cnt[k];
    my[k] /= cnt[k];
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(group[i]);
    const double dx = x[i] - mx[k], dy = y[i] - my[k];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw PreconditionError("fit abscissae do not vary");

  LineFit f;
  f.slope = sxy / sxx;
  f.intercepts.resize(mx.size());
  for (std::size_t k = 0; k < mx.size(); ++k) f.intercepts[k] = my[k] - f.slope * mx[k];
  double sse = 0.0;
  f.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.slope * x[i] - f.intercepts[static_cast<std::size_t>(group[i])];
    f.residuals[i] = r;
    sse += r * r;
  }
  f.residual_rms = std::sqrt(sse / static_cast<double>(n));
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.dof = static_cast<int>(n) - g - 1;
  if (f.dof > 0) {
    const double se = std::sqrt(sse / f.dof / sxx);
    const boost::math::students_t dist(f.dof);
    f.slope_ci95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  }
  return f;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_line(x, y, std::vector<int>(x.size(), 0));
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, const std::vector<int>& group) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw PreconditionError("log-log fit needs positive abscissae");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw PreconditionError("log-log fit needs positive values");
    ly[i] = std::log(y[i]);
  }
  return group.empty() ? fit_line(lx, ly) : fit_line(lx, ly, group);
}

LineFit fit_loglinear(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw PreconditionError("log-linear fit needs positive values");
    ly[i] = std::log(y[i]);
  }
  return fit_line(x, ly);
}

}  // namespace tbg
