// SPDX-License-Identifier: Apache-2.0
#include "mindriven/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mindriven/error.hpp"

namespace mindriven::stats {

double mean(const std::vector<double>& v) {
  if (v.empty()) fail(ErrorKind::InvalidArgument, "mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) fail(ErrorKind::InvalidArgument, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  return weighted_least_squares(x, y, std::vector<double>(x.size(), 1.0));
}

LineFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& weights) {
  if (x.size() != y.size() || x.size() != weights.size() || x.size() < 2)
    fail(ErrorKind::InvalidArgument, "regression needs matching samples of size >= 2");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    sw += weights[q];
    sx += weights[q] * x[q];
    sy += weights[q] * y[q];
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    sxx += weights[q] * (x[q] - xbar) * (x[q] - xbar);
    sxy += weights[q] * (x[q] - xbar) * (y[q] - ybar);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::InvalidArgument, "regression abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  bool unit = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 1.0; });
  if (unit) {
    if (x.size() > 2) {
      double rss = 0;
      for (std::size_t q = 0; q < x.size(); ++q) {
        const double r = y[q] - fit.intercept - fit.slope * x[q];
        rss += r * r;
      }
      fit.slope_stderr = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
    }
  } else {
    fit.slope_stderr = std::sqrt(1.0 / sxx);
  }
  return fit;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::InvalidArgument, "KS needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_1pct(std::size_t n, std::size_t m) {
  const double a = static_cast<double>(n), b = static_cast<double>(m);
  return 1.628 * std::sqrt((a + b) / (a * b));
}

}  // namespace mindriven::stats
