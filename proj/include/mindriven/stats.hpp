// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace mindriven::stats {

double mean(const std::vector<double>& v);
/// Standard error of the mean (sample standard deviation / sqrt(n)).
double standard_error(const std::vector<double>& v);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);
double median(std::vector<double> v);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);
/// Weights are inverse variances; slope_stderr is the model-based one.
LineFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& weights);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic 1% critical value 1.628 * sqrt((n + m) / (n m)).
double ks_critical_1pct(std::size_t n, std::size_t m);

}  // namespace mindriven::stats
