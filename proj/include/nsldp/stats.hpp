#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nsldp::stats {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

/// Sample mean and standard error of the mean (Bessel-corrected).
MeanStderr mean_stderr(std::span<const double> xs);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Weighted least squares of log(y) on log(x), weights from the relative errors
/// stderr/y. Members with x <= 0 or y <= 0 are skipped.
SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y,
                      std::span<const double> y_stderr);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

/// Asymptotic p-value of the two-sample Kolmogorov-Smirnov test.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

/// log(mean(exp(xs))), computed stably.
double log_mean_exp(std::span<const double> xs);

}  // namespace nsldp::stats
