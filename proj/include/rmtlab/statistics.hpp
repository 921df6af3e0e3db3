#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rmtlab {

double chisq1_cdf(double x);
double chisq1_density(double x);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Two-sided one-sample KS; asymptotic p-value with the Stephens finite-n
/// correction (sqrt n + 0.12 + 0.11/sqrt n) D.
KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> values);

/// Median (average of the middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace rmtlab
