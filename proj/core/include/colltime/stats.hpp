#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace colltime {

struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double standard_error() const;
};

/// Welford accumulation.
Moments moments(std::span<const double> x);

/// Two-sided sup_x |F_n(x) - F(x)|; ties and atoms of F are handled by
/// comparing F at each distinct sample value with the ECDF just below and at it.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic critical value c(alpha) / (sqrt n + 0.12 + 0.11 / sqrt n);
/// alpha in {0.10, 0.05, 0.025, 0.01, 0.005, 0.001}.
double ks_critical_value(std::int64_t n, double alpha = 0.01);

/// Asymptotic p-value of a KS statistic at sample size n.
double ks_p_value(double statistic, std::int64_t n);

struct Correlation {
  double r = 0.0;
  double lower = 0.0;  ///< Fisher-z confidence interval
  double upper = 0.0;
  double standard_error = 0.0;  ///< (1 - r^2) / sqrt(n - 3), delta method on z
  std::int64_t n = 0;
};

Correlation pearson(std::span<const double> x, std::span<const double> y, double confidence = 0.95);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square of observed counts against cell probabilities; cells with an
/// expected count below `min_expected` are pooled into their right neighbour
/// (the last one into its left neighbour).
ChiSquare chi_square_test(std::span<const std::int64_t> observed, std::span<const double> probabilities,
                          double min_expected = 5.0);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace colltime
