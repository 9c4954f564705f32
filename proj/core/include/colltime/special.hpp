#pragma once

namespace colltime {

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double regularized_gamma_p(double a, double x);
/// Q(a, x) = 1 - P(a, x), computed directly where that is more accurate.
double regularized_gamma_q(double a, double x);

/// CDF of Gamma(shape, 1).
inline double gamma_cdf(double shape, double x) { return x <= 0.0 ? 0.0 : regularized_gamma_p(shape, x); }

}  // namespace colltime
