#include "colltime/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace colltime {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// x < a + 1: P by its power series
double series_p(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// x >= a + 1: Q by its continued fraction, modified Lentz
double fraction_q(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

void check(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete gamma: shape must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be >= 0");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? series_p(a, x) : 1.0 - fraction_q(a, x);
}

double regularized_gamma_q(double a, double x) {
  check(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - series_p(a, x) : fraction_q(a, x);
}

}  // namespace colltime
