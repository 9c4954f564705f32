#include "colltime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "colltime/special.hpp"

namespace colltime {

double Moments::standard_error() const {
  return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

Moments moments(std::span<const double> x) {
  Moments m;
  double mean = 0.0, m2 = 0.0;
  for (double v : x) {
    ++m.n;
    const double d = v - mean;
    mean += d / static_cast<double>(m.n);
    m2 += d * (v - mean);
  }
  m.mean = mean;
  m.variance = m.n > 1 ? m2 / static_cast<double>(m.n - 1) : 0.0;
  return m;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j + 1 < samples.size() && samples[j + 1] == samples[i]) ++j;
    const double F = cdf(samples[i]);
    d = std::max({d, static_cast<double>(j + 1) / n - F, F - static_cast<double>(i) / n});
    i = j + 1;
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_critical_value(std::int64_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("ks_critical_value: n must be >= 1");
  struct Row {
    double alpha, c;
  };
  static constexpr Row table[] = {{0.10, 1.224}, {0.05, 1.358}, {0.025, 1.480},
                                  {0.01, 1.628}, {0.005, 1.731}, {0.001, 1.949}};
  for (const auto& row : table)
    if (std::abs(row.alpha - alpha) < 1e-12) {
      const double s = std::sqrt(static_cast<double>(n));
      return row.c / (s + 0.12 + 0.11 / s);
    }
  throw std::invalid_argument("ks_critical_value: unsupported level");
}

double ks_p_value(double statistic, std::int64_t n) {
  const double s = std::sqrt(static_cast<double>(n));
  const double lambda = (s + 0.12 + 0.11 / s) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

Correlation pearson(std::span<const double> x, std::span<const double> y, double confidence) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 4) throw std::invalid_argument("pearson: need at least 4 points");
  Correlation c;
  c.n = static_cast<std::int64_t>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  c.r = (sxx > 0.0 && syy > 0.0) ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  const double se_z = 1.0 / std::sqrt(static_cast<double>(c.n - 3));
  const double z = std::atanh(std::clamp(c.r, -0.999999999999, 0.999999999999));
  const double q = normal_quantile(0.5 + 0.5 * confidence);
  c.lower = std::tanh(z - q * se_z);
  c.upper = std::tanh(z + q * se_z);
  c.standard_error = (1.0 - c.r * c.r) * se_z;
  return c;
}

ChiSquare chi_square_test(std::span<const std::int64_t> observed, std::span<const double> probabilities,
                          double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty())
    throw std::invalid_argument("chi_square_test: size mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  std::vector<double> obs, expc;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += static_cast<double>(observed[i]);
    e_acc += probabilities[i] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      expc.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (obs.empty()) {
      obs.push_back(o_acc);
      expc.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      expc.back() += e_acc;
    }
  }
  ChiSquare r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (expc[i] <= 0.0) {
      if (obs[i] > 0.0) r.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    r.statistic += (obs[i] - expc[i]) * (obs[i] - expc[i]) / expc[i];
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  r.p_value = r.dof > 0 ? regularized_gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
  return r;
}

}  // namespace colltime
