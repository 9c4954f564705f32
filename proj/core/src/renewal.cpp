#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "colltime/replica.hpp"

namespace colltime {

RenewalLaw::RenewalLaw(std::shared_ptr<const PairKernel> kernel, std::int64_t radius)
    : kernel_(std::move(kernel)), radius_(radius) {
  if (!kernel_) throw std::invalid_argument("RenewalLaw: null kernel");
  if (radius < 1) throw std::invalid_argument("RenewalLaw: radius must be >= 1");
}

double RenewalLaw::probability(std::int64_t n, LatticePoint x) const {
  if (n < 1 || n > horizon() || x.linf() > radius_) return 0.0;
  return kernel_->squared(n, x) / kernel_->collision_time();
}

double RenewalLaw::time_marginal(std::int64_t n) const {
  if (n < 1 || n > horizon()) return 0.0;
  return kernel_->diagonal(n) / kernel_->collision_time();
}

double RenewalLaw::total_mass() const {
  double total = 0.0;
  for (std::int64_t n = 1; n <= horizon(); ++n) {
    if (radius_ >= n) {
      total += kernel_->diagonal(n);
      continue;
    }
    const auto row = kernel_->row_squared(n);
    for (std::int64_t i = 0; i <= n; ++i)
      for (std::int64_t j = 0; j <= n; ++j) {
        const std::int64_t u = 2 * i - n, v = 2 * j - n;
        if (std::max(std::abs(u + v), std::abs(u - v)) / 2 <= radius_)
          total += row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)];
      }
  }
  return total / kernel_->collision_time();
}

double RenewalLaw::mean_time() const {
  double m = 0.0;
  for (std::int64_t n = 1; n <= horizon(); ++n) m += static_cast<double>(n) * time_marginal(n);
  return m;
}

RenewalLaw renewal_step_law(std::int64_t N, std::int64_t radius) {
  return RenewalLaw(std::make_shared<PairKernel>(N), radius);
}

// ---------------------------------------------------------------------------

RenewalConvolution renewal_convolution(std::int64_t N, int k_max, std::span<const double> diagonal) {
  if (N < 1) throw std::invalid_argument("renewal_convolution: N must be >= 1");
  if (k_max < 0) throw std::invalid_argument("renewal_convolution: k_max must be >= 0");
  if (diagonal.size() < static_cast<std::size_t>(N + 1))
    throw std::invalid_argument("renewal_convolution: diagonal table too short");
  double R = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) R += diagonal[static_cast<std::size_t>(n)];
  std::vector<double> f(static_cast<std::size_t>(N + 1), 0.0);
  for (std::int64_t n = 1; n <= N; ++n) f[static_cast<std::size_t>(n)] = diagonal[static_cast<std::size_t>(n)] / R;

  RenewalConvolution c;
  c.N_ = N;
  c.rows_.assign(static_cast<std::size_t>(k_max + 1), std::vector<double>(static_cast<std::size_t>(N + 1), 0.0));
  c.rows_[0][0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    const auto& prev = c.rows_[static_cast<std::size_t>(k - 1)];
    auto& cur = c.rows_[static_cast<std::size_t>(k)];
    // tau_k >= k
    for (std::int64_t n = k; n <= N; ++n) {
      double s = 0.0;
      for (std::int64_t t = 1; t <= n - (k - 1); ++t)
        s += f[static_cast<std::size_t>(t)] * prev[static_cast<std::size_t>(n - t)];
      cur[static_cast<std::size_t>(n)] = s;
    }
  }
  return c;
}

RenewalConvolution renewal_convolution(std::int64_t N, int k_max) {
  const auto q = diagonal_returns(N);
  return renewal_convolution(N, k_max, q);
}

std::vector<double> RenewalConvolution::series_marginals(double sigma_times_R) const {
  std::vector<double> out(static_cast<std::size_t>(N_ + 1), 0.0);
  double w = 1.0;
  for (const auto& row : rows_) {
    for (std::size_t n = 0; n < row.size(); ++n) out[n] += w * row[n];
    w *= sigma_times_R;
  }
  return out;
}

int renewal_kmax(double sigma_times_R, double tol) {
  const double a = std::abs(sigma_times_R);
  if (!(a < 1.0))
    throw std::domain_error("renewal series diverges: |sigma R_N| >= 1, identity check refused");
  if (a == 0.0) return 0;
  int k = 0;
  double tail = a / (1.0 - a);
  while (!(tail < tol)) {
    tail *= a;
    ++k;
  }
  return k;
}

int renewal_terms(double sigma_times_R, std::int64_t horizon, double tol) {
  const auto cap = static_cast<int>(std::min<std::int64_t>(horizon, std::numeric_limits<int>::max()));
  if (!(std::abs(sigma_times_R) < 1.0)) return cap;
  return std::min(cap, renewal_kmax(sigma_times_R, tol));
}

double renewal_density_constant(const RenewalConvolution& conv, std::span<const double> diagonal, double R_N) {
  double worst = 0.0;
  for (int k = 1; k <= conv.k_max(); ++k)
    for (std::int64_t n = 1; n <= conv.horizon(); ++n) {
      const double p = conv(k, n);
      if (p <= 0.0) continue;
      worst = std::max(worst, p * R_N / (static_cast<double>(k) * diagonal[static_cast<std::size_t>(n)]));
    }
  return worst;
}

// ---------------------------------------------------------------------------

RenewalSampler::RenewalSampler(std::shared_ptr<const PairKernel> kernel) : kernel_(std::move(kernel)) {
  if (!kernel_) throw std::invalid_argument("RenewalSampler: null kernel");
  if (kernel_->spatial_horizon() < kernel_->horizon())
    throw std::invalid_argument("RenewalSampler: kernel rows must cover the whole horizon");
  const std::int64_t N = kernel_->horizon();
  // Vose alias table over T = 1..N
  const std::size_t n = static_cast<std::size_t>(N);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i)
    scaled[i] = kernel_->diagonal(static_cast<std::int64_t>(i + 1)) / kernel_->collision_time() * static_cast<double>(n);
  alias_prob_.assign(n, 1.0);
  alias_.assign(n, 0);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    alias_prob_[s] = scaled[s];
    alias_[s] = static_cast<std::int64_t>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) alias_[i] = static_cast<std::int64_t>(i);
  for (std::size_t i : small) alias_[i] = static_cast<std::int64_t>(i);
  for (std::size_t i = 0; i < n; ++i)
    if (alias_prob_[i] >= 1.0) alias_[i] = static_cast<std::int64_t>(i);
}

RenewalJump RenewalSampler::draw(CounterRng& rng) const {
  const double n = static_cast<double>(alias_.size());
  const double u = rng.uniform() * n;
  std::size_t col = static_cast<std::size_t>(u);
  if (col >= alias_.size()) col = alias_.size() - 1;
  const double frac = u - static_cast<double>(col);
  const std::int64_t T = (frac < alias_prob_[col] ? static_cast<std::int64_t>(col) : alias_[col]) + 1;

  const auto cdf = kernel_->row_squared_cdf(T);
  auto pick = [&](double p) {
    return static_cast<std::int64_t>(std::upper_bound(cdf.begin(), cdf.end(), p) - cdf.begin());
  };
  const std::int64_t ku = std::min<std::int64_t>(pick(rng.uniform()), T);
  const std::int64_t kv = std::min<std::int64_t>(pick(rng.uniform()), T);
  const std::int64_t u_coord = 2 * ku - T;
  const std::int64_t v_coord = 2 * kv - T;
  return {T, {(u_coord + v_coord) / 2, (u_coord - v_coord) / 2}};
}

RenewalPath RenewalSampler::path(CounterRng& rng) const {
  RenewalPath p;
  p.tau.push_back(0);
  p.position.push_back({0, 0});
  const std::int64_t N = kernel_->horizon();
  for (;;) {
    const auto jump = draw(rng);
    if (p.tau.back() + jump.T > N) break;
    p.jumps.push_back(jump);
    p.tau.push_back(p.tau.back() + jump.T);
    p.position.push_back(p.position.back() + jump.X);
  }
  return p;
}

RenewalPath sample_renewal(std::int64_t N, CounterRng& rng) {
  RenewalSampler sampler(std::make_shared<PairKernel>(N));
  return sampler.path(rng);
}

}  // namespace colltime
