#include "colltime/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "colltime/parallel.hpp"
#include "colltime/rng.hpp"

namespace colltime {

std::int64_t default_radius(std::int64_t N) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(8.0 * std::sqrt(static_cast<double>(N)))));
}

KernelTable::KernelTable(std::int64_t N, std::int64_t radius) : N_(N), radius_(radius) {
  const std::size_t cells = static_cast<std::size_t>(side() * side());
  slots_ = (cells + 1) / 2;
  slices_.assign(static_cast<std::size_t>(N + 1), std::vector<double>(slots_, 0.0));
  deficit_.assign(static_cast<std::size_t>(N + 1), 0.0);
}

double KernelTable::value(std::int64_t n, LatticePoint x) const {
  if (n < 0 || n > N_ || !in_box(x) || parity(n, x) != 0) return 0.0;
  return slices_[static_cast<std::size_t>(n)][linear(x) >> 1];
}

double KernelTable::slice_mass(std::int64_t n) const {
  double s = 0.0;
  for (double v : slices_.at(static_cast<std::size_t>(n))) s += v;
  return s;
}

std::vector<double> KernelTable::dense_slice(std::int64_t n) const {
  std::vector<double> out(static_cast<std::size_t>(side() * side()), 0.0);
  for (std::int64_t a = -radius_; a <= radius_; ++a)
    for (std::int64_t b = -radius_; b <= radius_; ++b) out[linear({a, b})] = value(n, {a, b});
  return out;
}

KernelTable build_kernel_table(std::int64_t N, std::int64_t radius, TruncationPolicy policy) {
  if (N < 0) throw std::invalid_argument("build_kernel_table: N must be >= 0");
  if (radius < 1) throw std::invalid_argument("build_kernel_table: radius must be >= 1");
  KernelTable t(N, radius);
  const std::int64_t r = radius;
  t.slices_[0][t.linear({0, 0}) >> 1] = 1.0;

  static constexpr std::array<LatticePoint, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (std::int64_t n = 1; n <= N; ++n) {
    const auto& prev = t.slices_[static_cast<std::size_t>(n - 1)];
    auto& cur = t.slices_[static_cast<std::size_t>(n)];
    // sites reachable at step n satisfy |x|_1 <= n
    const std::int64_t reach = std::min(r, n);
    double exited = 0.0;
    for (std::int64_t a = -reach; a <= reach; ++a) {
      const std::int64_t lim = std::min(reach, n - std::abs(a));
      std::int64_t b0 = -lim;
      if (parity(n, {a, b0}) != 0) ++b0;
      for (std::int64_t b = b0; b <= lim; b += 2) {
        double s = 0.0;
        for (const auto& d : steps) {
          const LatticePoint y{a + d.x1, b + d.x2};
          if (t.in_box(y)) s += prev[t.linear(y) >> 1];
        }
        cur[t.linear({a, b}) >> 1] = 0.25 * s;
      }
    }
    // mass on the previous slice that stepped through the wall
    const std::int64_t preach = std::min(r, n - 1);
    if (preach == r) {
      for (std::int64_t a = -r; a <= r; ++a) {
        for (std::int64_t b = -r; b <= r; ++b) {
          if (std::abs(a) != r && std::abs(b) != r) continue;
          if (parity(n - 1, {a, b}) != 0) continue;
          int outside = 0;
          for (const auto& d : steps) outside += t.in_box({a + d.x1, b + d.x2}) ? 0 : 1;
          exited += 0.25 * outside * prev[t.linear({a, b}) >> 1];
        }
      }
    }
    t.deficit_[static_cast<std::size_t>(n)] = t.deficit_[static_cast<std::size_t>(n - 1)] + exited;
  }
  if (policy.strict && t.deficit_.back() > policy.cap) {
    throw TruncationError("kernel table radius " + std::to_string(radius) + " loses " +
                              std::to_string(t.deficit_.back()) + " of mass by step " + std::to_string(N),
                          t.deficit_.back(), policy.cap);
  }
  return t;
}

namespace {

// log C(2n,n) 4^-n = lgamma(n+1/2) - lgamma(n+1) - log(pi)/2, by its
// asymptotic expansion; the truncated series is exact to double precision for n >= 64.
double log_central_asymptotic(double n) {
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  const double series =
      inv * (-1.0 / 8.0 + inv2 * (1.0 / 192.0 + inv2 * (-1.0 / 640.0 + inv2 * (17.0 / 14336.0 + inv2 * (-31.0 / 18432.0)))));
  return -0.5 * std::log(std::numbers::pi * n) + series;
}

}  // namespace

double log_diagonal_return(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("log_diagonal_return: n must be >= 0");
  if (n < 64) {
    double c = 1.0;
    for (std::int64_t k = 1; k <= n; ++k) c *= static_cast<double>(2 * k - 1) / static_cast<double>(2 * k);
    return 2.0 * std::log(c);
  }
  return 2.0 * log_central_asymptotic(static_cast<double>(n));
}

double diagonal_return(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("diagonal_return: n must be >= 0");
  if (n < 64) {
    double c = 1.0;
    for (std::int64_t k = 1; k <= n; ++k) c *= static_cast<double>(2 * k - 1) / static_cast<double>(2 * k);
    return c * c;
  }
  const double v = std::exp(log_diagonal_return(n));
  if (v == 0.0) throw std::range_error("diagonal_return underflows; use log_diagonal_return");
  return v;
}

std::vector<double> diagonal_returns(std::int64_t N) {
  if (N < 0) throw std::invalid_argument("diagonal_returns: N must be >= 0");
  std::vector<double> q(static_cast<std::size_t>(N + 1));
  double c = 1.0;
  q[0] = 1.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    c *= static_cast<double>(2 * n - 1) / static_cast<double>(2 * n);
    q[static_cast<std::size_t>(n)] = c * c;
  }
  return q;
}

CollisionTime expected_collision_time(std::int64_t N) {
  if (N < 1) throw std::invalid_argument("expected_collision_time: N must be >= 1");
  // Neumaier-compensated running sum of the recurrence values
  double c = 1.0, sum = 0.0, comp = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    c *= static_cast<double>(2 * n - 1) / static_cast<double>(2 * n);
    const double term = c * c;
    const double t = sum + term;
    comp += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  CollisionTime out;
  out.N = N;
  out.value = sum + comp;
  out.residual = out.value - (std::log(static_cast<double>(N)) + CollisionTimeConstant::alpha) / std::numbers::pi;
  return out;
}

double heat_kernel_approx(std::int64_t n, LatticePoint x) {
  if (n < 1) throw std::invalid_argument("heat_kernel_approx: n must be >= 1");
  if (parity(n, x) != 0) return 0.0;
  const double nd = static_cast<double>(n);
  return 2.0 * std::exp(-x.norm2() / nd) / (std::numbers::pi * nd);
}

DeviationEstimate max_deviation_estimate(std::int64_t n, double R, std::int64_t replicates, std::uint64_t seed,
                                         unsigned workers) {
  if (n < 1 || !(R > 0.0) || replicates < 1) throw std::invalid_argument("max_deviation_estimate: bad arguments");
  // rotated coordinates u = x1 + x2, v = x1 - x2 move by independent +-1 steps,
  // and |S|^2 = (u^2 + v^2) / 2
  const double threshold = 2.0 * R * R * static_cast<double>(n);
  std::vector<unsigned char> hit(static_cast<std::size_t>(replicates), 0);
  parallel_for(hit.size(), workers, [&](std::size_t rep) {
    CounterRng rng({seed, static_cast<std::uint32_t>(rep), 0});
    std::int64_t u = 0, v = 0, done = 0;
    while (done < n) {
      std::uint64_t w = rng();
      const std::int64_t batch = std::min<std::int64_t>(32, n - done);
      for (std::int64_t k = 0; k < batch; ++k, w >>= 2) {
        u += (w & 1) ? 1 : -1;
        v += (w & 2) ? 1 : -1;
        if (static_cast<double>(u * u + v * v) > threshold) {
          hit[rep] = 1;
          return;
        }
      }
      done += batch;
    }
  });
  DeviationEstimate est;
  est.replicates = replicates;
  for (auto h : hit) est.hits += h;
  est.probability = static_cast<double>(est.hits) / static_cast<double>(replicates);
  est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(replicates));
  return est;
}

double box_exit_bound(std::int64_t N, std::int64_t radius) {
  if (N < 0 || radius < 0) throw std::invalid_argument("box_exit_bound: bad arguments");
  if (radius >= N) return 0.0;
  // x1 after N steps is half a sum of 2N fair signs: P(x1 = k) = C(2N, N+k) 4^-N
  const double twoN = 2.0 * static_cast<double>(N);
  auto log_term = [&](std::int64_t k) {
    return std::lgamma(twoN + 1.0) - std::lgamma(static_cast<double>(N + k) + 1.0) -
           std::lgamma(static_cast<double>(N - k) + 1.0) - twoN * std::numbers::ln2;
  };
  double tail = 0.0;
  for (std::int64_t k = radius + 1; k <= N; ++k) {
    const double term = std::exp(log_term(k));
    tail += term;
    if (term < 1e-18 * tail) break;
  }
  return std::min(1.0, 8.0 * tail);
}

std::int64_t tail_radius(std::int64_t N, double cap) {
  if (N < 1 || !(cap > 0.0)) throw std::invalid_argument("tail_radius: bad arguments");
  std::int64_t lo = 1, hi = std::max<std::int64_t>(1, N);
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (box_exit_bound(N, mid) <= cap)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace colltime
