#include "colltime/replica.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace colltime {

BetaMatrix::BetaMatrix(int h, double value) : h_(h) {
  if (h < 2) throw std::invalid_argument("BetaMatrix: h must be >= 2");
  values_.assign(static_cast<std::size_t>(h * (h - 1) / 2), value);
  validate();
}

BetaMatrix::BetaMatrix(int h, std::vector<double> pair_values) : h_(h), values_(std::move(pair_values)) {
  if (h < 2) throw std::invalid_argument("BetaMatrix: h must be >= 2");
  if (values_.size() != static_cast<std::size_t>(h * (h - 1) / 2))
    throw std::invalid_argument("BetaMatrix: expected h(h-1)/2 pair values");
  validate();
}

std::size_t BetaMatrix::pair_index(int h, int i, int j) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= h || i == j) throw std::out_of_range("BetaMatrix: bad pair index");
  // pairs (0,1),(0,2),...,(0,h-1),(1,2),...
  return static_cast<std::size_t>(i * (2 * h - i - 1) / 2 + (j - i - 1));
}

void BetaMatrix::set(int i, int j, double v) {
  values_[index(i, j)] = v;
  validate();
}

double BetaMatrix::bar_beta() const {
  if (values_.empty()) return 0.0;
  return *std::max_element(values_.begin(), values_.end());
}

void BetaMatrix::validate() const {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("BetaMatrix: coupling must be finite");
    if (!(v < 1.0)) throw std::invalid_argument("BetaMatrix: every coupling must be < 1, got " + std::to_string(v));
  }
}

double scaled_exponent(double beta, std::int64_t N) {
  if (N <= 1) throw std::invalid_argument("sigma: N must be >= 2 (log N > 0)");
  return std::numbers::pi * beta / std::log(static_cast<double>(N));
}

double sigma(double beta, std::int64_t N) { return std::expm1(scaled_exponent(beta, N)); }

// ---------------------------------------------------------------------------

PairKernel::PairKernel(std::int64_t N, std::int64_t spatial_horizon) : N_(N) {
  if (N < 1) throw std::invalid_argument("PairKernel: N must be >= 1");
  spatial_N_ = spatial_horizon < 0 ? N : std::min(N, spatial_horizon);
  diag_ = diagonal_returns(N);
  R_N_ = expected_collision_time(N).value;

  rows_.resize(static_cast<std::size_t>(spatial_N_ + 1));
  cdfs_.resize(rows_.size());
  std::vector<double> b{1.0}, next;
  for (std::int64_t n = 0; n <= spatial_N_; ++n) {
    if (n > 0) {
      next.assign(static_cast<std::size_t>(n + 1), 0.0);
      for (std::int64_t k = 0; k <= n; ++k) {
        const double left = k > 0 ? b[static_cast<std::size_t>(k - 1)] : 0.0;
        const double right = k < n ? b[static_cast<std::size_t>(k)] : 0.0;
        next[static_cast<std::size_t>(k)] = 0.5 * (left + right);
      }
      b.swap(next);
    }
    auto& sq = rows_[static_cast<std::size_t>(n)];
    sq.resize(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) sq[k] = b[k] * b[k];
    auto& cdf = cdfs_[static_cast<std::size_t>(n)];
    cdf.resize(sq.size());
    double run = 0.0, total = 0.0;
    for (double v : sq) total += v;
    for (std::size_t k = 0; k < sq.size(); ++k) {
      run += sq[k];
      cdf[k] = run / total;
    }
    cdf.back() = 1.0;
  }
}

std::span<const double> PairKernel::row_squared(std::int64_t n) const {
  if (n < 0 || n > spatial_N_) throw std::out_of_range("PairKernel: n beyond spatial horizon");
  return rows_[static_cast<std::size_t>(n)];
}

std::span<const double> PairKernel::row_squared_cdf(std::int64_t n) const {
  if (n < 0 || n > spatial_N_) throw std::out_of_range("PairKernel: n beyond spatial horizon");
  return cdfs_[static_cast<std::size_t>(n)];
}

double PairKernel::squared(std::int64_t n, LatticePoint x) const {
  const std::int64_t u = x.x1 + x.x2;
  const std::int64_t v = x.x1 - x.x2;
  if (parity(n, x) != 0 || std::abs(u) > n || std::abs(v) > n) return 0.0;
  const auto row = row_squared(n);
  return row[static_cast<std::size_t>((u + n) / 2)] * row[static_cast<std::size_t>((v + n) / 2)];
}

// ---------------------------------------------------------------------------

std::vector<double> replica_marginals(std::int64_t N, double beta, std::span<const double> diagonal) {
  if (!(beta < 1.0)) throw std::invalid_argument("replica_marginals: beta must be < 1");
  return replica_marginals_from_sigma(N, sigma(beta, N), diagonal);
}

std::vector<double> replica_marginals_from_sigma(std::int64_t N, double s, std::span<const double> diagonal) {
  if (N < 1) throw std::invalid_argument("replica_marginals: N must be >= 1");
  if (diagonal.size() < static_cast<std::size_t>(N + 1))
    throw std::invalid_argument("replica_marginals: diagonal table too short");
  std::vector<double> U(static_cast<std::size_t>(N + 1), 0.0);
  U[0] = 1.0;
  const double* q = diagonal.data();
  for (std::int64_t n = 1; n <= N; ++n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::int64_t m = 0;
    for (; m + 3 < n; m += 4) {
      acc[0] += U[static_cast<std::size_t>(m)] * q[n - m];
      acc[1] += U[static_cast<std::size_t>(m + 1)] * q[n - m - 1];
      acc[2] += U[static_cast<std::size_t>(m + 2)] * q[n - m - 2];
      acc[3] += U[static_cast<std::size_t>(m + 3)] * q[n - m - 3];
    }
    for (; m < n; ++m) acc[0] += U[static_cast<std::size_t>(m)] * q[n - m];
    U[static_cast<std::size_t>(n)] = s * ((acc[0] + acc[1]) + (acc[2] + acc[3]));
  }
  return U;
}

std::vector<double> replica_marginals(std::int64_t N, double beta) {
  const auto q = diagonal_returns(N);
  return replica_marginals(N, beta, q);
}

double replica_total(std::int64_t N, double beta) {
  const auto U = replica_marginals(N, beta);
  double s = 0.0;
  for (double u : U) s += u;
  return s;
}

ReplicaTable build_replica_table(std::int64_t N, double beta, std::int64_t radius, const ReplicaOptions& options) {
  if (N < 2) throw std::invalid_argument("build_replica_table: N must be >= 2");
  if (!(beta < 1.0)) throw std::invalid_argument("build_replica_table: beta must be < 1");
  if (radius < 1) throw std::invalid_argument("build_replica_table: radius must be >= 1");
  const bool with_spatial = options.spatial && N <= options.spatial_limit;

  std::shared_ptr<const PairKernel> kernel = options.kernel;
  if (!kernel || kernel->horizon() < N || (with_spatial && kernel->spatial_horizon() < N))
    kernel = std::make_shared<PairKernel>(N, with_spatial ? N : 0);

  ReplicaTable t;
  t.N_ = N;
  t.beta_ = beta;
  t.sigma_ = sigma(beta, N);
  t.radius_ = radius;
  t.marginal_ = replica_marginals(N, beta, kernel->diagonals());
  t.deficit_.assign(static_cast<std::size_t>(N + 1), 0.0);
  if (!with_spatial) return t;

  const double s = t.sigma_;
  auto& G = t.spatial_;
  G.resize(static_cast<std::size_t>(N + 1));
  G[0] = {1.0};
  std::vector<double> tmp;
  for (std::int64_t n = 1; n <= N; ++n) {
    const std::size_t side = static_cast<std::size_t>(n + 1);
    auto& out = G[static_cast<std::size_t>(n)];
    out.assign(side * side, 0.0);
    for (std::int64_t m = 0; m < n; ++m) {
      const auto& src = G[static_cast<std::size_t>(m)];
      const std::size_t ms = static_cast<std::size_t>(m + 1);
      const auto row = kernel->row_squared(n - m);
      const std::size_t ks = row.size();
      // pass along u: tmp[i'][j] = sum_i src[i][j] row[i' - i]
      tmp.assign(side * ms, 0.0);
      for (std::size_t i = 0; i < ms; ++i)
        for (std::size_t k = 0; k < ks; ++k) {
          const double w = row[k];
          double* dst = &tmp[(i + k) * ms];
          const double* in = &src[i * ms];
          for (std::size_t j = 0; j < ms; ++j) dst[j] += w * in[j];
        }
      // pass along v
      for (std::size_t ip = 0; ip < side; ++ip) {
        const double* in = &tmp[ip * ms];
        double* dst = &out[ip * side];
        for (std::size_t j = 0; j < ms; ++j) {
          const double w = s * in[j];
          if (w == 0.0) continue;
          for (std::size_t k = 0; k < ks; ++k) dst[j + k] += w * row[k];
        }
      }
    }
    // keep the box |x|_inf <= radius
    if (radius < n) {
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          const std::int64_t u = 2 * static_cast<std::int64_t>(i) - n;
          const std::int64_t v = 2 * static_cast<std::int64_t>(j) - n;
          const LatticePoint x{(u + v) / 2, (u - v) / 2};
          if (x.linf() > radius) out[i * side + j] = 0.0;
        }
    }
    double mass = 0.0;
    for (double w : out) mass += w;
    t.deficit_[static_cast<std::size_t>(n)] = t.marginal_[static_cast<std::size_t>(n)] - mass;
  }
  if (options.truncation.strict) {
    double worst = 0.0;
    for (double d : t.deficit_) worst = std::max(worst, std::abs(d));
    if (worst > options.truncation.cap)
      throw TruncationError("replica table radius " + std::to_string(radius) + " loses " + std::to_string(worst),
                            worst, options.truncation.cap);
  }
  return t;
}

double ReplicaTable::spatial(std::int64_t n, LatticePoint x) const {
  if (!has_spatial()) throw std::logic_error("ReplicaTable: spatial table was not built");
  if (n < 0 || n > N_) throw std::out_of_range("ReplicaTable: n out of range");
  const std::int64_t u = x.x1 + x.x2;
  const std::int64_t v = x.x1 - x.x2;
  if (parity(n, x) != 0 || std::abs(u) > n || std::abs(v) > n) return 0.0;
  const std::size_t side = static_cast<std::size_t>(n + 1);
  return spatial_[static_cast<std::size_t>(n)][static_cast<std::size_t>((u + n) / 2) * side +
                                               static_cast<std::size_t>((v + n) / 2)];
}

double ReplicaTable::total() const {
  double s = 0.0;
  for (double u : marginal_) s += u;
  return s;
}

CrudeBoundReport crude_bound_check(std::int64_t N, const BetaMatrix& betas, std::int64_t replica_limit) {
  if (N < 2) throw std::invalid_argument("crude_bound_check: N must be >= 2");
  CrudeBoundReport r;
  r.N = N;
  r.bar_beta = betas.bar_beta();
  r.sigma = sigma(r.bar_beta, N);
  r.collision_time = expected_collision_time(N).value;
  // sum_{n,y} Q^{I;J}_n(x, y) = sum_n q_{2n}(0) = R_N for a pair partition J
  r.q_side = r.sigma * r.collision_time;
  r.geometric_bound = r.q_side < 1.0 ? 1.0 / (1.0 - r.q_side) : std::numeric_limits<double>::infinity();
  r.min_feasible_beta_prime = r.q_side;
  if (N <= replica_limit) {
    r.replica_sum = replica_total(N, r.bar_beta);
    r.min_feasible_beta_prime = std::max(r.q_side, 1.0 - 1.0 / *r.replica_sum);
  }
  return r;
}

}  // namespace colltime
