#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "colltime/errors.hpp"
#include "colltime/lattice.hpp"
#include "colltime/rng.hpp"

namespace colltime {

/// Pair couplings beta(i, j), 0 <= i < j < h (zero-based walk labels).
class BetaMatrix {
 public:
  BetaMatrix() = default;
  /// All pairs set to `value`.
  BetaMatrix(int h, double value);
  /// Pair values in lexicographic order (0,1), (0,2), ..., (h-2,h-1).
  BetaMatrix(int h, std::vector<double> pair_values);

  int h() const { return h_; }
  std::size_t pair_count() const { return values_.size(); }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  void set(int i, int j, double v);
  double bar_beta() const;
  std::span<const double> pair_values() const { return values_; }

  static std::size_t pair_index(int h, int i, int j);
  std::size_t index(int i, int j) const { return pair_index(h_, i, j); }

  friend bool operator==(const BetaMatrix&, const BetaMatrix&) = default;

 private:
  void validate() const;
  int h_ = 0;
  std::vector<double> values_;
};

/// sigma_N(beta) = exp(pi beta / log N) - 1.
double sigma(double beta, std::int64_t N);
/// pi beta / log N, the per-collision exponent.
double scaled_exponent(double beta, std::int64_t N);

/// q_n(x)^2 for all n <= N, shared by the replica recursion and the renewal law.
///
/// In rotated coordinates u = x1 + x2, v = x1 - x2 the walk is a product of two
/// independent +-1 walks, so q_n(x)^2 = b_n(u)^2 b_n(v)^2 with
/// b_n(u) = C(n, (n+u)/2) 2^-n. The 1-D rows are built by Pascal's rule.
class PairKernel {
 public:
  /// `spatial_horizon` bounds the n for which the 1-D rows are materialized
  /// (memory grows like spatial_horizon^2 / 2); the diagonal is always complete.
  explicit PairKernel(std::int64_t N, std::int64_t spatial_horizon = -1);

  std::int64_t horizon() const { return N_; }
  std::int64_t spatial_horizon() const { return spatial_N_; }
  double collision_time() const { return R_N_; }

  /// q_{2n}(0) = sum_x q_n(x)^2.
  double diagonal(std::int64_t n) const { return diag_[static_cast<std::size_t>(n)]; }
  std::span<const double> diagonals() const { return diag_; }

  /// b_n(u)^2 indexed by k = (u + n) / 2, k = 0..n.
  std::span<const double> row_squared(std::int64_t n) const;
  std::span<const double> row_squared_cdf(std::int64_t n) const;

  double squared(std::int64_t n, LatticePoint x) const;

 private:
  std::int64_t N_;
  std::int64_t spatial_N_;
  double R_N_ = 0.0;
  std::vector<double> diag_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> cdfs_;
};

struct ReplicaOptions {
  /// Build U(n, x) only when N is at most this.
  std::int64_t spatial_limit = 128;
  bool spatial = true;
  TruncationPolicy truncation{};
  std::shared_ptr<const PairKernel> kernel{};
};

/// Replica weights U_N^beta(n, x) and their marginals U_N^beta(n).
///
/// The marginal obeys U(0) = 1, U(n) = sigma sum_{m<n} U(m) q_{2(n-m)}(0) and
/// is exact for every N. The spatial table follows
/// U(n, x) = sigma sum_{m<n} sum_z U(m, z) q_{n-m}(x - z)^2, computed as a
/// separable convolution in rotated coordinates and kept for sites inside
/// |x|_inf <= radius; it is only built when N <= spatial limit.
class ReplicaTable {
 public:
  std::int64_t horizon() const { return N_; }
  double beta() const { return beta_; }
  double sigma() const { return sigma_; }
  std::int64_t radius() const { return radius_; }

  std::span<const double> marginals() const { return marginal_; }
  double marginal(std::int64_t n) const { return marginal_.at(static_cast<std::size_t>(n)); }

  bool has_spatial() const { return !spatial_.empty(); }
  double spatial(std::int64_t n, LatticePoint x) const;
  /// marginal(n) - sum of in-box spatial weights.
  double truncation_deficit(std::int64_t n) const { return deficit_.at(static_cast<std::size_t>(n)); }

  double total() const;

 private:
  friend ReplicaTable build_replica_table(std::int64_t, double, std::int64_t, const ReplicaOptions&);
  friend ReplicaTable read_replica_binary(std::istream&);
  friend void write_binary(std::ostream&, const ReplicaTable&);
  std::int64_t N_ = 0;
  double beta_ = 0.0;
  double sigma_ = 0.0;
  std::int64_t radius_ = 0;
  std::vector<double> marginal_;
  // spatial_[n] holds (n+1)^2 rotated-grid values, u-major, index (u+n)/2
  std::vector<std::vector<double>> spatial_;
  std::vector<double> deficit_;
};

ReplicaTable build_replica_table(std::int64_t N, double beta, std::int64_t radius, const ReplicaOptions& options = {});

/// U_N^beta(n), n = 0..N, by the renewal recursion only.
std::vector<double> replica_marginals(std::int64_t N, double beta, std::span<const double> diagonal);
std::vector<double> replica_marginals(std::int64_t N, double beta);
/// Same recursion with an explicit collision weight; also defined for N = 1,
/// where sigma_N itself is not.
std::vector<double> replica_marginals_from_sigma(std::int64_t N, double sigma, std::span<const double> diagonal);

/// sum_{n=0}^N U_N^beta(n) = E[exp(pi beta L_N / log N)].
double replica_total(std::int64_t N, double beta);

// ---------------------------------------------------------------------------
// Renewal representation

/// Step law P((T, X) = (n, x)) = q_n(x)^2 / R_N on 1 <= n <= N.
class RenewalLaw {
 public:
  RenewalLaw(std::shared_ptr<const PairKernel> kernel, std::int64_t radius);

  std::int64_t horizon() const { return kernel_->horizon(); }
  std::int64_t radius() const { return radius_; }
  double collision_time() const { return kernel_->collision_time(); }
  const PairKernel& kernel() const { return *kernel_; }

  double probability(std::int64_t n, LatticePoint x) const;
  /// P(T = n) = q_{2n}(0) / R_N.
  double time_marginal(std::int64_t n) const;
  /// Total in-box mass, 1 minus the spatial truncation deficit.
  double total_mass() const;
  double mean_time() const;

 private:
  std::shared_ptr<const PairKernel> kernel_;
  std::int64_t radius_;
};

RenewalLaw renewal_step_law(std::int64_t N, std::int64_t radius);

/// P(tau_k = n) for k = 0..k_max, n = 0..N; row k is the k-fold convolution
/// of the time marginal.
class RenewalConvolution {
 public:
  std::int64_t horizon() const { return N_; }
  int k_max() const { return static_cast<int>(rows_.size()) - 1; }
  double operator()(int k, std::int64_t n) const {
    return rows_.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(n));
  }
  /// sum_{k<=k_max} (sigma R_N)^k P(tau_k = n).
  std::vector<double> series_marginals(double sigma_times_R) const;

 private:
  friend RenewalConvolution renewal_convolution(std::int64_t, int, std::span<const double>);
  std::int64_t N_ = 0;
  std::vector<std::vector<double>> rows_;
};

RenewalConvolution renewal_convolution(std::int64_t N, int k_max, std::span<const double> diagonal);
RenewalConvolution renewal_convolution(std::int64_t N, int k_max);

/// Smallest k_max with (sigma R)^{k_max+1} / (1 - sigma R) < tol; throws when sigma R >= 1.
int renewal_kmax(double sigma_times_R, double tol = 1e-12);
/// Same, capped at the horizon: tau_k >= k, so k <= N terms are exact for any sigma R.
int renewal_terms(double sigma_times_R, std::int64_t horizon, double tol = 1e-12);

struct RenewalJump {
  std::int64_t T = 0;
  LatticePoint X{};
};

struct RenewalPath {
  std::vector<RenewalJump> jumps;
  std::vector<std::int64_t> tau;        ///< tau_0 = 0, tau_k
  std::vector<LatticePoint> position;   ///< S_0 = 0, S_k
};

/// Exact sampler for the step law (alias table for T, inverse CDF for the two
/// rotated coordinates of X given T).
class RenewalSampler {
 public:
  explicit RenewalSampler(std::shared_ptr<const PairKernel> kernel);

  RenewalJump draw(CounterRng& rng) const;
  /// i.i.d. jumps while tau stays <= N; the overshooting jump is dropped.
  RenewalPath path(CounterRng& rng) const;

 private:
  std::shared_ptr<const PairKernel> kernel_;
  std::vector<double> alias_prob_;
  std::vector<std::int64_t> alias_;
};

RenewalPath sample_renewal(std::int64_t N, CounterRng& rng);

/// Observed constant C in P(tau_k = n) <= C k q_{2n}(0) / R_N.
double renewal_density_constant(const RenewalConvolution& conv, std::span<const double> diagonal, double R_N);

// ---------------------------------------------------------------------------

struct CrudeBoundReport {
  std::int64_t N = 0;
  double bar_beta = 0.0;
  double sigma = 0.0;
  double collision_time = 0.0;
  double q_side = 0.0;                     ///< sigma_N(bar beta) R_N
  std::optional<double> replica_sum;       ///< sum_n U_N^{bar beta}(n), when N is within budget
  double geometric_bound = 0.0;            ///< 1 / (1 - sigma R_N), infinite when sigma R_N >= 1
  double min_feasible_beta_prime = 0.0;
};

/// Both left-hand sides of the crude bounds at the largest coupling.
/// The replica sum is evaluated exactly when N <= replica_limit.
CrudeBoundReport crude_bound_check(std::int64_t N, const BetaMatrix& betas, std::int64_t replica_limit = 200000);

// "CLTR" magic, endianness tag and version as for the kernel table, then int64 N,
// int64 radius, double beta, double sigma, int64 has_spatial, the N+1 marginals,
// the N+1 deficits and, when has_spatial, the rotated grids: (n+1)^2 doubles
// for n = 0..N, u-major with index ((u+n)/2, (v+n)/2).
void write_binary(std::ostream& out, const ReplicaTable& table);
ReplicaTable read_replica_binary(std::istream& in);
/// CSV columns n,marginal,truncation_deficit.
void write_marginals_csv(std::ostream& out, const ReplicaTable& table);

}  // namespace colltime
