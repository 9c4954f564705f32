#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "colltime/errors.hpp"
#include "colltime/lattice.hpp"
#include "colltime/montecarlo.hpp"

namespace colltime {

/// i.i.d. standard normal field omega(n, x), 1 <= n <= N, |x|_inf <= radius.
///
/// Nothing is stored: omega(n, x1, .) is produced from counter streams keyed by
/// (seed, index, n) whose block offset encodes x1, the sign of x2 and the
/// parity class of (n, x). Each half-row is read outward from x2 = 0, so a value
/// only depends on (seed, index, n, x) and not on how much of the box is read.
class Environment {
 public:
  Environment(std::int64_t N, std::int64_t radius, std::uint64_t seed, std::uint32_t index = 0);

  std::int64_t horizon() const { return N_; }
  std::int64_t radius() const { return radius_; }
  std::uint64_t seed() const { return seed_; }
  std::uint32_t index() const { return index_; }

  double omega(std::int64_t n, LatticePoint x) const;

  /// omega(n, (x1, x2)) for the x2 in [lo, hi] with n + x1 + x2 even, in
  /// increasing x2; out must hold one slot per such x2.
  void fill_row(std::int64_t n, std::int64_t x1, std::int64_t lo, std::int64_t hi, double* out) const;

 private:
  std::int64_t N_;
  std::int64_t radius_;
  std::uint64_t seed_;
  std::uint32_t index_;
};

struct PartitionSample {
  double Z = 0.0;
  double beta = 0.0;  ///< inverse temperature used in the weights
  std::int64_t N = 0;
  LatticePoint start{};
  std::uint32_t environment = 0;
  double truncation_deficit = 0.0;
};

struct PolymerOptions {
  /// Box half-width; negative selects tail_radius(N, truncation.cap).
  std::int64_t radius = -1;
  TruncationPolicy truncation{};
  unsigned workers = 1;
};

/// Z_{N,beta}(x) = E_x[exp(sum_n beta omega(n, S_n) - beta^2 / 2)] by the forward DP
/// u_n(y) = e^{beta omega(n,y) - beta^2/2} sum_z q_1(y - z) u_{n-1}(z), u_0 = delta_x.
PartitionSample partition_function(std::int64_t N, double beta, const Environment& env, LatticePoint x = {});

/// Same environment, one DP per beta, run in lockstep.
std::vector<PartitionSample> partition_functions(std::int64_t N, std::span<const double> betas,
                                                 const Environment& env, LatticePoint x = {});

/// beta_N = beta sqrt(pi / log N).
double polymer_scaled_beta(double beta, std::int64_t N);

/// Z_{N, beta_{i,N}}(0) for every environment e = 0..replicates-1 (environment
/// index e, shared by all i); result[e][i].
std::vector<std::vector<PartitionSample>> sample_partition_functions(std::int64_t N, std::span<const double> betas,
                                                                     std::int64_t replicates, std::uint64_t seed,
                                                                     const PolymerOptions& options = {});

/// Mean of Z_{N,beta_N}^h over environments.
LaplaceEstimate moment_estimate(std::int64_t N, double beta, int h, std::int64_t replicates, std::uint64_t seed,
                                const PolymerOptions& options = {});
/// Mean of prod_i Z_{N,beta_{i,N}} with one shared environment per replicate.
LaplaceEstimate mixed_moment_estimate(std::int64_t N, std::span<const double> betas, std::int64_t replicates,
                                      std::uint64_t seed, const PolymerOptions& options = {});

/// Moment estimates from precomputed samples (one row per environment).
LaplaceEstimate moment_from_samples(const std::vector<std::vector<PartitionSample>>& samples, int power);
LaplaceEstimate mixed_moment_from_samples(const std::vector<std::vector<PartitionSample>>& samples);

/// E[prod_i Z_{N,beta_i}] with omega integrated out site by site, by enumerating
/// the 4^{hN} path tuples (h N <= 12). Walks sharing a site contribute
/// exp(sum_{i<j} beta_i beta_j) there.
double gaussian_moment_exact(std::int64_t N, std::span<const double> betas);

/// One record per line: {"environment", "N", "beta", "start", "Z", "truncation_deficit"}.
void write_partition_ndjson(std::ostream& out, const std::vector<std::vector<PartitionSample>>& samples);

}  // namespace colltime
