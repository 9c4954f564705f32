#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "colltime/replica.hpp"
#include "colltime/stats.hpp"

namespace colltime {

/// Collision counts L(i, j) of one replicate, stored in BetaMatrix pair order.
struct CollisionSample {
  std::int64_t replicate = 0;
  int h = 0;
  std::int64_t N = 0;
  std::vector<std::int64_t> L;

  std::int64_t operator()(int i, int j) const { return L[BetaMatrix::pair_index(h, i, j)]; }
  friend bool operator==(const CollisionSample&, const CollisionSample&) = default;
};

/// Runs h walks for N steps per replicate and counts coincidences per pair.
/// Walk w of replicate r draws from the counter stream (seed, r, w), two bits
/// per step, so every sample depends only on (seed, replicate) and never on
/// `workers`. Replicates are numbered first_replicate, first_replicate + 1, ...
std::vector<CollisionSample> simulate_collisions(std::int64_t N, int h, std::int64_t replicates, std::uint64_t seed,
                                                 unsigned workers = 1, std::int64_t first_replicate = 0);

/// One sample per line: {"replicate", "h", "N", "L"} with L the full h x h
/// matrix in row-major order (zero diagonal).
void write_samples_ndjson(std::ostream& out, std::span<const CollisionSample> samples);
std::vector<CollisionSample> read_samples_ndjson(std::istream& in);

/// Y(i, j) = pi L(i, j) / log N (natural log), BetaMatrix pair order.
struct RescaledSample {
  int h = 0;
  std::int64_t N = 0;
  std::vector<double> Y;
};

RescaledSample rescale(const CollisionSample& sample);
/// Y of pair p across samples.
std::vector<double> rescaled_pair(std::span<const CollisionSample> samples, std::size_t pair);
/// sum over pairs of Y, per sample.
std::vector<double> rescaled_total(std::span<const CollisionSample> samples);

struct LaplaceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::int64_t replicates = 0;
  std::vector<double> betas;
  std::string provenance;  ///< "monte-carlo" or "exact"
  std::string warning;

  nlohmann::json to_json() const;
};

/// Sample mean of exp(sum_{i<j} pi beta_ij L(i, j) / log N).
LaplaceEstimate empirical_laplace(std::span<const CollisionSample> samples, const BetaMatrix& betas);

struct GofReport {
  std::string kind;       ///< "ks", "chi-square" or "correlation"
  double value = 0.0;
  std::int64_t sample_size = 0;
  std::string reference;  ///< reference law or quantity
  double critical_value = 0.0;  ///< at the 1% level (KS, chi-square p-value threshold for chi-square)
  double p_value = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double lower = 0.0;  ///< confidence bounds for correlations
  double upper = 0.0;
  double standard_error = 0.0;

  bool passes() const;  ///< KS below the 1% critical value, chi-square p >= 0.01
  nlohmann::json to_json() const;
};

/// KS against Exp(1), plus sample mean and variance; needs >= 1000 values.
GofReport test_exponential(std::span<const double> rescaled);
/// KS of the rescaled totals against Gamma(h(h-1)/2, 1).
GofReport test_gamma_total(std::span<const CollisionSample> samples, int h);
/// KS of arbitrary values against Gamma(shape, 1).
GofReport test_gamma(std::span<const double> values, double shape);

struct FactorizationGap {
  double beta = 0.0;
  double joint = 0.0;    ///< M^(beta)
  double product = 0.0;  ///< prod over pairs of the pair estimates
  double gap = 0.0;      ///< |joint - product|
  double signed_gap = 0.0;
  double standard_error = 0.0;  ///< delta method on the same samples
};

struct IndependenceReport {
  struct PairCorrelation {
    std::size_t p = 0, q = 0;  ///< pair indices
    GofReport report;
  };
  std::vector<PairCorrelation> correlations;
  std::vector<FactorizationGap> gaps;

  nlohmann::json to_json() const;
};

/// Pearson correlations between all pairs of rescaled coordinates, and the
/// factorization gap for every beta in `beta_grid` (all couplings equal).
IndependenceReport test_pairwise_independence(std::span<const CollisionSample> samples,
                                              std::span<const double> beta_grid = {});

FactorizationGap factorization_gap(std::span<const CollisionSample> samples, const BetaMatrix& betas);

}  // namespace colltime
