#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "colltime/errors.hpp"
#include "colltime/lattice.hpp"
#include "colltime/replica.hpp"

namespace colltime {

/// Law of one step of S^(1) - S^(2): nine points.
struct DifferenceStepLaw {
  struct Atom {
    LatticePoint z;
    double p;
  };
  static constexpr std::array<Atom, 9> support{{{{0, 0}, 0.25},
                                                {{2, 0}, 0.0625},
                                                {{-2, 0}, 0.0625},
                                                {{0, 2}, 0.0625},
                                                {{0, -2}, 0.0625},
                                                {{1, 1}, 0.125},
                                                {{1, -1}, 0.125},
                                                {{-1, 1}, 0.125},
                                                {{-1, -1}, 0.125}}};
  static double probability(LatticePoint z);
};

/// How a coupling is turned into the per-collision exponent.
/// raw: used as is. scaled: beta -> pi beta / log N.
enum class ExponentScale { raw, scaled };

double resolve_exponent(double beta, ExponentScale scale, std::int64_t N);

struct ExactOptions {
  /// Box half-width on the difference lattice; negative selects the default.
  std::int64_t radius = -1;
  TruncationPolicy truncation{};
  /// Memory guard for the 4-D DPs.
  std::size_t memory_limit_bytes = std::size_t{1} << 30;
};

struct ExactResult {
  std::string op;
  nlohmann::json params = nlohmann::json::object();
  double value = 0.0;
  double truncation_deficit = 0.0;
  double runtime = 0.0;  ///< seconds

  nlohmann::json to_json() const;
};

/// E[exp(b L_N)] for one pair by the weighted difference-walk DP
/// v_n(x) = e^{b 1{x=0}} sum_z p(z) v_{n-1}(x - z), v_0 = delta_0.
/// Default radius min(ceil(8 sqrt N), 2N).
ExactResult laplace_pair_exact(std::int64_t N, double beta, ExponentScale scale = ExponentScale::scaled,
                               const ExactOptions& options = {});

enum class TripleStencil {
  separable,  ///< halved rotated coordinates, one 7-point pass per axis
  joint64     ///< unfactored 64-outcome law in original coordinates
};

/// E[exp(b12 L12 + b13 L13 + b23 L23)] for three walks, DP on (D12, D23).
/// betas are ordered (12, 13, 23) like BetaMatrix. For the separable stencil
/// the radius bounds each halved rotated coordinate of D12 and D23; for joint64
/// it bounds the original coordinates.
ExactResult laplace_triple_exact(std::int64_t N, std::array<double, 3> betas,
                                 ExponentScale scale = ExponentScale::scaled, const ExactOptions& options = {},
                                 TripleStencil stencil = TripleStencil::separable);

/// Sum over all 4^{hN} path tuples of exp(sum_{i<j} b_ij L_ij) / 4^{hN}.
/// `raw_exponents` holds b_ij in BetaMatrix pair order. Refuses h N > 12.
double brute_force_laplace(std::int64_t N, int h, std::span<const double> raw_exponents);

/// Exact law P(L_N = l), l = 0..N, of one pair's collision count (difference-walk
/// DP on an untruncated box; N <= 32).
std::vector<double> pair_local_time_law(std::int64_t N);

// ---------------------------------------------------------------------------
// Chaos expansion

/// Sequence of walk pairs {i_k, j_k} (zero-based, i < j) with consecutive
/// entries distinct.
class PartitionSeq {
 public:
  PartitionSeq(int h, std::vector<std::pair<int, int>> pairs);

  int h() const { return h_; }
  std::size_t length() const { return pairs_.size(); }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  /// p(m) = max{k < m : pair_k = pair_m}, 0 if none; positions are 1-based.
  std::size_t predecessor(std::size_t m) const { return pred_.at(m - 1); }

  /// Every sequence of length r over the h(h-1)/2 pairs with consecutive entries distinct.
  static std::vector<PartitionSeq> enumerate(int h, std::size_t r);

 private:
  int h_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<std::size_t> pred_;
};

enum class ChaosMode { all, two_body, multi };
/// exact: inclusion-exclusion weight, so that 1 + sum_r H_r is the Laplace
/// transform. product: prod of sigma over the coincident pairs of the block.
enum class CollisionWeight { exact, product };

const char* to_string(ChaosMode mode);
ChaosMode parse_chaos_mode(const std::string& text);

struct ChaosTerm {
  std::int64_t r = 0;
  double value = 0.0;
  ChaosMode mode = ChaosMode::all;
};

struct ChaosSeries {
  std::int64_t N = 0;
  int h = 0;
  ChaosMode mode = ChaosMode::all;
  std::vector<double> terms;  ///< terms[r - 1] = H_r, r = 1..r_max
  double truncation_deficit = 0.0;
  std::int64_t radius = 0;

  /// 1 + sum of the terms.
  double partial_sum() const;
};

/// H_{r,N} for r = 1..r_max: expected weight of the configurations with exactly
/// r marked (time, block) collisions, from a time DP on the difference lattice
/// that carries the number of marks. h is 2 or 3; sigmas in BetaMatrix order.
ChaosSeries chaos_terms_from_sigma(std::int64_t N, int h, std::span<const double> sigmas, int r_max,
                                   ChaosMode mode = ChaosMode::all, CollisionWeight weight = CollisionWeight::exact,
                                   const ExactOptions& options = {});
ChaosSeries chaos_terms(std::int64_t N, const BetaMatrix& betas, int r_max, ChaosMode mode = ChaosMode::all,
                        CollisionWeight weight = CollisionWeight::exact, const ExactOptions& options = {});
ChaosTerm chaos_term(std::int64_t N, int r, const BetaMatrix& betas, ChaosMode mode = ChaosMode::all,
                     CollisionWeight weight = CollisionWeight::exact, const ExactOptions& options = {});

// ---------------------------------------------------------------------------
// Rewired series

struct RewiredResult {
  double value = 0.0;                ///< 1 + sum_{r=1}^{r_max} of the rewired terms
  std::vector<double> by_order;      ///< by_order[r - 1]
  double upper_bound = 0.0;          ///< prod over pairs of E[exp(beta_N L_N)]
  double gap = 0.0;                  ///< upper_bound - value
};

/// Spatially summed rewired series with replicas built from U_N(n).
/// First replica starts at 0 and holds at least one collision; each later
/// replica m opens at a_m > b_{m-1} and is linked to the previous appearance of
/// its pair (time 0 if none) through sigma q_{2(a_m - b_p(m))}(0).
/// With k_terms set, U_N(n) is replaced by its renewal series truncated at
/// k <= k_terms renewals. Budget: r_max <= 3, N <= 64.
RewiredResult rewired_sum(std::int64_t N, int r_max, const BetaMatrix& betas,
                          std::optional<int> k_terms = std::nullopt);

}  // namespace colltime
