#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "colltime/errors.hpp"

namespace colltime {

struct LatticePoint {
  std::int64_t x1 = 0;
  std::int64_t x2 = 0;

  friend constexpr bool operator==(LatticePoint, LatticePoint) = default;
  constexpr LatticePoint operator-() const { return {-x1, -x2}; }
  constexpr LatticePoint operator+(LatticePoint o) const { return {x1 + o.x1, x2 + o.x2}; }
  constexpr LatticePoint operator-(LatticePoint o) const { return {x1 - o.x1, x2 - o.x2}; }
  constexpr std::int64_t l1() const { return (x1 < 0 ? -x1 : x1) + (x2 < 0 ? -x2 : x2); }
  constexpr std::int64_t linf() const {
    const auto a = x1 < 0 ? -x1 : x1;
    const auto b = x2 < 0 ? -x2 : x2;
    return a > b ? a : b;
  }
  constexpr double norm2() const { return static_cast<double>(x1 * x1 + x2 * x2); }
};

/// (n + x1 + x2) mod 2; the walk can only sit on parity-0 space-time points.
constexpr int parity(std::int64_t n, LatticePoint x) {
  const std::int64_t s = n + x.x1 + x.x2;
  return static_cast<int>(((s % 2) + 2) % 2);
}

struct CollisionTimeConstant {
  static constexpr double gamma_euler = std::numbers::egamma;
  // gamma + log 16 - pi
  static constexpr double alpha = std::numbers::egamma + 4.0 * std::numbers::ln2 - std::numbers::pi;
};

/// Default box half-width for an N-step kernel: ceil(8 sqrt(N)).
std::int64_t default_radius(std::int64_t N);

/// Exact transition probabilities q_n(x) = P(S_n = x) of the planar simple
/// random walk, restricted to the box |x|_inf <= radius with absorbing walls.
///
/// Only parity-0 sites are stored per time slice. Because the box side
/// 2*radius+1 is odd, the parity of the row-major index of (x1, x2) equals the
/// parity of x1 + x2, so slice n keeps the linear indices with the parity of n
/// and addresses them by index / 2.
class KernelTable {
 public:
  KernelTable(std::int64_t N, std::int64_t radius);

  std::int64_t horizon() const { return N_; }
  std::int64_t radius() const { return radius_; }
  std::int64_t side() const { return 2 * radius_ + 1; }

  double value(std::int64_t n, LatticePoint x) const;
  double operator()(std::int64_t n, LatticePoint x) const { return value(n, x); }

  /// Cumulative probability lost through the box walls by step n.
  double truncation_deficit(std::int64_t n) const { return deficit_.at(static_cast<std::size_t>(n)); }

  /// Sum of stored values of slice n.
  double slice_mass(std::int64_t n) const;

  /// Dense (side x side) copy of slice n, row-major in (x1, x2), zeros at odd parity.
  std::vector<double> dense_slice(std::int64_t n) const;

  bool in_box(LatticePoint x) const { return x.linf() <= radius_; }

 private:
  friend KernelTable build_kernel_table(std::int64_t, std::int64_t, TruncationPolicy);
  friend KernelTable read_kernel_binary(std::istream&);
  std::size_t linear(LatticePoint x) const {
    return static_cast<std::size_t>((x.x1 + radius_) * side() + (x.x2 + radius_));
  }

  std::int64_t N_;
  std::int64_t radius_;
  std::size_t slots_;
  std::vector<std::vector<double>> slices_;
  std::vector<double> deficit_;
};

KernelTable build_kernel_table(std::int64_t N, std::int64_t radius, TruncationPolicy policy = {});

/// q_{2n}(0) = (C(2n,n) 4^-n)^2 without overflow.
double diagonal_return(std::int64_t n);
/// log q_{2n}(0); valid for every n >= 0.
double log_diagonal_return(std::int64_t n);

/// q_{2n}(0) for n = 0..N by the exact ratio recurrence (sequential, no gamma functions).
std::vector<double> diagonal_returns(std::int64_t N);

struct CollisionTime {
  std::int64_t N = 0;
  double value = 0.0;     ///< R_N = sum_{n=1}^N q_{2n}(0)
  double residual = 0.0;  ///< R_N - (log N)/pi - alpha/pi
};

CollisionTime expected_collision_time(std::int64_t N);

/// Local-limit comparator 2 g_{n/2}(x) on parity-0 points, 0 elsewhere.
double heat_kernel_approx(std::int64_t n, LatticePoint x);

struct DeviationEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::int64_t hits = 0;
  std::int64_t replicates = 0;
};

/// Monte Carlo estimate of P(max_{k<=n} |S_k| > R sqrt(n)) (Euclidean norm).
DeviationEstimate max_deviation_estimate(std::int64_t n, double R, std::int64_t replicates,
                                         std::uint64_t seed, unsigned workers = 1);

/// Upper bound on the probability that an N-step walk leaves |x|_inf <= radius,
/// 8 P(S^{(1)}_N >= radius + 1) by reflection on each coordinate half-line.
double box_exit_bound(std::int64_t N, std::int64_t radius);

/// Smallest radius with box_exit_bound(N, radius) <= cap.
std::int64_t tail_radius(std::int64_t N, double cap);

// Flat binary layout: "CLTK" magic, uint32 endianness tag 0x01020304 in native
// order, uint32 format version, int64 N, int64 radius, then for n = 0..N one
// dense row-major (side x side) double slice, then N+1 doubles of deficit.
void write_binary(std::ostream& out, const KernelTable& table);
KernelTable read_kernel_binary(std::istream& in);
void write_csv(std::ostream& out, const KernelTable& table);

}  // namespace colltime
