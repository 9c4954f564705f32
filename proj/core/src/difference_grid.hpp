#pragma once

// Dense grids for the difference-walk DPs. Both keep a zero ring around the box
// so the pull stencils need no bounds checks; mass that a step would push
// through the wall is accumulated exactly from the cells next to it.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstdint>
#include <cstring>
#include <vector>

#include "colltime/exact.hpp"

namespace colltime::detail {

inline std::int64_t pair_radius(std::int64_t N, std::int64_t requested) {
  if (requested > 0) return requested;
  return std::max<std::int64_t>(1, std::min(default_radius(N), 2 * N));
}

// every halved rotated coordinate is a lazy walk with P(a_N = k) = C(2N, N+k) 4^-N
inline std::int64_t triple_radius(std::int64_t N, std::int64_t requested, double cap) {
  if (requested > 0) return requested;
  return std::max<std::int64_t>(1, std::min(N, N < 1 ? 1 : tail_radius(N, 0.5 * cap)));
}

/// (2R+1)^2 box on the original difference coordinates, 9-point law, padding 2.
class PairGrid {
 public:
  explicit PairGrid(std::int64_t radius) : R_(radius), t_(2 * radius + 5) {
    for (std::int64_t a = -R_; a <= R_; ++a)
      for (std::int64_t b = -R_; b <= R_; ++b) {
        double out = 0.0;
        for (const auto& atom : DifferenceStepLaw::support)
          if (std::max(std::abs(a + atom.z.x1), std::abs(b + atom.z.x2)) > R_) out += atom.p;
        if (out > 0.0) wall_.push_back({index(a, b), out});
      }
    for (const auto& atom : DifferenceStepLaw::support)
      offsets_[static_cast<std::size_t>(&atom - DifferenceStepLaw::support.data())] = {
          static_cast<std::ptrdiff_t>(atom.z.x1 * t_ + atom.z.x2), atom.p};
  }

  std::int64_t radius() const { return R_; }
  std::size_t cells() const { return static_cast<std::size_t>(t_ * t_); }
  std::size_t index(std::int64_t a, std::int64_t b) const {
    return static_cast<std::size_t>((a + R_ + 2) * t_ + (b + R_ + 2));
  }
  std::vector<double> make() const { return std::vector<double>(cells(), 0.0); }

  /// out = one step of in (inside the box); returns the mass pushed out.
  double step(const std::vector<double>& in, std::vector<double>& out) const {
    double exited = 0.0;
    for (const auto& w : wall_) exited += w.second * in[w.first];
    for (std::int64_t a = -R_; a <= R_; ++a) {
      const std::size_t row = index(a, -R_);
      for (std::int64_t j = 0; j < 2 * R_ + 1; ++j) {
        const std::size_t c = row + static_cast<std::size_t>(j);
        double s = 0.0;
        for (const auto& o : offsets_) s += o.second * in[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) - o.first)];
        out[c] = s;
      }
    }
    return exited;
  }

  static double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }

 private:
  std::int64_t R_;
  std::int64_t t_;
  std::vector<std::pair<std::size_t, double>> wall_;
  std::array<std::pair<std::ptrdiff_t, double>, 9> offsets_{};
};

/// Hypercube |a_u|, |b_u|, |a_v|, |b_v| <= R, where (a, b) are the halved rotated
/// coordinates of (D12, D23): a_u = ((u1 - u2) / 2), b_u = ((u2 - u3) / 2) and
/// likewise for v. Per axis one step of (a, b) has the 7-point law
/// (0,0): 1/4 and (0,+-1), (+-1,0), (1,-1), (-1,1): 1/8 each; the two axes are
/// independent. Layout [a_u][b_u][a_v][b_v] with padding 1.
class TripleGrid {
 public:
  struct Offset {
    int da, db;
    double p;
  };
  static constexpr std::array<Offset, 7> law{{{0, 0, 0.25},
                                              {0, 1, 0.125},
                                              {0, -1, 0.125},
                                              {1, 0, 0.125},
                                              {-1, 0, 0.125},
                                              {1, -1, 0.125},
                                              {-1, 1, 0.125}}};

  explicit TripleGrid(std::int64_t radius) : R_(radius), t_(2 * radius + 3) {
    plane_ = static_cast<std::size_t>(t_ * t_);
    for (std::int64_t a = -R_; a <= R_; ++a)
      for (std::int64_t b = -R_; b <= R_; ++b) {
        double out = 0.0;
        for (const auto& o : law)
          if (std::abs(a + o.da) > R_ || std::abs(b + o.db) > R_) out += o.p;
        if (out > 0.0) wall_.push_back({plane_index(a, b), out});
      }
  }

  std::int64_t radius() const { return R_; }
  std::size_t cells() const { return plane_ * plane_; }
  static std::size_t bytes_for(std::int64_t radius) {
    const std::size_t t = static_cast<std::size_t>(2 * radius + 3);
    return t * t * t * t * sizeof(double);
  }
  std::size_t plane_index(std::int64_t a, std::int64_t b) const {
    return static_cast<std::size_t>((a + R_ + 1) * t_ + (b + R_ + 1));
  }
  std::size_t index(std::int64_t au, std::int64_t bu, std::int64_t av, std::int64_t bv) const {
    return plane_index(au, bu) * plane_ + plane_index(av, bv);
  }
  std::vector<double> make() const { return std::vector<double>(cells(), 0.0); }

  /// One step applied to `v` in place (scratch must have cells() entries);
  /// returns the mass pushed out of the box.
  double step(std::vector<double>& v, std::vector<double>& scratch) const {
    double exited = 0.0;
    const std::int64_t side = 2 * R_ + 1;
    // u axis: blockwise over (a_u, b_u), each block is a full (a_v, b_v) plane
    for (const auto& w : wall_) {
      const double* blk = &v[w.first * plane_];
      double s = 0.0;
      for (std::size_t k = 0; k < plane_; ++k) s += blk[k];
      exited += w.second * s;
    }
    for (std::int64_t au = -R_; au <= R_; ++au)
      for (std::int64_t bu = -R_; bu <= R_; ++bu) {
        double* dst = &scratch[plane_index(au, bu) * plane_];
        std::memset(dst, 0, plane_ * sizeof(double));
        for (const auto& o : law) {
          const double* src = &v[plane_index(au - o.da, bu - o.db) * plane_];
          for (std::size_t k = 0; k < plane_; ++k) dst[k] += o.p * src[k];
        }
      }
    // v axis inside every (a_u, b_u) block
    std::array<std::ptrdiff_t, 7> off{};
    for (std::size_t i = 0; i < law.size(); ++i) off[i] = static_cast<std::ptrdiff_t>(law[i].da * t_ + law[i].db);
    for (std::int64_t au = -R_; au <= R_; ++au)
      for (std::int64_t bu = -R_; bu <= R_; ++bu) {
        const std::size_t base = plane_index(au, bu) * plane_;
        const double* src = &scratch[base];
        for (const auto& w : wall_) exited += w.second * src[w.first];
        double* dst = &v[base];
        for (std::int64_t av = -R_; av <= R_; ++av) {
          const std::size_t row = plane_index(av, -R_);
          for (std::int64_t j = 0; j < side; ++j) {
            const std::size_t c = row + static_cast<std::size_t>(j);
            double s = 0.0;
            for (std::size_t i = 0; i < law.size(); ++i)
              s += law[i].p * src[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) - off[i])];
            dst[c] = s;
          }
        }
      }
    return exited;
  }

  /// Applies f(site) to the cells where D12 = 0, D23 = 0, D13 = 0, in that order.
  template <class F12, class F23, class F13>
  void for_each_constraint(F12&& on12, F23&& on23, F13&& on13) const {
    for (std::int64_t b1 = -R_; b1 <= R_; ++b1)
      for (std::int64_t b2 = -R_; b2 <= R_; ++b2) on12(index(0, b1, 0, b2));
    for (std::int64_t a1 = -R_; a1 <= R_; ++a1)
      for (std::int64_t a2 = -R_; a2 <= R_; ++a2) on23(index(a1, 0, a2, 0));
    for (std::int64_t a1 = -R_; a1 <= R_; ++a1)
      for (std::int64_t a2 = -R_; a2 <= R_; ++a2) on13(index(a1, -a1, a2, -a2));
  }

  std::size_t origin() const { return index(0, 0, 0, 0); }

 private:
  std::int64_t R_;
  std::int64_t t_;
  std::size_t plane_ = 0;
  std::vector<std::pair<std::size_t, double>> wall_;
};

}  // namespace colltime::detail
