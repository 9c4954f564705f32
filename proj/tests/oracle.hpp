#pragma once

// Reference computations written without the library: naive stepping on an
// unbounded grid, explicit path enumeration and long-double sums. Slow on
// purpose; they only need to be obviously right.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

constexpr std::array<std::array<int, 2>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

/// Dense (2N+1)^2 grid of P(S_n = x) for n = 0..N, index (x1+N)*(2N+1) + x2+N.
inline std::vector<std::vector<double>> walk_law(int N) {
  const int side = 2 * N + 1;
  std::vector<std::vector<double>> out(N + 1, std::vector<double>(side * side, 0.0));
  out[0][N * side + N] = 1.0;
  for (int n = 1; n <= N; ++n)
    for (int a = 0; a < side; ++a)
      for (int b = 0; b < side; ++b) {
        const double p = out[n - 1][a * side + b];
        if (p == 0.0) continue;
        for (auto [d1, d2] : kSteps) {
          const int a2 = a + d1, b2 = b + d2;
          if (a2 >= 0 && a2 < side && b2 >= 0 && b2 < side) out[n][a2 * side + b2] += 0.25 * p;
        }
      }
  return out;
}

/// q_{2n}(0) from log-gamma.
inline double diagonal(std::int64_t n) {
  const long double l = std::lgamma(2.0L * n + 1) - 2 * std::lgamma(n + 1.0L) - 2.0L * n * std::log(2.0L);
  return static_cast<double>(std::exp(2 * l));
}

inline double collision_time(std::int64_t N) {
  long double s = 0;
  for (std::int64_t n = 1; n <= N; ++n) s += diagonal(n);
  return static_cast<double>(s);
}

inline double sigma(double beta, std::int64_t N) { return std::expm1(std::numbers::pi * beta / std::log(double(N))); }

/// E[exp(b L_N)] by stepping both walks' difference with the 16 joint moves.
inline double pair_laplace(int N, double b) {
  const int R = 2 * N, side = 2 * R + 1;
  std::vector<double> v(side * side, 0.0), w(side * side);
  v[R * side + R] = 1.0;
  const double eb = std::exp(b);
  for (int n = 1; n <= N; ++n) {
    std::fill(w.begin(), w.end(), 0.0);
    for (int a = 0; a < side; ++a)
      for (int c = 0; c < side; ++c) {
        const double p = v[a * side + c];
        if (p == 0.0) continue;
        for (auto s : kSteps)
          for (auto t : kSteps) {
            const int a2 = a + s[0] - t[0], c2 = c + s[1] - t[1];
            if (a2 >= 0 && a2 < side && c2 >= 0 && c2 < side) w[a2 * side + c2] += p / 16.0;
          }
      }
    w[R * side + R] *= eb;
    std::swap(v, w);
  }
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

/// Average over all 4^{hN} path tuples of exp(sum_{i<j} b_ij L_ij); b in
/// lexicographic pair order.
inline double enumerate_laplace(int N, int h, const std::vector<double>& b) {
  std::vector<std::array<int, 2>> pos(h, {0, 0});
  long double total = 0;
  std::function<void(int, int, double)> rec = [&](int step, int walk, double expo) {
    if (walk == h) {
      for (int i = 0, p = 0; i < h; ++i)
        for (int j = i + 1; j < h; ++j, ++p)
          if (pos[i] == pos[j]) expo += b[p];
      if (step == N) {
        total += std::exp(static_cast<long double>(expo));
        return;
      }
      rec(step + 1, 0, expo);
      return;
    }
    for (auto [d1, d2] : kSteps) {
      pos[walk][0] += d1;
      pos[walk][1] += d2;
      rec(step, walk + 1, expo);
      pos[walk][0] -= d1;
      pos[walk][1] -= d2;
    }
  };
  if (N == 0) return 1.0;
  rec(1, 0, 0.0);  // time 0 is not counted
  return static_cast<double>(total / std::pow(4.0L, h * N));
}

/// U(n) = sigma sum_{m<n} U(m) q_{2(n-m)}(0), long double.
inline std::vector<double> replica_marginals(std::int64_t N, double s) {
  std::vector<long double> u(N + 1, 0), q(N + 1, 0);
  for (std::int64_t n = 1; n <= N; ++n) q[n] = diagonal(n);
  u[0] = 1;
  for (std::int64_t n = 1; n <= N; ++n) {
    long double acc = 0;
    for (std::int64_t m = 0; m < n; ++m) acc += u[m] * q[n - m];
    u[n] = s * acc;
  }
  return {u.begin(), u.end()};
}

}  // namespace oracle
