#include "colltime/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "difference_grid.hpp"

namespace colltime {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_truncation(const TruncationPolicy& policy, double deficit, const std::string& what) {
  if (policy.strict && deficit > policy.cap)
    throw TruncationError(what + " loses " + std::to_string(deficit) + " of its weight through the box walls",
                          deficit, policy.cap);
}

}  // namespace

double DifferenceStepLaw::probability(LatticePoint z) {
  for (const auto& atom : support)
    if (atom.z == z) return atom.p;
  return 0.0;
}

double resolve_exponent(double beta, ExponentScale scale, std::int64_t N) {
  if (scale == ExponentScale::raw) return beta;
  return scaled_exponent(beta, N);
}

nlohmann::json ExactResult::to_json() const {
  return {{"op", op}, {"params", params}, {"value", value}, {"truncation_deficit", truncation_deficit},
          {"runtime", runtime}};
}

ExactResult laplace_pair_exact(std::int64_t N, double beta, ExponentScale scale, const ExactOptions& options) {
  if (N < 0) throw std::invalid_argument("laplace_pair_exact: N must be >= 0");
  const auto t0 = Clock::now();
  const double b = N == 0 ? 0.0 : resolve_exponent(beta, scale, N);
  const std::int64_t R = detail::pair_radius(N, options.radius);
  detail::PairGrid grid(R);
  auto cur = grid.make();
  auto next = grid.make();
  cur[grid.index(0, 0)] = 1.0;
  const double w = std::exp(b);
  const std::size_t o = grid.index(0, 0);
  double deficit = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    deficit += grid.step(cur, next);
    next[o] *= w;
    cur.swap(next);
  }
  ExactResult r;
  r.op = "laplace_pair_exact";
  r.params = {{"N", N}, {"beta", beta}, {"scale", scale == ExponentScale::raw ? "raw" : "scaled"},
              {"exponent", b}, {"radius", R}};
  r.value = detail::PairGrid::sum(cur);
  r.truncation_deficit = deficit;
  r.runtime = seconds_since(t0);
  check_truncation(options.truncation, deficit, "pair DP at radius " + std::to_string(R));
  return r;
}

namespace {

double triple_separable(std::int64_t N, const std::array<double, 3>& b, std::int64_t R, const ExactOptions& options,
                        double& deficit) {
  if (detail::TripleGrid::bytes_for(R) * 2 > options.memory_limit_bytes)
    throw BudgetError("laplace_triple_exact: radius " + std::to_string(R) + " exceeds the memory guard");
  detail::TripleGrid grid(R);
  auto v = grid.make();
  auto scratch = grid.make();
  v[grid.origin()] = 1.0;
  const double w12 = std::exp(b[0]), w13 = std::exp(b[1]), w23 = std::exp(b[2]);
  deficit = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    deficit += grid.step(v, scratch);
    grid.for_each_constraint([&](std::size_t c) { v[c] *= w12; }, [&](std::size_t c) { v[c] *= w23; },
                             [&](std::size_t c) { v[c] *= w13; });
  }
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Original coordinates (D12, D23) in a (2R+1)^4 box, padding 2, and the joint
// law of (e1 - e2, e2 - e3) over the 64 step triples.
double triple_joint64(std::int64_t N, const std::array<double, 3>& b, std::int64_t R, const ExactOptions& options,
                      double& deficit) {
  const std::size_t t = static_cast<std::size_t>(2 * R + 5);
  if (t * t * t * t * sizeof(double) * 2 > options.memory_limit_bytes)
    throw BudgetError("laplace_triple_exact(joint64): radius " + std::to_string(R) + " exceeds the memory guard");
  static constexpr std::array<LatticePoint, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  std::map<std::array<std::int64_t, 4>, double> law;
  for (const auto& e1 : steps)
    for (const auto& e2 : steps)
      for (const auto& e3 : steps) {
        const auto d = e1 - e2;
        const auto f = e2 - e3;
        law[{d.x1, d.x2, f.x1, f.x2}] += 1.0 / 64.0;
      }
  const std::int64_t T = static_cast<std::int64_t>(t);
  auto idx = [&](std::int64_t a, std::int64_t b2, std::int64_t c, std::int64_t d) {
    return static_cast<std::size_t>((((a + R + 2) * T + (b2 + R + 2)) * T + (c + R + 2)) * T + (d + R + 2));
  };
  std::vector<std::pair<std::ptrdiff_t, double>> off;
  for (const auto& [z, p] : law)
    off.push_back({static_cast<std::ptrdiff_t>(((z[0] * T + z[1]) * T + z[2]) * T + z[3]), p});

  std::vector<double> cur(t * t * t * t, 0.0), next(cur.size(), 0.0);
  cur[idx(0, 0, 0, 0)] = 1.0;
  const double w12 = std::exp(b[0]), w13 = std::exp(b[1]), w23 = std::exp(b[2]);
  deficit = 0.0;
  auto outside = [&](std::int64_t x) { return x < -R || x > R; };
  for (std::int64_t n = 1; n <= N; ++n) {
    for (std::int64_t a = -R; a <= R; ++a)
      for (std::int64_t b2 = -R; b2 <= R; ++b2)
        for (std::int64_t c = -R; c <= R; ++c)
          for (std::int64_t d = -R; d <= R; ++d) {
            const std::size_t i = idx(a, b2, c, d);
            double s = 0.0;
            for (const auto& [o, p] : off) s += p * cur[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) - o)];
            next[i] = s;
            const double src = cur[i];
            if (src == 0.0) continue;
            if (std::abs(a) < R - 1 && std::abs(b2) < R - 1 && std::abs(c) < R - 1 && std::abs(d) < R - 1) continue;
            for (const auto& [z, p] : law)
              if (outside(a + z[0]) || outside(b2 + z[1]) || outside(c + z[2]) || outside(d + z[3]))
                deficit += p * src;
          }
    for (std::int64_t c = -R; c <= R; ++c)
      for (std::int64_t d = -R; d <= R; ++d) next[idx(0, 0, c, d)] *= w12;
    for (std::int64_t a = -R; a <= R; ++a)
      for (std::int64_t b2 = -R; b2 <= R; ++b2) next[idx(a, b2, 0, 0)] *= w23;
    for (std::int64_t a = -R; a <= R; ++a)
      for (std::int64_t b2 = -R; b2 <= R; ++b2) next[idx(a, b2, -a, -b2)] *= w13;
    cur.swap(next);
  }
  double s = 0.0;
  for (double x : cur) s += x;
  return s;
}

}  // namespace

ExactResult laplace_triple_exact(std::int64_t N, std::array<double, 3> betas, ExponentScale scale,
                                 const ExactOptions& options, TripleStencil stencil) {
  if (N < 0) throw std::invalid_argument("laplace_triple_exact: N must be >= 0");
  const auto t0 = Clock::now();
  std::array<double, 3> b{};
  for (std::size_t i = 0; i < 3; ++i) b[i] = N == 0 ? 0.0 : resolve_exponent(betas[i], scale, N);
  const std::int64_t R = stencil == TripleStencil::separable
                             ? detail::triple_radius(N, options.radius, options.truncation.cap)
                             : (options.radius > 0 ? options.radius : std::max<std::int64_t>(1, 2 * N));
  double deficit = 0.0;
  const double value = stencil == TripleStencil::separable ? triple_separable(N, b, R, options, deficit)
                                                           : triple_joint64(N, b, R, options, deficit);
  ExactResult r;
  r.op = "laplace_triple_exact";
  r.params = {{"N", N},
              {"betas", betas},
              {"scale", scale == ExponentScale::raw ? "raw" : "scaled"},
              {"exponents", b},
              {"radius", R},
              {"stencil", stencil == TripleStencil::separable ? "separable" : "joint64"}};
  r.value = value;
  r.truncation_deficit = deficit;
  r.runtime = seconds_since(t0);
  check_truncation(options.truncation, deficit, "triple DP at radius " + std::to_string(R));
  return r;
}

namespace {

struct BruteForce {
  int h;
  std::int64_t N;
  std::vector<double> b;
  std::vector<LatticePoint> pos;
  std::vector<std::pair<int, int>> pairs;

  double descend(std::int64_t t) {
    if (t == N) return 1.0;
    static constexpr std::array<LatticePoint, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    const std::vector<LatticePoint> saved = pos;
    std::size_t combos = std::size_t{1} << (2 * h);
    double total = 0.0;
    for (std::size_t m = 0; m < combos; ++m) {
      for (int i = 0; i < h; ++i) pos[static_cast<std::size_t>(i)] = saved[static_cast<std::size_t>(i)] + steps[(m >> (2 * i)) & 3];
      double e = 0.0;
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if (pos[static_cast<std::size_t>(pairs[k].first)] == pos[static_cast<std::size_t>(pairs[k].second)]) e += b[k];
      total += std::exp(e) * descend(t + 1);
    }
    pos = saved;
    return total / static_cast<double>(combos);
  }
};

}  // namespace

double brute_force_laplace(std::int64_t N, int h, std::span<const double> raw_exponents) {
  if (N < 0 || h < 2) throw std::invalid_argument("brute_force_laplace: need N >= 0 and h >= 2");
  if (static_cast<std::int64_t>(h) * N > 12)
    throw BudgetError("brute_force_laplace: h N = " + std::to_string(h * N) + " exceeds the enumeration budget 12");
  const std::size_t npairs = static_cast<std::size_t>(h * (h - 1) / 2);
  if (raw_exponents.size() != npairs) throw std::invalid_argument("brute_force_laplace: expected h(h-1)/2 exponents");
  BruteForce bf{h, N, {raw_exponents.begin(), raw_exponents.end()}, std::vector<LatticePoint>(static_cast<std::size_t>(h)), {}};
  for (int i = 0; i < h; ++i)
    for (int j = i + 1; j < h; ++j) bf.pairs.push_back({i, j});
  return bf.descend(0);
}

std::vector<double> pair_local_time_law(std::int64_t N) {
  if (N < 0 || N > 32) throw BudgetError("pair_local_time_law: N must lie in [0, 32]");
  const std::int64_t R = std::max<std::int64_t>(1, 2 * N);
  detail::PairGrid grid(R);
  const std::size_t o = grid.index(0, 0);
  // layer l: weight of paths with l collisions so far
  std::vector<std::vector<double>> layer(static_cast<std::size_t>(N + 1), grid.make());
  std::vector<double> next = grid.make();
  layer[0][o] = 1.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    double carry = 0.0;
    for (std::int64_t l = 0; l < n; ++l) {
      grid.step(layer[static_cast<std::size_t>(l)], next);
      const double at0 = next[o];
      next[o] = carry;
      carry = at0;
      layer[static_cast<std::size_t>(l)].swap(next);
    }
    layer[static_cast<std::size_t>(n)][o] = carry;
  }
  std::vector<double> law(static_cast<std::size_t>(N + 1));
  for (std::size_t l = 0; l < law.size(); ++l) law[l] = detail::PairGrid::sum(layer[l]);
  return law;
}

}  // namespace colltime
