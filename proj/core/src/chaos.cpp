#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "colltime/exact.hpp"
#include "difference_grid.hpp"

namespace colltime {

PartitionSeq::PartitionSeq(int h, std::vector<std::pair<int, int>> pairs) : h_(h), pairs_(std::move(pairs)) {
  if (h < 2) throw std::invalid_argument("PartitionSeq: h must be >= 2");
  pred_.resize(pairs_.size(), 0);
  for (std::size_t m = 0; m < pairs_.size(); ++m) {
    auto& p = pairs_[m];
    if (p.first > p.second) std::swap(p.first, p.second);
    if (p.first < 0 || p.second >= h || p.first == p.second)
      throw std::invalid_argument("PartitionSeq: pair labels out of range");
    if (m > 0 && pairs_[m - 1] == p) throw std::invalid_argument("PartitionSeq: consecutive pairs must differ");
    for (std::size_t k = m; k-- > 0;)
      if (pairs_[k] == p) {
        pred_[m] = k + 1;
        break;
      }
  }
}

std::vector<PartitionSeq> PartitionSeq::enumerate(int h, std::size_t r) {
  std::vector<std::pair<int, int>> all;
  for (int i = 0; i < h; ++i)
    for (int j = i + 1; j < h; ++j) all.push_back({i, j});
  std::vector<PartitionSeq> out;
  std::vector<std::pair<int, int>> cur;
  std::function<void()> rec = [&] {
    if (cur.size() == r) {
      out.emplace_back(h, cur);
      return;
    }
    for (const auto& p : all) {
      if (!cur.empty() && cur.back() == p) continue;
      cur.push_back(p);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

const char* to_string(ChaosMode mode) {
  switch (mode) {
    case ChaosMode::all:
      return "all";
    case ChaosMode::two_body:
      return "two-body";
    case ChaosMode::multi:
      return "multi";
  }
  return "?";
}

ChaosMode parse_chaos_mode(const std::string& text) {
  if (text == "all") return ChaosMode::all;
  if (text == "two-body" || text == "two_body") return ChaosMode::two_body;
  if (text == "multi") return ChaosMode::multi;
  throw std::invalid_argument("unknown chaos mode '" + text + "'");
}

double ChaosSeries::partial_sum() const {
  double s = 1.0;
  for (double t : terms) s += t;
  return s;
}

namespace {

ChaosSeries chaos_pair(std::int64_t N, double s, int r_max, ChaosMode mode, const ExactOptions& options) {
  ChaosSeries out;
  out.N = N;
  out.h = 2;
  out.mode = mode;
  out.terms.assign(static_cast<std::size_t>(r_max), 0.0);
  out.radius = detail::pair_radius(N, options.radius);
  if (mode == ChaosMode::multi) return out;  // a pair has no multiple collisions

  detail::PairGrid grid(out.radius);
  const std::size_t o = grid.index(0, 0);
  std::vector<std::vector<double>> layer(static_cast<std::size_t>(r_max + 1), grid.make());
  auto next = grid.make();
  layer[0][o] = 1.0;
  double deficit = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    // after n-1 steps at most n-1 marks exist
    const int top = static_cast<int>(std::min<std::int64_t>(r_max, n));
    const int live = static_cast<int>(std::min<std::int64_t>(r_max, n - 1));
    for (int k = 0; k <= live; ++k) {
      deficit += std::abs(grid.step(layer[static_cast<std::size_t>(k)], next));
      layer[static_cast<std::size_t>(k)].swap(next);
    }
    for (int k = top; k >= 1; --k) layer[static_cast<std::size_t>(k)][o] += s * layer[static_cast<std::size_t>(k - 1)][o];
  }
  for (int r = 1; r <= r_max; ++r) out.terms[static_cast<std::size_t>(r - 1)] = detail::PairGrid::sum(layer[static_cast<std::size_t>(r)]);
  out.truncation_deficit = deficit;
  return out;
}

ChaosSeries chaos_triple(std::int64_t N, std::span<const double> sig, int r_max, ChaosMode mode, CollisionWeight weight,
                         const ExactOptions& options) {
  ChaosSeries out;
  out.N = N;
  out.h = 3;
  out.mode = mode;
  out.terms.assign(static_cast<std::size_t>(r_max), 0.0);
  out.radius = detail::triple_radius(N, options.radius, options.truncation.cap);
  const std::int64_t R = out.radius;
  const std::size_t layers = static_cast<std::size_t>(2 * r_max + 2);  // + scratch
  if (detail::TripleGrid::bytes_for(R) * layers > options.memory_limit_bytes)
    throw BudgetError("chaos_term: h=3 state space at radius " + std::to_string(R) + " with r_max " +
                      std::to_string(r_max) + " exceeds the memory guard");
  const double s12 = sig[0], s13 = sig[1], s23 = sig[2];
  const double triple = weight == CollisionWeight::exact ? s12 * s13 + s12 * s23 + s13 * s23 + s12 * s13 * s23
                                                         : s12 * s13 * s23;
  detail::TripleGrid grid(R);
  // layer(k, f): k marks so far, f = 1 once a triple mark was placed; (0, 1) is never populated
  std::vector<std::vector<double>> layer(static_cast<std::size_t>(2 * (r_max + 1)));
  auto L = [&](int k, int f) -> std::vector<double>& { return layer[static_cast<std::size_t>(2 * k + f)]; };
  L(0, 0) = grid.make();
  auto scratch = grid.make();
  L(0, 0)[grid.origin()] = 1.0;
  double deficit = 0.0;
  const std::size_t o = grid.origin();
  for (std::int64_t n = 1; n <= N; ++n) {
    const int top = static_cast<int>(std::min<std::int64_t>(r_max, n));
    const int live = static_cast<int>(std::min<std::int64_t>(r_max, n - 1));
    for (int k = 0; k <= live; ++k)
      for (int f = 0; f < 2; ++f)
        if (!L(k, f).empty()) deficit += std::abs(grid.step(L(k, f), scratch));
    if (top > live) {
      L(top, 0) = grid.make();
      if (mode != ChaosMode::two_body) L(top, 1) = grid.make();
    }
    for (int k = top; k >= 1; --k) {
      for (int f = 0; f < 2; ++f) {
        auto& dst = L(k, f);
        auto& src = L(k - 1, f);
        if (dst.empty() || src.empty()) continue;
        grid.for_each_constraint([&](std::size_t c) { dst[c] += s12 * src[c]; },
                                 [&](std::size_t c) { dst[c] += s23 * src[c]; },
                                 [&](std::size_t c) { dst[c] += s13 * src[c]; });
      }
      auto& dst = L(k, 1);
      if (dst.empty()) continue;
      double add = L(k - 1, 0)[o];
      if (!L(k - 1, 1).empty()) add += L(k - 1, 1)[o];
      dst[o] += triple * add;
    }
  }
  auto total = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  for (int r = 1; r <= r_max; ++r) {
    const double two = total(L(r, 0));
    const double multi = L(r, 1).empty() ? 0.0 : total(L(r, 1));
    double v = two + multi;
    if (mode == ChaosMode::two_body) v = two;
    if (mode == ChaosMode::multi) v = multi;
    out.terms[static_cast<std::size_t>(r - 1)] = v;
  }
  out.truncation_deficit = deficit;
  return out;
}

}  // namespace

ChaosSeries chaos_terms_from_sigma(std::int64_t N, int h, std::span<const double> sigmas, int r_max, ChaosMode mode,
                                   CollisionWeight weight, const ExactOptions& options) {
  if (N < 1) throw std::invalid_argument("chaos_term: N must be >= 1");
  if (r_max < 0) throw std::invalid_argument("chaos_term: r must be >= 0");
  if (sigmas.size() != static_cast<std::size_t>(h * (h - 1) / 2))
    throw std::invalid_argument("chaos_term: expected h(h-1)/2 collision weights");
  ChaosSeries out;
  if (h == 2) {
    if (N > 64 || r_max > 64) throw BudgetError("chaos_term: h=2 budget is N <= 64, r <= 64");
    out = chaos_pair(N, sigmas[0], r_max, mode, options);
  } else if (h == 3) {
    if (N > 32 || r_max > 8) throw BudgetError("chaos_term: h=3 budget is N <= 32, r <= 8");
    out = chaos_triple(N, sigmas, r_max, mode, weight, options);
  } else {
    throw BudgetError("chaos_term: only h = 2 and h = 3 are supported");
  }
  if (options.truncation.strict && out.truncation_deficit > options.truncation.cap)
    throw TruncationError("chaos_term: box radius " + std::to_string(out.radius) + " loses " +
                              std::to_string(out.truncation_deficit),
                          out.truncation_deficit, options.truncation.cap);
  return out;
}

ChaosSeries chaos_terms(std::int64_t N, const BetaMatrix& betas, int r_max, ChaosMode mode, CollisionWeight weight,
                        const ExactOptions& options) {
  std::vector<double> s;
  for (double b : betas.pair_values()) s.push_back(sigma(b, N));
  return chaos_terms_from_sigma(N, betas.h(), s, r_max, mode, weight, options);
}

ChaosTerm chaos_term(std::int64_t N, int r, const BetaMatrix& betas, ChaosMode mode, CollisionWeight weight,
                     const ExactOptions& options) {
  if (r < 1) throw std::invalid_argument("chaos_term: r must be >= 1");
  const auto series = chaos_terms(N, betas, r, mode, weight, options);
  return {r, series.terms.back(), mode};
}

// ---------------------------------------------------------------------------

RewiredResult rewired_sum(std::int64_t N, int r_max, const BetaMatrix& betas, std::optional<int> k_terms) {
  if (N < 2) throw std::invalid_argument("rewired_sum: N must be >= 2");
  if (r_max < 0) throw std::invalid_argument("rewired_sum: r_max must be >= 0");
  if (r_max > 3 || N > 64) throw BudgetError("rewired_sum: budget is r_max <= 3, N <= 64");
  const int h = betas.h();
  const auto q = diagonal_returns(N);
  const std::size_t P = betas.pair_count();

  std::vector<std::vector<double>> U(P), CU(P);
  std::vector<double> sig(P);
  RewiredResult res;
  res.upper_bound = 1.0;
  std::optional<RenewalConvolution> conv;
  if (k_terms) conv = renewal_convolution(N, *k_terms, q);
  const double R_N = expected_collision_time(N).value;
  for (std::size_t p = 0; p < P; ++p) {
    const double b = betas.pair_values()[p];
    sig[p] = sigma(b, N);
    U[p] = conv ? conv->series_marginals(sig[p] * R_N) : replica_marginals(N, b, q);
    CU[p].resize(U[p].size());
    double run = 0.0;
    for (std::size_t n = 0; n < U[p].size(); ++n) CU[p][n] = (run += U[p][n]);
    res.upper_bound *= replica_total(N, b);
  }

  res.by_order.assign(static_cast<std::size_t>(r_max), 0.0);
  for (int r = 1; r <= r_max; ++r) {
    double order_sum = 0.0;
    for (const auto& seq : PartitionSeq::enumerate(h, static_cast<std::size_t>(r))) {
      std::vector<std::size_t> pid(seq.length());
      for (std::size_t m = 0; m < seq.length(); ++m)
        pid[m] = BetaMatrix::pair_index(h, seq.pairs()[m].first, seq.pairs()[m].second);
      std::vector<std::int64_t> last_b(seq.length() + 1, 0);  // b_k for k = 1..r, b_0 = 0
      // replica m (1-based) opens after b_{m-1}
      std::function<double(std::size_t)> rec = [&](std::size_t m) -> double {
        const std::size_t p = pid[m - 1];
        const std::int64_t link = last_b[seq.predecessor(m)];
        const std::int64_t prev = last_b[m - 1];
        const bool last = m == seq.length();
        double s = 0.0;
        for (std::int64_t a = prev + 1; a <= N; ++a) {
          const double w = sig[p] * q[static_cast<std::size_t>(a - link)];
          if (last) {
            s += w * CU[p][static_cast<std::size_t>(N - a)];
            continue;
          }
          double inner = 0.0;
          for (std::int64_t b = a; b < N; ++b) {
            last_b[m] = b;
            inner += U[p][static_cast<std::size_t>(b - a)] * rec(m + 1);
          }
          s += w * inner;
        }
        return s;
      };
      const std::size_t p0 = pid[0];
      if (seq.length() == 1) {
        order_sum += CU[p0][static_cast<std::size_t>(N)] - 1.0;
        continue;
      }
      for (std::int64_t b1 = 1; b1 < N; ++b1) {
        last_b[1] = b1;
        order_sum += U[p0][static_cast<std::size_t>(b1)] * rec(2);
      }
    }
    res.by_order[static_cast<std::size_t>(r - 1)] = order_sum;
  }
  res.value = 1.0;
  for (double v : res.by_order) res.value += v;
  res.gap = res.upper_bound - res.value;
  return res;
}

}  // namespace colltime
