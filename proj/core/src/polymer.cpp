#include "colltime/polymer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "colltime/parallel.hpp"
#include "colltime/rng.hpp"
#include "polymer_kernels.hpp"

namespace colltime {

Environment::Environment(std::int64_t N, std::int64_t radius, std::uint64_t seed, std::uint32_t index)
    : N_(N), radius_(radius), seed_(seed), index_(index) {
  if (N < 0 || radius < 1) throw std::invalid_argument("Environment: need N >= 0 and radius >= 1");
  if (N > (std::int64_t{1} << 31) || radius > (std::int64_t{1} << 29))
    throw std::invalid_argument("Environment: N or radius beyond the stream layout");
}

namespace {

constexpr int kBlockBits = 24;

CounterRng half_row_stream(std::uint64_t seed, std::uint32_t index, std::int64_t n, std::int64_t x1, int negative,
                           int cls) {
  const std::uint64_t row = static_cast<std::uint64_t>(x1 + (std::int64_t{1} << 30));
  const std::uint64_t first = ((row * 4 + static_cast<std::uint64_t>(negative) * 2 + static_cast<std::uint64_t>(cls))
                               << kBlockBits);
  return CounterRng({seed, index, static_cast<std::uint32_t>(n)}, first);
}

// first x2 >= 0 (or <= -1) with (n + x1 + x2) % 2 == cls
std::int64_t first_site(std::int64_t n, std::int64_t x1, int negative, int cls) {
  if (!negative) return parity(n, {x1, 0}) == cls ? 0 : 1;
  return parity(n, {x1, -1}) == cls ? -1 : -2;
}

// CounterRng's word sequence, produced through its bulk path. The first refill
// is sized for the expected number of draws (the ziggurat almost always takes
// one word per normal).
class BufferedWords {
 public:
  using result_type = std::uint64_t;
  BufferedWords(CounterRng rng, std::size_t expected) : rng_(rng), blocks_(expected / 2 + 1) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    if (pos_ == buf_.size()) {
      buf_.resize(2 * blocks_);
      rng_.fill(buf_.data(), blocks_);
      pos_ = 0;
      blocks_ = 8;
    }
    return buf_[pos_++];
  }

 private:
  CounterRng rng_;
  std::size_t blocks_;
  std::vector<std::uint64_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

double Environment::omega(std::int64_t n, LatticePoint x) const {
  if (n < 1 || n > N_ || x.linf() > radius_) throw std::out_of_range("Environment: site outside the field");
  const int cls = parity(n, x);
  const int negative = x.x2 < 0 ? 1 : 0;
  const std::int64_t start = first_site(n, x.x1, negative, cls);
  const std::int64_t k = (negative ? start - x.x2 : x.x2 - start) / 2;
  auto rng = half_row_stream(seed_, index_, n, x.x1, negative, cls);
  boost::random::normal_distribution<double> normal;
  double v = 0.0;
  for (std::int64_t i = 0; i <= k; ++i) v = normal(rng);
  return v;
}

void Environment::fill_row(std::int64_t n, std::int64_t x1, std::int64_t lo, std::int64_t hi, double* out) const {
  if (lo > hi) return;
  // slots are the parity-0 sites of [lo, hi]
  std::int64_t first = lo;
  if (parity(n, {x1, first}) != 0) ++first;
  if (first > hi) return;
  boost::random::normal_distribution<double> normal;
  if (hi >= 0) {
    const std::int64_t start = first_site(n, x1, 0, 0);
    BufferedWords rng(half_row_stream(seed_, index_, n, x1, 0, 0), static_cast<std::size_t>((hi - start) / 2 + 1));
    for (std::int64_t x2 = start; x2 <= hi; x2 += 2) {
      const double v = normal(rng);
      if (x2 >= first) out[(x2 - first) / 2] = v;
    }
  }
  if (lo < 0) {
    const std::int64_t start = first_site(n, x1, 1, 0);
    BufferedWords rng(half_row_stream(seed_, index_, n, x1, 1, 0), static_cast<std::size_t>((start - first) / 2 + 1));
    for (std::int64_t x2 = start; x2 >= first; x2 -= 2) {
      const double v = normal(rng);
      if (x2 <= hi) out[(x2 - first) / 2] = v;
    }
  }
}

double polymer_scaled_beta(double beta, std::int64_t N) {
  if (N < 2) throw std::invalid_argument("polymer_scaled_beta: N must be >= 2");
  return beta * std::sqrt(std::numbers::pi / std::log(static_cast<double>(N)));
}

namespace {

// Shared per-horizon geometry. At step n only sites with |y - x|_inf <= width[n]
// and |y - x|_1 <= reach[n] are kept: width[n] = min(R, r_n) with r_n the box tail
// radius of an n-step walk at level cap / (2N), and reach[n] the l1 radius whose
// exceedance probability is at most the same level. Summed over steps, the mass
// dropped outside the active region stays below cap.
struct Plan {
  std::int64_t N = 0;
  std::int64_t R = 0;
  std::vector<std::int64_t> width, reach;
  TruncationPolicy truncation;
};

// P(|y1| + |y2| > d) = P(max(|u|, |v|) > d) with u, v independent +-1 walks;
// bounded by 4 P(u_n > d). Returns the smallest d meeting `level`.
std::int64_t l1_tail_radius(std::int64_t n, double level) {
  // P(u_n >= n - 2j) = P(Bin(n, 1/2) <= j), summed from the far end inwards
  const double ln2n = static_cast<double>(n) * std::log(2.0);
  const double lgn1 = std::lgamma(static_cast<double>(n) + 1.0);
  double tail = 0.0;
  for (std::int64_t j = 0; 2 * j <= n; ++j) {
    const double lp = lgn1 - std::lgamma(static_cast<double>(j) + 1.0) -
                      std::lgamma(static_cast<double>(n - j) + 1.0) - ln2n;
    tail += std::exp(lp);
    // d = n - 2j leaves P(u_n > d), the previous tail, outside
    if (4.0 * tail > level) return n - 2 * j;
  }
  return n;
}

Plan make_plan(std::int64_t N, std::int64_t radius, const TruncationPolicy& policy) {
  Plan p;
  p.N = N;
  p.truncation = policy;
  p.R = radius > 0 ? radius : std::max<std::int64_t>(1, N < 1 ? 1 : tail_radius(N, policy.cap));
  p.width.assign(static_cast<std::size_t>(N + 1), 0);
  p.reach.assign(static_cast<std::size_t>(N + 1), 0);
  const double level = policy.cap / static_cast<double>(2 * std::max<std::int64_t>(1, N));
  for (std::int64_t n = 1; n <= N; ++n) {
    p.width[static_cast<std::size_t>(n)] = std::min({p.R, n, tail_radius(n, level)});
    p.reach[static_cast<std::size_t>(n)] = l1_tail_radius(n, level);
  }
  return p;
}

std::vector<PartitionSample> run_dps(const Plan& plan, std::span<const double> betas, const Environment& env,
                                     LatticePoint x) {
  const std::int64_t N = plan.N, R = plan.R;
  if (env.horizon() < N) throw std::invalid_argument("partition_function: environment shorter than N");
  if (x.linf() > R || env.radius() < R) throw std::invalid_argument("partition_function: box does not fit the field");
  const std::int64_t t = 2 * R + 3;
  auto idx = [&](std::int64_t a, std::int64_t b) { return static_cast<std::size_t>((a + R + 1) * t + (b + R + 1)); };
  const std::size_t K = betas.size();
  // buffers[k][parity of n]
  std::vector<std::array<std::vector<double>, 2>> buf(K);
  std::vector<double> prev_sum(K, 1.0), deficit(K, 0.0), shift(K), beta(K);
  for (std::size_t k = 0; k < K; ++k) {
    buf[k][0].assign(static_cast<std::size_t>(t * t), 0.0);
    buf[k][1].assign(static_cast<std::size_t>(t * t), 0.0);
    buf[k][0][idx(x.x1, x.x2)] = 1.0;
    beta[k] = betas[k];
    shift[k] = -0.5 * betas[k] * betas[k];
  }
  std::vector<double> row(static_cast<std::size_t>(t)), weight(static_cast<std::size_t>(t));
  std::vector<double> pre(K), post(K);
  for (std::int64_t n = 1; n <= N; ++n) {
    const std::int64_t w = plan.width[static_cast<std::size_t>(n)];
    const std::int64_t d = plan.reach[static_cast<std::size_t>(n)];
    std::fill(pre.begin(), pre.end(), 0.0);
    std::fill(post.begin(), post.end(), 0.0);
    const std::int64_t a0 = std::max(-R, x.x1 - w), a1 = std::min(R, x.x1 + w);
    for (std::int64_t a = a0; a <= a1; ++a) {
      const std::int64_t reach = std::min(w, d - std::abs(a - x.x1));
      if (reach < 0) continue;
      std::int64_t lo = std::max(-R, x.x2 - reach), hi = std::min(R, x.x2 + reach);
      if (parity(n, {a, lo}) != 0) ++lo;
      if (lo > hi) continue;
      env.fill_row(n, a, lo, hi, row.data());
      const std::size_t slots = static_cast<std::size_t>((hi - lo) / 2 + 1);
      for (std::size_t k = 0; k < K; ++k) {
        detail::exp_affine(row.data(), slots, beta[k], shift[k], weight.data());
        const auto& src = buf[k][static_cast<std::size_t>((n - 1) & 1)];
        auto& dst = buf[k][static_cast<std::size_t>(n & 1)];
        double sp = 0.0, sq = 0.0;
        std::size_t slot = 0;
        for (std::int64_t b = lo; b <= hi; b += 2, ++slot) {
          const std::size_t i = idx(a, b);
          const double s = 0.25 * (src[i - static_cast<std::size_t>(t)] + src[i + static_cast<std::size_t>(t)] +
                                   src[i - 1] + src[i + 1]);
          const double v = s * weight[slot];
          sp += s;
          sq += v;
          dst[i] = v;
        }
        pre[k] += sp;
        post[k] += sq;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      deficit[k] += std::max(0.0, prev_sum[k] - pre[k]);
      prev_sum[k] = post[k];
    }
  }
  std::vector<PartitionSample> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    // with unit weights Z is the whole walk mass; the DP would only add rounding
    out[k].Z = beta[k] == 0.0 ? 1.0 : prev_sum[k];
    out[k].beta = beta[k];
    out[k].N = N;
    out[k].start = x;
    out[k].environment = env.index();
    out[k].truncation_deficit = deficit[k];
    if (plan.truncation.strict && deficit[k] > plan.truncation.cap)
      throw TruncationError("partition_function: radius " + std::to_string(R) + " loses " +
                                std::to_string(deficit[k]),
                            deficit[k], plan.truncation.cap);
  }
  return out;
}

}  // namespace

std::vector<PartitionSample> partition_functions(std::int64_t N, std::span<const double> betas, const Environment& env,
                                                 LatticePoint x) {
  if (N < 0) throw std::invalid_argument("partition_function: N must be >= 0");
  const auto plan = make_plan(N, env.radius(), {});
  return run_dps(plan, betas, env, x);
}

PartitionSample partition_function(std::int64_t N, double beta, const Environment& env, LatticePoint x) {
  const double b[1] = {beta};
  return partition_functions(N, b, env, x).front();
}

std::vector<std::vector<PartitionSample>> sample_partition_functions(std::int64_t N, std::span<const double> betas,
                                                                     std::int64_t replicates, std::uint64_t seed,
                                                                     const PolymerOptions& options) {
  if (N < 2) throw std::invalid_argument("polymer: N must be >= 2");
  if (replicates < 1) throw std::invalid_argument("polymer: replicates must be >= 1");
  const auto plan = make_plan(N, options.radius, options.truncation);
  std::vector<double> scaled;
  for (double b : betas) scaled.push_back(polymer_scaled_beta(b, N));
  std::vector<std::vector<PartitionSample>> out(static_cast<std::size_t>(replicates));
  parallel_for(out.size(), options.workers, [&](std::size_t e) {
    const Environment env(N, plan.R, seed, static_cast<std::uint32_t>(e));
    out[e] = run_dps(plan, scaled, env, {});
  });
  return out;
}

namespace {

LaplaceEstimate summarize(std::vector<double> w, std::vector<double> betas) {
  const auto m = moments(w);
  LaplaceEstimate est;
  est.value = m.mean;
  est.standard_error = m.standard_error();
  est.replicates = m.n;
  est.betas = std::move(betas);
  est.provenance = "monte-carlo";
  return est;
}

}  // namespace

LaplaceEstimate moment_from_samples(const std::vector<std::vector<PartitionSample>>& samples, int power) {
  if (samples.empty()) throw std::invalid_argument("moment_from_samples: no samples");
  std::vector<double> w;
  for (const auto& row : samples) w.push_back(std::pow(row.front().Z, power));
  return summarize(std::move(w), {samples.front().front().beta});
}

LaplaceEstimate mixed_moment_from_samples(const std::vector<std::vector<PartitionSample>>& samples) {
  if (samples.empty()) throw std::invalid_argument("mixed_moment_from_samples: no samples");
  std::vector<double> w;
  for (const auto& row : samples) {
    double p = 1.0;
    for (const auto& s : row) p *= s.Z;
    w.push_back(p);
  }
  std::vector<double> b;
  for (const auto& s : samples.front()) b.push_back(s.beta);
  return summarize(std::move(w), b);
}

LaplaceEstimate moment_estimate(std::int64_t N, double beta, int h, std::int64_t replicates, std::uint64_t seed,
                                const PolymerOptions& options) {
  if (h < 1) throw std::invalid_argument("moment_estimate: h must be >= 1");
  const double b[1] = {beta};
  auto est = moment_from_samples(sample_partition_functions(N, b, replicates, seed, options), h);
  est.betas = {beta};
  if (beta * beta >= 0.8) est.warning = "beta^2 close to 1: Z^h is heavy tailed, the standard error is unreliable";
  return est;
}

LaplaceEstimate mixed_moment_estimate(std::int64_t N, std::span<const double> betas, std::int64_t replicates,
                                      std::uint64_t seed, const PolymerOptions& options) {
  if (betas.empty()) throw std::invalid_argument("mixed_moment_estimate: no betas");
  for (std::size_t i = 0; i < betas.size(); ++i)
    for (std::size_t j = i + 1; j < betas.size(); ++j)
      if (!(betas[i] * betas[j] < 1.0)) throw std::invalid_argument("mixed_moment_estimate: need beta_i beta_j < 1");
  auto est = mixed_moment_from_samples(sample_partition_functions(N, betas, replicates, seed, options));
  est.betas.assign(betas.begin(), betas.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i)
    for (std::size_t j = i + 1; j < betas.size(); ++j) worst = std::max(worst, betas[i] * betas[j]);
  if (worst >= 0.8) est.warning = "beta_i beta_j close to 1: the product is heavy tailed";
  return est;
}

// ---------------------------------------------------------------------------

namespace {

struct GaussianEnumerator {
  std::int64_t N;
  std::vector<double> beta;
  std::vector<LatticePoint> pos;

  // log E_omega of the weights at one time slice: walks on one site share omega,
  // E[exp(s omega - sum b^2/2)] = exp((s^2 - sum b^2) / 2) with s the sum of their b
  double slice_log_weight() const {
    const std::size_t h = pos.size();
    std::vector<char> used(h, 0);
    double lw = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      if (used[i]) continue;
      double s = beta[i], s2 = beta[i] * beta[i];
      for (std::size_t j = i + 1; j < h; ++j)
        if (!used[j] && pos[j] == pos[i]) {
          used[j] = 1;
          s += beta[j];
          s2 += beta[j] * beta[j];
        }
      lw += 0.5 * (s * s - s2);
    }
    return lw;
  }

  double descend(std::int64_t t) {
    if (t == N) return 1.0;
    static constexpr std::array<LatticePoint, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    const auto saved = pos;
    const std::size_t h = pos.size();
    const std::size_t combos = std::size_t{1} << (2 * h);
    double total = 0.0;
    for (std::size_t m = 0; m < combos; ++m) {
      for (std::size_t i = 0; i < h; ++i) pos[i] = saved[i] + steps[(m >> (2 * i)) & 3];
      total += std::exp(slice_log_weight()) * descend(t + 1);
    }
    pos = saved;
    return total / static_cast<double>(combos);
  }
};

}  // namespace

double gaussian_moment_exact(std::int64_t N, std::span<const double> betas) {
  const std::int64_t h = static_cast<std::int64_t>(betas.size());
  if (N < 0 || h < 1) throw std::invalid_argument("gaussian_moment_exact: need N >= 0 and at least one beta");
  if (h * N > 12) throw BudgetError("gaussian_moment_exact: h N exceeds the enumeration budget 12");
  GaussianEnumerator g{N, {betas.begin(), betas.end()}, std::vector<LatticePoint>(static_cast<std::size_t>(h))};
  return g.descend(0);
}

void write_partition_ndjson(std::ostream& out, const std::vector<std::vector<PartitionSample>>& samples) {
  for (const auto& row : samples)
    for (const auto& s : row) {
      nlohmann::ordered_json rec;
      rec["environment"] = s.environment;
      rec["N"] = s.N;
      rec["beta"] = s.beta;
      rec["start"] = {s.start.x1, s.start.x2};
      rec["Z"] = s.Z;
      rec["truncation_deficit"] = s.truncation_deficit;
      out << rec.dump() << '\n';
    }
}

}  // namespace colltime
