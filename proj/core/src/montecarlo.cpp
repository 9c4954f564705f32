#include "colltime/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "colltime/parallel.hpp"
#include "colltime/rng.hpp"
#include "colltime/special.hpp"

namespace colltime {

namespace {

// Positions live in rotated coordinates u = x1 + x2, v = x1 - x2, both moving by
// +-1 each step. A site is packed as (u + 2^31) * 2^32 + (v + 2^31); |u|, |v| <= N
// keeps the halves from interfering, and two walks meet iff their keys agree.
constexpr std::uint64_t kOrigin = (std::uint64_t{1} << 63) | (std::uint64_t{1} << 31);
constexpr std::uint64_t kUnit = std::uint64_t{1} << 32;
constexpr std::array<std::uint64_t, 4> kDelta{kUnit + 1, kUnit - 1, std::uint64_t(0) - kUnit + 1,
                                              std::uint64_t(0) - kUnit - 1};

template <int H>
void run_fixed(std::int64_t N, std::uint64_t seed, std::uint32_t rep, std::int64_t* L) {
  std::array<CounterRng, H> rng{};
  for (int w = 0; w < H; ++w) rng[static_cast<std::size_t>(w)] = CounterRng({seed, rep, static_cast<std::uint32_t>(w)});
  std::array<std::uint64_t, H> key;
  key.fill(kOrigin);
  std::array<std::int64_t, H*(H - 1) / 2> count{};
  std::int64_t done = 0;
  while (done < N) {
    std::array<std::array<std::uint64_t, 2>, H> bits;
    for (int w = 0; w < H; ++w) bits[static_cast<std::size_t>(w)] = rng[static_cast<std::size_t>(w)].next_block();
    const std::int64_t batch = std::min<std::int64_t>(64, N - done);
    for (std::int64_t s = 0; s < batch; ++s) {
      const int word = static_cast<int>(s >> 5);
      const int shift = static_cast<int>((s & 31) * 2);
      for (int w = 0; w < H; ++w)
        key[static_cast<std::size_t>(w)] += kDelta[(bits[static_cast<std::size_t>(w)][static_cast<std::size_t>(word)] >> shift) & 3];
      int p = 0;
      for (int i = 0; i < H; ++i)
        for (int j = i + 1; j < H; ++j, ++p) count[static_cast<std::size_t>(p)] += key[static_cast<std::size_t>(i)] == key[static_cast<std::size_t>(j)];
    }
    done += batch;
  }
  std::copy(count.begin(), count.end(), L);
}

void run_dynamic(std::int64_t N, int h, std::uint64_t seed, std::uint32_t rep, std::int64_t* L) {
  const std::size_t H = static_cast<std::size_t>(h);
  std::vector<CounterRng> rng;
  rng.reserve(H);
  for (std::size_t w = 0; w < H; ++w) rng.emplace_back(StreamId{seed, rep, static_cast<std::uint32_t>(w)});
  std::vector<std::uint64_t> key(H, kOrigin);
  std::vector<std::array<std::uint64_t, 2>> bits(H);
  const std::size_t P = H * (H - 1) / 2;
  std::fill(L, L + P, 0);
  // above 8 walks, group equal keys by sorting instead of comparing all pairs
  const bool grouped = h > 8;
  std::vector<std::pair<std::uint64_t, int>> order(H);
  std::int64_t done = 0;
  while (done < N) {
    for (std::size_t w = 0; w < H; ++w) bits[w] = rng[w].next_block();
    const std::int64_t batch = std::min<std::int64_t>(64, N - done);
    for (std::int64_t s = 0; s < batch; ++s) {
      const std::size_t word = static_cast<std::size_t>(s >> 5);
      const int shift = static_cast<int>((s & 31) * 2);
      for (std::size_t w = 0; w < H; ++w) key[w] += kDelta[(bits[w][word] >> shift) & 3];
      if (!grouped) {
        std::size_t p = 0;
        for (std::size_t i = 0; i < H; ++i)
          for (std::size_t j = i + 1; j < H; ++j, ++p) L[p] += key[i] == key[j];
        continue;
      }
      for (std::size_t w = 0; w < H; ++w) order[w] = {key[w], static_cast<int>(w)};
      std::sort(order.begin(), order.end());
      for (std::size_t a = 0; a < H;) {
        std::size_t b = a + 1;
        while (b < H && order[b].first == order[a].first) ++b;
        for (std::size_t x = a; x < b; ++x)
          for (std::size_t y = x + 1; y < b; ++y) ++L[BetaMatrix::pair_index(h, order[x].second, order[y].second)];
        a = b;
      }
    }
    done += batch;
  }
}

}  // namespace

std::vector<CollisionSample> simulate_collisions(std::int64_t N, int h, std::int64_t replicates, std::uint64_t seed,
                                                 unsigned workers, std::int64_t first_replicate) {
  if (N < 1) throw std::invalid_argument("simulate_collisions: N must be >= 1");
  if (h < 2) throw std::invalid_argument("simulate_collisions: h must be >= 2");
  if (replicates < 0 || first_replicate < 0) throw std::invalid_argument("simulate_collisions: bad replicate range");
  if (N > (std::int64_t{1} << 30)) throw std::invalid_argument("simulate_collisions: N too large for packed sites");
  const std::size_t P = static_cast<std::size_t>(h * (h - 1) / 2);
  std::vector<CollisionSample> out(static_cast<std::size_t>(replicates));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    auto& s = out[i];
    s.replicate = first_replicate + static_cast<std::int64_t>(i);
    s.h = h;
    s.N = N;
    s.L.assign(P, 0);
    const auto rep = static_cast<std::uint32_t>(s.replicate);
    switch (h) {
      case 2:
        run_fixed<2>(N, seed, rep, s.L.data());
        break;
      case 3:
        run_fixed<3>(N, seed, rep, s.L.data());
        break;
      case 4:
        run_fixed<4>(N, seed, rep, s.L.data());
        break;
      default:
        run_dynamic(N, h, seed, rep, s.L.data());
    }
  });
  return out;
}

void write_samples_ndjson(std::ostream& out, std::span<const CollisionSample> samples) {
  for (const auto& s : samples) {
    std::vector<std::int64_t> full(static_cast<std::size_t>(s.h * s.h), 0);
    for (int i = 0; i < s.h; ++i)
      for (int j = i + 1; j < s.h; ++j)
        full[static_cast<std::size_t>(i * s.h + j)] = full[static_cast<std::size_t>(j * s.h + i)] = s(i, j);
    nlohmann::ordered_json rec;
    rec["replicate"] = s.replicate;
    rec["h"] = s.h;
    rec["N"] = s.N;
    rec["L"] = full;
    out << rec.dump() << '\n';
  }
}

std::vector<CollisionSample> read_samples_ndjson(std::istream& in) {
  std::vector<CollisionSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    CollisionSample s;
    s.replicate = rec.at("replicate").get<std::int64_t>();
    s.h = rec.at("h").get<int>();
    s.N = rec.at("N").get<std::int64_t>();
    const auto full = rec.at("L").get<std::vector<std::int64_t>>();
    if (full.size() != static_cast<std::size_t>(s.h * s.h)) throw std::runtime_error("sample record: bad L size");
    for (int i = 0; i < s.h; ++i)
      for (int j = i + 1; j < s.h; ++j) s.L.push_back(full[static_cast<std::size_t>(i * s.h + j)]);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double log_scale(std::int64_t N) {
  if (N < 2) throw std::invalid_argument("rescaling needs N >= 2");
  return std::numbers::pi / std::log(static_cast<double>(N));
}

void check_uniform(std::span<const CollisionSample> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  for (const auto& s : samples)
    if (s.N != samples.front().N || s.h != samples.front().h)
      throw std::invalid_argument("samples do not share (N, h)");
}

}  // namespace

RescaledSample rescale(const CollisionSample& sample) {
  const double c = log_scale(sample.N);
  RescaledSample r{sample.h, sample.N, {}};
  for (auto l : sample.L) r.Y.push_back(c * static_cast<double>(l));
  return r;
}

std::vector<double> rescaled_pair(std::span<const CollisionSample> samples, std::size_t pair) {
  std::vector<double> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(log_scale(s.N) * static_cast<double>(s.L.at(pair)));
  return y;
}

std::vector<double> rescaled_total(std::span<const CollisionSample> samples) {
  std::vector<double> y;
  y.reserve(samples.size());
  for (const auto& s : samples) {
    std::int64_t t = 0;
    for (auto l : s.L) t += l;
    y.push_back(log_scale(s.N) * static_cast<double>(t));
  }
  return y;
}

nlohmann::json LaplaceEstimate::to_json() const {
  nlohmann::json j = {{"value", value},       {"standard_error", standard_error}, {"replicates", replicates},
                      {"betas", betas},       {"provenance", provenance}};
  if (!warning.empty()) j["warning"] = warning;
  return j;
}

LaplaceEstimate empirical_laplace(std::span<const CollisionSample> samples, const BetaMatrix& betas) {
  check_uniform(samples);
  if (betas.h() != samples.front().h) throw std::invalid_argument("empirical_laplace: beta matrix has the wrong size");
  for (double b : betas.pair_values())
    if (!(b < 1.0)) throw std::invalid_argument("empirical_laplace: every beta must be < 1");
  const double c = log_scale(samples.front().N);
  std::vector<double> w;
  w.reserve(samples.size());
  const auto bv = betas.pair_values();
  for (const auto& s : samples) {
    double e = 0.0;
    for (std::size_t p = 0; p < bv.size(); ++p) e += bv[p] * static_cast<double>(s.L[p]);
    w.push_back(std::exp(c * e));
  }
  const auto m = moments(w);
  LaplaceEstimate est;
  est.value = m.mean;
  est.standard_error = m.standard_error();
  est.replicates = m.n;
  est.betas.assign(bv.begin(), bv.end());
  est.provenance = "monte-carlo";
  // exp(2 beta_N L) has a limiting mean only for beta < 1/2
  if (betas.bar_beta() >= 0.5)
    est.warning = "bar beta >= 0.5: the estimator has no limiting second moment; the standard error is unreliable";
  return est;
}

// ---------------------------------------------------------------------------

bool GofReport::passes() const {
  if (kind == "ks") return value <= critical_value;
  if (kind == "chi-square") return p_value >= 0.01;
  return lower <= 0.0 && 0.0 <= upper;
}

nlohmann::json GofReport::to_json() const {
  nlohmann::json j = {{"kind", kind}, {"value", value}, {"sample_size", sample_size}, {"reference", reference}};
  if (kind == "ks") {
    j["critical_value_1pct"] = critical_value;
    j["p_value"] = p_value;
    j["mean"] = mean;
    j["variance"] = variance;
  } else if (kind == "correlation") {
    j["lower"] = lower;
    j["upper"] = upper;
    j["standard_error"] = standard_error;
  } else {
    j["p_value"] = p_value;
  }
  return j;
}

namespace {

GofReport ks_report(std::span<const double> values, const std::function<double(double)>& cdf, std::string reference) {
  GofReport g;
  g.kind = "ks";
  g.reference = std::move(reference);
  g.sample_size = static_cast<std::int64_t>(values.size());
  g.value = ks_statistic({values.begin(), values.end()}, cdf);
  g.critical_value = ks_critical_value(g.sample_size, 0.01);
  g.p_value = ks_p_value(g.value, g.sample_size);
  const auto m = moments(values);
  g.mean = m.mean;
  g.variance = m.variance;
  g.standard_error = m.standard_error();
  return g;
}

}  // namespace

GofReport test_exponential(std::span<const double> rescaled) {
  if (rescaled.size() < 1000) throw std::invalid_argument("test_exponential: needs at least 1000 samples");
  return ks_report(rescaled, [](double y) { return y <= 0.0 ? 0.0 : -std::expm1(-y); }, "Exp(1)");
}

GofReport test_gamma(std::span<const double> values, double shape) {
  if (values.empty()) throw std::invalid_argument("test_gamma: no samples");
  return ks_report(values, [shape](double y) { return gamma_cdf(shape, y); },
                   "Gamma(" + std::to_string(static_cast<int>(shape)) + ",1)");
}

GofReport test_gamma_total(std::span<const CollisionSample> samples, int h) {
  if (h < 2) throw std::invalid_argument("test_gamma_total: h must be >= 2");
  check_uniform(samples);
  if (samples.front().h != h) throw std::invalid_argument("test_gamma_total: samples have a different h");
  const auto total = rescaled_total(samples);
  return test_gamma(total, 0.5 * h * (h - 1));
}

FactorizationGap factorization_gap(std::span<const CollisionSample> samples, const BetaMatrix& betas) {
  check_uniform(samples);
  const double c = log_scale(samples.front().N);
  const auto bv = betas.pair_values();
  const std::size_t P = bv.size(), n = samples.size();
  std::vector<std::vector<double>> e(P, std::vector<double>(n));
  std::vector<double> g(n);
  for (std::size_t s = 0; s < n; ++s) {
    double prod = 1.0;
    for (std::size_t p = 0; p < P; ++p) {
      e[p][s] = std::exp(c * bv[p] * static_cast<double>(samples[s].L[p]));
      prod *= e[p][s];
    }
    g[s] = prod;
  }
  std::vector<double> m(P);
  for (std::size_t p = 0; p < P; ++p) m[p] = moments(e[p]).mean;
  FactorizationGap f;
  f.beta = betas.bar_beta();
  f.joint = moments(g).mean;
  f.product = 1.0;
  for (double x : m) f.product *= x;
  f.signed_gap = f.joint - f.product;
  f.gap = std::abs(f.signed_gap);
  // influence of one sample on joint - prod_p m_p
  std::vector<double> infl(n);
  for (std::size_t s = 0; s < n; ++s) {
    double v = g[s];
    for (std::size_t p = 0; p < P; ++p) {
      double others = 1.0;
      for (std::size_t q = 0; q < P; ++q)
        if (q != p) others *= m[q];
      v -= others * e[p][s];
    }
    infl[s] = v;
  }
  f.standard_error = moments(infl).standard_error();
  return f;
}

nlohmann::json IndependenceReport::to_json() const {
  nlohmann::json j = {{"correlations", nlohmann::json::array()}, {"factorization_gaps", nlohmann::json::array()}};
  for (const auto& c : correlations) {
    auto r = c.report.to_json();
    r["pair_a"] = c.p;
    r["pair_b"] = c.q;
    j["correlations"].push_back(r);
  }
  for (const auto& g : gaps)
    j["factorization_gaps"].push_back({{"beta", g.beta},
                                       {"joint", g.joint},
                                       {"product", g.product},
                                       {"gap", g.gap},
                                       {"signed_gap", g.signed_gap},
                                       {"standard_error", g.standard_error}});
  return j;
}

IndependenceReport test_pairwise_independence(std::span<const CollisionSample> samples,
                                              std::span<const double> beta_grid) {
  check_uniform(samples);
  const int h = samples.front().h;
  if (h < 3) throw std::invalid_argument("test_pairwise_independence: needs h >= 3");
  const std::size_t P = static_cast<std::size_t>(h * (h - 1) / 2);
  std::vector<std::vector<double>> Y(P);
  for (std::size_t p = 0; p < P; ++p) Y[p] = rescaled_pair(samples, p);
  IndependenceReport rep;
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = p + 1; q < P; ++q) {
      const auto c = pearson(Y[p], Y[q]);
      GofReport g;
      g.kind = "correlation";
      g.reference = "0";
      g.value = c.r;
      g.sample_size = c.n;
      g.lower = c.lower;
      g.upper = c.upper;
      g.standard_error = c.standard_error;
      rep.correlations.push_back({p, q, g});
    }
  for (double b : beta_grid) rep.gaps.push_back(factorization_gap(samples, BetaMatrix(h, b)));
  return rep;
}

}  // namespace colltime
