#include "colltime/runner/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/random/gamma_distribution.hpp>

#include "colltime/exact.hpp"
#include "colltime/lattice.hpp"
#include "colltime/montecarlo.hpp"
#include "colltime/polymer.hpp"
#include "colltime/replica.hpp"
#include "colltime/rng.hpp"

namespace colltime::runner {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s) {
  if (s.empty()) return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw std::runtime_error("summary: bad number '" + s + "'");
  return v;
}

// Comma-separated table with a header row, LF line ends.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  template <class... T>
  void row(const T&... cells) {
    std::vector<std::string> v{cell(cells)...};
    if (v.size() != width_) throw std::logic_error("csv: row width mismatch");
    line(v);
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::int64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  void line(const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << '\n';
  }
  std::size_t width_;
  std::ostringstream out_;
};

Assertion check_le(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value <= threshold, value, threshold, std::move(detail)};
}

// strictly decreasing along the given order
Assertion check_decreasing(std::string name, const std::vector<std::int64_t>& N, const std::vector<double>& v) {
  Assertion a{std::move(name), true, v.empty() ? kNaN : v.back(), kNaN, {}};
  std::ostringstream d;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d << (i ? " > " : "") << "N=" << N[i] << ":" << num(v[i]);
    if (i && !(v[i] < v[i - 1])) a.passed = false;
  }
  a.detail = d.str();
  return a;
}

std::vector<std::int64_t> sorted_N(const ExperimentConfig& c) {
  auto N = c.N;
  std::sort(N.begin(), N.end());
  N.erase(std::unique(N.begin(), N.end()), N.end());
  return N;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string tag(const char* key, std::int64_t N) { return std::string(key) + "_N" + std::to_string(N); }

double limit_product(const BetaMatrix& B) {
  double p = 1.0;
  for (double b : B.pair_values()) p /= 1.0 - b;
  return p;
}

std::vector<double> sweep_betas(const ExperimentConfig& c) {
  if (!c.beta_grid.empty()) return c.beta_grid;
  std::vector<double> v = c.pair_betas;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  ExperimentOutput out;

  TruncationPolicy truncation() const { return {opt.strict_truncation, cfg.tol("truncation_cap", 1e-9)}; }
  ExactOptions exact(std::int64_t N) const {
    ExactOptions o;
    o.radius = cfg.radius.radius_for(N, truncation().cap);
    o.truncation = truncation();
    return o;
  }
  void log(const std::string& s) { out.log.push_back(s); }
  void file(std::string path, std::string content, std::string role = "data") {
    out.files.push_back({std::move(path), std::move(role), std::move(content)});
  }
};

// ---------------------------------------------------------------------------

void rn_asymptotics(Context& ctx) {
  const auto N = sorted_N(ctx.cfg);
  const double tol = ctx.cfg.tol("residual", 5e-3);
  Csv csv({"N", "R_N", "leading", "residual"});
  std::vector<double> res;
  for (auto n : N) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = expected_collision_time(n);
    const double leading = std::log(static_cast<double>(n)) / std::numbers::pi + CollisionTimeConstant::alpha / std::numbers::pi;
    csv.row(n, c.value, leading, c.residual);
    res.push_back(std::abs(c.residual));
    ctx.out.summary.push_back({"check", n, "R_N_residual", c.value, leading, c.residual, kNaN});
    ctx.out.assertions.push_back(check_le(tag("residual", n), std::abs(c.residual), tol));
    ctx.log("R_N at N=" + std::to_string(n) + " in " + num(elapsed(t0)) + " s");
  }
  if (N.size() > 1) ctx.out.assertions.push_back(check_decreasing("residual_decreasing", N, res));
  ctx.file("rn_asymptotics.csv", csv.str());
}

void maybe_write_samples(Context& ctx, std::int64_t N, const std::vector<CollisionSample>& s) {
  if (!ctx.cfg.write_samples) return;
  std::ostringstream nd;
  write_samples_ndjson(nd, s);
  ctx.file(tag("samples", N) + ".ndjson", nd.str());
}

void erdos_taylor(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto N = sorted_N(c);
  Csv csv({"N", "replicates", "ks", "critical_1pct", "p_value", "mean", "mean_se", "exact_mean", "variance"});
  std::vector<double> ks;
  double last_mean = kNaN;
  for (auto n : N) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = simulate_collisions(n, 2, c.replicates, c.seed, ctx.opt.workers);
    maybe_write_samples(ctx, n, samples);
    const auto y = rescaled_pair(samples, 0);
    const auto g = test_exponential(y);
    const double exact_mean = std::numbers::pi * expected_collision_time(n).value / std::log(static_cast<double>(n));
    csv.row(n, c.replicates, g.value, g.critical_value, g.p_value, g.mean, g.standard_error, exact_mean, g.variance);
    ctx.out.summary.push_back({"A", n, "ks_exp1", g.value, 0.0, g.value, kNaN});
    ctx.out.summary.push_back({"A", n, "mean", g.mean, 1.0, g.mean - 1.0, g.standard_error});
    ctx.out.summary.push_back({"A", n, "mean_exact", g.mean, exact_mean, g.mean - exact_mean, g.standard_error});
    ctx.out.summary.push_back({"A", n, "variance", g.variance, 1.0, g.variance - 1.0, kNaN});
    ks.push_back(g.value);
    last_mean = g.mean;
    ctx.log("erdos-taylor N=" + std::to_string(n) + " in " + num(elapsed(t0)) + " s");
  }
  ctx.out.assertions.push_back(check_le("mean_rel_N" + std::to_string(N.back()), std::abs(last_mean - 1.0),
                                        c.tol("mean_rel", 0.03)));
  if (N.size() > 1) ctx.out.assertions.push_back(check_decreasing("ks_decreasing", N, ks));
  ctx.file("ks_trend.csv", csv.str());
}

// Gamma(shape, 1) draws through the same counter streams as the walks.
std::vector<double> synthetic_gamma(double shape, std::int64_t n, std::uint64_t seed) {
  CounterRng rng({seed, 0xFFFFFFFFu, 0});
  boost::random::gamma_distribution<double> g(shape, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = g(rng);
  return v;
}

void gamma_total(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto N = sorted_N(c);
  const double shape = c.h * (c.h - 1) / 2.0;
  Csv csv({"N", "h", "replicates", "ks", "critical_1pct", "p_value", "mean", "variance"});
  std::vector<double> ks;
  for (auto n : N) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = simulate_collisions(n, c.h, c.replicates, c.seed, ctx.opt.workers);
    maybe_write_samples(ctx, n, samples);
    const auto g = test_gamma_total(samples, c.h);
    csv.row(n, c.h, c.replicates, g.value, g.critical_value, g.p_value, g.mean, g.variance);
    ctx.out.summary.push_back({"B", n, "ks_gamma", g.value, 0.0, g.value, kNaN});
    ctx.out.summary.push_back({"B", n, "mean", g.mean, shape, g.mean - shape, g.standard_error});
    ctx.out.summary.push_back({"B", n, "variance", g.variance, shape, g.variance - shape, kNaN});
    ks.push_back(g.value);
    ctx.log("gamma-total N=" + std::to_string(n) + " in " + num(elapsed(t0)) + " s");
  }
  if (N.size() > 1) ctx.out.assertions.push_back(check_decreasing("ks_decreasing", N, ks));
  const auto synth = test_gamma(synthetic_gamma(shape, std::max<std::int64_t>(c.replicates, 1000), c.seed), shape);
  ctx.out.assertions.push_back(
      {"synthetic_gamma_selftest", synth.passes(), synth.value, synth.critical_value, "KS of exact Gamma draws"});
  csv.row(std::int64_t{0}, c.h, std::max<std::int64_t>(c.replicates, 1000), synth.value, synth.critical_value,
          synth.p_value, synth.mean, synth.variance);
  ctx.file("gamma_trend.csv", csv.str());
}

void laplace(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto N = sorted_N(c);
  const auto B = c.beta_matrix();
  const double limit = limit_product(B);
  Csv csv({"N", "replicates", "joint", "joint_se", "pair_product", "gap", "gap_se", "limit"});
  std::vector<double> gaps;
  nlohmann::ordered_json indep = nlohmann::ordered_json::array();
  for (auto n : N) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = simulate_collisions(n, c.h, c.replicates, c.seed, ctx.opt.workers);
    maybe_write_samples(ctx, n, samples);
    const auto joint = empirical_laplace(samples, B);
    const auto gap = factorization_gap(samples, B);
    csv.row(n, c.replicates, joint.value, joint.standard_error, gap.product, gap.gap, gap.standard_error, limit);
    ctx.out.summary.push_back({"1.1", n, "joint", joint.value, limit, joint.value - limit, joint.standard_error});
    ctx.out.summary.push_back({"1.1", n, "pair_product_mc", gap.product, limit, gap.product - limit, kNaN});
    ctx.out.summary.push_back({"1.1", n, "factorization_gap", gap.gap, 0.0, gap.gap, gap.standard_error});
    gaps.push_back(gap.gap);
    if (!joint.warning.empty()) ctx.log("N=" + std::to_string(n) + ": " + joint.warning);
    if (c.h > 2) {
      auto rep = test_pairwise_independence(samples).to_json();
      indep.push_back({{"N", n}, {"report", rep}});
    }
    ctx.log("laplace N=" + std::to_string(n) + " in " + num(elapsed(t0)) + " s");
  }
  if (N.size() > 1) ctx.out.assertions.push_back(check_decreasing("factorization_gap_decreasing", N, gaps));
  ctx.file("laplace.csv", csv.str());
  if (!indep.empty()) ctx.file("independence.json", indep.dump(2) + "\n");
}

void pair_baseline(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto N = sorted_N(c);
  const auto B = c.beta_matrix();
  const double limit = limit_product(B);
  Csv csv({"N", "pair", "beta", "pair_exact"});
  for (auto n : N) {
    const auto t0 = std::chrono::steady_clock::now();
    double product = 1.0;
    for (int i = 0; i < B.h(); ++i)
      for (int j = i + 1; j < B.h(); ++j) {
        const double v = replica_total(n, B(i, j));
        product *= v;
        csv.row(n, std::to_string(i + 1) + "-" + std::to_string(j + 1), B(i, j), v);
      }
    ctx.out.summary.push_back({"1.1", n, "pair_exact_product", product, limit, product - limit, 0.0});
    ctx.log("pair-baseline N=" + std::to_string(n) + " in " + num(elapsed(t0)) + " s");
  }
  ctx.file("pair_baseline.csv", csv.str());
}

void dpre(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto N = sorted_N(c);
  std::vector<double> walks = c.walk_betas;
  if (walks.empty()) walks.assign(static_cast<std::size_t>(c.h), std::sqrt(std::max(0.0, c.pair_betas.front())));
  const int h = static_cast<int>(walks.size());
  std::vector<double> coupling;
  for (int i = 0; i < h; ++i)
    for (int j = i + 1; j < h; ++j) coupling.push_back(walks[static_cast<std::size_t>(i)] * walks[static_cast<std::size_t>(j)]);
  const BetaMatrix B(h, coupling);
  const double limit = limit_product(B);
  const double zmax = c.tol("z_max", 3.0);

  PolymerOptions po;
  po.workers = ctx.opt.workers;
  po.truncation = ctx.truncation();
  po.radius = c.radius.mode == RadiusPolicy::Mode::fixed ? static_cast<std::int64_t>(c.radius.value) : -1;

  Csv csv({"N", "replicates", "estimate", "se", "exact", "limit", "z"});
  for (auto n : N) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = sample_partition_functions(n, walks, c.replicates, c.seed, po);
    auto est = mixed_moment_from_samples(samples);
    double exact = kNaN;
    try {
      if (h == 2) exact = laplace_pair_exact(n, coupling[0], ExponentScale::scaled, ctx.exact(n)).value;
      if (h == 3) {
        ExactOptions eo;
        eo.truncation = ctx.truncation();
        exact = laplace_triple_exact(n, {coupling[0], coupling[1], coupling[2]}, ExponentScale::scaled, eo).value;
      }
    } catch (const BudgetError& e) {
      ctx.log(std::string("dpre: no exact target: ") + e.what());
    }
    const double z = std::isnan(exact) ? kNaN : (est.value - exact) / est.standard_error;
    csv.row(n, c.replicates, est.value, est.standard_error, exact, limit, z);
    ctx.out.summary.push_back({"DPRE", n, "moment", est.value, std::isnan(exact) ? limit : exact,
                               est.value - (std::isnan(exact) ? limit : exact), est.standard_error});
    if (!std::isnan(exact))
      ctx.out.assertions.push_back(check_le(tag("moment_z", n), std::abs(z), zmax, "|estimate - exact| / SE"));
    if (c.write_samples) {
      std::ostringstream nd;
      write_partition_ndjson(nd, samples);
      ctx.file(tag("partition", n) + ".ndjson", nd.str());
    }
    double worst_deficit = 0.0;
    for (const auto& row : samples)
      for (const auto& s : row) worst_deficit = std::max(worst_deficit, s.truncation_deficit);
    ctx.log("dpre N=" + std::to_string(n) + " in " + num(elapsed(t0)) + " s, worst deficit " + num(worst_deficit));
  }
  ctx.file("dpre.csv", csv.str());

  // environment integrated out exactly against the collision enumeration
  Csv g({"N", "gaussian_moment", "collision_enumeration", "abs_diff"});
  double worst = 0.0;
  for (std::int64_t n = 1; n <= 4 && h * n <= 12; ++n) {
    const double a = gaussian_moment_exact(n, walks);
    const double b = brute_force_laplace(n, h, coupling);
    worst = std::max(worst, std::abs(a - b));
    g.row(n, a, b, std::abs(a - b));
  }
  ctx.out.assertions.push_back(check_le("gaussian_identity", worst, c.tol("gaussian", 1e-10)));
  ctx.file("dpre_gaussian_check.csv", g.str());
}

double binomial_tail_bound(std::int64_t N, int r_max, double s) {
  // at most one mark per step for h <= 3, each of weight at most s in modulus
  double tail = 0.0;
  for (std::int64_t r = r_max + 1; r <= N; ++r)
    tail += std::exp(std::lgamma(N + 1.0) - std::lgamma(r + 1.0) - std::lgamma(N - r + 1.0) +
                     static_cast<double>(r) * std::log(s));
  return tail;
}

void oracle_chain(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto B = c.beta_matrix();
  const int h = B.h();
  if (h != 2 && h != 3) throw ConfigError("h", "oracle-chain supports h = 2 and h = 3");
  const double tol = c.tol("residual", 1e-12);
  Csv csv({"N", "h", "method", "value", "residual", "tail_bound"});
  for (auto n : sorted_N(c)) {
    std::vector<double> raw;
    for (double b : B.pair_values()) raw.push_back(scaled_exponent(b, n));
    const double truth = brute_force_laplace(n, h, raw);
    csv.row(n, h, "brute_force", truth, 0.0, 0.0);
    auto add = [&](const std::string& method, double v, double bound) {
      const double r = std::abs(v - truth);
      csv.row(n, h, method, v, r, bound);
      ctx.out.summary.push_back({"check", n, method, v, truth, v - truth, kNaN});
      ctx.out.assertions.push_back(check_le(method + "_N" + std::to_string(n), r, tol + bound));
    };
    if (h == 2) {
      add("pair_transfer", laplace_pair_exact(n, raw[0], ExponentScale::raw, ctx.exact(n)).value, 0.0);
    } else {
      const std::array<double, 3> b3{raw[0], raw[1], raw[2]};
      ExactOptions eo;
      eo.truncation = ctx.truncation();
      add("triple_separable", laplace_triple_exact(n, b3, ExponentScale::raw, eo).value, 0.0);
      add("triple_joint64", laplace_triple_exact(n, b3, ExponentScale::raw, eo, TripleStencil::joint64).value, 0.0);
    }
    const int budget = h == 2 ? 64 : 8;
    const int r_max = static_cast<int>(std::min<std::int64_t>(c.r_max > 0 ? c.r_max : n, budget));
    std::vector<double> s;
    for (double b : raw) s.push_back(std::expm1(b));
    double smax = 0.0;
    for (double v : s) smax = std::max(smax, std::abs(v));
    if (h == 3) smax = std::max(smax, std::abs(s[0] * s[1] + s[0] * s[2] + s[1] * s[2] + s[0] * s[1] * s[2]));
    const auto series = chaos_terms_from_sigma(n, h, s, r_max, ChaosMode::all, CollisionWeight::exact);
    add("chaos_r" + std::to_string(r_max), series.partial_sum(), binomial_tail_bound(n, r_max, smax));
  }
  ctx.file("oracle_chain.csv", csv.str());
}

void replica_identity(Context& ctx) {
  const auto& c = ctx.cfg;
  const double tol = c.tol("identity", 1e-10);
  Csv csv({"N", "beta", "radius", "replica_total", "transfer_matrix", "abs_diff", "truncation_deficit"});
  for (auto n : sorted_N(c))
    for (double b : sweep_betas(c)) {
      const auto t0 = std::chrono::steady_clock::now();
      const double rep = replica_total(n, b);
      const auto eo = ctx.exact(n);
      const auto tm = laplace_pair_exact(n, b, ExponentScale::scaled, eo);
      const double d = std::abs(rep - tm.value);
      csv.row(n, b, eo.radius, rep, tm.value, d, tm.truncation_deficit);
      ctx.out.summary.push_back({"check", n, "replica_identity_beta" + num(b), rep, tm.value, rep - tm.value, kNaN});
      ctx.out.assertions.push_back(check_le("identity_N" + std::to_string(n) + "_beta" + num(b), d, tol));
      ctx.log("replica-identity N=" + std::to_string(n) + " beta=" + num(b) + " in " + num(elapsed(t0)) + " s");
    }
  ctx.file("replica_identity.csv", csv.str());
}

void renewal(Context& ctx) {
  const auto& c = ctx.cfg;
  const double tol = c.tol("series", 1e-12);
  Csv csv({"N", "beta", "sigma_R", "k_max", "max_abs_diff", "density_constant"});
  for (auto n : sorted_N(c)) {
    const auto q = diagonal_returns(n);
    const double R = expected_collision_time(n).value;
    for (double b : sweep_betas(c)) {
      const double sR = sigma(b, n) * R;
      const int kmax = renewal_terms(sR, n);
      const auto conv = renewal_convolution(n, kmax, q);
      const auto series = conv.series_marginals(sR);
      const auto direct = replica_marginals(n, b, q);
      double worst = 0.0;
      for (std::size_t i = 0; i < direct.size(); ++i) worst = std::max(worst, std::abs(series[i] - direct[i]));
      csv.row(n, b, sR, kmax, worst, renewal_density_constant(conv, q, R));
      ctx.out.summary.push_back({"check", n, "renewal_series_beta" + num(b), worst, 0.0, worst, kNaN});
      ctx.out.assertions.push_back(check_le("series_N" + std::to_string(n) + "_beta" + num(b), worst, tol));
    }
  }
  ctx.file("renewal.csv", csv.str());
}

void crude_bounds(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto N = sorted_N(c);
  const auto B = c.beta_matrix();
  const double qmax = c.tol("q_side_max", 0.6);
  Csv csv({"N", "bar_beta", "sigma", "R_N", "sigma_R", "replica_sum", "geometric_bound", "min_feasible_beta_prime"});
  std::vector<double> q;
  for (auto n : N) {
    const auto r = crude_bound_check(n, B);
    csv.row(n, r.bar_beta, r.sigma, r.collision_time, r.q_side, r.replica_sum.value_or(kNaN), r.geometric_bound,
            r.min_feasible_beta_prime);
    q.push_back(r.q_side);
    ctx.out.summary.push_back({"check", n, "sigma_R", r.q_side, qmax, r.q_side - qmax, kNaN});
    ctx.out.assertions.push_back({"sigma_R_N" + std::to_string(n), r.q_side < qmax, r.q_side, qmax, "strict"});
    if (r.replica_sum)
      ctx.out.assertions.push_back(check_le("replica_sum_N" + std::to_string(n), *r.replica_sum, 1.0 / (1.0 - qmax)));
  }
  if (N.size() > 1) ctx.out.assertions.push_back(check_decreasing("sigma_R_decreasing", N, q));
  ctx.file("crude_bounds.csv", csv.str());
}

void rewired(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto B = c.beta_matrix();
  Csv csv({"N", "r_max", "rewired", "replica_product", "transfer_product", "gap"});
  for (auto n : sorted_N(c)) {
    const auto r = rewired_sum(n, c.r_max, B);
    double product = 1.0;
    for (double b : B.pair_values()) product *= laplace_pair_exact(n, b, ExponentScale::scaled, ctx.exact(n)).value;
    const double gap = product - r.value;
    csv.row(n, c.r_max, r.value, r.upper_bound, product, gap);
    ctx.out.summary.push_back({"check", n, "rewired", r.value, product, -gap, kNaN});
    ctx.out.assertions.push_back({"rewired_gap_N" + std::to_string(n), gap >= 0.0, gap, 0.0, "product - rewired >= 0"});
  }
  ctx.file("rewired.csv", csv.str());
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::ordered_json Assertion::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["passed"] = passed;
  j["value"] = std::isnan(value) ? nlohmann::ordered_json() : nlohmann::ordered_json(value);
  j["threshold"] = std::isnan(threshold) ? nlohmann::ordered_json() : nlohmann::ordered_json(threshold);
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

bool ExperimentOutput::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  Csv csv({"theorem", "N", "quantity", "statistic", "target", "gap", "SE"});
  for (const auto& r : rows) csv.row(r.theorem, r.N, r.quantity, r.statistic, r.target, r.gap, r.se);
  return csv.str();
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "theorem,N,quantity,statistic,target,gap,SE")
    throw std::runtime_error("summary: unexpected header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    boost::split(f, line, boost::is_any_of(","));
    if (f.size() != 7) throw std::runtime_error("summary: expected 7 fields in '" + line + "'");
    rows.push_back({f[0], std::stoll(f[1]), f[2], parse_num(f[3]), parse_num(f[4]), parse_num(f[5]), parse_num(f[6])});
  }
  return rows;
}

ExperimentOutput run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  Context ctx{config, options, {}};
  using K = ExperimentKind;
  switch (*config.kind) {
    case K::rn_asymptotics: rn_asymptotics(ctx); break;
    case K::erdos_taylor: erdos_taylor(ctx); break;
    case K::gamma_total: gamma_total(ctx); break;
    case K::laplace: laplace(ctx); break;
    case K::pair_baseline: pair_baseline(ctx); break;
    case K::dpre: dpre(ctx); break;
    case K::oracle_chain: oracle_chain(ctx); break;
    case K::replica_identity: replica_identity(ctx); break;
    case K::renewal: renewal(ctx); break;
    case K::crude_bounds: crude_bounds(ctx); break;
    case K::rewired: rewired(ctx); break;
  }
  return std::move(ctx.out);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("COLLTIME_OUT_DIR"); env && *env) return env;
  if (!config.output_dir.empty()) return config.output_dir;
  return std::filesystem::path("runs") /
         (std::string(config.kind ? to_string(*config.kind) : "run") + "-seed" + std::to_string(config.seed));
}

namespace {

void write_file(const std::filesystem::path& dir, const DataFile& f, RunManifest& m) {
  const auto p = dir / f.path;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("run: cannot write " + p.string());
  out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
  if (!out) throw std::runtime_error("run: write failed for " + p.string());
  m.files.push_back({f.path, f.role, sha256_hex(f.content), f.content.size()});
}

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options, const std::filesystem::path& directory) {
  validate(config);
  RunResult res;
  auto& m = res.manifest;
  m.version = tool_version();
  m.kind = std::string(to_string(*config.kind));
  m.config = serialize_config(config);
  m.seed = config.seed;
  m.h = config.h;
  if (*config.kind == ExperimentKind::dpre && !config.walk_betas.empty()) {
    m.betas = config.walk_betas;
  } else if (!config.pair_betas.empty()) {
    const auto B = config.beta_matrix();
    m.betas.assign(B.pair_values().begin(), B.pair_values().end());
  }
  m.workers = options.workers;
  m.strict_truncation = options.strict_truncation;
  m.started_at = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();

  try {
    res.output = run_experiment(config, options);
  } catch (const TruncationError& e) {
    res.output = {};
    res.output.assertions.push_back({"truncation", false, e.deficit(), e.cap(), e.what()});
  } catch (const BudgetError& e) {
    res.output = {};
    res.output.assertions.push_back({"budget", false, kNaN, kNaN, e.what()});
  }
  m.runtime_seconds = elapsed(t0);
  m.finished_at = utc_timestamp();
  m.status = res.output.passed() ? "pass" : "fail";

  std::filesystem::create_directories(directory);
  res.directory = directory;
  for (const auto& f : res.output.files) write_file(directory, f, m);
  write_file(directory, {"summary.csv", "summary", summary_csv(res.output.summary)}, m);
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  nlohmann::ordered_json failed = nlohmann::ordered_json::array();
  for (const auto& a : res.output.assertions) {
    checks.push_back(a.to_json());
    if (!a.passed) failed.push_back(a.to_json());
  }
  write_file(directory, {"assertions.json", "data", checks.dump(2) + "\n"}, m);
  if (!failed.empty()) {
    nlohmann::ordered_json fj;
    fj["status"] = "fail";
    fj["kind"] = m.kind;
    fj["violations"] = failed;
    write_file(directory, {"failures.json", "data", fj.dump(2) + "\n"}, m);
  }
  std::string log;
  for (const auto& l : res.output.log) log += l + "\n";
  log += "runtime " + num(m.runtime_seconds) + " s, workers " + std::to_string(options.workers) + "\n";
  write_file(directory, {"run.log", "log", log}, m);
  write_manifest(directory / "manifest.json", m);
  return res;
}

}  // namespace colltime::runner
