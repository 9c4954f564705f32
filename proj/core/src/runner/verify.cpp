#include "colltime/runner/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "colltime/exact.hpp"
#include "colltime/lattice.hpp"
#include "colltime/montecarlo.hpp"
#include "colltime/polymer.hpp"
#include "colltime/replica.hpp"
#include "colltime/rng.hpp"
#include "colltime/runner/config.hpp"

namespace colltime::runner {

namespace {

InvariantResult within(std::string name, double diff, double tol, std::string detail = {}) {
  return {std::move(name), std::abs(diff) <= tol, std::abs(diff), tol, std::move(detail)};
}

InvariantResult philox_kat() {
  // Random123 known answers for Philox4x32-10
  const auto z = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
  const auto f = Philox4x32::apply({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
  const bool ok = z == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u} &&
                  f == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
  return {"philox_known_answers", ok, ok ? 0.0 : 1.0, 0.0, "zero and all-ones vectors"};
}

InvariantResult kernel_mass() {
  const auto t = build_kernel_table(64, default_radius(64));
  double worst = 0.0;
  for (std::int64_t n = 0; n <= 64; ++n) worst = std::max(worst, std::abs(t.slice_mass(n) + t.truncation_deficit(n) - 1.0));
  return within("kernel_mass_balance", worst, 1e-13, "N=64, slice mass + exit mass = 1");
}

InvariantResult kernel_diagonal() {
  const auto t = build_kernel_table(40, default_radius(40));
  double worst = 0.0;
  for (std::int64_t n = 0; 2 * n <= 40; ++n)
    worst = std::max(worst, std::abs(t.value(2 * n, {0, 0}) - diagonal_return(n)));
  return within("kernel_diagonal_closed_form", worst, 1e-15, "q_2n(0) against (C(2n,n) 4^-n)^2");
}

InvariantResult rn_residual() {
  const auto c = expected_collision_time(10000);
  return within("collision_time_residual", c.residual, 5e-3, "N=1e4");
}

InvariantResult replica_identity() {
  double worst = 0.0;
  for (std::int64_t N : {16, 64})
    for (double b : {-0.5, 0.5})
      worst = std::max(worst, std::abs(replica_total(N, b) - laplace_pair_exact(N, b).value));
  return within("replica_transfer_identity", worst, 1e-10, "N in {16,64}, beta in {-0.5,0.5}");
}

InvariantResult renewal_series() {
  const std::int64_t N = 64;
  const auto q = diagonal_returns(N);
  const double sR = sigma(0.5, N) * expected_collision_time(N).value;
  const auto series = renewal_convolution(N, renewal_terms(sR, N), q).series_marginals(sR);
  const auto direct = replica_marginals(N, 0.5, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) worst = std::max(worst, std::abs(series[i] - direct[i]));
  return within("renewal_series", worst, 1e-12, "N=64, beta=0.5");
}

InvariantResult oracle_pair() {
  const double b[1] = {0.37};
  const double bf = brute_force_laplace(5, 2, b);
  const double tm = laplace_pair_exact(5, 0.37, ExponentScale::raw).value;
  const double ch = chaos_terms_from_sigma(5, 2, std::vector<double>{std::expm1(0.37)}, 5).partial_sum();
  return within("oracle_chain_pair", std::max(std::abs(bf - tm), std::abs(bf - ch)), 1e-12, "N=5");
}

InvariantResult oracle_triple() {
  const std::vector<double> raw{0.3, -0.2, 0.5};
  const double bf = brute_force_laplace(3, 3, raw);
  const double sep = laplace_triple_exact(3, {0.3, -0.2, 0.5}, ExponentScale::raw).value;
  const double j64 =
      laplace_triple_exact(3, {0.3, -0.2, 0.5}, ExponentScale::raw, {}, TripleStencil::joint64).value;
  std::vector<double> s;
  for (double r : raw) s.push_back(std::expm1(r));
  const double ch = chaos_terms_from_sigma(3, 3, s, 3).partial_sum();
  const double worst = std::max({std::abs(bf - sep), std::abs(bf - j64), std::abs(bf - ch)});
  return within("oracle_chain_triple", worst, 1e-12, "N=3");
}

InvariantResult rewired_bound() {
  const auto r = rewired_sum(16, 3, BetaMatrix(3, 0.3));
  double product = 1.0;
  for (int p = 0; p < 3; ++p) product *= laplace_pair_exact(16, 0.3).value;
  return {"rewired_upper_bound", r.value <= product, product - r.value, 0.0, "N=16, r_max=3, gap >= 0"};
}

InvariantResult mc_determinism(unsigned workers) {
  const auto a = simulate_collisions(500, 3, 64, 11, 1);
  const auto b = simulate_collisions(500, 3, 64, 11, std::max(2u, workers));
  return {"collision_worker_independence", a == b, a == b ? 0.0 : 1.0, 0.0, "N=500, h=3, 64 replicates"};
}

InvariantResult polymer_determinism(unsigned workers) {
  const double beta[1] = {0.5};
  PolymerOptions one, many;
  many.workers = std::max(2u, workers);
  const auto a = sample_partition_functions(32, beta, 8, 5, one);
  const auto b = sample_partition_functions(32, beta, 8, 5, many);
  bool same = a.size() == b.size();
  for (std::size_t e = 0; same && e < a.size(); ++e) same = a[e][0].Z == b[e][0].Z;
  return {"polymer_worker_independence", same, same ? 0.0 : 1.0, 0.0, "N=32, 8 environments"};
}

InvariantResult polymer_gaussian() {
  const std::vector<double> walks{0.6, 0.4};
  const std::vector<double> coupling{0.24};
  return within("polymer_gaussian_identity",
                gaussian_moment_exact(4, walks) - brute_force_laplace(4, 2, coupling), 1e-10, "N=4, h=2");
}

InvariantResult config_roundtrip() {
  ExperimentConfig c;
  c.kind = ExperimentKind::laplace;
  c.N = {1000, 10000};
  c.h = 3;
  c.pair_betas = {0.3, 0.1 + 0.2, -0.25};
  c.replicates = 1000;
  c.seed = 18446744073709551615ull;
  c.radius = RadiusPolicy::parse("sqrt:7.5");
  c.tolerance["mean_rel"] = 0.03;
  const bool ok = parse_config_string(serialize_config(c)) == c;
  return {"config_round_trip", ok, ok ? 0.0 : 1.0, 0.0, "parse(serialize(c)) == c"};
}

}  // namespace

std::vector<InvariantResult> run_invariant_suite(unsigned workers) {
  const std::vector<std::function<InvariantResult()>> checks{
      philox_kat,       kernel_mass,      kernel_diagonal,
      rn_residual,      replica_identity, renewal_series,
      oracle_pair,      oracle_triple,    rewired_bound,
      [&] { return mc_determinism(workers); },
      [&] { return polymer_determinism(workers); },
      polymer_gaussian, config_roundtrip,
  };
  std::vector<InvariantResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, 1.0, 0.0, e.what()});
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const std::vector<InvariantResult>& results) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results)
    j.push_back({{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"threshold", r.threshold},
                 {"detail", r.detail}});
  return j;
}

}  // namespace colltime::runner
