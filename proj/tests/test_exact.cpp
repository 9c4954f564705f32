#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "colltime/exact.hpp"
#include "colltime/montecarlo.hpp"
#include "colltime/stats.hpp"
#include "oracle.hpp"

using namespace colltime;

namespace {
constexpr auto raw = ExponentScale::raw;
}

TEST(DifferenceStep, LawIsNormalised) {
  double s = 0;
  for (const auto& a : DifferenceStepLaw::support) s += a.p;
  EXPECT_EQ(s, 1.0);
  EXPECT_EQ(DifferenceStepLaw::probability({1, 1}), 0.125);
  EXPECT_EQ(DifferenceStepLaw::probability({1, 0}), 0.0);
}

TEST(PairExact, OneStepAndZeroCoupling) {
  for (double b : {-1.0, 0.3, 2.0}) EXPECT_NEAR(laplace_pair_exact(1, b, raw).value, 1 + std::expm1(b) / 4, 1e-15);
  EXPECT_NEAR(laplace_pair_exact(40, 0.0, raw).value, 1.0, 1e-14);
}

TEST(PairExact, MatchesNaiveDifferenceStepping) {
  for (int N : {7, 20, 33})
    for (double b : {-0.7, 0.25, 0.6}) {
      const auto r = laplace_pair_exact(N, b, raw, {.radius = 2 * N});
      EXPECT_NEAR(r.value, oracle::pair_laplace(N, b), 1e-12 * r.value) << N << ' ' << b;
      EXPECT_EQ(r.truncation_deficit, 0.0);
    }
}

TEST(PairExact, ScaledExponentAndMetadata) {
  const auto r = laplace_pair_exact(64, 0.5);
  EXPECT_NEAR(r.value, oracle::pair_laplace(64, std::numbers::pi * 0.5 / std::log(64.0)), 1e-11);
  EXPECT_LE(r.truncation_deficit, 1e-9);
  EXPECT_EQ(r.op, "laplace_pair_exact");
  EXPECT_TRUE(r.to_json().contains("value"));
}

TEST(TripleExact, ReducesToPairs) {
  EXPECT_NEAR(laplace_triple_exact(9, {0, 0, 0}, raw).value, 1.0, 1e-13);
  EXPECT_NEAR(laplace_triple_exact(1, {0.4, 0, 0}, raw).value, 1 + std::expm1(0.4) / 4, 1e-15);
  for (auto stencil : {TripleStencil::separable, TripleStencil::joint64})
    for (std::array<double, 3> b : {std::array{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.5}})
      EXPECT_NEAR(laplace_triple_exact(12, b, raw, {}, stencil).value, oracle::pair_laplace(12, 0.5), 1e-12);
}

TEST(TripleExact, MatchesEnumerationAtFourSteps) {
  const std::vector<double> b{0.31, -0.17, 0.52};
  const double ref = oracle::enumerate_laplace(4, 3, b);
  EXPECT_NEAR(laplace_triple_exact(4, {b[0], b[1], b[2]}, raw).value, ref, 1e-12);
  EXPECT_NEAR(laplace_triple_exact(4, {b[0], b[1], b[2]}, raw, {}, TripleStencil::joint64).value, ref, 1e-12);
  EXPECT_NEAR(brute_force_laplace(4, 3, b), ref, 1e-12);
}

TEST(TripleExact, StencilsAgreeAtModerateN) {
  const std::array b{0.3, 0.2, 0.1};
  const double s = laplace_triple_exact(14, b).value;
  const double j = laplace_triple_exact(14, b, ExponentScale::scaled, {}, TripleStencil::joint64).value;
  EXPECT_NEAR(s, j, 1e-11);
}

TEST(TripleExact, MemoryGuard) {
  EXPECT_THROW(laplace_triple_exact(200, {0.1, 0.1, 0.1}, ExponentScale::scaled, {.memory_limit_bytes = 1024}),
               BudgetError);
}

TEST(BruteForce, SmallCases) {
  const double b[] = {0.9};
  EXPECT_NEAR(brute_force_laplace(1, 2, b), 1 + std::expm1(0.9) / 4, 1e-15);
  const double z[] = {0.0};
  EXPECT_EQ(brute_force_laplace(2, 2, z), 1.0);
  const double g[] = {0.37};
  EXPECT_NEAR(brute_force_laplace(6, 2, g), oracle::enumerate_laplace(6, 2, {0.37}), 1e-12);
  EXPECT_NEAR(brute_force_laplace(6, 2, g), laplace_pair_exact(6, 0.37, raw).value, 1e-12);
  const double many[] = {0, 0, 0, 0, 0, 0};
  EXPECT_THROW(brute_force_laplace(4, 4, many), BudgetError);
}

TEST(PairLocalTimeLaw, MomentsAndTransform) {
  const auto p = pair_local_time_law(20);
  ASSERT_EQ(p.size(), 21u);
  double mass = 0, mean = 0, lap = 0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    EXPECT_GE(p[l], 0.0);
    mass += p[l];
    mean += l * p[l];
    lap += p[l] * std::exp(0.4 * l);
  }
  EXPECT_NEAR(mass, 1.0, 1e-14);
  EXPECT_NEAR(mean, oracle::collision_time(20), 1e-13);
  EXPECT_NEAR(lap, oracle::pair_laplace(20, 0.4), 1e-12);
  EXPECT_EQ(pair_local_time_law(1)[1], 0.25);
  EXPECT_THROW(pair_local_time_law(33), BudgetError);
}

TEST(PairLocalTimeLaw, ChiSquareAgainstSimulation) {
  const std::int64_t N = 16, reps = 100000;
  const auto law = pair_local_time_law(N);
  std::vector<std::int64_t> counts(law.size(), 0);
  for (const auto& s : simulate_collisions(N, 2, reps, 99)) ++counts[s.L[0]];
  const auto chi = chi_square_test(counts, law);
  EXPECT_GE(chi.p_value, 0.001) << "chi2=" << chi.statistic << " dof=" << chi.dof;
}

TEST(PartitionSeq, EnumerationAndPredecessors) {
  EXPECT_EQ(PartitionSeq::enumerate(3, 1).size(), 3u);
  EXPECT_EQ(PartitionSeq::enumerate(3, 4).size(), 3u * 8u);
  EXPECT_EQ(PartitionSeq::enumerate(2, 2).size(), 0u);
  EXPECT_EQ(PartitionSeq::enumerate(4, 2).size(), 6u * 5u);
  const PartitionSeq s(3, {{0, 1}, {1, 2}, {0, 1}, {0, 2}});
  EXPECT_EQ(s.predecessor(1), 0u);
  EXPECT_EQ(s.predecessor(3), 1u);
  EXPECT_EQ(s.predecessor(4), 0u);
  EXPECT_THROW(PartitionSeq(3, {{0, 1}, {0, 1}}), std::invalid_argument);
}

TEST(Chaos, FirstTerms) {
  const std::vector<double> s{0.3};
  EXPECT_NEAR(chaos_terms_from_sigma(1, 2, s, 1).terms[0], 0.3 / 4, 1e-16);
  const BetaMatrix b2(2, 0.4);
  for (int r = 1; r <= 3; ++r) EXPECT_EQ(chaos_term(50, r, b2, ChaosMode::multi).value, 0.0);
  const std::vector<double> s3{0.2, 0.5, 0.7};
  const auto m = chaos_terms_from_sigma(1, 3, s3, 1, ChaosMode::multi, CollisionWeight::product);
  EXPECT_NEAR(m.terms[0], 0.2 * 0.5 * 0.7 / 16, 1e-16);
}

TEST(Chaos, FullSeriesIsTheLaplaceTransform) {
  const std::vector<double> b{0.45};
  const std::vector<double> s{std::expm1(0.45)};
  EXPECT_NEAR(chaos_terms_from_sigma(6, 2, s, 6).partial_sum(), oracle::enumerate_laplace(6, 2, b), 1e-12);
  const std::vector<double> b3{0.3, -0.2, 0.5};
  std::vector<double> s3;
  for (double x : b3) s3.push_back(std::expm1(x));
  EXPECT_NEAR(chaos_terms_from_sigma(4, 3, s3, 4).partial_sum(), oracle::enumerate_laplace(4, 3, b3), 1e-12);
}

TEST(Chaos, ModesSplitTheSeries) {
  const BetaMatrix b(3, {0.4, 0.3, 0.2});
  const auto all = chaos_terms(20, b, 3);
  const auto two = chaos_terms(20, b, 3, ChaosMode::two_body);
  const auto multi = chaos_terms(20, b, 3, ChaosMode::multi);
  for (int r = 0; r < 3; ++r) {
    EXPECT_NEAR(all.terms[r], two.terms[r] + multi.terms[r], 1e-14);
    EXPECT_GT(two.terms[r], 0.0);
  }
}

TEST(Rewired, EmptyAndSinglePair) {
  EXPECT_EQ(rewired_sum(16, 0, BetaMatrix(3, 0.3)).value, 1.0);
  for (std::int64_t N : {16, 64}) {
    const auto r = rewired_sum(N, 3, BetaMatrix(2, 0.5));
    EXPECT_NEAR(r.value, replica_total(N, 0.5), 1e-10);
    const auto full = chaos_terms(N, BetaMatrix(2, 0.5), static_cast<int>(N));
    EXPECT_NEAR(r.value, full.partial_sum(), 1e-10);
    EXPECT_NEAR(r.gap, 0.0, 1e-10);
  }
}

TEST(Rewired, BoundedByPairProduct) {
  const auto r = rewired_sum(32, 3, BetaMatrix(3, 0.3));
  ASSERT_EQ(r.by_order.size(), 3u);
  const double pair = laplace_pair_exact(32, 0.3).value;
  EXPECT_NEAR(r.upper_bound, pair * pair * pair, 1e-9);
  EXPECT_GE(r.gap, 0.0);
  EXPECT_NEAR(r.value, 1 + r.by_order[0] + r.by_order[1] + r.by_order[2], 1e-14);
  EXPECT_THROW(rewired_sum(128, 3, BetaMatrix(3, 0.3)), BudgetError);
}
