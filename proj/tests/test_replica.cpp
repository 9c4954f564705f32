#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "colltime/replica.hpp"
#include "colltime/stats.hpp"
#include "oracle.hpp"

using namespace colltime;

TEST(Sigma, Values) {
  EXPECT_EQ(sigma(0.0, 100), 0.0);
  EXPECT_NEAR(sigma(0.5, 10000), std::expm1(0.5 * std::numbers::pi / std::log(1e4)), 1e-15);
  EXPECT_NEAR(sigma(0.5, 10000), 0.18597, 5e-5);
  EXPECT_NEAR(scaled_exponent(0.5, 10000), std::log1p(sigma(0.5, 10000)), 1e-15);
}

TEST(BetaMatrix, PairOrderAndValidation) {
  BetaMatrix b(3, {0.1, 0.2, 0.3});
  EXPECT_EQ(b(0, 1), 0.1);
  EXPECT_EQ(b(0, 2), 0.2);
  EXPECT_EQ(b(1, 2), 0.3);
  EXPECT_EQ(b(2, 1), 0.3);
  EXPECT_EQ(b.bar_beta(), 0.3);
  EXPECT_EQ(BetaMatrix::pair_index(4, 2, 3), 5u);
  EXPECT_THROW(BetaMatrix(3, {0.1, 0.2}), std::invalid_argument);
}

TEST(ReplicaTable, Origin) {
  const auto t = build_replica_table(8, 0.5, 8);
  ASSERT_TRUE(t.has_spatial());
  EXPECT_EQ(t.spatial(0, {0, 0}), 1.0);
  EXPECT_EQ(t.spatial(0, {1, 1}), 0.0);
  EXPECT_EQ(t.marginal(0), 1.0);
}

TEST(ReplicaTable, FirstTerms) {
  for (std::int64_t N : {4, 16, 100}) {
    const auto t = build_replica_table(N, 0.5, N);
    const double s = sigma(0.5, N);
    EXPECT_NEAR(t.spatial(1, {1, 0}), s / 16, 1e-16);
    EXPECT_NEAR(t.marginal(2), s * 0.140625 + s * s / 16, 1e-15);
  }
}

TEST(ReplicaTable, SpatialSumsToMarginal) {
  const auto t = build_replica_table(40, 0.7, 40);
  for (std::int64_t n = 0; n <= 40; ++n) {
    double sum = 0;
    for (std::int64_t a = -n; a <= n; ++a)
      for (std::int64_t b = -n; b <= n; ++b) sum += t.spatial(n, {a, b});
    EXPECT_NEAR(sum, t.marginal(n), 1e-13 * t.marginal(n)) << n;
    EXPECT_NEAR(t.truncation_deficit(n), 0.0, 1e-14);
  }
}

TEST(ReplicaMarginals, AgreeWithLongDoubleRecurrence) {
  for (std::int64_t N : {10, 300, 2000}) {
    const auto u = replica_marginals(N, 0.6);
    const auto ref = oracle::replica_marginals(N, oracle::sigma(0.6, N));
    for (std::int64_t n = 0; n <= N; ++n) ASSERT_NEAR(u[n], ref[n], 1e-14 * std::max(1.0, ref[n])) << N << ' ' << n;
  }
}

TEST(ReplicaTotal, ZeroCouplingAndOneStep) {
  EXPECT_EQ(replica_total(50, 0.0), 1.0);
  const auto q = diagonal_returns(1);
  for (double s : {0.1, 1.7}) {
    const auto u = replica_marginals_from_sigma(1, s, q);
    EXPECT_DOUBLE_EQ(u[0] + u[1], 1 + s / 4);
  }
}

TEST(ReplicaTotal, EqualsPairLaplaceTransform) {
  for (int N : {4, 12, 24})
    for (double b : {-0.5, 0.5, 0.9}) {
      const double raw = std::numbers::pi * b / std::log(double(N));
      EXPECT_NEAR(replica_total(N, b), oracle::pair_laplace(N, raw), 1e-12) << N << ' ' << b;
    }
}

TEST(ReplicaTotal, ApproachesGeometricLimitFromAbove) {
  // frozen from the long-double recurrence; the sequence falls towards 2
  const std::vector<std::pair<std::int64_t, double>> expected{
      {256, 2.322526521524}, {1024, 2.266504577254}, {4096, 2.226619678410},
      {16384, 2.196763093860}, {65536, 2.173649341741}};
  double prev = INFINITY;
  for (auto [N, v] : expected) {
    const double got = replica_total(N, 0.5);
    EXPECT_NEAR(got, v, 1e-10) << N;
    EXPECT_GT(got, 2.0);
    EXPECT_LT(got, prev);
    prev = got;
  }
  EXPECT_LT(std::abs(prev - 2.0) / 2.0, 0.25);
}

TEST(RenewalLaw, SmallHorizons) {
  const auto l1 = renewal_step_law(1, 4);
  EXPECT_DOUBLE_EQ(l1.probability(1, {1, 0}), 0.25);
  EXPECT_DOUBLE_EQ(l1.total_mass(), 1.0);
  const auto l2 = renewal_step_law(2, 4);
  EXPECT_DOUBLE_EQ(l2.probability(2, {0, 0}), 0.16);
  EXPECT_DOUBLE_EQ(l2.time_marginal(1), 0.64);
}

TEST(RenewalConvolution, SmallHorizon) {
  const auto c = renewal_convolution(2, 3);
  EXPECT_EQ(c(0, 0), 1.0);
  EXPECT_EQ(c(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(c(1, 1), 0.64);
  EXPECT_DOUBLE_EQ(c(2, 2), 0.4096);
  EXPECT_EQ(c(3, 2), 0.0);
}

TEST(RenewalConvolution, SeriesReproducesReplicaMarginals) {
  for (std::int64_t N : {2, 5, 16, 64, 256}) {
    const auto q = diagonal_returns(N);
    const double sR = sigma(0.5, N) * expected_collision_time(N).value;
    const auto series = renewal_convolution(N, renewal_terms(sR, N), q).series_marginals(sR);
    const auto direct = replica_marginals(N, 0.5, q);
    for (std::int64_t n = 0; n <= N; ++n) ASSERT_NEAR(series[n], direct[n], 1e-12) << N << ' ' << n;
  }
}

TEST(RenewalConvolution, KmaxGuards) {
  EXPECT_THROW(renewal_kmax(1.0), std::domain_error);
  const int k = renewal_kmax(0.5, 1e-12);
  EXPECT_LT(std::pow(0.5, k + 1) / 0.5, 1e-12);
  EXPECT_GE(std::pow(0.5, k) / 0.5, 1e-12);
  EXPECT_EQ(renewal_terms(3.4, 2), 2);
  EXPECT_EQ(renewal_terms(0.5, 10), 10);
  EXPECT_EQ(renewal_terms(0.5, 1000), k);
}

TEST(RenewalSampler, OneStepHorizon) {
  auto kernel = std::make_shared<const PairKernel>(1);
  RenewalSampler s(kernel);
  CounterRng rng({3, 0, 0});
  for (int i = 0; i < 200; ++i) {
    const auto j = s.draw(rng);
    EXPECT_EQ(j.T, 1);
    EXPECT_EQ(j.X.l1(), 1);
  }
}

TEST(RenewalSampler, TimeMeanAndConditionalLaw) {
  const std::int64_t N = 1000;
  auto kernel = std::make_shared<const PairKernel>(N);
  RenewalSampler s(kernel);
  const auto law = renewal_step_law(N, N);
  CounterRng rng({17, 1, 0});
  std::vector<double> T;
  std::int64_t at2 = 0, diag2 = 0;
  for (int i = 0; i < 200000; ++i) {
    const auto j = s.draw(rng);
    T.push_back(double(j.T));
    if (j.T == 2) {
      ++at2;
      diag2 += (std::abs(j.X.x1) == 1 && std::abs(j.X.x2) == 1);
    }
  }
  const auto m = moments(T);
  EXPECT_NEAR(m.mean, law.mean_time(), 3 * m.standard_error());
  // given T = 2 the four diagonal neighbours carry 4 (1/8)^2 / q_4(0) = 4/9
  const double p = 4.0 / 9.0;
  EXPECT_NEAR(double(diag2) / at2, p, 3 * std::sqrt(p * (1 - p) / at2));
}

TEST(RenewalSampler, PathStaysWithinHorizon) {
  CounterRng rng({5, 0, 0});
  for (int i = 0; i < 50; ++i) {
    const auto p = sample_renewal(128, rng);
    ASSERT_EQ(p.tau.size(), p.jumps.size() + 1);
    EXPECT_LE(p.tau.back(), 128);
  }
}

TEST(CrudeBounds, ZeroCoupling) {
  const auto r = crude_bound_check(5000, BetaMatrix(3, 0.0));
  EXPECT_EQ(r.q_side, 0.0);
  ASSERT_TRUE(r.replica_sum);
  EXPECT_EQ(*r.replica_sum, 1.0);
}

TEST(CrudeBounds, ProductAtModerateCoupling) {
  const auto r = crude_bound_check(10000, BetaMatrix(2, 0.5));
  EXPECT_NEAR(r.q_side, oracle::sigma(0.5, 10000) * oracle::collision_time(10000), 1e-12);
  EXPECT_NEAR(r.q_side, 0.5575, 5e-4);
  ASSERT_TRUE(r.replica_sum);
  EXPECT_LE(*r.replica_sum, r.geometric_bound);
  EXPECT_GT(r.min_feasible_beta_prime, 0.5);
  const auto far = crude_bound_check(100000000, BetaMatrix(2, 0.5));
  EXPECT_LT(far.q_side - 0.5, r.q_side - 0.5);
  EXPECT_GT(far.q_side, 0.5);
  EXPECT_FALSE(far.replica_sum);
}
