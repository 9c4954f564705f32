#include <gtest/gtest.h>

#include <boost/random/gamma_distribution.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "colltime/exact.hpp"
#include "colltime/montecarlo.hpp"
#include "oracle.hpp"

using namespace colltime;

TEST(Collisions, IndependentOfWorkersAndBlocking) {
  const auto one = simulate_collisions(300, 4, 40, 77, 1);
  const auto many = simulate_collisions(300, 4, 40, 77, 3);
  EXPECT_EQ(one, many);
  const auto tail = simulate_collisions(300, 4, 15, 77, 2, 25);
  for (int i = 0; i < 15; ++i) EXPECT_EQ(tail[i], one[25 + i]);
  EXPECT_NE(simulate_collisions(300, 4, 40, 78, 1), one);
}

TEST(Collisions, ShapeAndBounds) {
  for (const auto& s : simulate_collisions(50, 3, 100, 1)) {
    ASSERT_EQ(s.L.size(), 3u);
    for (auto l : s.L) {
      EXPECT_GE(l, 0);
      EXPECT_LE(l, 50);
    }
    EXPECT_EQ(s(0, 2), s(2, 0));
  }
}

TEST(Collisions, OneStepLaw) {
  const auto s = simulate_collisions(1, 2, 40000, 5);
  double hits = 0;
  for (const auto& x : s) hits += x.L[0];
  const double p = hits / s.size();
  EXPECT_NEAR(p, 0.25, 3 * std::sqrt(0.25 * 0.75 / s.size()));
}

TEST(Collisions, MeanIsCollisionTime) {
  const auto s = simulate_collisions(200, 2, 40000, 6);
  std::vector<double> L;
  for (const auto& x : s) L.push_back(double(x.L[0]));
  const auto m = moments(L);
  EXPECT_NEAR(m.mean, oracle::collision_time(200), 3 * m.standard_error());
}

TEST(Collisions, NdjsonRoundTrip) {
  const auto s = simulate_collisions(64, 3, 10, 8);
  std::stringstream io;
  write_samples_ndjson(io, s);
  EXPECT_EQ(read_samples_ndjson(io), s);
}

TEST(EmpiricalLaplace, ZeroCouplingIsOne) {
  const auto s = simulate_collisions(100, 3, 500, 9);
  const auto e = empirical_laplace(s, BetaMatrix(3, 0.0));
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.standard_error, 0.0);
  EXPECT_EQ(e.provenance, "monte-carlo");
}

TEST(EmpiricalLaplace, MatchesExactPairTransform) {
  const auto s = simulate_collisions(512, 2, 40000, 10);
  const auto e = empirical_laplace(s, BetaMatrix(2, 0.5));
  EXPECT_NEAR(e.value, laplace_pair_exact(512, 0.5).value, 3 * e.standard_error);
}

TEST(Rescale, Definition) {
  const auto s = simulate_collisions(1000, 3, 5, 11);
  const auto r = rescale(s[2]);
  for (std::size_t p = 0; p < 3; ++p) EXPECT_DOUBLE_EQ(r.Y[p], std::numbers::pi * s[2].L[p] / std::log(1000.0));
  const auto tot = rescaled_total(s);
  EXPECT_DOUBLE_EQ(tot[2], r.Y[0] + r.Y[1] + r.Y[2]);
}

TEST(Gof, SyntheticExponentialPasses) {
  std::mt19937_64 g(1);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = e(g);
  const auto r = test_exponential(x);
  EXPECT_TRUE(r.passes());
  EXPECT_NEAR(r.critical_value, 1.628 / std::sqrt(1e5), 2e-5);
  EXPECT_NEAR(r.mean, 1.0, 0.01);
}

TEST(Gof, ConstantZeroIsMaximallyFar) {
  const std::vector<double> z(2000, 0.0);
  const auto r = test_exponential(z);
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_FALSE(r.passes());
  EXPECT_THROW(test_exponential(std::vector<double>(10, 1.0)), std::invalid_argument);
}

TEST(Gof, GammaTotalForTwoWalksIsTheExponentialTest) {
  const auto s = simulate_collisions(1000, 2, 2000, 12);
  const auto a = test_gamma_total(s, 2);
  const auto b = test_exponential(rescaled_pair(s, 0));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.critical_value, b.critical_value);
}

TEST(Gof, SyntheticGammaPasses) {
  std::mt19937_64 g(2);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = e(g) + e(g) + e(g);
  EXPECT_TRUE(test_gamma(x, 3.0).passes());
  boost::random::gamma_distribution<double> wrong(2.5);
  for (auto& v : x) v = wrong(g);
  EXPECT_FALSE(test_gamma(x, 3.0).passes());
}

TEST(Independence, SyntheticTriplesAreUncorrelated) {
  // lay out fake samples whose rescaled coordinates are i.i.d.
  std::mt19937_64 g(3);
  std::poisson_distribution<std::int64_t> pois(20.0);
  std::vector<CollisionSample> s(5000);
  for (std::int64_t i = 0; i < 5000; ++i) s[i] = {i, 3, 1000, {pois(g), pois(g), pois(g)}};
  const auto rep = test_pairwise_independence(s);
  ASSERT_EQ(rep.correlations.size(), 3u);
  for (const auto& c : rep.correlations) EXPECT_LT(std::abs(c.report.value), 3 * c.report.standard_error);
}

TEST(Independence, SharedWalkCorrelatesAtFiniteN) {
  const auto s = simulate_collisions(1000, 3, 20000, 13);
  const auto rep = test_pairwise_independence(s, std::vector<double>{0.0, 0.3});
  for (const auto& c : rep.correlations) EXPECT_GT(c.report.lower, 0.0) << c.p << ',' << c.q;
  ASSERT_EQ(rep.gaps.size(), 2u);
  EXPECT_EQ(rep.gaps[0].gap, 0.0);
  EXPECT_GT(rep.gaps[1].joint, 1.0);
}
