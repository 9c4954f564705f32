#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "colltime/exact.hpp"
#include "colltime/polymer.hpp"
#include "oracle.hpp"

using namespace colltime;

TEST(Environment, ValuesDoNotDependOnBoxOrReadOrder) {
  const Environment small(20, 6, 123, 4), large(20, 30, 123, 4);
  for (std::int64_t n : {1, 7, 20})
    for (std::int64_t a = -6; a <= 6; ++a)
      for (std::int64_t b = -6; b <= 6; ++b) {
        if (parity(n, {a, b}) != 0) continue;
        ASSERT_EQ(small.omega(n, {a, b}), large.omega(n, {a, b}));
      }
  // a row read in bulk equals the single-site reference path
  std::vector<double> row(15);  // x2 even in [-15, 15]
  large.fill_row(9, 3, -15, 15, row.data());
  std::size_t k = 0;
  for (std::int64_t b = -15; b <= 15; ++b)
    if (parity(9, {3, b}) == 0) EXPECT_EQ(row[k++], large.omega(9, {3, b})) << b;
  EXPECT_EQ(k, row.size());
  EXPECT_NE(Environment(20, 6, 123, 5).omega(2, {0, 0}), small.omega(2, {0, 0}));
}

TEST(Environment, StandardNormalField) {
  const Environment env(200, 40, 9);
  double s = 0, s2 = 0;
  std::int64_t m = 0;
  for (std::int64_t n = 1; n <= 200; ++n)
    for (std::int64_t a = -40; a <= 40; a += 3)
      for (std::int64_t b = -40; b <= 40; ++b)
        if (parity(n, {a, b}) == 0) {
          const double w = env.omega(n, {a, b});
          s += w;
          s2 += w * w;
          ++m;
        }
  EXPECT_NEAR(s / m, 0.0, 4 / std::sqrt(double(m)));
  EXPECT_NEAR(s2 / m, 1.0, 4 * std::sqrt(2.0 / m));
}

TEST(PartitionFunction, ZeroTemperatureIsOne) {
  const Environment env(30, 30, 1);
  EXPECT_EQ(partition_function(30, 0.0, env).Z, 1.0);
}

TEST(PartitionFunction, OneStepIsTheFourNeighbourAverage) {
  const Environment env(1, 3, 77);
  const double beta = 0.8;
  for (LatticePoint x : {LatticePoint{0, 0}, LatticePoint{1, 1}}) {
    double ref = 0;
    for (auto [d1, d2] : oracle::kSteps)
      ref += 0.25 * std::exp(beta * env.omega(1, x + LatticePoint{d1, d2}) - beta * beta / 2);
    EXPECT_NEAR(partition_function(1, beta, env, x).Z, ref, 1e-15);
  }
}

TEST(PartitionFunction, LockstepMatchesSingleRuns) {
  const Environment env(48, 48, 5);
  const std::vector<double> betas{0.2, 0.45, 0.7};
  const auto all = partition_functions(48, betas, env);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    EXPECT_DOUBLE_EQ(all[i].Z, partition_function(48, betas[i], env).Z);
    EXPECT_EQ(all[i].beta, betas[i]);
  }
}

TEST(PartitionFunction, StrictTruncation) {
  const double beta[] = {0.5};
  PolymerOptions o;
  o.radius = 3;
  o.truncation = {true, 1e-9};
  EXPECT_THROW(sample_partition_functions(64, beta, 2, 1, o), TruncationError);
  o.radius = -1;
  EXPECT_NO_THROW(sample_partition_functions(64, beta, 2, 1, o));
}

TEST(PartitionFunction, MeanIsOne) {
  const double beta = polymer_scaled_beta(0.5, 32);
  EXPECT_NEAR(beta, 0.5 * std::sqrt(std::numbers::pi / std::log(32.0)), 1e-15);
  const auto s = sample_partition_functions(32, std::vector<double>{beta}, 10000, 2026);
  const auto m = moment_from_samples(s, 1);
  EXPECT_NEAR(m.value, 1.0, 3 * m.standard_error);
}

TEST(PolymerMoments, TrivialCases) {
  EXPECT_EQ(moment_estimate(20, 0.0, 3, 50, 1).value, 1.0);
  EXPECT_EQ(mixed_moment_estimate(20, std::vector<double>{0.0, 0.0}, 50, 1).value, 1.0);
  const auto a = moment_estimate(24, 0.4, 2, 300, 8);
  const auto b = mixed_moment_estimate(24, std::vector<double>{0.4, 0.4}, 300, 8);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_THROW(mixed_moment_estimate(24, std::vector<double>{0.9, 1.2}, 10, 1), std::invalid_argument);
}

TEST(PolymerMoments, GaussianIntegralIdentity) {
  const std::vector<double> w2{0.6, 0.4};
  EXPECT_NEAR(gaussian_moment_exact(4, w2), oracle::enumerate_laplace(4, 2, {0.24}), 1e-12);
  const std::vector<double> w3{0.5, 0.3, 0.8};
  EXPECT_NEAR(gaussian_moment_exact(3, w3), oracle::enumerate_laplace(3, 3, {0.15, 0.4, 0.24}), 1e-12);
  EXPECT_THROW(gaussian_moment_exact(5, std::vector<double>{0.1, 0.1, 0.1}), BudgetError);
}

TEST(PolymerMoments, MixedTripleMomentAgainstExactTransform) {
  const std::vector<double> b{0.3, 0.5, 0.7};
  const auto est = mixed_moment_estimate(64, b, 3000, 31);
  const double exact = laplace_triple_exact(64, {0.15, 0.21, 0.35}).value;
  EXPECT_NEAR(est.value, exact, 3 * est.standard_error);
}

TEST(PolymerMoments, NdjsonRecord) {
  const auto s = sample_partition_functions(8, std::vector<double>{0.3}, 2, 3);
  std::ostringstream out;
  write_partition_ndjson(out, s);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"environment", "N", "beta", "start", "Z", "truncation_deficit"})
      EXPECT_TRUE(j.contains(key)) << key;
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}
