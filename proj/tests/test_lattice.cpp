#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "colltime/lattice.hpp"
#include "oracle.hpp"

using namespace colltime;

TEST(KernelTable, SmallHorizonValues) {
  const auto t1 = build_kernel_table(1, 2);
  EXPECT_EQ(t1.value(1, {1, 0}), 0.25);
  EXPECT_EQ(t1.value(1, {0, 0}), 0.0);
  const auto t2 = build_kernel_table(2, 2);
  EXPECT_DOUBLE_EQ(t2.value(2, {0, 0}), 0.25);
  EXPECT_DOUBLE_EQ(t2.value(2, {1, 1}), 0.125);
  EXPECT_DOUBLE_EQ(t2.value(2, {2, 0}), 0.0625);
}

TEST(KernelTable, MatchesNaiveSteppingInsideALargeBox) {
  const int N = 14;
  const auto ref = oracle::walk_law(N);
  const auto t = build_kernel_table(N, N);
  const int side = 2 * N + 1;
  for (int n = 0; n <= N; ++n) {
    EXPECT_EQ(t.truncation_deficit(n), 0.0);
    for (int a = -N; a <= N; ++a)
      for (int b = -N; b <= N; ++b)
        ASSERT_NEAR(t.value(n, {a, b}), ref[n][(a + N) * side + b + N], 1e-16) << n << ' ' << a << ' ' << b;
  }
}

TEST(KernelTable, MassBalanceWithSmallBox) {
  const auto t = build_kernel_table(60, 5);
  double prev = 0.0;
  for (std::int64_t n = 0; n <= 60; ++n) {
    EXPECT_NEAR(t.slice_mass(n) + t.truncation_deficit(n), 1.0, 1e-13);
    EXPECT_GE(t.truncation_deficit(n), prev);
    prev = t.truncation_deficit(n);
  }
  EXPECT_GT(t.truncation_deficit(60), 0.01);
  // reflection bound dominates the actual loss
  EXPECT_LE(t.truncation_deficit(60), box_exit_bound(60, 5));
}

TEST(KernelTable, StrictModeRejectsLeakyBox) {
  EXPECT_THROW(build_kernel_table(60, 5, {true, 1e-9}), TruncationError);
  EXPECT_NO_THROW(build_kernel_table(60, default_radius(60), {true, 1e-9}));
}

TEST(KernelTable, OddParityAndOutsideAreZero) {
  const auto t = build_kernel_table(9, 9);
  EXPECT_EQ(t.value(9, {0, 0}), 0.0);
  EXPECT_EQ(t.value(4, {1, 0}), 0.0);
  EXPECT_EQ(t.value(4, {3, 3}), 0.0);  // l1 distance beyond n
  EXPECT_GT(t.value(4, {2, 2}), 0.0);
}

TEST(DiagonalReturn, ClosedForm) {
  EXPECT_DOUBLE_EQ(diagonal_return(0), 1.0);
  EXPECT_DOUBLE_EQ(diagonal_return(1), 0.25);
  EXPECT_DOUBLE_EQ(diagonal_return(2), 0.140625);
  // (C(100,50) / 2^100)^2
  EXPECT_NEAR(diagonal_return(50), 0.0063344467078727, 1e-15);
  EXPECT_NEAR(diagonal_return(50) / (2.0 / (std::numbers::pi * 100)), 1.0, 0.01);
  for (std::int64_t n : {3, 10, 77, 1000, 123456})
    EXPECT_NEAR(diagonal_return(n) / oracle::diagonal(n), 1.0, 1e-12) << n;
  // far out, against (1 - 1/(8n) + 1/(128 n^2))^2 / (pi n)
  const double n = 1e7, c = 1 - 1 / (8 * n) + 1 / (128 * n * n);
  EXPECT_NEAR(diagonal_return(10000000) * std::numbers::pi * n / (c * c), 1.0, 1e-13);
  EXPECT_NEAR(std::exp(log_diagonal_return(5000)), diagonal_return(5000), 1e-15);
}

TEST(DiagonalReturn, RecurrenceAgreesWithDirectFormula) {
  const auto q = diagonal_returns(4000);
  for (std::int64_t n : {0, 1, 2, 17, 999, 4000}) EXPECT_NEAR(q[n] / diagonal_return(n), 1.0, 1e-12);
}

TEST(CollisionTime, SmallN) {
  EXPECT_DOUBLE_EQ(expected_collision_time(1).value, 0.25);
  EXPECT_DOUBLE_EQ(expected_collision_time(2).value, 0.390625);
}

TEST(CollisionTime, AsymptoticResidual) {
  const auto c4 = expected_collision_time(10000);
  EXPECT_NEAR(c4.value / oracle::collision_time(10000), 1.0, 1e-12);
  EXPECT_LE(std::abs(c4.residual), 5e-3);
  EXPECT_NEAR(c4.residual, c4.value - std::log(1e4) / std::numbers::pi - CollisionTimeConstant::alpha / std::numbers::pi,
              1e-14);
  EXPECT_NEAR(CollisionTimeConstant::alpha, 0.208, 5e-4);
  EXPECT_LT(std::abs(expected_collision_time(1000000).residual), std::abs(c4.residual));
}

TEST(HeatKernel, Comparator) {
  EXPECT_NEAR(heat_kernel_approx(100, {0, 0}), 2.0 / (100 * std::numbers::pi), 1e-15);
  EXPECT_EQ(heat_kernel_approx(3, {0, 0}), 0.0);
  EXPECT_NEAR(heat_kernel_approx(2, {1, 1}), std::exp(-1.0) / std::numbers::pi, 1e-15);
  EXPECT_NEAR(diagonal_return(50) / heat_kernel_approx(100, {0, 0}), 1.0, 0.01);
}

TEST(MaxDeviation, Trivial) {
  EXPECT_EQ(max_deviation_estimate(1, 2.0, 2000, 1).probability, 0.0);
  EXPECT_EQ(max_deviation_estimate(1000, 1e-4, 2000, 1).probability, 1.0);
}

TEST(MaxDeviation, GaussianTail) {
  const auto e = max_deviation_estimate(1000, 3.0, 100000, 2024);
  RecordProperty("p_hat", std::to_string(e.probability));
  EXPECT_EQ(e.replicates, 100000);
  EXPECT_LE(e.probability, std::exp(-0.3 * 9));
  // the endpoint alone exceeds 3 sqrt(n) with probability e^{-9}
  EXPECT_GE(e.probability + 3 * e.standard_error, std::exp(-9.0));
}

TEST(BoxExit, TailRadiusIsMinimal) {
  for (std::int64_t N : {10, 100, 1000}) {
    const auto r = tail_radius(N, 1e-9);
    EXPECT_LE(box_exit_bound(N, r), 1e-9);
    EXPECT_GT(box_exit_bound(N, r - 1), 1e-9);
    EXPECT_LE(build_kernel_table(N, std::min<std::int64_t>(r, N)).truncation_deficit(N), 1e-9);
  }
}
