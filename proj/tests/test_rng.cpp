#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "colltime/rng.hpp"

using namespace colltime;

TEST(Philox, KnownAnswerVectors) {
  // published Philox4x32-10 vectors
  EXPECT_EQ(Philox4x32::apply({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::apply({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}),
            (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, BulkFillMatchesSequentialDraws) {
  for (std::size_t blocks : {0u, 1u, 2u, 3u, 7u, 64u}) {
    CounterRng a({42, 7, 3}, 1000), b({42, 7, 3}, 1000);
    std::vector<std::uint64_t> bulk(2 * blocks);
    a.fill(bulk.data(), blocks);
    for (std::size_t i = 0; i < bulk.size(); ++i) ASSERT_EQ(bulk[i], b()) << "blocks=" << blocks << " i=" << i;
    EXPECT_EQ(a(), b());  // both continue from the same block
  }
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a({1, 2, 3}), a2({1, 2, 3}), b({1, 2, 4}), c({2, 2, 3});
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, a2());
    seen.insert(x);
    seen.insert(b());
    seen.insert(c());
  }
  EXPECT_EQ(seen.size(), 300u);
}

TEST(CounterRng, UniformInHalfOpenUnitInterval) {
  CounterRng r({9, 0, 0});
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
}
