#include <gtest/gtest.h>

#include <cmath>

#include "bmm/random.hpp"

namespace bmm {
namespace {

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterUniform, DeterministicAndAddressable) {
  EXPECT_EQ(counter_uniform(42, Stream::kSampling, 3, 7, 11),
            counter_uniform(42, Stream::kSampling, 3, 7, 11));
  EXPECT_NE(counter_uniform(42, Stream::kSampling, 3, 7, 11),
            counter_uniform(42, Stream::kSampling, 4, 7, 11));
  EXPECT_NE(counter_uniform(42, Stream::kSampling, 3, 7, 11),
            counter_uniform(42, Stream::kZipf, 3, 7, 11));
  EXPECT_NE(counter_uniform(42, Stream::kSampling, 3, 7, 11),
            counter_uniform(43, Stream::kSampling, 3, 7, 11));
  EXPECT_NE(counter_uniform(42, Stream::kSampling, 3, 7, 11),
            counter_uniform(42, Stream::kSampling, 3, 7, 11ull << 32));
}

TEST(CounterUniform, RangeAndMoments) {
  constexpr int kN = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double u = counter_uniform(1, Stream::kSampling, 0, 0, i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / kN;
  const double var = sum2 / kN - mean * mean;
  EXPECT_NEAR(mean, 0.5, 4 * std::sqrt(1.0 / 12 / kN));
  EXPECT_NEAR(var, 1.0 / 12, 0.002);
}

}  // namespace
}  // namespace bmm
