#include <gtest/gtest.h>

#include <cmath>

#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = Philox4x32::apply({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (Philox4x32::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::apply({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (Philox4x32::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a(42, RngStream::kMomentum), b(42, RngStream::kMomentum);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  Rng a(42, RngStream::kMomentum), b(42, RngStream::kAccept);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += a.next_u32() == b.next_u32();
  EXPECT_LT(equal, 5);
}

TEST(Rng, UniformIsOpenInterval) {
  Rng r(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(11);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(n));
  EXPECT_LT(std::abs(var - 1.0), 3.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(s4 / n - 3.0), 3.0 * std::sqrt(96.0 / n));
}

TEST(Rng, BernoulliRate) {
  Rng r(5);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.3);
  EXPECT_NEAR(hits / double(n), 0.3, 3.0 * std::sqrt(0.21 / n));
}

}  // namespace
}  // namespace bpinn
