#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "otrsens/numerics.hpp"
#include "otrsens/rng.hpp"

using namespace otrsens;

TEST(Rng, SameKeyGivesSameSequence) {
  Rng a(42, 7, Stream::kData);
  Rng b(42, 7, Stream::kData);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentReplicatesAndStreamsDiffer) {
  Rng a(42, 7, Stream::kData);
  Rng b(42, 8, Stream::kData);
  Rng c(42, 7, Stream::kMonteCarlo);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, UniformStaysInOpenIntervalWithCorrectMoments) {
  Rng rng(1, 0, Stream::kTest);
  std::vector<double> u(200000);
  for (auto& v : u) {
    v = rng.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  EXPECT_NEAR(mean(u), 0.5, 3 * std::sqrt(1.0 / 12.0 / u.size()));
  EXPECT_NEAR(sample_sd(u), std::sqrt(1.0 / 12.0), 2e-3);
}

TEST(Rng, NormalHasUnitVarianceAndZeroMean) {
  Rng rng(2, 0, Stream::kTest);
  std::vector<double> z(200000);
  for (auto& v : z) v = rng.normal();
  EXPECT_NEAR(mean(z), 0.0, 3.0 / std::sqrt(static_cast<double>(z.size())));
  EXPECT_NEAR(sample_sd(z), 1.0, 5e-3);
}

TEST(Rng, CategoricalFollowsWeights) {
  Rng rng(5, 0, Stream::kTest);
  const std::array<double, 3> w{1.0, 2.0, 7.0};
  std::array<double, 3> count{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) count[rng.categorical(w)] += 1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = w[k] / 10.0;
    EXPECT_NEAR(count[k] / n, p, 4 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(Rng, SignBernoulliRespectsProbability) {
  Rng rng(6, 0, Stream::kTest);
  int plus = 0;
  for (int i = 0; i < 100000; ++i) plus += rng.sign_bernoulli(0.3) == 1;
  EXPECT_NEAR(plus / 100000.0, 0.3, 0.006);
}
