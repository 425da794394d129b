#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "crnsim/error.hpp"
#include "crnsim/rng.hpp"
#include "support/stats.hpp"

namespace crnsim {
namespace {

using testing::poisson_gof;

TEST(Philox, KnownAnswerVectors) {
  // Reference outputs of the Random123 distribution.
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}),
            (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}),
            (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(StreamGenerator, SameSpecSameDraws) {
  auto a = split_stream({7, 3});
  auto b = split_stream({7, 3});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(StreamGenerator, DistinctStreamsAndSeedsDiffer) {
  auto a = split_stream({7, 0});
  auto b = split_stream({7, 1});
  auto c = split_stream({8, 0});
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(StreamGenerator, PairedStreamsUncorrelated) {
  auto a = split_stream({11, 0});
  auto b = split_stream({11, 1});
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(), y = b.uniform();
    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double rho = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::fabs(rho), 0.01);
}

TEST(StreamGenerator, UniformRanges) {
  auto g = split_stream({1, 0});
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = g.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(MixSeed, DistinctSalts) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(5, 9), mix_seed(5, 9));
}

TEST(Exponential, MeanWithinFiveStandardErrors) {
  auto g = split_stream({2, 0});
  const double rate = 3.5;
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_exponential(rate, g);
  const double se = (1.0 / rate) / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(sum / n, 1.0 / rate, 5 * se);
}

TEST(Exponential, InversionIsMonotone) {
  double prev = INFINITY;
  for (double u = 0.001; u < 1.0; u += 0.001) {
    const double x = exponential_from_uniform(2.0, u);
    EXPECT_LT(x, prev);
    prev = x;
  }
  EXPECT_LT(exponential_from_uniform(1e12, 0.5), 1e-11);
}

TEST(Exponential, DomainErrors) {
  auto g = split_stream({2, 0});
  EXPECT_THROW(sample_exponential(0.0, g), DomainError);
  EXPECT_THROW(sample_exponential(-1.0, g), DomainError);
  EXPECT_THROW(sample_exponential(INFINITY, g), DomainError);
}

TEST(Poisson, ZeroMeanIsZero) {
  auto g = split_stream({3, 0});
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_poisson(0.0, g), 0);
}

TEST(Poisson, DomainErrors) {
  auto g = split_stream({3, 0});
  EXPECT_THROW(sample_poisson(-0.1, g), DomainError);
  EXPECT_THROW(sample_poisson(NAN, g), DomainError);
  EXPECT_THROW(sample_poisson(INFINITY, g), DomainError);
}

TEST(Poisson, MomentsAtTen) {
  auto g = split_stream({4, 0});
  const int n = 1000000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<double>(sample_poisson(10.0, g));
    s += k;
    ss += k * k;
  }
  const double mean = s / n;
  const double var = (ss - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, 10.0, 5 * std::sqrt(10.0 / n));
  EXPECT_GE(var / mean, 0.98);
  EXPECT_LE(var / mean, 1.02);
}

class PoissonGof : public ::testing::TestWithParam<double> {};

TEST_P(PoissonGof, ChiSquareAcceptsExactLaw) {
  const double mean = GetParam();
  auto g = split_stream({5, static_cast<std::uint64_t>(mean * 10)});
  std::vector<std::int64_t> xs(200000);
  for (auto& x : xs) x = sample_poisson(mean, g);
  const auto r = poisson_gof(xs, mean);
  EXPECT_GT(r.p_value, 1e-4) << "chi2=" << r.statistic << " dof=" << r.dof;
}

INSTANTIATE_TEST_SUITE_P(Means, PoissonGof,
                         ::testing::Values(0.1, 1.0, 9.99, 10.0, 10.01, 37.5, 1e3, 1e4,
                                           1e6, 1e7));

TEST(Poisson, Additivity) {
  auto g = split_stream({6, 0});
  std::vector<std::int64_t> xs(200000);
  for (auto& x : xs) x = sample_poisson(3.0, g) + sample_poisson(3.0, g);
  EXPECT_GT(poisson_gof(xs, 6.0).p_value, 1e-4);
}

TEST(Poisson, HugeMeanStaysCentered) {
  auto g = split_stream({6, 1});
  const double mean = 1e12;
  for (int i = 0; i < 1000; ++i) {
    const auto k = static_cast<double>(sample_poisson(mean, g));
    ASSERT_LT(std::fabs(k - mean), 8 * std::sqrt(mean));
  }
}

TEST(Categorical, PointMass) {
  auto g = split_stream({7, 0});
  const std::vector<double> w{1, 0, 0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_categorical(w, g), 0u);
}

TEST(Categorical, Frequencies) {
  auto g = split_stream({7, 1});
  const int n = 1000000;
  int zeros = 0;
  const std::vector<double> even{1, 1};
  for (int i = 0; i < n; ++i) zeros += sample_categorical(even, g) == 0;
  EXPECT_NEAR(zeros / static_cast<double>(n), 0.5, 0.002);

  zeros = 0;
  const std::vector<double> skew{3, 1};
  for (int i = 0; i < n; ++i) zeros += sample_categorical(skew, g) == 0;
  EXPECT_NEAR(zeros / static_cast<double>(n), 0.75, 5 * std::sqrt(0.75 * 0.25 / n));
}

TEST(Categorical, NeverPicksZeroWeight) {
  auto g = split_stream({7, 2});
  const std::vector<double> w{0, 2, 0, 1e-300, 0};
  for (int i = 0; i < 100000; ++i) {
    const auto k = sample_categorical(w, g);
    ASSERT_TRUE(k == 1 || k == 3);
  }
}

TEST(Categorical, DomainErrors) {
  auto g = split_stream({7, 0});
  EXPECT_THROW(sample_categorical(std::vector<double>{0, 0}, g), DomainError);
  EXPECT_THROW(sample_categorical(std::vector<double>{1, -1}, g), DomainError);
  EXPECT_THROW(sample_categorical(std::vector<double>{}, g), DomainError);
}

TEST(LogFactorial, MatchesLgamma) {
  for (std::int64_t k : {0, 1, 2, 10, 255, 256, 257, 1000, 123456789}) {
    EXPECT_NEAR(log_factorial(k), std::lgamma(static_cast<double>(k) + 1.0),
                1e-12 * std::max(1.0, std::lgamma(static_cast<double>(k) + 1.0)))
        << k;
  }
}

}  // namespace
}  // namespace crnsim
