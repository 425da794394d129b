#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "crnsim/exact.hpp"
#include "crnsim/error.hpp"
#include "support/networks.hpp"
#include "support/stats.hpp"

namespace crnsim {
namespace {

using PathFn = PathResult (*)(const ReactionNetwork&, const State&, double,
                              StreamGenerator&, const PathOptions&);

PathResult direct(const ReactionNetwork& n, const State& x, double T,
                  StreamGenerator& g, const PathOptions& o) {
  return direct_method_path(n, x, T, g, o);
}
PathResult nrm(const ReactionNetwork& n, const State& x, double T,
               StreamGenerator& g, const PathOptions& o) {
  return next_reaction_path(n, x, T, g, o);
}

std::vector<std::int64_t> final_counts(PathFn fn, const NetworkDocument& d,
                                       double T, int n, std::size_t species,
                                       std::uint64_t seed) {
  std::vector<std::int64_t> out(n);
  for (int i = 0; i < n; ++i) {
    StreamGenerator g({seed, static_cast<std::uint64_t>(i)});
    out[i] = fn(d.network, d.initial, T, g, {}).final_state[species];
  }
  return out;
}

class ExactMethod : public ::testing::TestWithParam<PathFn> {};

TEST_P(ExactMethod, AbsorbingState) {
  const auto d = testing::doc("A + B -> C @ 1\ninit A=5\n");
  StreamGenerator g({1, 0});
  const auto r = GetParam()(d.network, d.initial, 10.0, g, {});
  EXPECT_EQ(r.final_state, d.initial);
  EXPECT_EQ(r.update_count, 0u);
}

TEST_P(ExactMethod, PureBirthIsPoisson) {
  const auto d = testing::birth(10.0);
  const auto xs = final_counts(GetParam(), d, 1.0, 100000, 0, 21);
  double s = 0, ss = 0;
  for (const auto x : xs) { s += x; ss += static_cast<double>(x) * x; }
  const double mean = s / xs.size();
  const double var = (ss - xs.size() * mean * mean) / (xs.size() - 1);
  EXPECT_NEAR(mean, 10.0, 0.031);
  EXPECT_GE(var / mean, 0.97);
  EXPECT_LE(var / mean, 1.03);
  EXPECT_GT(testing::poisson_gof(xs, 10.0).p_value, 1e-4);
}

TEST_P(ExactMethod, DeathFromOneIsBernoulli) {
  const auto d = testing::doc("A -> 0 @ 1\ninit A=1\n");
  const auto xs = final_counts(GetParam(), d, 1.0, 100000, 0, 22);
  double extinct = 0;
  for (const auto x : xs) extinct += x == 0;
  const double p = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(extinct / xs.size(), p, 3 * std::sqrt(p * (1 - p) / xs.size()));
}

TEST_P(ExactMethod, IsomerizationIsBinomial) {
  const double k1 = 1.0, k2 = 0.5, t = 0.7;
  const int n = 40;
  const auto d = testing::doc("A -> B @ 1\nB -> A @ 0.5\ninit A=40\n");
  const auto xs = final_counts(GetParam(), d, t, 50000, 0, 23);
  const double p = (k2 + k1 * std::exp(-(k1 + k2) * t)) / (k1 + k2);
  const auto binom = [&](std::int64_t k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                    k * std::log(p) + (n - k) * std::log1p(-p));
  };
  const auto r = testing::chi_square_gof(xs, binom, 0, n);
  EXPECT_GT(r.p_value, 1e-4) << r.statistic;
}

TEST_P(ExactMethod, ConservationAlongTrajectories) {
  const auto d = testing::doc("A <-> B @ 1, 2\ninit A=30 B=10\n");
  for (std::uint64_t i = 0; i < 1000; ++i) {
    StreamGenerator g({24, i});
    const auto r = GetParam()(d.network, d.initial, 2.0, g, {true});
    ASSERT_FALSE(r.trajectory.empty());
    EXPECT_DOUBLE_EQ(r.trajectory.front().time, 0.0);
    for (std::size_t j = 0; j < r.trajectory.size(); ++j) {
      ASSERT_EQ(r.trajectory[j].state[0] + r.trajectory[j].state[1], 40);
      if (j) ASSERT_GE(r.trajectory[j].time, r.trajectory[j - 1].time);
    }
    EXPECT_EQ(r.trajectory.back().state, r.final_state);
    EXPECT_LE(r.trajectory.back().time, 2.0);
  }
}

TEST_P(ExactMethod, UpdateCountIsJumpCount) {
  const auto d = testing::birth(5.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    StreamGenerator g({25, i});
    const auto r = GetParam()(d.network, d.initial, 3.0, g, {true});
    EXPECT_EQ(r.update_count, static_cast<std::uint64_t>(r.final_state[0]));
    EXPECT_EQ(r.trajectory.size(), r.update_count + 1);
  }
}

TEST_P(ExactMethod, InputValidation) {
  const auto d = testing::birth(1.0);
  StreamGenerator g({1, 0});
  EXPECT_THROW(GetParam()(d.network, {1, 2}, 1.0, g, {}), StructuralError);
  EXPECT_THROW(GetParam()(d.network, {-1}, 1.0, g, {}), DomainError);
  EXPECT_THROW(GetParam()(d.network, {0}, 0.0, g, {}), DomainError);
}

TEST_P(ExactMethod, BitwiseReproducible) {
  const auto d = testing::doc(testing::kExample1);
  StreamGenerator a({9, 4}), b({9, 4});
  EXPECT_EQ(GetParam()(d.network, d.initial, 2.0, a, {true}),
            GetParam()(d.network, d.initial, 2.0, b, {true}));
}

INSTANTIATE_TEST_SUITE_P(Methods, ExactMethod, ::testing::Values(&direct, &nrm),
                         [](const auto& info) {
                           return info.index == 0 ? std::string("Direct")
                                                  : std::string("NextReaction");
                         });

TEST(ExactMethods, DirectAndNextReactionAgreeInDistribution) {
  const auto d = testing::doc("A + B <-> C @ 0.01, 1\nC -> D @ 0.5\ninit A=60 B=40\n");
  for (std::size_t species = 0; species < 4; ++species) {
    const auto a = final_counts(&direct, d, 1.5, 20000, species, 31);
    const auto b = final_counts(&nrm, d, 1.5, 20000, species, 32);
    const std::vector<double> fa(a.begin(), a.end()), fb(b.begin(), b.end());
    EXPECT_GT(testing::ks_two_sample_p(fa, fb), 1e-4) << "species " << species;
  }
}

TEST(ExactMethods, GeneModelUpdatesPerPath) {
  const auto d = testing::doc(testing::kGeneModel);
  double total = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    StreamGenerator g({33, static_cast<std::uint64_t>(i)});
    total += static_cast<double>(next_reaction_path(d.network, d.initial, 1.0, g).update_count);
  }
  EXPECT_GT(total / n, 1.6e4);
  EXPECT_LT(total / n, 1.8e4);
}

}  // namespace
}  // namespace crnsim
