#include <gtest/gtest.h>

#include <random>

#include "crnsim/error.hpp"
#include "crnsim/observable.hpp"
#include "crnsim/parser.hpp"
#include "support/networks.hpp"

namespace crnsim {
namespace {

TEST(ParseNetwork, ThreeSpeciesChain) {
  const auto d = parse_network(testing::kExample1);
  const auto& net = d.network;
  ASSERT_EQ(net.n_species(), 3u);
  ASSERT_EQ(net.n_reactions(), 4u);
  EXPECT_EQ(net.species()[0].name, "A");
  EXPECT_EQ(net.species()[2].name, "C");
  EXPECT_DOUBLE_EQ(net.reaction(0).rate_constant, 0.03);
  EXPECT_DOUBLE_EQ(net.reaction(1).rate_constant, 1.0);
  EXPECT_DOUBLE_EQ(net.reaction(2).rate_constant, 0.1);
  EXPECT_DOUBLE_EQ(net.reaction(3).rate_constant, 1.0);
  EXPECT_EQ(d.initial, (State{13000, 100, 20}));
}

TEST(ParseNetwork, GeneModel) {
  const auto d = parse_network(testing::kGeneModel);
  const auto& net = d.network;
  ASSERT_EQ(net.n_species(), 4u);
  EXPECT_EQ(net.species_index("D"), 3u);
  EXPECT_EQ(net.reaction(2).inputs, (std::vector<Term>{{2, 2}}));
  EXPECT_EQ(net.reaction(2).outputs, (std::vector<Term>{{3, 1}}));
  EXPECT_TRUE(net.reaction(3).outputs.empty());
  EXPECT_EQ(net.jump(0), (JumpVector{0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(net.reaction(1).rate_constant, 1000.0);
  EXPECT_EQ(d.initial, (State{1, 0, 0, 0}));
}

TEST(ParseNetwork, EmptyDocument) {
  try {
    parse_network("");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("empty document"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_network("# only a comment\n\n"), ParseError);
}

TEST(ParseNetwork, ReversibleArrowExpandsForwardFirst) {
  const auto net = parse_network("A + B <-> C @ 2, 3e-1\n").network;
  ASSERT_EQ(net.n_reactions(), 2u);
  EXPECT_DOUBLE_EQ(net.reaction(0).rate_constant, 2.0);
  EXPECT_EQ(net.jump(0), (JumpVector{-1, -1, 1}));
  EXPECT_DOUBLE_EQ(net.reaction(1).rate_constant, 0.3);
  EXPECT_EQ(net.jump(1), (JumpVector{1, 1, -1}));
}

TEST(ParseNetwork, EmptyComplexSpellings) {
  const auto a = parse_network("0 -> S @ 1\nS -> 0 @ 2\n").network;
  const auto b = parse_network("\xE2\x88\x85 -> S @ 1\nS -> \xE2\x88\x85 @ 2\n").network;
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.reaction(0).inputs.empty());
}

TEST(ParseNetwork, CoefficientWithoutSpace) {
  const auto net = parse_network("2P -> D @ 1\n").network;
  EXPECT_EQ(net.reaction(0).inputs, (std::vector<Term>{{0, 2}}));
}

TEST(ParseNetwork, CommentsAndWhitespace) {
  const auto net = parse_network("  A->B@1 # trailing\n\t# full line\nB   ->   A  @  2\n").network;
  EXPECT_EQ(net.n_reactions(), 2u);
}

TEST(ParseNetwork, ExplicitDeclarationOrder) {
  const auto net = parse_network("species C B A\nA -> B @ 1\n").network;
  EXPECT_EQ(net.species()[0].name, "C");
  EXPECT_EQ(net.species_index("A"), 2u);
}

TEST(ParseNetwork, AutoDeclareDisabled) {
  ParseOptions strict;
  strict.auto_declare = false;
  EXPECT_NO_THROW(parse_network("species A B\nA -> B @ 1\n", strict));
  try {
    parse_network("species A\nA -> B @ 1\n", strict);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 6u);
  }
}

TEST(ParseNetwork, NonPositiveRate) {
  EXPECT_THROW(parse_network("A -> B @ 0\n"), ParseError);
  EXPECT_THROW(parse_network("A -> B @ -1\n"), ParseError);
  EXPECT_THROW(parse_network("A <-> B @ 1, 0\n"), ParseError);
}

TEST(ParseNetwork, ErrorPositions) {
  struct Case {
    const char* text;
    std::size_t line;
    std::size_t column;
  };
  const Case cases[] = {
      {"A -> B 1\n", 1, 8},            // missing @
      {"A -> B @ 1\nA => B @ 1\n", 2, 1},
      {"A -> B @ 1\ninit A=-3\n", 2, 8},
      {"A -> B @ x\n", 1, 10},
      {"11 A -> B @ 1\n", 1, 1},
      {"0 -> 0 @ 1\n", 1, 1},
      {"A <-> B @ 1\n", 1, 12},
      {"A -> B @ 1\nfoo bar\n", 2, 1},
      {"A -> B @ 1\n[experiment] method=warp\n", 2, 21},
      {"A -> B @ 1\n[experiment] h=0\n", 2, 16},
      {"A -> B @ 1\n[experiment]\nobservable=count(Q)\n", 3, 18},
      {"A -> B @ 1\n[experiment] colour=red\n", 2, 14},
      {"A -> B @ 1\ninit A=1 A=2\n", 2, 10},
  };
  for (const auto& c : cases) {
    try {
      parse_network(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text << " -> " << e.what();
      EXPECT_EQ(e.column(), c.column) << c.text << " -> " << e.what();
    }
  }
}

TEST(ParseNetwork, ExperimentBlock) {
  const auto d = parse_network(
      "A -> B @ 1\n[experiment] method=weaktrap h=3^-3 theta=0.25 T=2\n"
      "paths=1000 seed=42\nobservable=indicator(B >= 5)\n");
  ASSERT_EQ(d.experiments.size(), 1u);
  const auto& e = d.experiments[0];
  EXPECT_EQ(e.method, "weaktrap");
  EXPECT_DOUBLE_EQ(*e.h, 1.0 / 27.0);
  EXPECT_DOUBLE_EQ(*e.theta, 0.25);
  EXPECT_DOUBLE_EQ(*e.T, 2.0);
  EXPECT_EQ(e.paths, 1000u);
  EXPECT_EQ(e.seed, 42u);
  EXPECT_EQ(e.observable, "indicator(B >= 5)");
}

TEST(ParseNetwork, RoundTrip) {
  const char* const texts[] = {
      testing::kExample1,
      testing::kGeneModel,
      "species Z Y\n3 X + Y <-> 2 Z @ 1.5e-7, 0.1\n0 -> X @ 12.25\ninit X=4\n"
      "[experiment] method=midpoint h=0.1 T=1 paths=10 seed=3 observable=count2(Z)\n"
      "[experiment] method=exact\n",
  };
  for (const char* text : texts) {
    const auto d = parse_network(text);
    const std::string s = serialize(d);
    const auto again = parse_network(s);
    EXPECT_EQ(again, d) << s;
    EXPECT_EQ(serialize(again), s);
  }
}

TEST(ParseNetwork, FuzzNeverCrashesAndErrorsCarryPositions) {
  const std::string alphabet = "AB 2+-><@,.=0#\n[]()e1init";
  std::mt19937_64 rng(20240917);
  const std::string seeds[] = {testing::kExample1, testing::kGeneModel,
                               "A <-> B @ 1, 2\n[experiment] h=3^-2 observable=count(A)\n"};
  int parsed = 0;
  for (int iter = 0; iter < 20000; ++iter) {
    std::string text;
    if (iter % 2 == 0) {
      text = seeds[iter % 3];
      const int edits = 1 + static_cast<int>(rng() % 4);
      for (int e = 0; e < edits && !text.empty(); ++e) {
        const std::size_t pos = rng() % text.size();
        switch (rng() % 3) {
          case 0: text.erase(pos, 1); break;
          case 1: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
          default: text[pos] = static_cast<char>(rng() % 256); break;
        }
      }
    } else {
      const std::size_t len = rng() % 40;
      for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    }
    try {
      const auto d = parse_network(text);
      EXPECT_EQ(parse_network(serialize(d)), d);
      ++parsed;
    } catch (const ParseError& e) {
      EXPECT_GE(e.line(), 1u);
      EXPECT_GE(e.column(), 1u);
    }
  }
  EXPECT_GT(parsed, 0);
}

TEST(ParseObservable, Forms) {
  const auto net = parse_network(testing::kGeneModel).network;
  EXPECT_EQ(parse_observable("count2(D)", net), Observable::count_squared(3));
  EXPECT_EQ(parse_observable("indicator(D >= 6000)", net),
            Observable::indicator_at_least(3, 6000));
  EXPECT_EQ(parse_observable("count(M)", net), Observable::count(1));
  EXPECT_EQ(parse_observable(" count ( M ) ", net), Observable::count(1));
  EXPECT_EQ(parse_observable("const(1)", net), Observable::constant(1.0));
}

TEST(ParseObservable, Evaluation) {
  const State x{1, 2, 3, 6000};
  EXPECT_DOUBLE_EQ(Observable::count_squared(2)(x), 9.0);
  EXPECT_DOUBLE_EQ(Observable::indicator_at_least(3, 6000)(x), 1.0);
  EXPECT_DOUBLE_EQ(Observable::indicator_at_least(3, 6001)(x), 0.0);
}

TEST(ParseObservable, Errors) {
  const auto net = parse_network(testing::kGeneModel).network;
  for (const char* bad : {"count(Q)", "count(D", "mean(D)", "indicator(D > 5)",
                          "indicator(D >= -1)", "count(D) extra", "", "count2()"}) {
    EXPECT_THROW(parse_observable(bad, net), ParseError) << bad;
  }
}

TEST(ParseObservable, ToStringRoundTrips) {
  const auto net = parse_network(testing::kGeneModel).network;
  for (const auto& f : {Observable::count(0), Observable::count_squared(3),
                        Observable::indicator_at_least(3, 6000),
                        Observable::constant(2.5)}) {
    EXPECT_EQ(parse_observable(to_string(f, net), net), f);
  }
}

}  // namespace
}  // namespace crnsim
