#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "test_util.hpp"

using namespace lse;

TEST(BernoulliStats, HandCountedExample) {
  // heads {a:2, d:1}, tails {b:2, c:1}
  const TripleSet train = {{0, 0, 1}, {0, 0, 2}, {3, 0, 1}};
  const auto s = compute_bernoulli_stats(train, 1);
  ASSERT_TRUE(s[0]);
  EXPECT_DOUBLE_EQ(s[0]->tph, 1.5);
  EXPECT_DOUBLE_EQ(s[0]->hpt, 1.5);
}

TEST(BernoulliStats, BijectionAndSingleTriple) {
  const TripleSet bij = {{0, 0, 1}, {1, 0, 2}, {2, 0, 0}};
  const auto s = compute_bernoulli_stats(bij, 2);
  EXPECT_DOUBLE_EQ(s[0]->tph, 1.0);
  EXPECT_DOUBLE_EQ(s[0]->hpt, 1.0);
  EXPECT_FALSE(s[1].has_value());

  const auto one = compute_bernoulli_stats({{4, 0, 5}}, 1);
  EXPECT_DOUBLE_EQ(one[0]->tph, 1.0);
  EXPECT_DOUBLE_EQ(one[0]->hpt, 1.0);
}

TEST(BernoulliStats, InvariantUnderPermutation) {
  auto train = test::random_triples(30, 3, 200, 5);
  const auto before = compute_bernoulli_stats(train, 3);
  std::mt19937_64 rng(1);
  std::shuffle(train.begin(), train.end(), rng);
  const auto after = compute_bernoulli_stats(train, 3);
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(before[r]->tph, after[r]->tph);
    EXPECT_EQ(before[r]->hpt, after[r]->hpt);
    EXPECT_GE(before[r]->tph, 1.0);
    EXPECT_GE(before[r]->hpt, 1.0);
  }
}

TEST(DetectPatterns, SymmetryScores) {
  const TripleSet closed = {{0, 0, 1}, {1, 0, 0}, {2, 0, 3}, {3, 0, 2}, {0, 1, 2}, {1, 1, 3}};
  const auto p = detect_patterns(closed, 2);
  EXPECT_DOUBLE_EQ(p.symmetry_score[0], 1.0);
  EXPECT_DOUBLE_EQ(p.symmetry_score[1], 0.0);
}

TEST(DetectPatterns, SymmetryEqualsOnReversedEdges) {
  auto train = test::random_triples(12, 3, 120, 8);
  TripleSet reversed;
  for (const auto& t : train) reversed.push_back({t.tail, t.relation, t.head});
  const auto a = detect_patterns(train, 3);
  const auto b = detect_patterns(reversed, 3);
  for (int r = 0; r < 3; ++r) {
    EXPECT_DOUBLE_EQ(a.symmetry_score[r], b.symmetry_score[r]);
    EXPECT_GE(a.symmetry_score[r], 0.0);
    EXPECT_LE(a.symmetry_score[r], 1.0);
  }
}

TEST(DetectPatterns, InversePairAboveThreshold) {
  TripleSet train;
  for (EntityId a = 0; a < 10; ++a) {
    train.push_back({a, 0, a + 10});
    if (a < 9) train.push_back({a + 10, 1, a});
  }
  const auto p = detect_patterns(train, 2);
  // r1 -> r0 holds for all 9 r1 edges; r0 -> r1 for 9 of 10.
  std::map<std::pair<RelationId, RelationId>, double> scores;
  for (const auto& ip : p.inverse_pairs) scores[{ip.first, ip.second}] = ip.score;
  EXPECT_DOUBLE_EQ(scores.at({1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(scores.at({0, 1}), 0.9);

  PatternOptions strict;
  strict.inverse_threshold = 0.95;
  const auto q = detect_patterns(train, 2, strict);
  ASSERT_EQ(q.inverse_pairs.size(), 1u);
  EXPECT_EQ(q.inverse_pairs[0].first, 1u);
}

namespace {

// Exhaustive count of (a, r1, b), (b, r2, c) paths closed by (a, r3, c).
std::map<std::tuple<RelationId, RelationId, RelationId>, std::size_t> brute_closures(const TripleSet& train) {
  std::set<Triple> set(train.begin(), train.end());
  std::map<std::tuple<RelationId, RelationId, RelationId>, std::size_t> out;
  for (const auto& x : train) {
    for (const auto& y : train) {
      if (x.tail != y.head) continue;
      for (const auto& z : train) {
        if (z.head == x.head && z.tail == y.tail) ++out[{x.relation, y.relation, z.relation}];
      }
    }
  }
  return out;
}

}  // namespace

TEST(DetectPatterns, CompositionSupportOnTwentyPaths) {
  TripleSet train;
  for (EntityId i = 0; i < 20; ++i) {
    const EntityId a = 3 * i, b = 3 * i + 1, c = 3 * i + 2;
    train.push_back({a, 0, b});
    train.push_back({b, 1, c});
    train.push_back({a, 2, c});
  }
  const auto p = detect_patterns(train, 3);
  ASSERT_EQ(p.compositions.size(), 1u);
  const auto& c = p.compositions[0];
  EXPECT_EQ(std::tie(c.first, c.second, c.closure), std::make_tuple(0u, 1u, 2u));
  EXPECT_EQ(c.support, 20u);
  EXPECT_EQ(c.support, brute_closures(train).at({0, 1, 2}));
  EXPECT_FALSE(p.path_cap_reached);
}

TEST(DetectPatterns, CompositionMatchesExhaustiveOracle) {
  const auto train = test::random_triples(15, 3, 150, 21);
  PatternOptions opt;
  opt.composition_threshold = 0.0;
  opt.composition_min_support = 1;
  const auto p = detect_patterns(train, 3, opt);
  const auto oracle = brute_closures(train);
  std::size_t found = 0;
  for (const auto& c : p.compositions) {
    EXPECT_EQ(c.support, oracle.at({c.first, c.second, c.closure}));
    ++found;
  }
  EXPECT_EQ(found, oracle.size());
}

TEST(DetectPatterns, PathCapIsRespectedAndSeeded) {
  const auto train = test::random_triples(20, 2, 300, 4);
  PatternOptions opt;
  opt.path_cap = 100;
  const auto a = detect_patterns(train, 2, opt);
  const auto b = detect_patterns(train, 2, opt);
  EXPECT_TRUE(a.path_cap_reached);
  EXPECT_EQ(a.paths_enumerated, 100u);
  ASSERT_EQ(a.compositions.size(), b.compositions.size());
}

TEST(RelationStats, CombinedView) {
  const TripleSet train = {{0, 0, 1}, {1, 0, 0}, {0, 1, 2}};
  const auto rs = relation_stats(train, 3);
  EXPECT_DOUBLE_EQ(rs[0].symmetry_score, 1.0);
  EXPECT_TRUE(rs[0].bernoulli);
  EXPECT_FALSE(rs[2].bernoulli);
}
