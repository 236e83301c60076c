#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace lse;

TEST(SideProbability, BernoulliAndUniform) {
  EXPECT_DOUBLE_EQ(corruption_side_probability(BernoulliStats{1.5, 0.5}, CorruptionMode::bernoulli, 0), 0.75);
  EXPECT_DOUBLE_EQ(corruption_side_probability(BernoulliStats{2.0, 2.0}, CorruptionMode::bernoulli, 0), 0.5);
  EXPECT_DOUBLE_EQ(corruption_side_probability(BernoulliStats{1.5, 0.5}, CorruptionMode::uniform, 0), 0.5);
  EXPECT_DOUBLE_EQ(corruption_side_probability(std::nullopt, CorruptionMode::uniform, 0), 0.5);
}

TEST(SideProbability, MissingStatsNameRelation) {
  try {
    corruption_side_probability(std::nullopt, CorruptionMode::bernoulli, 7);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find('7'), std::string::npos) << e.what();
  }
}

TEST(Corrupt, TwoEntityFilteredCase) {
  const TripleSet train = {{0, 0, 1}};
  const auto filter = build_filter_index({&train});
  auto rng = make_stream(1, "sampling");
  CorruptionCounters counters;
  for (int i = 0; i < 200; ++i) {
    const auto neg = corrupt({0, 0, 1}, 1.0, 2, &filter, rng, counters);
    EXPECT_EQ(neg, (Triple{1, 0, 1}));
  }
  EXPECT_EQ(counters.cap_hits, 0u);
  EXPECT_GT(counters.redraws, 0u);
}

TEST(Corrupt, ExactlyOneSideChangesAndRelationKept) {
  auto rng = make_stream(3, "sampling");
  CorruptionCounters counters;
  for (int i = 0; i < 2000; ++i) {
    const Triple pos{5, 2, 9};
    const auto neg = corrupt(pos, 0.3, 50, nullptr, rng, counters);
    EXPECT_EQ(neg.relation, pos.relation);
    EXPECT_FALSE(neg.head != pos.head && neg.tail != pos.tail);
  }
}

TEST(Corrupt, HeadFrequencyMatchesTphOverTphPlusHpt) {
  // hpt >= 1 for any observed relation, so P = 0.75 is realised with three
  // tails per head and one head per tail.
  TripleSet train;
  for (EntityId h = 0; h < 4; ++h) {
    for (EntityId k = 0; k < 3; ++k) train.push_back({h, 0, 10 + 3 * h + k});
  }
  const auto stats = compute_bernoulli_stats(train, 1);
  ASSERT_DOUBLE_EQ(stats[0]->tph, 3.0);
  ASSERT_DOUBLE_EQ(stats[0]->hpt, 1.0);
  SamplerConfig cfg;
  cfg.seed = 11;
  NegativeSampler sampler(cfg, 30, stats);
  const int n = 100000;
  for (int i = 0; i < n; ++i) sampler.corrupt(train[i % train.size()]);
  const double freq = static_cast<double>(sampler.counters().head_replacements) / n;
  EXPECT_NEAR(freq, 0.75, 0.01);
  // 3 sigma binomial bound.
  EXPECT_LT(std::abs(freq - 0.75), 3 * std::sqrt(0.75 * 0.25 / n));
}

TEST(Corrupt, UnfilteredReplacementDiffersWithProbability) {
  SamplerConfig cfg;
  cfg.mode = CorruptionMode::uniform;
  cfg.seed = 5;
  const std::size_t ne = 20;
  NegativeSampler sampler(cfg, ne, {});
  const int n = 100000;
  int differs = 0;
  for (int i = 0; i < n; ++i) differs += sampler.corrupt({3, 0, 4}) != Triple{3, 0, 4};
  EXPECT_NEAR(static_cast<double>(differs) / n, 1.0 - 1.0 / ne, 0.01);
}

TEST(Corrupt, CompleteGraphHitsRedrawCap) {
  TripleSet train;
  for (EntityId h = 0; h < 3; ++h) {
    for (EntityId t = 0; t < 3; ++t) train.push_back({h, 0, t});
  }
  const auto filter = build_filter_index({&train});
  auto rng = make_stream(2, "sampling");
  CorruptionCounters counters;
  corrupt({0, 0, 1}, 0.5, 3, &filter, rng, counters);
  EXPECT_EQ(counters.cap_hits, 1u);
  EXPECT_EQ(counters.redraws, kMaxRedraws);
}

TEST(GenerateBatch, CardinalityAndDeterminism) {
  SamplerConfig cfg;
  cfg.negatives_per_positive = 4;
  cfg.seed = 9;
  const TripleSet pos = {{0, 0, 1}, {2, 0, 3}, {4, 0, 5}};
  const auto stats = compute_bernoulli_stats(pos, 1);
  NegativeSampler a(cfg, 10, stats), b(cfg, 10, stats);
  const auto ga = a.generate_batch(pos);
  const auto gb = b.generate_batch(pos);
  ASSERT_EQ(ga.size(), 3u);
  for (std::size_t i = 0; i < ga.size(); ++i) {
    EXPECT_EQ(ga[i].positive, pos[i]);
    EXPECT_EQ(ga[i].negatives.size(), 4u);
    EXPECT_EQ(ga[i].negatives, gb[i].negatives);
  }
}

TEST(GenerateBatch, FilteredNegativesNeverInTrainOnSparseGraph) {
  const auto train = test::random_triples(200, 3, 600, 17);
  const auto filter = build_filter_index({&train});
  SamplerConfig cfg;
  cfg.negatives_per_positive = 16;
  cfg.filter_false_negatives = true;
  NegativeSampler sampler(cfg, 200, compute_bernoulli_stats(train, 3), &filter);
  const auto groups = sampler.generate_batch(train);
  for (const auto& g : groups) {
    for (const auto& n : g.negatives) EXPECT_FALSE(filter.contains(n));
  }
  EXPECT_EQ(sampler.counters().cap_hits, 0u);
}

TEST(SamplerConfig, RejectsZeroNegativesAndMissingFilter) {
  SamplerConfig cfg;
  cfg.negatives_per_positive = 0;
  EXPECT_THROW(NegativeSampler(cfg, 5, {}), ConfigError);
  cfg.negatives_per_positive = 1;
  cfg.filter_false_negatives = true;
  EXPECT_THROW(NegativeSampler(cfg, 5, {}), ConfigError);
}
