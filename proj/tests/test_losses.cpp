#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lse/losses.hpp"

using namespace lse;

TEST(MarginLoss, Examples) {
  EXPECT_EQ(margin_loss(0.0, 6.0, 6.0), 0.0);
  EXPECT_EQ(margin_loss(2.0, 1.0, 1.0), 2.0);
  EXPECT_EQ(margin_loss(0.5, 1e300, 6.0), 0.0);
}

TEST(TripleProbability, Examples) {
  EXPECT_DOUBLE_EQ(triple_probability(6.0, 6.0), 0.5);
  EXPECT_NEAR(triple_probability(0.0, 60.0), 1.0, 1e-15);
  EXPECT_NEAR(triple_probability(6.0 + std::log(3.0), 6.0), 0.25, 1e-15);
  EXPECT_GE(triple_probability(1e6, 0.0), 0.0);
  EXPECT_TRUE(std::isfinite(triple_probability(-1e6, 0.0)));
}

TEST(CeLoss, Examples) {
  const std::vector<double> one = {6.0};
  EXPECT_NEAR(ce_loss(6.0, one, 6.0), 2.0 * std::log(2.0), 1e-15);

  const std::vector<double> far = {1e3};
  EXPECT_NEAR(ce_loss(-1e3, far, 6.0), 0.0, 1e-6);

  const std::vector<double> four = {4.2, 4.2, 4.2, 4.2};
  const std::vector<double> single = {4.2};
  EXPECT_NEAR(ce_loss(3.0, four, 6.0), ce_loss(3.0, single, 6.0), 1e-15);
}

TEST(CeLoss, ClampKeepsLossFinite) {
  const std::vector<double> negs = {-1e6};
  const double l = ce_loss(1e6, negs, 6.0);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_NEAR(l, -2.0 * std::log(1e-7), 1e-6);
}

TEST(Losses, NonnegativeAndMonotone) {
  for (double pos = -10; pos <= 10; pos += 0.5) {
    for (double neg = -10; neg <= 10; neg += 0.5) {
      const std::vector<double> n1 = {neg}, n2 = {neg + 0.25};
      EXPECT_GE(margin_loss(pos, neg, 2.0), 0.0);
      EXPECT_GE(ce_loss(pos, n1, 2.0), 0.0);
      EXPECT_LE(margin_loss(pos, neg + 0.25, 2.0), margin_loss(pos, neg, 2.0));
      EXPECT_GE(margin_loss(pos + 0.25, neg, 2.0), margin_loss(pos, neg, 2.0));
      EXPECT_LE(ce_loss(pos, n2, 2.0), ce_loss(pos, n1, 2.0));
      EXPECT_GE(ce_loss(pos + 0.25, n1, 2.0), ce_loss(pos, n1, 2.0));
    }
  }
}

TEST(LossTerms, DerivativesMatchFiniteDifferences) {
  const std::vector<double> negs = {1.3, 4.0, 7.7};
  const double h = 1e-6;
  for (auto kind : {LossKind::margin, LossKind::ce}) {
    const auto t = loss_terms(kind, 2.1, negs, 3.0);
    auto f = [&](double pos, std::vector<double> n) {
      return kind == LossKind::ce ? ce_loss(pos, n, 3.0) : loss_terms(kind, pos, n, 3.0).loss;
    };
    EXPECT_NEAR(t.loss, f(2.1, negs), 1e-15);
    EXPECT_NEAR(t.d_pos, (f(2.1 + h, negs) - f(2.1 - h, negs)) / (2 * h), 1e-7);
    for (std::size_t j = 0; j < negs.size(); ++j) {
      auto up = negs, down = negs;
      up[j] += h;
      down[j] -= h;
      EXPECT_NEAR(t.d_negs[j], (f(2.1, up) - f(2.1, down)) / (2 * h), 1e-7);
    }
  }
}

TEST(LossTerms, MarginAveragesOverPairs) {
  const std::vector<double> negs = {0.0, 10.0};
  const auto t = margin_terms(1.0, negs, 2.0);
  EXPECT_DOUBLE_EQ(t.loss, 0.5 * 3.0);
  EXPECT_DOUBLE_EQ(t.d_pos, 0.5);
  EXPECT_DOUBLE_EQ(t.d_negs[0], -0.5);
  EXPECT_DOUBLE_EQ(t.d_negs[1], 0.0);
}

TEST(LossKind, Parse) {
  EXPECT_EQ(parse_loss_kind("ce"), LossKind::ce);
  EXPECT_EQ(parse_loss_kind("margin"), LossKind::margin);
  EXPECT_THROW(parse_loss_kind("hinge2"), ConfigError);
}
