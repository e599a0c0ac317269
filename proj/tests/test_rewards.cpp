#include <gtest/gtest.h>

#include <random>

#include "structeval/rewards.hpp"

using namespace structeval;

TEST(RewardSpec, ValidatesNames) {
  EXPECT_NO_THROW(RewardSpec({"treesim", "node_chrf"}));
  EXPECT_THROW(RewardSpec({"comet"}), ConfigError);
  EXPECT_THROW(RewardSpec(std::vector<std::string>{}), ConfigError);
  auto s = RewardSpec::parse("treesim, xml_match");
  ASSERT_EQ(s.components().size(), 2u);
  EXPECT_EQ(s.components()[1], "xml_match");
}

TEST(Reward, ScalesAndSums) {
  const char* doc = "<a>hello world</a>";
  EXPECT_DOUBLE_EQ(score_reward(doc, doc, RewardSpec({"treesim"})), 10.0);
  EXPECT_DOUBLE_EQ(score_reward(doc, doc, RewardSpec({"node_chrf"})), 10.0);
  EXPECT_DOUBLE_EQ(score_reward(doc, doc, RewardSpec({"treesim", "node_chrf", "xml_match"})), 30.0);
}

TEST(Reward, InvalidHypothesisPenalty) {
  EXPECT_DOUBLE_EQ(score_reward("<a>", "<a/>", RewardSpec({"treesim"})), -1.0);
  auto b = score_reward_detailed("<a>", "<a/>", RewardSpec({"treesim", "xml_validity"}));
  EXPECT_DOUBLE_EQ(b.native.at("treesim"), -0.1);
  EXPECT_DOUBLE_EQ(b.native.at("xml_validity"), 0.0);
}

TEST(Reward, InvalidReferenceThrows) {
  EXPECT_THROW(score_reward("<a/>", "<a>", RewardSpec({"treesim"})), InvalidReference);
}

TEST(Advantages, ZeroMeanUnitStdev) {
  std::vector<double> r{1, 2, 3, 4};
  auto a = group_advantages(r);
  double s = 0, s2 = 0;
  for (double x : a) {
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s, 0.0, 1e-12);
  EXPECT_NEAR(s2 / 4.0, 1.0, 1e-12);
}

TEST(Advantages, DegenerateAndTooSmall) {
  std::vector<double> flat{3, 3, 3};
  for (double x : group_advantages(flat)) EXPECT_EQ(x, 0.0);
  std::vector<double> one{1};
  EXPECT_THROW(group_advantages(one), GroupTooSmall);
}

TEST(Advantages, AffineInvariance) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(2 + rng() % 8), s;
    for (double& x : r) x = n(rng);
    for (double x : r) s.push_back(2.5 * x + 7.0);
    auto a = group_advantages(r), b = group_advantages(s);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(Group, ScoresCandidates) {
  std::vector<std::string> cands{"<a>x</a>", "<a>", "<b>x</b>"};
  auto g = score_group("s1", cands, "<a>x</a>", RewardSpec({"treesim"}));
  ASSERT_EQ(g.scaled_rewards.size(), 3u);
  EXPECT_DOUBLE_EQ(g.scaled_rewards[0], 10.0);
  EXPECT_DOUBLE_EQ(g.scaled_rewards[1], -1.0);
  EXPECT_DOUBLE_EQ(g.raw_rewards[0], 1.0);
  EXPECT_GT(g.advantages[0], g.advantages[2]);
  EXPECT_GT(g.advantages[2], g.advantages[1]);
}
