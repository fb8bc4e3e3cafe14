#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "iglu/error.hpp"
#include "iglu/metrics.hpp"
#include "iglu/report.hpp"

using namespace iglu;

namespace {

// Independent reference: rotate about the y axis by explicit matrices and try
// every translation that could align at least one pair.
int brute_reward(const BlockSet& pred, const BlockSet& gold, bool rotations = true, bool translations = true) {
  const int rot[4][4] = {{1, 0, 0, 1}, {0, -1, 1, 0}, {-1, 0, 0, -1}, {0, 1, -1, 0}};  // (x,z) -> (a x + b z, c x + d z)
  int best = 0;
  for (int r = 0; r < (rotations ? 4 : 1); ++r) {
    std::vector<Coordinate> turned;
    for (const auto& p : pred) {
      turned.push_back({rot[r][0] * p.x + rot[r][1] * p.z, p.y, rot[r][2] * p.x + rot[r][3] * p.z});
    }
    const int span = translations ? 20 : 0;
    for (int dx = -span; dx <= span; ++dx) {
      for (int dz = -span; dz <= span; ++dz) {
        int hits = 0;
        for (const auto& t : turned) hits += gold.count({t.x + dx, t.y, t.z + dz}) ? 1 : 0;
        best = std::max(best, hits);
      }
    }
  }
  return best;
}

BlockSet random_set(std::mt19937_64& rng, int max_n, const GridBounds& b) {
  BlockSet s;
  int n = std::uniform_int_distribution<int>(0, max_n)(rng);
  for (int i = 0; i < n; ++i) {
    s.insert({std::uniform_int_distribution<int>(b.x_min, b.x_max)(rng),
              std::uniform_int_distribution<int>(b.y_min, b.y_max)(rng),
              std::uniform_int_distribution<int>(b.z_min, b.z_max)(rng)});
  }
  return s;
}

HelpMessage msg(HelpPayload p) { return HelpMessage{std::move(p), "", std::nullopt}; }

}  // namespace

TEST(Reward, Examples) {
  GridBounds b;
  auto gold = additions({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}});
  EXPECT_EQ(iglu_reward(gold, gold, b), 3);
  auto shifted = additions({{2, 0, -1}, {3, 0, -1}, {3, 1, -1}});
  EXPECT_EQ(iglu_reward(shifted, gold, b), 3);
  EXPECT_EQ(iglu_reward(additions({{-4, 3, 5}}), additions({{2, 3, -1}}), b), 1);
  EXPECT_EQ(iglu_reward(additions({{0, 3, 0}}), additions({{0, 4, 0}}), b), 0);
  EXPECT_EQ(iglu_reward(GridDiff{}, gold, b), 0);
}

TEST(Reward, RotationAboutVerticalAxis) {
  GridBounds b;
  EXPECT_EQ(rotate_y({1, 2, 0}, 1), (Coordinate{0, 2, 1}));
  EXPECT_EQ(rotate_y({1, 2, 3}, 4), (Coordinate{1, 2, 3}));
  auto l = additions({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}});
  BlockSet turned;
  for (const auto& c : l.added) turned.insert(rotate_y(c, 1));
  EXPECT_EQ(iglu_reward(additions(turned), l, b), 4);
  EXPECT_LT(iglu_reward(additions(turned), l, b, RewardOptions{true, false}), 4);
}

TEST(Reward, MatchesBruteForce) {
  GridBounds small{-2, 2, 0, 4, -2, 2};
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    auto pred = random_set(rng, 4, small);
    auto gold = random_set(rng, 4, small);
    EXPECT_EQ(iglu_reward(additions(pred), additions(gold), small), brute_reward(pred, gold));
    EXPECT_EQ(iglu_reward(additions(pred), additions(gold), small, RewardOptions{false, false}),
              brute_reward(pred, gold, false, false));
    EXPECT_EQ(iglu_reward(additions(pred), additions(gold), small, RewardOptions{true, false}),
              brute_reward(pred, gold, false, true));
    EXPECT_EQ(iglu_reward(additions(pred), additions(gold), small, RewardOptions{false, true}),
              brute_reward(pred, gold, true, false));
  }
}

TEST(Reward, InvariantUnderTransformsOfPrediction) {
  GridBounds b;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    auto pred = random_set(rng, 5, GridBounds{-2, 2, 0, 8, -2, 2});
    auto gold = random_set(rng, 5, GridBounds{-2, 2, 0, 8, -2, 2});
    const int base = iglu_reward(additions(pred), additions(gold), b);
    BlockSet moved;
    for (const auto& c : pred) moved.insert(rotate_y(c, 1) + Coordinate{1, 0, -2});
    EXPECT_EQ(iglu_reward(additions(moved), additions(gold), b), base);
    EXPECT_LE(base, static_cast<int>(std::min(pred.size(), gold.size())));
  }
}

TEST(Distance, Examples) {
  auto gold = additions({{0, 0, 0}, {3, 0, 0}});
  EXPECT_EQ(penalized_distance(gold, gold), 0.0);
  EXPECT_EQ(penalized_distance(GridDiff{}, gold), 100.0);
  EXPECT_EQ(penalized_distance(additions({{1, 0, 0}}), gold), 2.0);
  EXPECT_EQ(penalized_distance(GridDiff{}, GridDiff{}), 0.0);
  // mean of 1 and 4, times 1 + |3 - 2|
  EXPECT_EQ(penalized_distance(additions({{1, 0, 0}, {5, 0, 0}, {3, 0, 0}}), gold), (1.0 + 4.0 + 0.0) / 3.0 * 2.0);
}

TEST(Distance, EmptyGold) {
  try {
    penalized_distance(additions({{0, 0, 0}}), GridDiff{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGold);
  }
}

TEST(Score, SentinelAndCounts) {
  GridBounds b;
  auto s = score_episode(GridDiff{}, additions({{0, 0, 0}}), b);
  EXPECT_EQ(s.distance, 100.0);
  EXPECT_EQ(s.reward, 0.0);
  EXPECT_EQ(s.blocks_placed, 0);
  auto stray = score_episode(additions({{0, 0, 0}}), GridDiff{}, b);
  EXPECT_EQ(stray.distance, 100.0);
  EXPECT_EQ(blocks_placed(additions({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}})), 3);
}

TEST(Followed, Restrictive) {
  RegionScheme s;
  GridBounds b;
  auto upper_left = RegionHelp{region_by_index(s, region_index(s, "upper left"))};
  auto inside = additions({{-1, 5, 0}, {-2, 6, 3}});
  EXPECT_TRUE(help_followed(inside, std::nullopt, msg(upper_left), inside, s, b));
  auto partly = additions({{-1, 5, 0}, {3, 6, 3}});
  EXPECT_FALSE(help_followed(partly, std::nullopt, msg(upper_left), inside, s, b));
}

TEST(Followed, Length) {
  RegionScheme s;
  GridBounds b;
  auto three = additions({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  EXPECT_TRUE(help_followed(three, std::nullopt, msg(LengthHelp{3}), three, s, b));
  EXPECT_FALSE(help_followed(additions({{0, 0, 0}, {1, 0, 0}}), std::nullopt, msg(LengthHelp{3}), three, s, b));
  EXPECT_TRUE(help_followed(three, std::nullopt, msg(LengthHelp{2, false, true}), three, s, b));
}

TEST(Followed, Corrective) {
  RegionScheme s;
  GridBounds b;
  auto prior = additions({{2, 0, 0}});
  auto moved = additions({{1, 0, 0}});
  EXPECT_TRUE(help_followed(moved, prior, msg(CorrectiveHelp{Direction::Left}), moved, s, b));
  EXPECT_FALSE(help_followed(moved, prior, msg(CorrectiveHelp{Direction::Right}), moved, s, b));
  EXPECT_FALSE(help_followed(prior, prior, msg(CorrectiveHelp{Direction::Left}), moved, s, b));
  try {
    help_followed(moved, std::nullopt, msg(CorrectiveHelp{Direction::Left}), moved, s, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPriorPrediction);
  }
}

TEST(Followed, Mistake) {
  RegionScheme s;
  GridBounds b;
  auto gold = additions({{0, 0, 0}, {1, 0, 0}});
  auto one_wrong = additions({{0, 0, 0}, {4, 0, 0}});
  EXPECT_TRUE(help_followed(one_wrong, std::nullopt, msg(MistakeHelp{2}), gold, s, b));
  EXPECT_FALSE(help_followed(one_wrong, std::nullopt, msg(MistakeHelp{1}), gold, s, b));
  EXPECT_TRUE(help_followed(gold, std::nullopt, msg(MistakeHelp{0}), gold, s, b));
  EXPECT_FALSE(help_followed(one_wrong, std::nullopt, msg(MistakeHelp{0}), gold, s, b));

  FollowOptions exact{MistakeFollowRule::ExactCount};
  auto prior = additions({{3, 0, 0}, {4, 0, 0}});
  EXPECT_TRUE(help_followed(one_wrong, prior, msg(MistakeHelp{1}), gold, s, b, exact));
  EXPECT_FALSE(help_followed(one_wrong, prior, msg(MistakeHelp{2}), gold, s, b, exact));
}

TEST(Aggregate, MeanAndPopulationStd) {
  EpisodeScore a{0, 0, 0, std::nullopt};
  EpisodeScore c{2, 2, 2, std::nullopt};
  auto row = aggregate({a, c}, "x");
  EXPECT_EQ(row.reward.mean, 1.0);
  EXPECT_EQ(row.reward.std, 1.0);
  EXPECT_EQ(row.episodes, 2u);
  EXPECT_FALSE(row.help_followed_pct);

  auto single = aggregate({EpisodeScore{3, 1.5, 3, true}});
  EXPECT_EQ(single.distance.mean, 1.5);
  EXPECT_EQ(single.distance.std, 0.0);
  ASSERT_TRUE(single.help_followed_pct);
  EXPECT_EQ(single.help_followed_pct->mean, 100.0);

  auto mixed = aggregate({EpisodeScore{0, 0, 0, true}, EpisodeScore{0, 0, 0, false}, EpisodeScore{0, 0, 0, {}}});
  EXPECT_EQ(mixed.helped_episodes, 2u);
  EXPECT_EQ(mixed.help_followed_pct->mean, 50.0);
  EXPECT_EQ(mixed.help_followed_pct->std, 50.0);

  EXPECT_THROW(aggregate({}), Error);
}

TEST(Aggregate, BinaryStdMatchesBernoulli) {
  std::vector<EpisodeScore> scores;
  for (int i = 0; i < 10000; ++i) scores.push_back(EpisodeScore{0, 0, 0, i < 6956});
  auto row = aggregate(scores);
  EXPECT_NEAR(row.help_followed_pct->mean, 69.56, 1e-9);
  EXPECT_NEAR(row.help_followed_pct->std, 46.01, 0.01);
}

TEST(Report, ColumnsAndCells) {
  ReportRow row = aggregate({EpisodeScore{1, 0.5, 1, std::nullopt}}, "oracle");
  auto table = report_table({row});
  EXPECT_NE(table.find("Model"), std::string::npos);
  auto dist = table.find("Distance");
  auto reward = table.find("Reward");
  auto placed = table.find("# Blocks Placed");
  auto followed = table.find("% Help Followed");
  EXPECT_LT(dist, reward);
  EXPECT_LT(reward, placed);
  EXPECT_LT(placed, followed);
  EXPECT_NE(table.find("0.50 (0.00)"), std::string::npos);
  EXPECT_NE(table.find("n/a"), std::string::npos);

  auto csv = report_csv({row});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "label,episodes,distance_mean,distance_std,reward_mean,reward_std,blocks_placed_mean,blocks_placed_std,"
            "help_followed_pct_mean,help_followed_pct_std,helped_episodes");
}
