#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iglu/help.hpp"
#include "iglu/regions.hpp"
#include "iglu/world.hpp"

namespace iglu {

/// Distance assigned when nothing is predicted for a non-empty target.
inline constexpr double kEmptyPredictionDistance = 100.0;

struct RewardOptions {
  bool translations = true;  ///< integer shifts in x and z
  bool rotations = true;     ///< 0/90/180/270 degrees about the vertical (y) axis through the origin
};

/// Largest |transform(pred) ∩ gold| over the allowed transforms.
int iglu_reward(const GridDiff& pred, const GridDiff& gold, const GridBounds& bounds,
                const RewardOptions& options = {});

/// Rotation of a coordinate about the y axis by `quarter_turns` * 90 degrees.
Coordinate rotate_y(const Coordinate& c, int quarter_turns);

/// Mean squared distance from each predicted block to its nearest gold block,
/// times (1 + | |pred| - |gold| |). 100 for an empty prediction.
/// Throws EmptyGold when gold is empty and pred is not; both empty gives 0.
double penalized_distance(const GridDiff& pred, const GridDiff& gold);

int blocks_placed(const GridDiff& pred);

enum class MistakeFollowRule {
  Improvement,  ///< fewer wrong blocks than the help stated
  ExactCount,   ///< exactly the stated number of prior blocks changed
};

struct FollowOptions {
  MistakeFollowRule mistake_rule = MistakeFollowRule::Improvement;
};

/// Whether `pred` obeys `help`. Corrective help (and ExactCount mistake help)
/// need the prediction the help was given on.
bool help_followed(const GridDiff& pred, const std::optional<GridDiff>& prior_pred, const HelpMessage& help,
                   const GridDiff& gold, const RegionScheme& scheme, const GridBounds& bounds,
                   const FollowOptions& options = {});

struct EpisodeScore {
  double reward = 0.0;
  double distance = 0.0;
  int blocks_placed = 0;
  std::optional<bool> help_followed;
};

/// All four metrics for one prediction. An empty gold with a non-empty
/// prediction scores the sentinel distance.
EpisodeScore score_episode(const GridDiff& pred, const GridDiff& gold, const GridBounds& bounds,
                           std::optional<bool> followed = std::nullopt);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

struct ReportRow {
  std::string label;
  std::size_t episodes = 0;
  MeanStd distance;
  MeanStd reward;
  MeanStd blocks_placed;
  std::optional<MeanStd> help_followed_pct;  ///< over episodes where help was given
  std::size_t helped_episodes = 0;
};

/// Throws EmptyInput for an empty sequence.
ReportRow aggregate(const std::vector<EpisodeScore>& scores, std::string label = {});

}  // namespace iglu
