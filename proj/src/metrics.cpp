#include "iglu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "iglu/error.hpp"

namespace iglu {

Coordinate rotate_y(const Coordinate& c, int quarter_turns) {
  switch (((quarter_turns % 4) + 4) % 4) {
    case 1: return {-c.z, c.y, c.x};
    case 2: return {-c.x, c.y, -c.z};
    case 3: return {c.z, c.y, -c.x};
    default: return c;
  }
}

int iglu_reward(const GridDiff& pred, const GridDiff& gold, const GridBounds& bounds, const RewardOptions& options) {
  if (pred.added.empty() || gold.added.empty()) return 0;
  const int turns = options.rotations ? 4 : 1;
  int best = 0;
  if (!options.translations) {
    for (int r = 0; r < turns; ++r) {
      int hits = 0;
      for (const auto& p : pred.added) hits += gold.added.contains(rotate_y(p, r)) ? 1 : 0;
      best = std::max(best, hits);
    }
    return best;
  }
  // Every matched pair (p, g) at equal height votes for the shift g - rot(p);
  // the best shift's vote count is the intersection size. Transformed blocks
  // that leave the bounds can never match a gold block, so clipping is implicit.
  (void)bounds;
  int reach = 0;
  for (const auto* set : {&pred.added, &gold.added}) {
    for (const auto& c : *set) reach = std::max({reach, std::abs(c.x), std::abs(c.z)});
  }
  const int span = 2 * reach;
  const int width = 2 * span + 1;
  std::vector<int> votes(static_cast<std::size_t>(width) * static_cast<std::size_t>(width));
  for (int r = 0; r < turns; ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& p0 : pred.added) {
      const auto p = rotate_y(p0, r);
      for (const auto& g : gold.added) {
        if (g.y != p.y) continue;
        const int dx = g.x - p.x + span;
        const int dz = g.z - p.z + span;
        auto& v = votes[static_cast<std::size_t>(dx) * static_cast<std::size_t>(width) + static_cast<std::size_t>(dz)];
        best = std::max(best, ++v);
      }
    }
  }
  return best;
}

double penalized_distance(const GridDiff& pred, const GridDiff& gold) {
  const auto& P = pred.added;
  const auto& G = gold.added;
  if (G.empty()) {
    if (P.empty()) return 0.0;
    throw Error(ErrorCode::EmptyGold, "distance needs at least one gold block");
  }
  if (P.empty()) return kEmptyPredictionDistance;
  double total = 0.0;
  for (const auto& p : P) {
    int best = std::numeric_limits<int>::max();
    for (const auto& g : G) {
      const auto d = p - g;
      best = std::min(best, d.x * d.x + d.y * d.y + d.z * d.z);
    }
    total += best;
  }
  const double base = total / static_cast<double>(P.size());
  const auto mismatch = std::abs(static_cast<long>(P.size()) - static_cast<long>(G.size()));
  return base * (1.0 + static_cast<double>(mismatch));
}

int blocks_placed(const GridDiff& pred) { return static_cast<int>(pred.added.size()); }

bool help_followed(const GridDiff& pred, const std::optional<GridDiff>& prior_pred, const HelpMessage& help,
                   const GridDiff& gold, const RegionScheme& scheme, const GridBounds& bounds,
                   const FollowOptions& options) {
  return std::visit(
      [&](const auto& h) -> bool {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, RegionHelp>) {
          return std::all_of(pred.added.begin(), pred.added.end(), [&](const Coordinate& c) {
            return region_of(c, scheme, bounds).index == h.region.index;
          });
        }
        if constexpr (std::is_same_v<T, LengthHelp>) {
          const auto n = static_cast<int>(pred.added.size());
          return h.at_least ? n >= h.count : n == h.count;
        }
        if constexpr (std::is_same_v<T, CorrectiveHelp>) {
          if (!prior_pred) throw Error(ErrorCode::MissingPriorPrediction, "corrective help is judged against the prior prediction");
          if (pred.added.empty() || prior_pred->added.empty()) return false;
          const auto now = centroid(pred.added);
          const auto before = centroid(prior_pred->added);
          switch (h.direction) {
            case Direction::Right: return now[0] - before[0] > 0;
            case Direction::Left: return now[0] - before[0] < 0;
            case Direction::Up: return now[1] - before[1] > 0;
            case Direction::Down: return now[1] - before[1] < 0;
          }
          return false;
        }
        if constexpr (std::is_same_v<T, MistakeHelp>) {
          if (options.mistake_rule == MistakeFollowRule::ExactCount) {
            if (!prior_pred) throw Error(ErrorCode::MissingPriorPrediction, "exact-count rule needs the prior prediction");
            int changed = 0;
            for (const auto& c : prior_pred->added) changed += pred.added.contains(c) ? 0 : 1;
            return changed == h.count;
          }
          int wrong = 0;
          for (const auto& c : pred.added) wrong += gold.added.contains(c) ? 0 : 1;
          return h.count > 0 ? wrong < h.count : wrong == 0;
        }
      },
      help.payload);
}

EpisodeScore score_episode(const GridDiff& pred, const GridDiff& gold, const GridBounds& bounds,
                           std::optional<bool> followed) {
  EpisodeScore s;
  s.reward = iglu_reward(pred, gold, bounds);
  s.distance = (gold.added.empty() && !pred.added.empty()) ? kEmptyPredictionDistance : penalized_distance(pred, gold);
  s.blocks_placed = blocks_placed(pred);
  s.help_followed = followed;
  return s;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

ReportRow aggregate(const std::vector<EpisodeScore>& scores, std::string label) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no episodes to aggregate");
  std::vector<double> distance, reward, blocks, followed;
  for (const auto& s : scores) {
    distance.push_back(s.distance);
    reward.push_back(s.reward);
    blocks.push_back(s.blocks_placed);
    if (s.help_followed) followed.push_back(*s.help_followed ? 100.0 : 0.0);
  }
  ReportRow row;
  row.label = std::move(label);
  row.episodes = scores.size();
  row.distance = mean_std(distance);
  row.reward = mean_std(reward);
  row.blocks_placed = mean_std(blocks);
  row.helped_episodes = followed.size();
  if (!followed.empty()) row.help_followed_pct = mean_std(followed);
  return row;
}

}  // namespace iglu
