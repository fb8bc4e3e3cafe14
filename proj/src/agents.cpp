#include "iglu/agents.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "iglu/codec.hpp"
#include "iglu/error.hpp"
#include "iglu/rng.hpp"

namespace iglu {

std::string BuilderInput::composite() const {
  std::string out = "INSTRUCTION: " + dialogue;
  if (help) out += ", HELP: " + *help;
  return out;
}

BuilderInput make_builder_input(const Episode& episode, const std::optional<HelpMessage>& help) {
  BuilderInput in;
  in.dialogue = episode.dialogue;
  in.grid_text = encode_blocks(episode.grid_before.blocks());
  if (help) in.help = help->utterance;
  return in;
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Oracle: return "oracle";
    case AgentKind::Noisy: return "noisy";
    case AgentKind::HelpAwareNoisy: return "help_aware_noisy";
    case AgentKind::Scripted: return "scripted";
  }
  return "oracle";
}

AgentKind agent_kind_from_string(std::string_view s) {
  for (auto k : {AgentKind::Oracle, AgentKind::Noisy, AgentKind::HelpAwareNoisy, AgentKind::Scripted}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown agent kind '" + std::string(s) + "'");
}

void AgentProfile::validate() const {
  for (double p : {p_off, p_drop, p_extra}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("probability {} outside [0,1]", p));
  }
  if (radius < 1) throw Error(ErrorCode::InvalidArgument, "offset radius must be >= 1");
}

AgentProfile agent_profile_from_json(const nlohmann::json& j) {
  AgentProfile p;
  try {
    p.kind = agent_kind_from_string(j.value("kind", std::string("oracle")));
    p.p_off = j.value("p_off", 0.0);
    p.p_drop = j.value("p_drop", 0.0);
    p.p_extra = j.value("p_extra", 0.0);
    p.radius = j.value("radius", 1);
    p.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("scheme")) p.scheme = scheme_from_name(j["scheme"].get<std::string>());
    if (j.contains("script")) p.script = j["script"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("agent profile: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json agent_profile_to_json(const AgentProfile& p) {
  nlohmann::json j = {{"kind", to_string(p.kind)}, {"p_off", p.p_off},   {"p_drop", p.p_drop},
                      {"p_extra", p.p_extra},      {"radius", p.radius}, {"seed", p.seed},
                      {"scheme", scheme_name(p.scheme.kind)}};
  if (!p.script.empty()) j["script"] = p.script;
  return j;
}

namespace {

struct Placed {
  Coordinate pos;
  Coordinate source;
  bool corrupted = false;
};

int sq_dist(const Coordinate& a, const Coordinate& b) {
  const auto d = a - b;
  return d.x * d.x + d.y * d.y + d.z * d.z;
}

int chebyshev(const Coordinate& a, const Coordinate& b) {
  const auto d = a - b;
  return std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
}

int nearest_sq(const Coordinate& c, const BlockSet& targets) {
  int best = std::numeric_limits<int>::max();
  for (const auto& t : targets) best = std::min(best, sq_dist(c, t));
  return best;
}

class Simulation {
 public:
  Simulation(const AgentProfile& profile, const Episode& episode)
      : profile_(profile), episode_(episode), bounds_(episode.grid_before.bounds()) {}

  bool valid(const Coordinate& c) const { return bounds_.contains(c) && !episode_.grid_before.occupied(c); }

  std::optional<Coordinate> offset_near(std::mt19937_64& rng, const Coordinate& source) const {
    std::uniform_int_distribution<int> step(-profile_.radius, profile_.radius);
    for (int attempt = 0; attempt < 32; ++attempt) {
      Coordinate d{step(rng), step(rng), step(rng)};
      if (d == Coordinate{}) continue;
      const auto cand = source + d;
      if (valid(cand)) return cand;
    }
    return std::nullopt;
  }

  std::vector<Placed> corrupt() const {
    std::mt19937_64 rng(derive_seed(profile_.seed, {episode_.id, "noise"}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Placed> out;
    for (const auto& g : episode_.gold.added) {
      const bool drop = unit(rng) < profile_.p_drop;
      const bool off = unit(rng) < profile_.p_off;
      const bool extra = unit(rng) < profile_.p_extra;
      if (!drop) {
        auto pos = off ? offset_near(rng, g) : std::nullopt;
        out.push_back({pos.value_or(g), g, pos.has_value()});
      }
      if (extra) {
        if (auto e = offset_near(rng, g)) out.push_back({*e, g, true});
      }
    }
    return out;
  }

  void apply_help(std::vector<Placed>& blocks, const HelpPayload& help) const {
    std::mt19937_64 rng(derive_seed(profile_.seed, {episode_.id, "help", to_string(kind_of(help))}));
    std::visit([&](const auto& h) { constrain(blocks, h, rng); }, help);
  }

 private:
  // Restrictive: blocks outside the region are re-drawn from the noise process
  // inside it; what still falls outside is moved by a rigid shift (horizontal
  // first) or, failing that, projected onto the nearest region cell. Help whose
  // region is unreachable from the gold neighbourhood is ignored.
  void constrain(std::vector<Placed>& blocks, const RegionHelp& help, std::mt19937_64& rng) const {
    const auto& scheme = profile_.scheme;
    auto in_region = [&](const Coordinate& c) { return region_of(c, scheme, bounds_).index == help.region.index; };
    const auto cells = cells_in_region(help.region, scheme, bounds_);
    const auto& gold = episode_.gold.added;
    const bool reachable = std::any_of(gold.begin(), gold.end(), [&](const Coordinate& g) {
      return std::any_of(cells.begin(), cells.end(),
                         [&](const Coordinate& c) { return chebyshev(c, g) <= profile_.radius; });
    });
    if (!reachable) return;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::multiset<Coordinate> taken;
    for (const auto& b : blocks) taken.insert(b.pos);
    for (auto& b : blocks) {
      if (in_region(b.pos) || !b.corrupted) continue;
      for (int attempt = 0; attempt < 64; ++attempt) {
        auto cand = unit(rng) < profile_.p_off ? offset_near(rng, b.source) : std::optional<Coordinate>(b.source);
        if (cand && valid(*cand) && in_region(*cand) && !taken.contains(*cand)) {
          taken.erase(taken.find(b.pos));
          taken.insert(*cand);
          b.pos = *cand;
          break;
        }
      }
    }
    if (std::all_of(blocks.begin(), blocks.end(), [&](const Placed& b) { return in_region(b.pos); })) return;

    const bool xy = scheme.plane == RegionPlane::XY;
    const int ext_u = bounds_.x_max - bounds_.x_min;
    const int ext_v = xy ? bounds_.y_max - bounds_.y_min : bounds_.z_max - bounds_.z_min;
    std::vector<std::pair<int, int>> shifts;
    for (int du = -ext_u; du <= ext_u; ++du) {
      for (int dv = -ext_v; dv <= ext_v; ++dv) {
        if (du != 0 || dv != 0) shifts.emplace_back(du, dv);
      }
    }
    std::stable_sort(shifts.begin(), shifts.end(), [](const auto& a, const auto& b) {
      auto key = [](const std::pair<int, int>& s) {
        return std::tuple(s.second != 0, std::abs(s.first) + std::abs(s.second), std::abs(s.second));
      };
      return key(a) < key(b);
    });
    for (const auto& [du, dv] : shifts) {
      const Coordinate d = xy ? Coordinate{du, dv, 0} : Coordinate{du, 0, dv};
      const bool fits = std::all_of(blocks.begin(), blocks.end(), [&](const Placed& b) {
        const auto c = b.pos + d;
        return valid(c) && in_region(c);
      });
      if (fits) {
        for (auto& b : blocks) b.pos = b.pos + d;
        return;
      }
    }
    for (auto& b : blocks) {
      if (in_region(b.pos)) continue;
      int best = std::numeric_limits<int>::max();
      std::optional<Coordinate> target;
      for (const auto& c : cells) {
        if (!valid(c) || taken.contains(c)) continue;
        const int d = sq_dist(c, b.pos);
        if (d < best) {
          best = d;
          target = c;
        }
      }
      if (!target) continue;
      taken.erase(taken.find(b.pos));
      taken.insert(*target);
      b.pos = *target;
    }
  }

  // Length: keep the blocks nearest the target, pad from unplaced target blocks,
  // then from free face-neighbours.
  void constrain(std::vector<Placed>& blocks, const LengthHelp& help, std::mt19937_64&) const {
    dedupe(blocks);
    const auto& gold = episode_.gold.added;
    const auto k = static_cast<std::size_t>(std::max(help.count, 0));
    if (blocks.size() > k && !help.at_least) {
      std::stable_sort(blocks.begin(), blocks.end(), [&](const Placed& a, const Placed& b) {
        const int da = gold.empty() ? 0 : nearest_sq(a.pos, gold);
        const int db = gold.empty() ? 0 : nearest_sq(b.pos, gold);
        return std::tie(da, a.pos) < std::tie(db, b.pos);
      });
      blocks.resize(k);
      return;
    }
    std::set<Coordinate> taken;
    for (const auto& b : blocks) taken.insert(b.pos);
    for (const auto& g : gold) {
      if (blocks.size() >= k) return;
      if (!taken.contains(g) && valid(g)) {
        blocks.push_back({g, g, false});
        taken.insert(g);
      }
    }
    std::deque<Coordinate> frontier(taken.begin(), taken.end());
    if (frontier.empty()) {
      const Coordinate anchor{std::clamp(0, bounds_.x_min, bounds_.x_max), bounds_.y_min,
                              std::clamp(0, bounds_.z_min, bounds_.z_max)};
      frontier.push_back(anchor);
      if (blocks.size() < k && valid(anchor)) {
        blocks.push_back({anchor, anchor, true});
        taken.insert(anchor);
      }
    }
    static constexpr std::array<Coordinate, 6> kFaces = {Coordinate{1, 0, 0}, Coordinate{-1, 0, 0},
                                                         Coordinate{0, 0, 1}, Coordinate{0, 0, -1},
                                                         Coordinate{0, 1, 0}, Coordinate{0, -1, 0}};
    std::set<Coordinate> visited(frontier.begin(), frontier.end());
    while (blocks.size() < k && !frontier.empty()) {
      const auto c = frontier.front();
      frontier.pop_front();
      for (const auto& f : kFaces) {
        const auto n = c + f;
        if (!bounds_.contains(n) || !visited.insert(n).second) continue;
        frontier.push_back(n);
        if (blocks.size() < k && valid(n) && !taken.contains(n)) {
          blocks.push_back({n, n, true});
          taken.insert(n);
        }
      }
    }
  }

  // Corrective: move blocks that lag their target in the helped direction one
  // cell; if none lag, shift everything when that shrinks the centroid gap.
  void constrain(std::vector<Placed>& blocks, const CorrectiveHelp& help, std::mt19937_64&) const {
    if (blocks.empty()) return;
    const bool horizontal = help.direction == Direction::Left || help.direction == Direction::Right;
    const int sign = (help.direction == Direction::Right || help.direction == Direction::Up) ? 1 : -1;
    const Coordinate step = horizontal ? Coordinate{sign, 0, 0} : Coordinate{0, sign, 0};
    auto axis = [&](const Coordinate& c) { return horizontal ? c.x : c.y; };
    std::multiset<Coordinate> taken;
    for (const auto& b : blocks) taken.insert(b.pos);
    // Leading blocks first so a trailing block can follow into the freed cell.
    std::vector<std::size_t> order(blocks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return axis(blocks[a].pos) * sign > axis(blocks[b].pos) * sign; });
    bool moved = false;
    for (auto i : order) {
      auto& b = blocks[i];
      const auto next = b.pos + step;
      if ((axis(b.source) - axis(b.pos)) * sign > 0 && valid(next) && !taken.contains(next)) {
        taken.erase(taken.find(b.pos));
        taken.insert(next);
        b.pos = next;
        moved = true;
      }
    }
    if (moved || episode_.gold.added.empty()) return;
    BlockSet current;
    for (const auto& b : blocks) current.insert(b.pos);
    const auto pc = centroid(current);
    const auto gc = centroid(episode_.gold.added);
    const double gap = horizontal ? gc[0] - pc[0] : gc[1] - pc[1];
    const bool fits = std::all_of(blocks.begin(), blocks.end(), [&](const Placed& b) { return valid(b.pos + step); });
    if (fits && std::abs(gap - sign) < std::abs(gap)) {
      for (auto& b : blocks) b.pos = b.pos + step;
    }
  }

  // Mistake: replace up to `count` wrong blocks, worst first, by unplaced target blocks.
  void constrain(std::vector<Placed>& blocks, const MistakeHelp& help, std::mt19937_64&) const {
    dedupe(blocks);
    const auto& gold = episode_.gold.added;
    if (gold.empty() || help.count <= 0) return;
    std::vector<std::size_t> wrong;
    std::set<Coordinate> placed;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      placed.insert(blocks[i].pos);
      if (!gold.contains(blocks[i].pos)) wrong.push_back(i);
    }
    std::stable_sort(wrong.begin(), wrong.end(), [&](std::size_t a, std::size_t b) {
      const int da = nearest_sq(blocks[a].pos, gold);
      const int db = nearest_sq(blocks[b].pos, gold);
      if (da != db) return da > db;
      return blocks[a].pos < blocks[b].pos;
    });
    std::vector<Coordinate> unplaced;
    for (const auto& g : gold) {
      if (!placed.contains(g)) unplaced.push_back(g);
    }
    const auto n = std::min(wrong.size(), static_cast<std::size_t>(help.count));
    std::vector<bool> remove(blocks.size(), false);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < unplaced.size()) {
        blocks[wrong[i]] = {unplaced[i], unplaced[i], false};
      } else {
        remove[wrong[i]] = true;
      }
    }
    std::vector<Placed> kept;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (!remove[i]) kept.push_back(blocks[i]);
    }
    blocks = std::move(kept);
  }

  static void dedupe(std::vector<Placed>& blocks) {
    std::set<Coordinate> seen;
    std::vector<Placed> out;
    for (const auto& b : blocks) {
      if (seen.insert(b.pos).second) out.push_back(b);
    }
    blocks = std::move(out);
  }

  const AgentProfile& profile_;
  const Episode& episode_;
  GridBounds bounds_;
};

std::string encode_placed(const std::vector<Placed>& blocks) {
  BlockSet set;
  for (const auto& b : blocks) set.insert(b.pos);
  return encode_blocks(set);
}

std::optional<HelpPayload> read_help(const BuilderInput& input, const RegionScheme& scheme) {
  if (!input.help) return std::nullopt;
  auto normalized = normalize_help(*input.help, scheme);
  if (auto* msg = std::get_if<HelpMessage>(&normalized)) return msg->payload;
  return std::nullopt;
}

class SimulatedBuilder : public Builder {
 public:
  explicit SimulatedBuilder(AgentProfile profile) : profile_(std::move(profile)) {}

  std::string predict(const Episode& episode, const BuilderInput& input) const override {
    switch (profile_.kind) {
      case AgentKind::Oracle: return encode_blocks(episode.gold.added);
      case AgentKind::Scripted: return scripted(input);
      case AgentKind::Noisy:
      case AgentKind::HelpAwareNoisy: break;
    }
    Simulation sim(profile_, episode);
    auto blocks = sim.corrupt();
    if (profile_.kind == AgentKind::HelpAwareNoisy) {
      if (auto help = read_help(input, profile_.scheme)) sim.apply_help(blocks, *help);
    }
    return encode_placed(blocks);
  }

 private:
  std::string scripted(const BuilderInput& input) const {
    const auto help = read_help(input, profile_.scheme);
    const std::string key = help ? std::string(to_string(kind_of(*help))) : "none";
    if (auto it = profile_.script.find(key); it != profile_.script.end()) return it->second;
    if (auto it = profile_.script.find("none"); it != profile_.script.end()) return it->second;
    return {};
  }

  AgentProfile profile_;
};

}  // namespace

std::unique_ptr<Builder> make_builder(const AgentProfile& profile) {
  profile.validate();
  return std::make_unique<SimulatedBuilder>(profile);
}

std::string builder_predict(const Builder& builder, const Episode& episode, const std::optional<HelpMessage>& help) {
  return builder.predict(episode, make_builder_input(episode, help));
}

std::string builder_predict(const AgentProfile& profile, const Episode& episode,
                            const std::optional<HelpMessage>& help) {
  return builder_predict(*make_builder(profile), episode, help);
}

// ---------------------------------------------------------------------------
// Self-generated help

int label_count(HelpKind kind, const RegionScheme& scheme) {
  switch (kind) {
    case HelpKind::Restrictive: return scheme.region_count();
    case HelpKind::Length: return 7;
    case HelpKind::Corrective: return 4;
    case HelpKind::Mistake: return 7;
  }
  return 1;
}

namespace {

constexpr std::array<Direction, 4> kDirections = {Direction::Up, Direction::Down, Direction::Left, Direction::Right};

int direction_label(Direction d) {
  return static_cast<int>(std::find(kDirections.begin(), kDirections.end(), d) - kDirections.begin());
}

}  // namespace

std::optional<int> oracle_label(HelpKind kind, const Episode& episode, const std::optional<GridDiff>& prediction,
                                const RegionScheme& scheme, std::uint64_t seed) {
  const auto& gold = episode.gold;
  switch (kind) {
    case HelpKind::Restrictive:
      if (gold.added.empty()) return std::nullopt;
      return restrictive_payload(gold, scheme, episode.grid_before.bounds(),
                                 derive_seed(seed, {episode.id, "region"}))
          .region.index;
    case HelpKind::Length: return std::min<int>(static_cast<int>(gold.added.size()), 6);
    case HelpKind::Corrective:
      if (!prediction || prediction->added.empty() || gold.added.empty()) return std::nullopt;
      return direction_label(corrective_payload(*prediction, gold).direction);
    case HelpKind::Mistake:
      if (!prediction) return std::nullopt;
      return std::min(mistake_payload(*prediction, gold).count, 6);
  }
  return std::nullopt;
}

HelpMessage predict_self_help(const SelfHelpPredictor& predictor, const Episode& episode,
                              const std::optional<GridDiff>& prediction, const RegionScheme& scheme,
                              const Phrasing& phrasing) {
  const auto kind = predictor.kind;
  if ((kind == HelpKind::Corrective || kind == HelpKind::Mistake) && !prediction) {
    throw Error(ErrorCode::MissingPrediction, fmt::format("{} help is predicted from a prior prediction", to_string(kind)));
  }
  if (!(predictor.accuracy >= 0.0 && predictor.accuracy <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "predictor accuracy outside [0,1]");
  }
  const int classes = label_count(kind, scheme);
  const auto truth = oracle_label(kind, episode, prediction, scheme, predictor.seed);
  std::mt19937_64 rng(derive_seed(predictor.seed, {episode.id, to_string(kind), "label"}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int label = 0;
  if (truth && unit(rng) < predictor.accuracy) {
    label = *truth;
  } else if (truth) {
    std::uniform_int_distribution<int> other(0, classes - 2);
    label = other(rng);
    if (label >= *truth) ++label;
  } else {
    std::uniform_int_distribution<int> any(0, classes - 1);
    label = any(rng);
  }
  const bool correct = truth && label == *truth;

  HelpPayload payload;
  switch (kind) {
    case HelpKind::Restrictive: payload = RegionHelp{region_by_index(scheme, label)}; break;
    case HelpKind::Length:
      payload = LengthHelp{label, correct && is_face_connected(episode.gold.added), label == 6};
      break;
    case HelpKind::Corrective: {
      const bool perfect = correct && corrective_payload(*prediction, episode.gold).perfect;
      payload = CorrectiveHelp{kDirections[static_cast<std::size_t>(label)], perfect};
      break;
    }
    case HelpKind::Mistake: payload = MistakeHelp{label, label == 6}; break;
  }
  Phrasing p = phrasing;
  p.seed = derive_seed(phrasing.seed, {episode.id, to_string(kind), "phrase"});
  return make_help(payload, p);
}

}  // namespace iglu
