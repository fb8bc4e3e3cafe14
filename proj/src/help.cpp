#include "iglu/help.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "iglu/error.hpp"

namespace iglu {

std::string_view to_string(HelpKind kind) {
  switch (kind) {
    case HelpKind::Restrictive: return "restrictive";
    case HelpKind::Length: return "length";
    case HelpKind::Corrective: return "corrective";
    case HelpKind::Mistake: return "mistake";
  }
  return "restrictive";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
  }
  return "up";
}

std::string_view to_string(Bank bank) { return bank == Bank::Train ? "train" : "test"; }

HelpKind help_kind_from_string(std::string_view s) {
  for (auto kind : kAllHelpKinds) {
    if (to_string(kind) == s) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown help kind '" + std::string(s) + "'");
}

Direction direction_from_string(std::string_view s) {
  for (auto d : {Direction::Up, Direction::Down, Direction::Left, Direction::Right}) {
    if (to_string(d) == s) return d;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown direction '" + std::string(s) + "'");
}

Bank bank_from_string(std::string_view s) {
  if (s == "train") return Bank::Train;
  if (s == "test") return Bank::Test;
  throw Error(ErrorCode::InvalidArgument, "unknown template bank '" + std::string(s) + "'");
}

HelpKind kind_of(const HelpPayload& payload) {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegionHelp>) return HelpKind::Restrictive;
        if constexpr (std::is_same_v<T, LengthHelp>) return HelpKind::Length;
        if constexpr (std::is_same_v<T, CorrectiveHelp>) return HelpKind::Corrective;
        if constexpr (std::is_same_v<T, MistakeHelp>) return HelpKind::Mistake;
      },
      payload);
}

// ---------------------------------------------------------------------------
// Template banks

std::string_view slot_of(HelpKind kind) {
  switch (kind) {
    case HelpKind::Restrictive: return "{region}";
    case HelpKind::Length: return "{count}";
    case HelpKind::Corrective: return "{direction}";
    case HelpKind::Mistake: return "{count}";
  }
  return "{count}";
}

const TemplateBank& TemplateBank::builtin() {
  static const TemplateBank bank = [] {
    TemplateBank b;
    b.set(HelpKind::Restrictive,
          {{"Place the block in the {region} region.", "Put the blocks in the {region} region.",
            "The blocks go in the {region} area.", "Build in the {region} part of the grid."},
           {"Try the {region} section.", "Your blocks belong in the {region} zone.",
            "Focus on the {region} portion of the board.",
            "Everything should be placed toward the {region}."}});
    b.set(HelpKind::Length,
          {{"You should place {count} blocks.", "Place {count} blocks.",
            "The answer uses {count} blocks.", "Build it with {count} blocks."},
           {"Use exactly {count} blocks.", "This step needs {count} blocks.",
            "Add {count} blocks in total.", "{count} blocks are required here."}});
    b.set(HelpKind::Corrective,
          {{"Look {direction}.", "Place the block more to the {direction}.",
            "Move the blocks {direction}.", "Go a little more {direction}."},
           {"Shift everything {direction}.", "Your blocks should go further {direction}.",
            "Try moving it {direction}.", "Adjust the structure {direction}."}});
    b.set(HelpKind::Mistake,
          {{"{count} blocks are wrong.", "You placed {count} blocks incorrectly",
            "{count} of your blocks are in the wrong place.", "You made {count} mistakes."},
           {"There are {count} misplaced blocks.", "Exactly {count} of those blocks are incorrect.",
            "I count {count} errors in what you built.", "{count} blocks were put in the wrong spot."}});
    b.validate();
    return b;
  }();
  return bank;
}

void TemplateBank::set(HelpKind kind, Templates templates) { banks_[kind] = std::move(templates); }

const std::vector<std::string>& TemplateBank::templates(HelpKind kind, Bank bank) const {
  static const std::vector<std::string> empty;
  auto it = banks_.find(kind);
  if (it == banks_.end()) return empty;
  return bank == Bank::Train ? it->second.train : it->second.test;
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

void TemplateBank::validate() const {
  for (const auto& [kind, t] : banks_) {
    const auto slot = slot_of(kind);
    for (const auto* list : {&t.train, &t.test}) {
      for (const auto& tmpl : *list) {
        if (count_occurrences(tmpl, slot) != 1 || count_occurrences(tmpl, "{") != 1) {
          throw Error(ErrorCode::InvalidArgument,
                      fmt::format("{} template '{}' must contain exactly one {}", to_string(kind), tmpl, slot));
        }
      }
    }
    for (const auto& tmpl : t.train) {
      if (std::find(t.test.begin(), t.test.end(), tmpl) != t.test.end()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("{} template '{}' is in both train and test", to_string(kind), tmpl));
      }
    }
  }
}

TemplateBank TemplateBank::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "template bank must be a JSON object");
  TemplateBank bank;
  for (const auto& [key, value] : j.items()) {
    const auto kind = help_kind_from_string(key);
    Templates t;
    try {
      t.train = value.value("train", std::vector<std::string>{});
      t.test = value.value("test", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaError, fmt::format("template bank '{}': {}", key, e.what()));
    }
    bank.set(kind, std::move(t));
  }
  bank.validate();
  return bank;
}

TemplateBank TemplateBank::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, fmt::format("{}: {}", path, e.what()));
  }
  return from_json(j);
}

nlohmann::json TemplateBank::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [kind, t] : banks_) {
    j[std::string(to_string(kind))] = {{"train", t.train}, {"test", t.test}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string count_words(int count, bool at_least) {
  return at_least ? fmt::format("more than {}", count - 1) : std::to_string(count);
}

std::string slot_value(const HelpPayload& payload) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegionHelp>) return p.region.name;
        if constexpr (std::is_same_v<T, LengthHelp>) return count_words(p.count, p.at_least);
        if constexpr (std::is_same_v<T, CorrectiveHelp>) return std::string(to_string(p.direction));
        if constexpr (std::is_same_v<T, MistakeHelp>) return count_words(p.count, p.at_least);
      },
      payload);
}

}  // namespace

std::string render(const HelpPayload& payload, Bank bank, std::uint64_t seed, const TemplateBank& templates) {
  const auto kind = kind_of(payload);
  const auto& list = templates.templates(kind, bank);
  if (list.empty()) {
    throw Error(ErrorCode::EmptyBank, fmt::format("no {} templates for {}", to_string(bank), to_string(kind)));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
  std::string text = list[pick(rng)];
  const auto slot = slot_of(kind);
  text.replace(text.find(slot), slot.size(), slot_value(payload));
  if (const auto* length = std::get_if<LengthHelp>(&payload); length && length->contiguous) {
    text += " They should be placed together.";
  }
  return text;
}

HelpMessage make_help(const HelpPayload& payload, const Phrasing& phrasing) {
  const auto& templates = phrasing.templates ? *phrasing.templates : TemplateBank::builtin();
  return HelpMessage{payload, render(payload, phrasing.bank, phrasing.seed, templates), phrasing.bank};
}

// ---------------------------------------------------------------------------
// Oracles

std::array<double, 3> centroid(const BlockSet& blocks) {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  if (blocks.empty()) return c;
  for (const auto& b : blocks) {
    c[0] += b.x;
    c[1] += b.y;
    c[2] += b.z;
  }
  for (auto& v : c) v /= static_cast<double>(blocks.size());
  return c;
}

bool is_face_connected(const BlockSet& blocks) {
  if (blocks.size() <= 1) return true;
  std::set<Coordinate> seen{*blocks.begin()};
  std::deque<Coordinate> frontier{*blocks.begin()};
  static constexpr std::array<Coordinate, 6> kFaces = {
      Coordinate{1, 0, 0}, Coordinate{-1, 0, 0}, Coordinate{0, 1, 0},
      Coordinate{0, -1, 0}, Coordinate{0, 0, 1}, Coordinate{0, 0, -1}};
  while (!frontier.empty()) {
    const auto c = frontier.front();
    frontier.pop_front();
    for (const auto& f : kFaces) {
      const auto n = c + f;
      if (blocks.contains(n) && seen.insert(n).second) frontier.push_back(n);
    }
  }
  return seen.size() == blocks.size();
}

RegionHelp restrictive_payload(const GridDiff& gold, const RegionScheme& scheme, const GridBounds& bounds,
                               std::uint64_t seed) {
  return {pick_region_for_diff(gold, scheme, bounds, seed)};
}

LengthHelp length_payload(const GridDiff& gold) {
  return {static_cast<int>(gold.added.size()), is_face_connected(gold.added), false};
}

CorrectiveHelp corrective_payload(const GridDiff& prediction, const GridDiff& gold) {
  if (prediction.added.empty()) throw Error(ErrorCode::EmptyPrediction, "corrective help needs a prediction");
  if (gold.added.empty()) throw Error(ErrorCode::EmptyGold, "corrective help needs a target");
  const auto p = centroid(prediction.added);
  const auto g = centroid(gold.added);
  const double dx = g[0] - p[0];
  const double dy = g[1] - p[1];
  // Below half a cell a unit step would overshoot on both axes.
  if (std::max(std::abs(dx), std::abs(dy)) < 0.5) return {Direction::Up, true};
  if (std::abs(dx) >= std::abs(dy)) return {dx > 0 ? Direction::Right : Direction::Left, false};
  return {dy > 0 ? Direction::Up : Direction::Down, false};
}

MistakeHelp mistake_payload(const GridDiff& prediction, const GridDiff& gold) {
  int wrong = 0;
  for (const auto& c : prediction.added) wrong += gold.added.contains(c) ? 0 : 1;
  return {wrong, false};
}

HelpMessage restrictive_oracle(const GridDiff& gold, const RegionScheme& scheme, const GridBounds& bounds,
                               std::uint64_t seed, const Phrasing& phrasing) {
  return make_help(restrictive_payload(gold, scheme, bounds, seed), phrasing);
}

HelpMessage length_oracle(const GridDiff& gold, const Phrasing& phrasing) {
  return make_help(length_payload(gold), phrasing);
}

HelpMessage corrective_oracle(const GridDiff& prediction, const GridDiff& gold, const Phrasing& phrasing) {
  return make_help(corrective_payload(prediction, gold), phrasing);
}

HelpMessage mistake_oracle(const GridDiff& prediction, const GridDiff& gold, const Phrasing& phrasing) {
  return make_help(mistake_payload(prediction, gold), phrasing);
}

// ---------------------------------------------------------------------------
// Free-form normalization

namespace {

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isalnum(ch)) {
      cur += static_cast<char>(std::tolower(ch));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::optional<int> number_value(const std::string& w) {
  static const std::map<std::string, int> kWords = {
      {"zero", 0},    {"one", 1},        {"single", 1},    {"two", 2},       {"three", 3},
      {"four", 4},    {"five", 5},       {"six", 6},       {"seven", 7},     {"eight", 8},
      {"nine", 9},    {"ten", 10},       {"eleven", 11},   {"twelve", 12},   {"thirteen", 13},
      {"fourteen", 14}, {"fifteen", 15}, {"sixteen", 16},  {"seventeen", 17}, {"eighteen", 18},
      {"nineteen", 19}, {"twenty", 20}};
  if (!w.empty() && w.size() <= 4 && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::stoi(w);
  }
  auto it = kWords.find(w);
  if (it != kWords.end()) return it->second;
  return std::nullopt;
}

struct CountMention {
  int count = 0;
  bool at_least = false;
};

// Distinct numeric mentions; "more than N" / "over N" become open-ended counts.
std::vector<CountMention> count_mentions(const std::vector<std::string>& words) {
  std::vector<CountMention> found;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto n = number_value(words[i]);
    if (!n) continue;
    const bool more_than = (i >= 2 && words[i - 1] == "than" && words[i - 2] == "more") ||
                           (i >= 1 && (words[i - 1] == "over"));
    CountMention m = more_than ? CountMention{*n + 1, true} : CountMention{*n, false};
    const bool dup = std::any_of(found.begin(), found.end(), [&](const CountMention& f) {
      return f.count == m.count && f.at_least == m.at_least;
    });
    if (!dup) found.push_back(m);
  }
  return found;
}

bool has_word(const std::vector<std::string>& words, std::initializer_list<std::string_view> options) {
  return std::any_of(words.begin(), words.end(), [&](const std::string& w) {
    return std::any_of(options.begin(), options.end(), [&](std::string_view o) { return w == o; });
  });
}

bool has_phrase(const std::string& joined, std::string_view phrase) {
  return (" " + joined + " ").find(" " + std::string(phrase) + " ") != std::string::npos;
}

// Region phrase table: phrase -> (quadrant, tier). Tier 0 center, 1 outer, 2 inner.
struct RegionPhrase {
  std::string phrase;
  int quadrant;
  int tier;
};

const std::vector<RegionPhrase>& region_phrases() {
  static const std::vector<RegionPhrase> table = [] {
    std::vector<RegionPhrase> t;
    const std::array<std::pair<int, std::vector<std::string>>, 2> vertical = {
        std::pair<int, std::vector<std::string>>{0, {"upper", "top"}},
        std::pair<int, std::vector<std::string>>{1, {"lower", "bottom"}}};
    for (const auto& [vi, vwords] : vertical) {
      for (int hi = 0; hi < 2; ++hi) {
        const std::string h = hi == 0 ? "right" : "left";
        // quadrant index: upper right 0, upper left 1, lower left 2, lower right 3
        const int q = vi == 0 ? (hi == 0 ? 0 : 1) : (hi == 0 ? 3 : 2);
        for (const auto& v : vwords) {
          t.push_back({v + " " + h, q, 0});
          t.push_back({h + " " + v, q, 0});
          t.push_back({v + " " + v + " " + h, q, 1});
          t.push_back({"far " + v + " " + h, q, 1});
          t.push_back({"outer " + v + " " + h, q, 1});
          t.push_back({"very " + v + " " + h, q, 1});
          t.push_back({"inner " + v + " " + h, q, 2});
        }
        const std::vector<std::string> superlatives =
            vi == 0 ? std::vector<std::string>{"upmost", "uppermost", "topmost"}
                    : std::vector<std::string>{"lowermost", "bottommost", "lowest"};
        for (const auto& s : superlatives) t.push_back({s + " " + h, q, 1});
      }
    }
    return t;
  }();
  return table;
}

struct RegionMatch {
  std::size_t begin;
  std::size_t end;
  int quadrant;
  int tier;
};

std::optional<std::variant<RegionId, Unrecognized>> find_region(const std::vector<std::string>& words,
                                                                const RegionScheme& scheme) {
  std::vector<RegionMatch> matches;
  for (const auto& rp : region_phrases()) {
    const auto pw = words_of(rp.phrase);
    for (std::size_t i = 0; i + pw.size() <= words.size(); ++i) {
      if (std::equal(pw.begin(), pw.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
        matches.push_back({i, i + pw.size(), rp.quadrant, rp.tier});
      }
    }
  }
  if (matches.empty()) return std::nullopt;
  // Longest match wins over any match it overlaps.
  std::sort(matches.begin(), matches.end(), [](const RegionMatch& a, const RegionMatch& b) {
    if (a.end - a.begin != b.end - b.begin) return a.end - a.begin > b.end - b.begin;
    return a.begin < b.begin;
  });
  std::vector<RegionMatch> kept;
  for (const auto& m : matches) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(),
                                      [&](const RegionMatch& k) { return m.begin < k.end && k.begin < m.end; });
    if (!overlaps) kept.push_back(m);
  }
  std::string joined;
  for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
  std::set<std::pair<int, int>> distinct;
  for (auto m : kept) {
    if (m.tier == 0 && (has_phrase(joined, "not in the center") || has_phrase(joined, "outside the center") ||
                        has_phrase(joined, "away from the center") || has_phrase(joined, "not in the middle"))) {
      m.tier = 1;
    }
    distinct.insert({m.quadrant, m.tier});
  }
  if (distinct.size() > 1) return Unrecognized{"mentions more than one region"};
  auto [quadrant, tier] = *distinct.begin();
  if (scheme.flip_horizontal) {
    static constexpr std::array<int, 4> kMirror = {1, 0, 3, 2};
    quadrant = kMirror[static_cast<std::size_t>(quadrant)];
  }
  int index = quadrant;
  switch (scheme.kind) {
    case RegionKind::Quad4: break;
    case RegionKind::CenterSplit8: index = tier == 1 ? 4 + quadrant : quadrant; break;
    case RegionKind::CenterSplit12: index = tier == 1 ? 4 + quadrant : tier == 2 ? 8 + quadrant : quadrant; break;
  }
  return region_by_index(scheme, index);
}

}  // namespace

NormalizedHelp normalize_help(std::string_view text, const RegionScheme& scheme) {
  const auto words = words_of(text);
  if (words.empty()) return Unrecognized{"empty help"};
  const std::string utterance(text);

  if (auto region = find_region(words, scheme)) {
    if (auto* id = std::get_if<RegionId>(&*region)) return HelpMessage{RegionHelp{*id}, utterance, std::nullopt};
    return std::get<Unrecognized>(*region);
  }

  const auto counts = count_mentions(words);
  if (counts.size() > 1) return Unrecognized{"mentions more than one number"};

  const bool mistake_words = has_word(words, {"wrong", "incorrect", "incorrectly", "mistake", "mistakes",
                                              "misplaced", "error", "errors", "fix", "fixed"});
  if (mistake_words) {
    if (counts.size() == 1) return HelpMessage{MistakeHelp{counts[0].count, counts[0].at_least}, utterance, std::nullopt};
    if (has_word(words, {"no", "none", "nothing"})) return HelpMessage{MistakeHelp{0, false}, utterance, std::nullopt};
    return Unrecognized{"mistake help without a count"};
  }

  if (counts.size() == 1 && has_word(words, {"block", "blocks", "place", "need", "needs", "build", "put", "add",
                                             "use", "tall", "long", "cubes", "cube", "required", "uses"})) {
    const bool together = has_word(words, {"together", "connected", "tower", "adjacent", "touching", "column"});
    return HelpMessage{LengthHelp{counts[0].count, together, counts[0].at_least}, utterance, std::nullopt};
  }

  std::set<Direction> dirs;
  for (const auto& w : words) {
    if (w == "left" || w == "leftward" || w == "leftwards") dirs.insert(Direction::Left);
    if (w == "right" || w == "rightward" || w == "rightwards") dirs.insert(Direction::Right);
    if (w == "up" || w == "upward" || w == "upwards" || w == "higher" || w == "raise") dirs.insert(Direction::Up);
    if (w == "down" || w == "downward" || w == "downwards") dirs.insert(Direction::Down);
  }
  if (dirs.size() == 1 && counts.empty()) return HelpMessage{CorrectiveHelp{*dirs.begin(), false}, utterance, std::nullopt};
  if (dirs.size() > 1) return Unrecognized{"mentions more than one direction"};
  return Unrecognized{"no help concept found"};
}

// ---------------------------------------------------------------------------

nlohmann::json payload_to_json(const HelpPayload& payload) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegionHelp>) {
          return {{"kind", "restrictive"}, {"region", p.region.name}, {"region_index", p.region.index}};
        }
        if constexpr (std::is_same_v<T, LengthHelp>) {
          return {{"kind", "length"}, {"count", p.count}, {"contiguous", p.contiguous}, {"at_least", p.at_least}};
        }
        if constexpr (std::is_same_v<T, CorrectiveHelp>) {
          return {{"kind", "corrective"}, {"direction", to_string(p.direction)}, {"perfect", p.perfect}};
        }
        if constexpr (std::is_same_v<T, MistakeHelp>) {
          return {{"kind", "mistake"}, {"count", p.count}, {"at_least", p.at_least}};
        }
      },
      payload);
}

nlohmann::json help_to_json(const HelpMessage& msg) {
  auto j = payload_to_json(msg.payload);
  j["utterance"] = msg.utterance;
  j["bank"] = msg.bank ? nlohmann::json(std::string(to_string(*msg.bank))) : nlohmann::json(nullptr);
  return j;
}

}  // namespace iglu
