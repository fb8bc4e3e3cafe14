#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iglu/regions.hpp"
#include "iglu/world.hpp"

namespace iglu {

enum class HelpKind { Restrictive, Length, Corrective, Mistake };
enum class Direction { Up, Down, Left, Right };
enum class Bank { Train, Test };

inline constexpr std::array<HelpKind, 4> kAllHelpKinds = {HelpKind::Restrictive, HelpKind::Length,
                                                          HelpKind::Corrective, HelpKind::Mistake};

std::string_view to_string(HelpKind kind);
std::string_view to_string(Direction d);
std::string_view to_string(Bank bank);
HelpKind help_kind_from_string(std::string_view s);
Direction direction_from_string(std::string_view s);
Bank bank_from_string(std::string_view s);

struct RegionHelp {
  RegionId region;
  friend bool operator==(const RegionHelp&, const RegionHelp&) = default;
};

/// `at_least` marks the open-ended class ("more than count-1 blocks").
struct LengthHelp {
  int count = 0;
  bool contiguous = false;
  bool at_least = false;
  friend bool operator==(const LengthHelp&, const LengthHelp&) = default;
};

/// `perfect` is set when the prediction already sits on the target centroid
/// (within half a cell on both axes); the direction is then "up" by convention.
struct CorrectiveHelp {
  Direction direction = Direction::Up;
  bool perfect = false;
  friend bool operator==(const CorrectiveHelp&, const CorrectiveHelp&) = default;
};

struct MistakeHelp {
  int count = 0;
  bool at_least = false;
  friend bool operator==(const MistakeHelp&, const MistakeHelp&) = default;
};

using HelpPayload = std::variant<RegionHelp, LengthHelp, CorrectiveHelp, MistakeHelp>;

HelpKind kind_of(const HelpPayload& payload);

struct HelpMessage {
  HelpPayload payload;
  std::string utterance;
  std::optional<Bank> bank;  ///< unset for free-form (normalized) help

  HelpKind kind() const { return kind_of(payload); }
};

/// Slot templates per help kind, split into disjoint train and test sets.
/// Slots: {region}, {count}, {direction}.
class TemplateBank {
 public:
  struct Templates {
    std::vector<std::string> train;
    std::vector<std::string> test;
  };

  static const TemplateBank& builtin();
  /// JSON: {"restrictive": {"train": [...], "test": [...]}, ...}. Validates.
  static TemplateBank from_json(const nlohmann::json& j);
  static TemplateBank load(const std::string& path);

  const std::vector<std::string>& templates(HelpKind kind, Bank bank) const;
  void set(HelpKind kind, Templates templates);
  /// Throws InvalidArgument on overlapping banks or wrong slots.
  void validate() const;
  nlohmann::json to_json() const;

 private:
  std::map<HelpKind, Templates> banks_;
};

std::string_view slot_of(HelpKind kind);

/// Uniform seeded template choice from `bank`, slot filled from the payload.
std::string render(const HelpPayload& payload, Bank bank, std::uint64_t seed,
                   const TemplateBank& templates = TemplateBank::builtin());

struct Phrasing {
  const TemplateBank* templates = nullptr;  ///< nullptr selects the builtin bank
  Bank bank = Bank::Test;
  std::uint64_t seed = 0;
};

HelpMessage make_help(const HelpPayload& payload, const Phrasing& phrasing = {});

std::array<double, 3> centroid(const BlockSet& blocks);
bool is_face_connected(const BlockSet& blocks);

RegionHelp restrictive_payload(const GridDiff& gold, const RegionScheme& scheme,
                               const GridBounds& bounds, std::uint64_t seed);
LengthHelp length_payload(const GridDiff& gold);
CorrectiveHelp corrective_payload(const GridDiff& prediction, const GridDiff& gold);
MistakeHelp mistake_payload(const GridDiff& prediction, const GridDiff& gold);

HelpMessage restrictive_oracle(const GridDiff& gold, const RegionScheme& scheme,
                               const GridBounds& bounds, std::uint64_t seed,
                               const Phrasing& phrasing = {});
HelpMessage length_oracle(const GridDiff& gold, const Phrasing& phrasing = {});
HelpMessage corrective_oracle(const GridDiff& prediction, const GridDiff& gold,
                              const Phrasing& phrasing = {});
HelpMessage mistake_oracle(const GridDiff& prediction, const GridDiff& gold,
                           const Phrasing& phrasing = {});

struct Unrecognized {
  std::string reason;
};

using NormalizedHelp = std::variant<HelpMessage, Unrecognized>;

/// Rule-based mapping from free-form help text to canonical help.
/// Returns Unrecognized rather than guessing when the text is ambiguous.
NormalizedHelp normalize_help(std::string_view text, const RegionScheme& scheme);

nlohmann::json payload_to_json(const HelpPayload& payload);
nlohmann::json help_to_json(const HelpMessage& msg);

}  // namespace iglu
