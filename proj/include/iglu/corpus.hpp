#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "iglu/world.hpp"

namespace iglu {

enum class Split { Train, Valid, Test };

std::string_view to_string(Split split);
Split split_from_string(std::string_view s);

/// One instruction step: dialogue so far, the grid before it, and the gold change.
struct Episode {
  std::string id;
  std::string dialogue;
  GridState grid_before;
  GridDiff gold;
  Split split = Split::Train;

  /// Throws SchemaError if the dialogue is empty or gold does not apply to grid_before.
  void validate() const;
};

struct CorpusManifest {
  std::map<Split, std::size_t> counts;
  std::string source;  ///< "imported" or "synthetic"
  std::optional<std::uint64_t> seed;

  static CorpusManifest of(const std::vector<Episode>& episodes, std::string source,
                           std::optional<std::uint64_t> seed = std::nullopt);
  nlohmann::json to_json() const;
};

struct SkippedRecord {
  std::size_t index;
  std::string reason;
};

struct ImportResult {
  std::vector<Episode> episodes;
  std::vector<SkippedRecord> skipped;
};

/// Reads IGLU multi-turn sessions (see docs/iglu_import.md for the assumed layout).
/// `path` may be a file or a directory of *.json files. Records without an
/// explicit split take `default_split`.
ImportResult import_iglu(const std::string& path, Split default_split = Split::Train,
                         const GridBounds& bounds = {});

enum class ShapeKind { Single, Row, Tower, LShape, Square };

std::string_view to_string(ShapeKind shape);
ShapeKind shape_from_string(std::string_view s);

inline const std::vector<ShapeKind>& all_shapes() {
  static const std::vector<ShapeKind> shapes = {ShapeKind::Single, ShapeKind::Row, ShapeKind::Tower,
                                                ShapeKind::LShape, ShapeKind::Square};
  return shapes;
}

/// Seeded procedural episodes. Gold is additions-only and in bounds.
std::vector<Episode> generate_synthetic(std::uint64_t seed, std::size_t n,
                                        const std::vector<ShapeKind>& shape_catalog = all_shapes(),
                                        const GridBounds& bounds = {});

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Seeded shuffle then partition; returns episodes with `split` assigned,
/// grouped train, valid, test.
std::vector<Episode> split(std::vector<Episode> episodes, const SplitFractions& fractions,
                           std::uint64_t seed);

std::vector<Episode> filter_split(const std::vector<Episode>& episodes, Split split);

nlohmann::json episode_to_json(const Episode& e);
Episode episode_from_json(const nlohmann::json& j);

void write_episodes_jsonl(const std::string& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_episodes_jsonl(const std::string& path);

}  // namespace iglu
