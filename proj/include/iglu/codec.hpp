#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iglu/world.hpp"

namespace iglu {

// Block sentences: "<d> <left|right> <d> <up|down> <d> <higher|lower>."
// See docs/utterance_grammar.md.

enum class ParseMode { Strict, Lenient };

enum class ParseFailureReason { Token, Arity, Axis, Bounds, Terminator };

std::string_view to_string(ParseFailureReason reason);

struct ParseFailure {
  std::size_t sentence_index = 0;
  std::size_t offset = 0;  ///< byte offset of the offending sentence
  ParseFailureReason reason = ParseFailureReason::Token;
  std::string detail;
};

struct ParseResult {
  std::variant<GridDiff, ParseFailure> value;
  /// Sentences dropped in lenient mode, in input order.
  std::vector<ParseFailure> skipped;

  bool ok() const { return std::holds_alternative<GridDiff>(value); }
  const GridDiff& diff() const { return std::get<GridDiff>(value); }
  const ParseFailure& failure() const { return std::get<ParseFailure>(value); }
};

std::string encode_coordinate(const Coordinate& c);

/// One sentence per added block in (x,y,z) order, separated by one space.
/// Throws UnsupportedRemoval if the diff removes anything.
std::string encode_diff(const GridDiff& diff);

/// Encodes the occupied cells of a grid (used as the builder's world-state text).
std::string encode_blocks(const BlockSet& blocks);

/// Total: never throws, always returns a diff or a structured failure.
ParseResult parse_utterance(std::string_view text, const GridBounds& bounds,
                            ParseMode mode = ParseMode::Strict);

}  // namespace iglu
