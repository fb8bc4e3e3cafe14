#include "iglu/codec.hpp"

#include <array>
#include <cctype>
#include <cstdlib>
#include <optional>

#include <fmt/format.h>

#include "iglu/error.hpp"

namespace iglu {

std::string_view to_string(ParseFailureReason reason) {
  switch (reason) {
    case ParseFailureReason::Token: return "token";
    case ParseFailureReason::Arity: return "arity";
    case ParseFailureReason::Axis: return "axis";
    case ParseFailureReason::Bounds: return "bounds";
    case ParseFailureReason::Terminator: return "terminator";
  }
  return "unknown";
}

std::string encode_coordinate(const Coordinate& c) {
  return fmt::format("{} {} {} {} {} {}.", std::abs(c.x), c.x < 0 ? "left" : "right", std::abs(c.y),
                     c.y < 0 ? "down" : "up", std::abs(c.z), c.z < 0 ? "lower" : "higher");
}

std::string encode_blocks(const BlockSet& blocks) {
  std::string out;
  for (const auto& c : blocks) {
    if (!out.empty()) out += ' ';
    out += encode_coordinate(c);
  }
  return out;
}

std::string encode_diff(const GridDiff& diff) {
  if (!diff.removed.empty()) {
    throw Error(ErrorCode::UnsupportedRemoval, "block utterances encode additions only");
  }
  return encode_blocks(diff.added);
}

namespace {

struct Sentence {
  std::string_view text;
  std::size_t offset = 0;
  bool terminated = false;
};

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

// A sentence ends at '.' followed by whitespace or end of input.
std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  auto skip_space = [&] {
    while (start < text.size() && is_space(text[start])) ++start;
  };
  skip_space();
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] == '.' && (i + 1 == text.size() || is_space(text[i + 1]))) {
      out.push_back({text.substr(start, i - start), start, true});
      start = i + 1;
      skip_space();
      i = start == 0 ? 0 : start - 1;
    }
  }
  auto rest = text.substr(start);
  bool blank = true;
  for (char ch : rest) blank = blank && is_space(ch);
  if (!blank) out.push_back({rest, start, false});
  return out;
}

std::vector<std::string_view> tokenize(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) tokens.push_back(s.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

struct AxisWord {
  int axis;  // 0=x 1=y 2=z
  int sign;
};

std::optional<AxisWord> direction_word(std::string_view token) {
  const auto w = lower(token);
  if (w == "left") return AxisWord{0, -1};
  if (w == "right") return AxisWord{0, 1};
  if (w == "down") return AxisWord{1, -1};
  if (w == "up") return AxisWord{1, 1};
  if (w == "lower") return AxisWord{2, -1};
  if (w == "higher") return AxisWord{2, 1};
  return std::nullopt;
}

std::optional<int> magnitude(std::string_view token) {
  if (token.empty() || token.size() > 6) return std::nullopt;
  int value = 0;
  for (char ch : token) {
    if (ch < '0' || ch > '9') return std::nullopt;
    value = value * 10 + (ch - '0');
  }
  return value;
}

std::variant<Coordinate, ParseFailure> parse_sentence(const Sentence& s, std::size_t index,
                                                      const GridBounds& bounds, ParseMode mode) {
  auto fail = [&](ParseFailureReason reason, std::string detail) {
    return ParseFailure{index, s.offset, reason, std::move(detail)};
  };
  if (!s.terminated && mode == ParseMode::Strict) {
    return fail(ParseFailureReason::Terminator, "missing '.'");
  }
  const auto tokens = tokenize(s.text);
  if (tokens.size() != 6) {
    return fail(ParseFailureReason::Arity, fmt::format("expected 6 tokens, got {}", tokens.size()));
  }
  std::array<std::optional<int>, 3> axes;
  for (std::size_t k = 0; k < 3; ++k) {
    auto dist = magnitude(tokens[2 * k]);
    if (!dist) return fail(ParseFailureReason::Token, fmt::format("bad distance '{}'", tokens[2 * k]));
    auto dir = direction_word(tokens[2 * k + 1]);
    if (!dir) return fail(ParseFailureReason::Token, fmt::format("bad direction '{}'", tokens[2 * k + 1]));
    if (mode == ParseMode::Strict && dir->axis != static_cast<int>(k)) {
      return fail(ParseFailureReason::Axis, "axes must appear in x, y, z order");
    }
    if (axes[dir->axis]) return fail(ParseFailureReason::Axis, "axis repeated");
    axes[dir->axis] = dir->sign * *dist;
  }
  Coordinate c{*axes[0], *axes[1], *axes[2]};
  if (!bounds.contains(c)) return fail(ParseFailureReason::Bounds, "out of bounds " + to_string(c));
  return c;
}

}  // namespace

ParseResult parse_utterance(std::string_view text, const GridBounds& bounds, ParseMode mode) {
  ParseResult result{GridDiff{}, {}};
  GridDiff diff;
  const auto sentences = split_sentences(text);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto parsed = parse_sentence(sentences[i], i, bounds, mode);
    if (auto* c = std::get_if<Coordinate>(&parsed)) {
      diff.added.insert(*c);
      continue;
    }
    auto& failure = std::get<ParseFailure>(parsed);
    if (mode == ParseMode::Strict) {
      result.value = std::move(failure);
      return result;
    }
    result.skipped.push_back(std::move(failure));
  }
  result.value = std::move(diff);
  return result;
}

}  // namespace iglu
