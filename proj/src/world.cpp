#include "iglu/world.hpp"

#include <fmt/format.h>

#include "iglu/error.hpp"

namespace iglu {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::BoundsMismatch: return "BoundsMismatch";
    case ErrorCode::UnsupportedRemoval: return "UnsupportedRemoval";
    case ErrorCode::EmptyDiff: return "EmptyDiff";
    case ErrorCode::EmptyPrediction: return "EmptyPrediction";
    case ErrorCode::EmptyGold: return "EmptyGold";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::MissingPriorPrediction: return "MissingPriorPrediction";
    case ErrorCode::PredictorMissing: return "PredictorMissing";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::Unrecognized: return "Unrecognized";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::BadFractions: return "BadFractions";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownEpisode: return "UnknownEpisode";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::Busy: return "Busy";
    case ErrorCode::Expired: return "Expired";
    case ErrorCode::ProcessError: return "ProcessError";
  }
  return "Unknown";
}

Coordinate operator+(const Coordinate& a, const Coordinate& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}

Coordinate operator-(const Coordinate& a, const Coordinate& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

std::string to_string(const Coordinate& c) { return fmt::format("({},{},{})", c.x, c.y, c.z); }

void GridBounds::validate() const {
  if (!(x_min < x_max && y_min < y_max && z_min < z_max)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("degenerate bounds x[{},{}] y[{},{}] z[{},{}]", x_min, x_max, y_min,
                            y_max, z_min, z_max));
  }
}

bool GridBounds::contains(const Coordinate& c) const {
  return c.x >= x_min && c.x <= x_max && c.y >= y_min && c.y <= y_max && c.z >= z_min &&
         c.z <= z_max;
}

std::size_t GridBounds::cell_count() const {
  return static_cast<std::size_t>(x_max - x_min + 1) * static_cast<std::size_t>(y_max - y_min + 1) *
         static_cast<std::size_t>(z_max - z_min + 1);
}

GridState::GridState(GridBounds bounds) : bounds_(bounds) { bounds_.validate(); }

GridState::GridState(GridBounds bounds, BlockSet blocks) : bounds_(bounds), blocks_(std::move(blocks)) {
  bounds_.validate();
  for (const auto& c : blocks_) {
    if (!bounds_.contains(c)) throw Error(ErrorCode::OutOfBounds, "block " + to_string(c));
  }
}

void GridDiff::validate() const {
  for (const auto& c : added) {
    if (removed.contains(c)) throw Error(ErrorCode::Conflict, "cell both added and removed " + to_string(c));
  }
}

GridDiff additions(BlockSet blocks) { return GridDiff{std::move(blocks), {}}; }

GridState apply_diff(const GridState& grid, const GridDiff& diff) {
  diff.validate();
  const auto& bounds = grid.bounds();
  BlockSet result = grid.blocks();
  for (const auto& c : diff.removed) {
    if (!bounds.contains(c)) throw Error(ErrorCode::OutOfBounds, "removal " + to_string(c));
    if (result.erase(c) == 0) throw Error(ErrorCode::Conflict, "removing empty cell " + to_string(c));
  }
  for (const auto& c : diff.added) {
    if (!bounds.contains(c)) throw Error(ErrorCode::OutOfBounds, "addition " + to_string(c));
    if (grid.occupied(c)) throw Error(ErrorCode::Conflict, "adding occupied cell " + to_string(c));
    result.insert(c);
  }
  return GridState(bounds, std::move(result));
}

GridDiff diff_between(const GridState& before, const GridState& after) {
  if (!(before.bounds() == after.bounds())) throw Error(ErrorCode::BoundsMismatch, "grids differ in bounds");
  GridDiff diff;
  for (const auto& c : after.blocks()) {
    if (!before.occupied(c)) diff.added.insert(c);
  }
  for (const auto& c : before.blocks()) {
    if (!after.occupied(c)) diff.removed.insert(c);
  }
  return diff;
}

}  // namespace iglu
