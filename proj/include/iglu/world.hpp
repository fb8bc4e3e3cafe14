#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>

namespace iglu {

/// Integer voxel position. x is left/right, y is up/down, z is higher/lower.
struct Coordinate {
  int x = 0;
  int y = 0;
  int z = 0;

  friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

Coordinate operator+(const Coordinate& a, const Coordinate& b);
Coordinate operator-(const Coordinate& a, const Coordinate& b);
std::string to_string(const Coordinate& c);

/// Inclusive cell ranges along each axis.
struct GridBounds {
  int x_min = -5;
  int x_max = 5;
  int y_min = 0;
  int y_max = 8;
  int z_min = -5;
  int z_max = 5;

  /// Throws InvalidArgument unless every min < max.
  void validate() const;
  bool contains(const Coordinate& c) const;
  std::size_t cell_count() const;

  friend bool operator==(const GridBounds&, const GridBounds&) = default;
};

using BlockSet = std::set<Coordinate>;

/// Occupied cells inside fixed bounds. Immutable once constructed.
class GridState {
 public:
  GridState() = default;
  explicit GridState(GridBounds bounds);
  /// Throws OutOfBounds if any block lies outside `bounds`.
  GridState(GridBounds bounds, BlockSet blocks);

  const GridBounds& bounds() const { return bounds_; }
  const BlockSet& blocks() const { return blocks_; }
  bool occupied(const Coordinate& c) const { return blocks_.contains(c); }
  std::size_t size() const { return blocks_.size(); }

  friend bool operator==(const GridState&, const GridState&) = default;

 private:
  GridBounds bounds_;
  BlockSet blocks_;
};

/// One instruction step's change to a grid. `added` and `removed` are disjoint.
struct GridDiff {
  BlockSet added;
  BlockSet removed;

  bool empty() const { return added.empty() && removed.empty(); }
  /// Throws Conflict if a cell is both added and removed.
  void validate() const;

  friend bool operator==(const GridDiff&, const GridDiff&) = default;
};

GridDiff additions(BlockSet blocks);

GridState apply_diff(const GridState& grid, const GridDiff& diff);
GridDiff diff_between(const GridState& before, const GridState& after);

}  // namespace iglu
