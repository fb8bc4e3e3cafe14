#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iglu/world.hpp"

namespace iglu {

enum class RegionKind { Quad4, CenterSplit8, CenterSplit12 };

/// Which pair of axes the regions partition. The first axis maps to
/// left/right, the second to upper/lower.
enum class RegionPlane { XY, XZ };

/// How a coordinate is scaled into [-1,1].
///  - Centered: (value - midpoint) / half_extent per axis.
///  - Origin:   value / max(|min|, |max|) per axis.
enum class Normalization { Centered, Origin };

struct RegionScheme {
  RegionKind kind = RegionKind::CenterSplit8;
  double center_half_width = 0.5;
  RegionPlane plane = RegionPlane::XY;
  Normalization normalization = Normalization::Centered;
  /// Swap left/right naming (positive x named "left").
  bool flip_horizontal = false;

  int region_count() const;
  /// Canonical region names, indexed by RegionId::index.
  const std::vector<std::string>& names() const;
};

struct RegionId {
  int index = 0;
  std::string name;

  friend bool operator==(const RegionId&, const RegionId&) = default;
};

RegionScheme scheme_from_name(std::string_view name);
std::string_view scheme_name(RegionKind kind);

/// Index of a canonical region name in `scheme`, or -1.
int region_index(const RegionScheme& scheme, std::string_view name);
RegionId region_by_index(const RegionScheme& scheme, int index);

std::pair<double, double> normalize(const Coordinate& c, const GridBounds& bounds,
                                    const RegionScheme& scheme = {});

/// Region containing the normalized point (u, v).
RegionId region_of_normalized(double u, double v, const RegionScheme& scheme);
RegionId region_of(const Coordinate& c, const RegionScheme& scheme, const GridBounds& bounds);

/// Uniform seeded choice among the distinct regions covering `diff.added`.
RegionId pick_region_for_diff(const GridDiff& diff, const RegionScheme& scheme,
                              const GridBounds& bounds, std::uint64_t seed);

/// All in-bounds cells of `region`, in (x,y,z) order.
std::vector<Coordinate> cells_in_region(const RegionId& region, const RegionScheme& scheme,
                                        const GridBounds& bounds);

}  // namespace iglu
