#include "iglu/regions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "iglu/error.hpp"

namespace iglu {

namespace {

// Quadrant order: upper right, upper left, lower left, lower right.
const std::vector<std::string> kQuad = {"upper right", "upper left", "lower left", "lower right"};
const std::vector<std::string> kSplit8 = {"upper right",       "upper left",       "lower left",
                                          "lower right",       "upper upper right", "upper upper left",
                                          "lower lower left",  "lower lower right"};
const std::vector<std::string> kSplit12 = {
    "upper right",       "upper left",       "lower left",        "lower right",
    "upper upper right", "upper upper left", "lower lower left",  "lower lower right",
    "inner upper right", "inner upper left", "inner lower left",  "inner lower right"};

int quadrant(double u, double v, bool flip) {
  bool right = u >= 0.0;
  if (flip) right = !right;
  const bool upper = v >= 0.0;
  if (upper) return right ? 0 : 1;
  return right ? 3 : 2;
}

double scale(int value, int lo, int hi, Normalization mode) {
  if (mode == Normalization::Origin) {
    const int extent = std::max(std::abs(lo), std::abs(hi));
    return extent == 0 ? 0.0 : static_cast<double>(value) / extent;
  }
  const double mid = (lo + hi) / 2.0;
  const double half = (hi - lo) / 2.0;
  return (value - mid) / half;
}

}  // namespace

int RegionScheme::region_count() const { return static_cast<int>(names().size()); }

const std::vector<std::string>& RegionScheme::names() const {
  switch (kind) {
    case RegionKind::Quad4: return kQuad;
    case RegionKind::CenterSplit8: return kSplit8;
    case RegionKind::CenterSplit12: return kSplit12;
  }
  return kSplit8;
}

RegionScheme scheme_from_name(std::string_view name) {
  RegionScheme s;
  if (name == "quad4" || name == "4") {
    s.kind = RegionKind::Quad4;
  } else if (name == "center8" || name == "8") {
    s.kind = RegionKind::CenterSplit8;
  } else if (name == "center12" || name == "12") {
    s.kind = RegionKind::CenterSplit12;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown region scheme '" + std::string(name) + "'");
  }
  return s;
}

std::string_view scheme_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::Quad4: return "quad4";
    case RegionKind::CenterSplit8: return "center8";
    case RegionKind::CenterSplit12: return "center12";
  }
  return "center8";
}

int region_index(const RegionScheme& scheme, std::string_view name) {
  const auto& names = scheme.names();
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

RegionId region_by_index(const RegionScheme& scheme, int index) {
  if (index < 0 || index >= scheme.region_count()) {
    throw Error(ErrorCode::InvalidArgument, "region index out of range");
  }
  return {index, scheme.names()[static_cast<std::size_t>(index)]};
}

std::pair<double, double> normalize(const Coordinate& c, const GridBounds& bounds,
                                    const RegionScheme& scheme) {
  if (!bounds.contains(c)) throw Error(ErrorCode::OutOfBounds, to_string(c));
  const double u = scale(c.x, bounds.x_min, bounds.x_max, scheme.normalization);
  const double v = scheme.plane == RegionPlane::XY
                       ? scale(c.y, bounds.y_min, bounds.y_max, scheme.normalization)
                       : scale(c.z, bounds.z_min, bounds.z_max, scheme.normalization);
  return {std::clamp(u, -1.0, 1.0), std::clamp(v, -1.0, 1.0)};
}

RegionId region_of_normalized(double u, double v, const RegionScheme& scheme) {
  const int q = quadrant(u, v, scheme.flip_horizontal);
  if (scheme.kind == RegionKind::Quad4) return region_by_index(scheme, q);
  const double hw = scheme.center_half_width;
  const bool center = std::abs(u) <= hw && std::abs(v) <= hw;
  if (!center) return region_by_index(scheme, 4 + q);
  if (scheme.kind == RegionKind::CenterSplit12 && std::abs(u) <= hw / 2 && std::abs(v) <= hw / 2) {
    return region_by_index(scheme, 8 + q);
  }
  return region_by_index(scheme, q);
}

RegionId region_of(const Coordinate& c, const RegionScheme& scheme, const GridBounds& bounds) {
  const auto [u, v] = normalize(c, bounds, scheme);
  return region_of_normalized(u, v, scheme);
}

RegionId pick_region_for_diff(const GridDiff& diff, const RegionScheme& scheme,
                              const GridBounds& bounds, std::uint64_t seed) {
  if (diff.added.empty()) throw Error(ErrorCode::EmptyDiff, "no added blocks to locate");
  std::set<int> covered;
  for (const auto& c : diff.added) covered.insert(region_of(c, scheme, bounds).index);
  std::vector<int> options(covered.begin(), covered.end());
  if (options.size() == 1) return region_by_index(scheme, options.front());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  return region_by_index(scheme, options[pick(rng)]);
}

std::vector<Coordinate> cells_in_region(const RegionId& region, const RegionScheme& scheme,
                                        const GridBounds& bounds) {
  std::vector<Coordinate> cells;
  for (int x = bounds.x_min; x <= bounds.x_max; ++x) {
    for (int y = bounds.y_min; y <= bounds.y_max; ++y) {
      for (int z = bounds.z_min; z <= bounds.z_max; ++z) {
        const Coordinate c{x, y, z};
        if (region_of(c, scheme, bounds).index == region.index) cells.push_back(c);
      }
    }
  }
  return cells;
}

}  // namespace iglu
