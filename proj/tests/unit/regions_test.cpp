#include <map>
#include <set>

#include <gtest/gtest.h>

#include "iglu/error.hpp"
#include "iglu/regions.hpp"

using namespace iglu;

namespace {

RegionScheme scheme(RegionKind kind) {
  RegionScheme s;
  s.kind = kind;
  return s;
}

RegionScheme origin_scheme() {
  RegionScheme s;
  s.normalization = Normalization::Origin;
  return s;
}

}  // namespace

TEST(Scheme, Cardinalities) {
  EXPECT_EQ(scheme(RegionKind::Quad4).region_count(), 4);
  EXPECT_EQ(scheme(RegionKind::CenterSplit8).region_count(), 8);
  EXPECT_EQ(scheme(RegionKind::CenterSplit12).region_count(), 12);
  for (auto k : {RegionKind::Quad4, RegionKind::CenterSplit8, RegionKind::CenterSplit12}) {
    auto s = scheme(k);
    EXPECT_EQ(static_cast<int>(s.names().size()), s.region_count());
    EXPECT_EQ(std::set<std::string>(s.names().begin(), s.names().end()).size(), s.names().size());
  }
}

TEST(Scheme, EightRegionNames) {
  std::set<std::string> want = {"upper right",       "upper left",       "lower left",       "lower right",
                                "upper upper right", "upper upper left", "lower lower left", "lower lower right"};
  const auto& names = scheme(RegionKind::CenterSplit8).names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()), want);
}

TEST(Scheme, TwelveExtendsEight) {
  const auto& eight = scheme(RegionKind::CenterSplit8).names();
  const auto& twelve = scheme(RegionKind::CenterSplit12).names();
  for (const auto& n : eight) EXPECT_NE(std::find(twelve.begin(), twelve.end(), n), twelve.end()) << n;
  EXPECT_NE(std::find(twelve.begin(), twelve.end(), "inner upper right"), twelve.end());
}

TEST(Scheme, Lookup) {
  EXPECT_EQ(scheme_from_name("4").kind, RegionKind::Quad4);
  EXPECT_EQ(scheme_from_name("center12").kind, RegionKind::CenterSplit12);
  EXPECT_THROW(scheme_from_name("16"), Error);
  auto s = scheme(RegionKind::CenterSplit8);
  EXPECT_EQ(region_by_index(s, region_index(s, "lower lower left")).name, "lower lower left");
  EXPECT_EQ(region_index(s, "middle"), -1);
  EXPECT_THROW(region_by_index(s, 8), Error);
}

TEST(Normalize, OriginScaling) {
  GridBounds b;
  auto s = origin_scheme();
  EXPECT_EQ(normalize({0, 0, 0}, b, s), std::make_pair(0.0, 0.0));
  EXPECT_EQ(normalize({5, 8, 0}, b, s), std::make_pair(1.0, 1.0));
  EXPECT_EQ(normalize({-5, 0, 0}, b, s), std::make_pair(-1.0, 0.0));
}

TEST(Normalize, CenteredShiftsVerticalAxis) {
  GridBounds b;
  EXPECT_EQ(normalize({0, 4, 0}, b), std::make_pair(0.0, 0.0));
  EXPECT_EQ(normalize({5, 8, 0}, b), std::make_pair(1.0, 1.0));
  EXPECT_EQ(normalize({-5, 0, 0}, b), std::make_pair(-1.0, -1.0));
  EXPECT_EQ(normalize({0, 6, 0}, b), std::make_pair(0.0, 0.5));
}

TEST(Normalize, OutOfBounds) {
  try {
    normalize({0, 9, 0}, GridBounds{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
  }
  EXPECT_THROW(region_of({6, 0, 0}, RegionScheme{}, GridBounds{}), Error);
}

TEST(RegionOf, NormalizedExamples) {
  auto s = scheme(RegionKind::CenterSplit8);
  EXPECT_EQ(region_of_normalized(0.2, 0.2, s).name, "upper right");
  EXPECT_EQ(region_of_normalized(0.8, 0.8, s).name, "upper upper right");
  EXPECT_EQ(region_of_normalized(0.0, 0.0, s).name, "upper right");
  EXPECT_EQ(region_of_normalized(-0.2, 0.3, s).name, "upper left");
  EXPECT_EQ(region_of_normalized(-0.9, -0.1, s).name, "lower lower left");
  EXPECT_EQ(region_of_normalized(0.5, -0.5, s).name, "lower right");
  EXPECT_EQ(region_of_normalized(0.51, -0.5, s).name, "lower lower right");
}

TEST(RegionOf, FlipMirrorsHorizontalNames) {
  auto s = scheme(RegionKind::CenterSplit8);
  s.flip_horizontal = true;
  EXPECT_EQ(region_of_normalized(0.8, 0.8, s).name, "upper upper left");
  EXPECT_EQ(region_of_normalized(-0.2, 0.2, s).name, "upper right");
}

TEST(RegionOf, QuadAndTwelve) {
  auto q = scheme(RegionKind::Quad4);
  EXPECT_EQ(region_of_normalized(0.9, -0.9, q).name, "lower right");
  EXPECT_EQ(region_of_normalized(-0.1, 0.1, q).name, "upper left");
  auto t = scheme(RegionKind::CenterSplit12);
  EXPECT_EQ(region_of_normalized(0.1, 0.1, t).name, "inner upper right");
  EXPECT_EQ(region_of_normalized(0.4, 0.1, t).name, "upper right");
  EXPECT_EQ(region_of_normalized(-0.9, 0.1, t).name, "upper upper left");
}

TEST(RegionOf, ExhaustivePartition) {
  GridBounds b;
  for (auto kind : {RegionKind::Quad4, RegionKind::CenterSplit8, RegionKind::CenterSplit12}) {
    for (auto plane : {RegionPlane::XY, RegionPlane::XZ}) {
      auto s = scheme(kind);
      s.plane = plane;
      std::map<int, std::size_t> counted;
      std::size_t total = 0;
      for (int r = 0; r < s.region_count(); ++r) {
        auto cells = cells_in_region(region_by_index(s, r), s, b);
        counted[r] = cells.size();
        total += cells.size();
        for (const auto& c : cells) EXPECT_EQ(region_of(c, s, b).index, r);
      }
      EXPECT_EQ(total, b.cell_count());
      for (const auto& [r, n] : counted) EXPECT_GT(n, 0u) << s.names()[static_cast<std::size_t>(r)];
    }
  }
}

TEST(PickRegion, SingleBlockIsItsOwnRegion) {
  RegionScheme s;
  GridBounds b;
  GridDiff d = additions({{-3, 7, 0}});
  auto want = region_of({-3, 7, 0}, s, b);
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(pick_region_for_diff(d, s, b, seed), want);
}

TEST(PickRegion, SeededChoiceAmongCoveringRegions) {
  RegionScheme s;
  GridBounds b;
  GridDiff d = additions({{-5, 8, 0}, {5, 0, 0}});
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    auto r = pick_region_for_diff(d, s, b, seed);
    EXPECT_EQ(r, pick_region_for_diff(d, s, b, seed));
    seen.insert(r.name);
  }
  EXPECT_EQ(seen, (std::set<std::string>{"upper upper left", "lower lower right"}));
}

TEST(PickRegion, EmptyDiff) {
  try {
    pick_region_for_diff(GridDiff{}, RegionScheme{}, GridBounds{}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDiff);
  }
}
