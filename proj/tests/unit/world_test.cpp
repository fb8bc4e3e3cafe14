#include <random>

#include <gtest/gtest.h>

#include "iglu/error.hpp"
#include "iglu/json_io.hpp"
#include "iglu/world.hpp"

using namespace iglu;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an iglu::Error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Bounds, DefaultsAndValidation) {
  GridBounds b;
  EXPECT_EQ(b.x_min, -5);
  EXPECT_EQ(b.x_max, 5);
  EXPECT_EQ(b.y_min, 0);
  EXPECT_EQ(b.y_max, 8);
  EXPECT_EQ(b.z_min, -5);
  EXPECT_EQ(b.z_max, 5);
  EXPECT_EQ(b.cell_count(), 11u * 9u * 11u);
  EXPECT_TRUE(b.contains({5, 8, -5}));
  EXPECT_FALSE(b.contains({6, 0, 0}));
  EXPECT_FALSE(b.contains({0, -1, 0}));

  GridBounds flat{0, 0, 0, 1, 0, 1};
  EXPECT_EQ(code_of([&] { flat.validate(); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { GridState g(flat); }), ErrorCode::InvalidArgument);
}

TEST(Grid, RejectsOutOfBoundsBlocks) {
  EXPECT_EQ(code_of([] { GridState g(GridBounds{}, {{0, 9, 0}}); }), ErrorCode::OutOfBounds);
}

TEST(ApplyDiff, SingletonInsertion) {
  GridState empty{GridBounds{}};
  auto out = apply_diff(empty, additions({{0, 0, 0}}));
  EXPECT_EQ(out.blocks(), (BlockSet{{0, 0, 0}}));
}

TEST(ApplyDiff, EmptyDiffIsIdentity) {
  GridState g(GridBounds{}, {{1, 0, 0}});
  EXPECT_EQ(apply_diff(g, GridDiff{}), g);
}

TEST(ApplyDiff, RemoveAndAdd) {
  GridState g(GridBounds{}, {{1, 0, 0}, {2, 0, 0}});
  GridDiff d{{{3, 0, 0}}, {{1, 0, 0}}};
  EXPECT_EQ(apply_diff(g, d).blocks(), (BlockSet{{2, 0, 0}, {3, 0, 0}}));
}

TEST(ApplyDiff, Errors) {
  GridState g(GridBounds{}, {{1, 0, 0}});
  EXPECT_EQ(code_of([&] { apply_diff(g, additions({{1, 0, 0}})); }), ErrorCode::Conflict);
  EXPECT_EQ(code_of([&] { apply_diff(g, GridDiff{{}, {{2, 0, 0}}}); }), ErrorCode::Conflict);
  EXPECT_EQ(code_of([&] { apply_diff(g, additions({{0, 0, 6}})); }), ErrorCode::OutOfBounds);
  EXPECT_EQ(code_of([&] { apply_diff(g, GridDiff{{{2, 0, 0}}, {{2, 0, 0}}}); }), ErrorCode::Conflict);
}

TEST(DiffBetween, Examples) {
  GridState a(GridBounds{}, {{0, 0, 0}});
  EXPECT_TRUE(diff_between(a, a).empty());

  GridState empty{GridBounds{}};
  auto d = diff_between(empty, a);
  EXPECT_EQ(d.added, (BlockSet{{0, 0, 0}}));
  EXPECT_TRUE(d.removed.empty());

  GridState b(GridBounds{}, {{1, 1, 1}});
  d = diff_between(a, b);
  EXPECT_EQ(d.added, (BlockSet{{1, 1, 1}}));
  EXPECT_EQ(d.removed, (BlockSet{{0, 0, 0}}));
}

TEST(DiffBetween, BoundsMismatch) {
  GridState a{GridBounds{}};
  GridState b{GridBounds{-4, 4, 0, 8, -5, 5}};
  EXPECT_EQ(code_of([&] { diff_between(a, b); }), ErrorCode::BoundsMismatch);
}

TEST(DiffBetween, RoundTripProperty) {
  GridBounds bounds;
  std::mt19937_64 rng(11);
  auto random_grid = [&] {
    BlockSet s;
    int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) {
      s.insert({std::uniform_int_distribution<int>(-5, 5)(rng), std::uniform_int_distribution<int>(0, 8)(rng),
                std::uniform_int_distribution<int>(-5, 5)(rng)});
    }
    return GridState(bounds, s);
  };
  for (int i = 0; i < 500; ++i) {
    auto before = random_grid();
    auto after = random_grid();
    auto d = diff_between(before, after);
    const auto applied = apply_diff(before, d);
    EXPECT_EQ(applied, after);
    for (const auto& c : applied.blocks()) EXPECT_TRUE(bounds.contains(c));
  }
}

TEST(JsonShape, GridRoundTrip) {
  GridState g(GridBounds{}, {{-2, 1, 3}, {0, 0, 0}});
  auto j = grid_to_json(g);
  EXPECT_EQ(j.at("bounds").at("x"), nlohmann::json::array({-5, 5}));
  EXPECT_EQ(j.at("bounds").at("y"), nlohmann::json::array({0, 8}));
  EXPECT_EQ(j.at("blocks").size(), 2u);
  EXPECT_EQ(grid_from_json(j), g);

  GridDiff d{{{1, 2, 3}}, {{0, 0, 0}}};
  EXPECT_EQ(diff_from_json(diff_to_json(d)), d);
}

TEST(JsonShape, MalformedInput) {
  EXPECT_EQ(code_of([] { grid_from_json(nlohmann::json{{"blocks", 3}}); }), ErrorCode::SchemaError);
  EXPECT_EQ(code_of([] { coordinate_from_json(nlohmann::json::array({1, 2})); }), ErrorCode::SchemaError);
}
