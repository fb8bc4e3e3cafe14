#include <random>
#include <set>

#include <gtest/gtest.h>

#include "iglu/error.hpp"
#include "iglu/help.hpp"

using namespace iglu;

namespace {

TemplateBank single(HelpKind kind, const std::string& train, const std::string& test) {
  TemplateBank bank = TemplateBank::builtin();
  bank.set(kind, {{train}, {test}});
  return bank;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an iglu::Error";
  return ErrorCode::InvalidArgument;
}

HelpMessage normalized(const std::string& text, const RegionScheme& scheme = {}) {
  auto n = normalize_help(text, scheme);
  if (const auto* un = std::get_if<Unrecognized>(&n)) {
    ADD_FAILURE() << "unrecognized: " << text << " (" << un->reason << ")";
    return {};
  }
  return std::get<HelpMessage>(n);
}

bool unrecognized(const std::string& text, const RegionScheme& scheme = {}) {
  return std::holds_alternative<Unrecognized>(normalize_help(text, scheme));
}

}  // namespace

TEST(Restrictive, UpperLeftCenterUtterance) {
  auto bank = single(HelpKind::Restrictive, "Place the block in the {region} region.", "Try the {region} section.");
  auto msg = restrictive_oracle(additions({{-1, 5, 0}}), RegionScheme{}, GridBounds{}, 0,
                                Phrasing{&bank, Bank::Train, 0});
  EXPECT_EQ(msg.utterance, "Place the block in the upper left region.");
  EXPECT_EQ(std::get<RegionHelp>(msg.payload).region.name, "upper left");
  EXPECT_EQ(msg.bank, Bank::Train);
}

TEST(Restrictive, RegionContainsAGoldBlock) {
  RegionScheme s;
  GridBounds b;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 300; ++i) {
    BlockSet gold;
    int n = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int k = 0; k < n; ++k) {
      gold.insert({std::uniform_int_distribution<int>(-5, 5)(rng), std::uniform_int_distribution<int>(0, 8)(rng), 0});
    }
    auto region = restrictive_payload(additions(gold), s, b, static_cast<std::uint64_t>(i)).region;
    bool inside = false;
    for (const auto& g : gold) inside = inside || region_of(g, s, b).index == region.index;
    EXPECT_TRUE(inside);
  }
}

TEST(Restrictive, TwoSeedsSeeBothRegions) {
  GridDiff gold = additions({{-4, 8, 0}, {4, 0, 0}});
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    seen.insert(std::get<RegionHelp>(restrictive_oracle(gold, RegionScheme{}, GridBounds{}, seed).payload).region.name);
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(Restrictive, EmptyGold) {
  EXPECT_EQ(code_of([] { restrictive_oracle(GridDiff{}, RegionScheme{}, GridBounds{}, 0); }), ErrorCode::EmptyDiff);
}

TEST(Length, Examples) {
  auto bank = single(HelpKind::Length, "You should place {count} blocks.", "Use exactly {count} blocks.");
  auto msg = length_oracle(additions({{0, 0, 0}, {2, 0, 0}, {4, 0, 0}}), Phrasing{&bank, Bank::Train, 0});
  EXPECT_EQ(msg.utterance, "You should place 3 blocks.");
  EXPECT_EQ(std::get<LengthHelp>(msg.payload), (LengthHelp{3, false, false}));

  EXPECT_EQ(length_payload(GridDiff{}), (LengthHelp{0, true, false}));
  EXPECT_EQ(length_payload(additions({{1, 0, 1}, {1, 1, 1}, {1, 2, 1}})), (LengthHelp{3, true, false}));

  auto tower = length_oracle(additions({{1, 0, 1}, {1, 1, 1}, {1, 2, 1}}), Phrasing{&bank, Bank::Train, 0});
  EXPECT_EQ(tower.utterance, "You should place 3 blocks. They should be placed together.");
}

TEST(Corrective, Examples) {
  // Centroids (0.5, 0.5) -> (0.8, 0.5) in normalized units: x 2.5 -> 4, y = 6.
  auto right = corrective_payload(additions({{2, 6, 0}, {3, 6, 0}}), additions({{4, 6, 0}}));
  EXPECT_EQ(right.direction, Direction::Right);
  EXPECT_FALSE(right.perfect);

  auto same = corrective_payload(additions({{1, 1, 1}}), additions({{1, 1, 1}}));
  EXPECT_EQ(same, (CorrectiveHelp{Direction::Up, true}));

  auto left = corrective_payload(additions({{2, 3, 0}}), additions({{0, 4, 0}}));
  EXPECT_EQ(left.direction, Direction::Left);

  auto down = corrective_payload(additions({{0, 5, 0}}), additions({{1, 2, 0}}));
  EXPECT_EQ(down.direction, Direction::Down);

  // z displacement is not a corrective direction.
  auto z_only = corrective_payload(additions({{0, 0, 0}}), additions({{0, 0, 4}}));
  EXPECT_TRUE(z_only.perfect);

  auto msg = corrective_oracle(additions({{2, 3, 0}}), additions({{0, 4, 0}}),
                               Phrasing{nullptr, Bank::Train, 0});
  EXPECT_NE(msg.utterance.find("left"), std::string::npos);
}

TEST(Corrective, Errors) {
  EXPECT_EQ(code_of([] { corrective_payload(GridDiff{}, additions({{0, 0, 0}})); }), ErrorCode::EmptyPrediction);
  EXPECT_EQ(code_of([] { corrective_payload(additions({{0, 0, 0}}), GridDiff{}); }), ErrorCode::EmptyGold);
}

TEST(Corrective, UnitStepNeverIncreasesDisplacement) {
  std::mt19937_64 rng(9);
  auto random_set = [&] {
    BlockSet s;
    int n = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int k = 0; k < n; ++k) {
      s.insert({std::uniform_int_distribution<int>(-5, 5)(rng), std::uniform_int_distribution<int>(0, 8)(rng),
                std::uniform_int_distribution<int>(-5, 5)(rng)});
    }
    return s;
  };
  for (int i = 0; i < 2000; ++i) {
    auto pred = random_set();
    auto gold = random_set();
    auto h = corrective_payload(additions(pred), additions(gold));
    if (h.perfect) continue;
    auto pc = centroid(pred);
    auto gc = centroid(gold);
    const bool horizontal = h.direction == Direction::Left || h.direction == Direction::Right;
    const double sign = (h.direction == Direction::Right || h.direction == Direction::Up) ? 1.0 : -1.0;
    const double d = horizontal ? gc[0] - pc[0] : gc[1] - pc[1];
    EXPECT_LE(std::abs(d - sign), std::abs(d));
  }
}

TEST(Mistake, Examples) {
  Coordinate a{0, 0, 0}, b{1, 0, 0}, c{2, 0, 0}, d{3, 0, 0};
  EXPECT_EQ(mistake_payload(additions({a, b, c}), additions({a, d})).count, 2);
  EXPECT_EQ(mistake_payload(additions({a, d}), additions({a, d})).count, 0);
  EXPECT_EQ(mistake_payload(GridDiff{}, additions({a})).count, 0);
}

TEST(Render, Examples) {
  auto bank = single(HelpKind::Length, "You should place {count} blocks.", "Use exactly {count} blocks.");
  EXPECT_EQ(render(LengthHelp{3, false, false}, Bank::Train, 0, bank), "You should place 3 blocks.");
  EXPECT_EQ(render(LengthHelp{3, false, false}, Bank::Test, 0, bank), "Use exactly 3 blocks.");

  auto mbank = single(HelpKind::Mistake, "You placed {count} blocks incorrectly", "{count} blocks are wrong.");
  EXPECT_EQ(render(MistakeHelp{2, false}, Bank::Train, 7, mbank), "You placed 2 blocks incorrectly");
  EXPECT_EQ(render(MistakeHelp{2, false}, Bank::Test, 7, mbank), "2 blocks are wrong.");

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_EQ(render(LengthHelp{4}, Bank::Test, seed), render(LengthHelp{4}, Bank::Test, seed));
  }
  EXPECT_EQ(render(LengthHelp{6, false, true}, Bank::Train, 0, bank), "You should place more than 5 blocks.");
}

TEST(Render, SeedsReachEveryTemplate) {
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) seen.insert(render(CorrectiveHelp{Direction::Left}, Bank::Test, seed));
  EXPECT_EQ(seen.size(), TemplateBank::builtin().templates(HelpKind::Corrective, Bank::Test).size());
}

TEST(Render, EmptyBank) {
  TemplateBank bank = TemplateBank::builtin();
  bank.set(HelpKind::Length, {{}, {"Use {count} blocks."}});
  EXPECT_EQ(code_of([&] { render(LengthHelp{2}, Bank::Train, 0, bank); }), ErrorCode::EmptyBank);
}

TEST(TemplateBank, BuiltinBanksAreDisjointAndComplete) {
  const auto& bank = TemplateBank::builtin();
  EXPECT_NO_THROW(bank.validate());
  for (auto kind : kAllHelpKinds) {
    const auto& train = bank.templates(kind, Bank::Train);
    const auto& test = bank.templates(kind, Bank::Test);
    EXPECT_GE(train.size(), 4u);
    EXPECT_GE(test.size(), 4u);
    for (const auto& t : train) EXPECT_EQ(std::find(test.begin(), test.end(), t), test.end()) << t;
  }
}

TEST(TemplateBank, ValidationAndJson) {
  TemplateBank overlap = TemplateBank::builtin();
  overlap.set(HelpKind::Length, {{"Use {count} blocks."}, {"Use {count} blocks."}});
  EXPECT_EQ(code_of([&] { overlap.validate(); }), ErrorCode::InvalidArgument);

  TemplateBank wrong_slot = TemplateBank::builtin();
  wrong_slot.set(HelpKind::Length, {{"Use {region} blocks."}, {"Use {count} blocks."}});
  EXPECT_EQ(code_of([&] { wrong_slot.validate(); }), ErrorCode::InvalidArgument);

  TemplateBank two_slots = TemplateBank::builtin();
  two_slots.set(HelpKind::Length, {{"Use {count} or {count} blocks."}, {"Use {count} blocks."}});
  EXPECT_EQ(code_of([&] { two_slots.validate(); }), ErrorCode::InvalidArgument);

  auto round = TemplateBank::from_json(TemplateBank::builtin().to_json());
  for (auto kind : kAllHelpKinds) {
    EXPECT_EQ(round.templates(kind, Bank::Test), TemplateBank::builtin().templates(kind, Bank::Test));
  }
  EXPECT_THROW(TemplateBank::from_json(nlohmann::json{{"length", 3}}), Error);
}

TEST(Normalize, Examples) {
  auto r = normalized("put it somewhere in the top left");
  EXPECT_EQ(r.kind(), HelpKind::Restrictive);
  EXPECT_EQ(std::get<RegionHelp>(r.payload).region.name, "upper left");

  auto l = normalized("you need three blocks");
  EXPECT_EQ(std::get<LengthHelp>(l.payload).count, 3);
  EXPECT_FALSE(l.bank.has_value());
  EXPECT_EQ(l.utterance, "you need three blocks");

  EXPECT_TRUE(unrecognized("asdf"));
  EXPECT_TRUE(unrecognized(""));
}

TEST(Normalize, Paraphrases) {
  EXPECT_EQ(std::get<RegionHelp>(normalized("build in the far upper right corner").payload).region.name,
            "upper upper right");
  EXPECT_EQ(std::get<RegionHelp>(normalized("bottom left, not in the center").payload).region.name,
            "lower lower left");
  EXPECT_EQ(std::get<RegionHelp>(normalized("the uppermost left").payload).region.name, "upper upper left");
  EXPECT_EQ(std::get<RegionHelp>(normalized("right upper side").payload).region.name, "upper right");

  auto quad = scheme_from_name("4");
  EXPECT_EQ(std::get<RegionHelp>(normalized("far upper right", quad).payload).region.name, "upper right");

  auto tower = std::get<LengthHelp>(normalized("make a tower 4 tall").payload);
  EXPECT_EQ(tower.count, 4);
  EXPECT_TRUE(tower.contiguous);

  auto more = std::get<LengthHelp>(normalized("place more than 5 blocks").payload);
  EXPECT_EQ(more, (LengthHelp{6, false, true}));

  EXPECT_EQ(std::get<MistakeHelp>(normalized("two of those are wrong").payload).count, 2);
  EXPECT_EQ(std::get<MistakeHelp>(normalized("none are misplaced").payload).count, 0);
  EXPECT_EQ(std::get<CorrectiveHelp>(normalized("move it a bit to the left").payload).direction, Direction::Left);
  EXPECT_EQ(std::get<CorrectiveHelp>(normalized("Higher!").payload).direction, Direction::Up);
}

TEST(Normalize, AmbiguousIsUnrecognized) {
  EXPECT_TRUE(unrecognized("upper left or lower right"));
  EXPECT_TRUE(unrecognized("place 3 or 4 blocks"));
  EXPECT_TRUE(unrecognized("move left and up"));
}

TEST(Normalize, RenderedTemplatesRoundTrip) {
  const auto& bank = TemplateBank::builtin();
  std::vector<HelpPayload> payloads;
  for (int c = 0; c <= 6; ++c) {
    payloads.push_back(LengthHelp{c, false, false});
    payloads.push_back(MistakeHelp{c, false});
  }
  payloads.push_back(LengthHelp{3, true, false});
  payloads.push_back(LengthHelp{6, false, true});
  payloads.push_back(MistakeHelp{6, true});
  for (auto d : {Direction::Up, Direction::Down, Direction::Left, Direction::Right}) payloads.push_back(CorrectiveHelp{d});

  for (auto kind : {RegionKind::Quad4, RegionKind::CenterSplit8, RegionKind::CenterSplit12}) {
    RegionScheme scheme;
    scheme.kind = kind;
    std::vector<HelpPayload> all = payloads;
    for (int r = 0; r < scheme.region_count(); ++r) all.push_back(RegionHelp{region_by_index(scheme, r)});
    for (const auto& p : all) {
      for (auto which : {Bank::Train, Bank::Test}) {
        const auto& list = bank.templates(kind_of(p), which);
        for (std::size_t t = 0; t < list.size(); ++t) {
          TemplateBank one = bank;
          one.set(kind_of(p), {{list[t]}, {list[t] + " "}});
          auto text = render(p, Bank::Train, 0, one);
          auto back = normalize_help(text, scheme);
          ASSERT_TRUE(std::holds_alternative<HelpMessage>(back)) << text;
          EXPECT_EQ(std::get<HelpMessage>(back).payload, p) << text;
        }
      }
    }
  }
}

TEST(Json, Payloads) {
  auto j = help_to_json(make_help(MistakeHelp{2}, Phrasing{nullptr, Bank::Test, 1}));
  EXPECT_EQ(j.at("kind"), "mistake");
  EXPECT_EQ(j.at("count"), 2);
  EXPECT_EQ(j.at("bank"), "test");
}
