#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "featcomp/types.hpp"

using namespace featcomp;

namespace {

SequencedRecord rec(const std::string& f, int prio, std::int64_t t, std::uint64_t seq,
                    SettingValue s = SettingValue::discrete("on")) {
  return {SettingRecord{Timestamp{t}, FeatureId(f), Priority{prio}, std::move(s)}, seq};
}

}  // namespace

TEST(RecordOrder, HigherPriorityFirst) {
  EXPECT_TRUE(record_order(rec("A", 40, 5, 1), rec("B", 10, 9, 2)));
  EXPECT_FALSE(record_order(rec("B", 10, 9, 2), rec("A", 40, 5, 1)));
}

TEST(RecordOrder, LaterTimestampFirstAtEqualPriority) {
  EXPECT_TRUE(record_order(rec("A", 20, 9, 1), rec("B", 20, 5, 2)));
  EXPECT_FALSE(record_order(rec("B", 20, 5, 2), rec("A", 20, 9, 1)));
}

TEST(RecordOrder, LaterArrivalBreaksTies) {
  EXPECT_TRUE(record_order(rec("A", 20, 5, 7), rec("B", 20, 5, 3)));
  EXPECT_FALSE(record_order(rec("B", 20, 5, 3), rec("A", 20, 5, 7)));
}

TEST(RecordOrder, StrictTotalOrderOverDistinctKeys) {
  std::vector<SequencedRecord> all;
  std::uint64_t seq = 1;
  for (int p = 0; p < 3; ++p)
    for (int t = 0; t < 3; ++t)
      for (int k = 0; k < 2; ++k) all.push_back(rec("F", p, t, seq++));
  for (const auto& a : all) {
    EXPECT_FALSE(record_order(a, a));
    for (const auto& b : all) {
      if (a.seq == b.seq) continue;
      EXPECT_NE(record_order(a, b), record_order(b, a));
      for (const auto& c : all) {
        if (record_order(a, b) && record_order(b, c)) EXPECT_TRUE(record_order(a, c));
      }
    }
  }
}

TEST(Satisfies, Examples) {
  EXPECT_TRUE(satisfies(Value{std::int64_t{30}}, SettingValue::range(30, 100)));
  EXPECT_FALSE(satisfies(Value{std::string("locked")}, SettingValue::discrete("unlocked")));
  EXPECT_TRUE(satisfies(Value{std::int64_t{77}}, SettingValue::prefer(Direction::Lowest)));
  EXPECT_FALSE(satisfies(Value{std::int64_t{29}}, SettingValue::range(30, 100)));
  EXPECT_TRUE(satisfies(Value{std::int64_t{100}}, SettingValue::range(30, 100)));
}

TEST(Satisfies, DontCareAcceptsEverything) {
  for (std::int64_t v = -5; v <= 5; ++v) EXPECT_TRUE(satisfies(Value{v}, SettingValue::dont_care()));
  EXPECT_TRUE(satisfies(Value{std::string("any")}, SettingValue::dont_care()));
}

TEST(Satisfies, TypeMismatchIsAContractViolation) {
  EXPECT_THROW(satisfies(Value{std::int64_t{1}}, SettingValue::discrete("on")), ContractViolation);
  EXPECT_THROW(satisfies(Value{std::string("on")}, SettingValue::range(0, 1)), ContractViolation);
}

TEST(SettingValue, RangeRejectsInvertedBounds) {
  EXPECT_THROW(SettingValue::range(5, 4), ContractViolation);
  EXPECT_NO_THROW(SettingValue::range(4, 4));
}

TEST(SettingValue, EveryRangeHasASatisfyingInteger) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> d(-1000, 1000);
  for (int i = 0; i < 1000; ++i) {
    auto a = d(rng), b = d(rng);
    auto s = SettingValue::range(std::min(a, b), std::max(a, b));
    EXPECT_TRUE(satisfies(Value{std::min(a, b)}, s));
  }
}

TEST(SettingValue, TextRoundTrip) {
  for (auto s : {SettingValue::dont_care(), SettingValue::discrete("locked"), SettingValue::range(30, 100),
                 SettingValue::single(-4), SettingValue::prefer(Direction::Lowest),
                 SettingValue::prefer(Direction::Highest)}) {
    EXPECT_EQ(parse_setting(to_string(s)), s) << to_string(s);
  }
  EXPECT_EQ(to_string(SettingValue::range(30, 100)), "30..100");
  EXPECT_THROW(parse_setting("3..x"), ContractViolation);
  EXPECT_THROW(parse_setting(""), ContractViolation);
}

TEST(ActuatorSpec, KindLegality) {
  auto lock = ActuatorSpec::enumerated("doorLock", {"locked", "unlocked"});
  auto dim = ActuatorSpec::numeric("dimmer", 0, 100);
  EXPECT_TRUE(lock.is_legal(SettingValue::discrete("locked")));
  EXPECT_FALSE(lock.is_legal(SettingValue::discrete("ajar")));
  EXPECT_FALSE(lock.is_legal(SettingValue::range(0, 1)));
  EXPECT_FALSE(lock.is_legal(SettingValue::prefer(Direction::Lowest)));
  EXPECT_TRUE(dim.is_legal(SettingValue::range(0, 100)));
  EXPECT_FALSE(dim.is_legal(SettingValue::range(0, 101)));
  EXPECT_FALSE(dim.is_legal(SettingValue::discrete("on")));
  EXPECT_TRUE(dim.is_legal(SettingValue::prefer(Direction::Highest)));
  EXPECT_TRUE(lock.is_legal(SettingValue::dont_care()));
  EXPECT_TRUE(dim.is_legal(SettingValue::dont_care()));
}

TEST(ActuatorSpec, ConstructionContracts) {
  EXPECT_THROW(ActuatorSpec::numeric("x", 5, 4), ContractViolation);
  EXPECT_THROW(ActuatorSpec::enumerated("x", {"a", "a"}), ContractViolation);
  EXPECT_THROW(ActuatorSpec::enumerated("x", {}), ContractViolation);
  EXPECT_THROW(ActuatorSpec::enumerated("x", {"dontCare"}), ContractViolation);
}

TEST(ActuatorSpec, CheckLegalNamesTheActuator) {
  auto lock = ActuatorSpec::enumerated("doorLock", {"locked", "unlocked"});
  try {
    lock.check_legal(SettingValue::discrete("ajar"));
    FAIL();
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("doorLock"), std::string::npos);
  }
}

TEST(ActuatorSpec, ParseValue) {
  auto dim = ActuatorSpec::numeric("dimmer", 0, 100);
  EXPECT_EQ(dim.parse_value("42"), Value{std::int64_t{42}});
  EXPECT_FALSE(dim.parse_value("101"));
  EXPECT_FALSE(dim.parse_value("x"));
  auto lock = ActuatorSpec::enumerated("doorLock", {"locked", "unlocked"});
  EXPECT_EQ(lock.parse_value("locked"), Value{std::string("locked")});
  EXPECT_FALSE(lock.parse_value("ajar"));
}

TEST(FeatureId, MustBeNonEmpty) { EXPECT_THROW(FeatureId(""), ContractViolation); }

TEST(FeatureKey, Rendering) { EXPECT_EQ(to_string(FeatureKey{FeatureId("EO"), Priority{40}}), "EO@40"); }

TEST(Payload, SetReplacesAndKeepsOrder) {
  Payload p;
  p.set("a", std::int64_t{1}).set("b", std::string("x")).set("a", std::int64_t{2});
  ASSERT_EQ(p.fields().size(), 2u);
  EXPECT_EQ(p.fields()[0].key, "a");
  EXPECT_EQ(p.integer("a"), 2);
  EXPECT_EQ(p.text("b"), "x");
  EXPECT_FALSE(p.integer("b"));
  EXPECT_FALSE(p.find("c"));
}

TEST(ParseFieldValue, CanonicalDecimalsOnly) {
  EXPECT_EQ(parse_field_value("42"), Value{std::int64_t{42}});
  EXPECT_EQ(parse_field_value("-7"), Value{std::int64_t{-7}});
  EXPECT_EQ(parse_field_value("0042"), Value{std::string("0042")});
  EXPECT_EQ(parse_field_value("+5"), Value{std::string("+5")});
  EXPECT_EQ(parse_field_value("locked"), Value{std::string("locked")});
}

TEST(ParseBool, Spellings) {
  for (auto t : {"true", "1", "on", "yes"}) EXPECT_EQ(parse_bool(t), true);
  for (auto f : {"false", "0", "off", "no"}) EXPECT_EQ(parse_bool(f), false);
  EXPECT_FALSE(parse_bool("maybe"));
}
