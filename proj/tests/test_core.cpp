#include <gtest/gtest.h>

#include "icroute/core.hpp"

using namespace icroute;

TEST(Core, CycleLength) {
  EXPECT_EQ(cycle_length(ChargingSpec(5)), 6u);
  EXPECT_EQ(cycle_length(ChargingSpec(1)), 2u);
  EXPECT_EQ(cycle_length(ChargingSpec(500)), 501u);
  EXPECT_THROW(ChargingSpec(0), std::invalid_argument);
}

TEST(Core, IsWorking) {
  const ChargingSpec spec(5);
  EXPECT_TRUE(is_working(WorkOffset{0}, spec, 0));
  EXPECT_FALSE(is_working(WorkOffset{0}, spec, 3));
  EXPECT_TRUE(is_working(WorkOffset{3}, spec, 21));
}

TEST(Core, IsWorkingMatchesEnumeration) {
  for (std::uint32_t t = 1; t <= 9; ++t) {
    const ChargingSpec spec(t);
    for (std::uint32_t o = 0; o <= t; ++o) {
      // walk the slots with a counter that resets every t+1 steps
      std::uint32_t pos = 0;
      for (Slot now = 0; now < 200; ++now) {
        EXPECT_EQ(is_working(WorkOffset{o}, spec, now), pos == o);
        pos = pos == t ? 0 : pos + 1;
      }
    }
  }
}

TEST(Core, DelayOffset) {
  const ChargingSpec spec(5);
  EXPECT_EQ(delay_offset(WorkOffset{0}, spec), WorkOffset{1});
  EXPECT_EQ(delay_offset(WorkOffset{5}, spec), WorkOffset{0});
  for (std::uint32_t o = 0; o <= 5; ++o) {
    WorkOffset w{o};
    for (int k = 0; k < 6; ++k) w = delay_offset(w, spec);
    EXPECT_EQ(w, WorkOffset{o});
  }
}

TEST(Core, MakeOffsetRejectsOutOfRange) {
  const ChargingSpec spec(5);
  EXPECT_EQ(make_offset(5, spec).value, 5u);
  EXPECT_THROW(make_offset(6, spec), std::out_of_range);
}

TEST(Core, CeilToCycle) {
  const ChargingSpec spec(5);
  EXPECT_EQ(ceil_to_cycle(0, spec), 0u);
  EXPECT_EQ(ceil_to_cycle(1, spec), 6u);
  EXPECT_EQ(ceil_to_cycle(6, spec), 6u);
  EXPECT_EQ(ceil_to_cycle(7, spec), 12u);
}

TEST(Core, HopFrameRoundChecked) {
  const ChargingSpec spec(5);
  const Frame f = make_hop_frame(3, 2, 5, spec);
  ASSERT_TRUE(f.is_hop_count());
  EXPECT_FALSE(f.dst.has_value());
  EXPECT_THROW(make_hop_frame(3, 2, 6, spec), std::out_of_range);
  EXPECT_EQ(hop_to_string(kInfiniteHop), "inf");
}
