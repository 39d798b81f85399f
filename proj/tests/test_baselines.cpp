#include <gtest/gtest.h>

#include <deque>
#include <map>

#include "icroute/baselines.hpp"

using namespace icroute;

namespace {

Message msg(MessageId id) { return Message{id, 9, 0, 0, {9}}; }

/// Runs one batch of `q` toward node 4 whose offset is `receiver_forth`
/// slots ahead; returns the number of unacknowledged scan attempts.
int run_batch(SenderState& s, const SenderPolicy& policy, std::deque<Message> q, std::uint32_t receiver_forth) {
  const ChargingSpec spec(5);
  const AckPayload ack{3, 1};
  begin_batch(s, policy, NodeId{4}, std::nullopt);
  int scans = 0;
  while (true) {
    const auto e = sender_emit(s, q, 2, spec);
    if (e.event != SendEvent::Emitted) break;
    const bool aligned = s.offset_forth == receiver_forth;
    const auto r = sender_on_ack(s, q, 3, aligned ? std::optional<NodeId>(4) : std::nullopt, aligned ? &ack : nullptr,
                                 e.payload->is_end, spec);
    if (r.event == AckEvent::Fail) ++scans;
    if (r.batch_done) break;
  }
  end_batch(s, policy);
  return scans;
}

}  // namespace

TEST(Strategy, Parse) {
  EXPECT_EQ(parse_strategy("rics"), StrategyTag::RICS);
  EXPECT_EQ(parse_strategy("FXCS"), StrategyTag::FXCS);
  EXPECT_EQ(parse_strategy("Rncs"), StrategyTag::RNCS);
  EXPECT_EQ(parse_strategy("otps"), StrategyTag::OTPS);
  EXPECT_THROW(parse_strategy("bogus"), std::invalid_argument);
  for (auto s : {StrategyTag::RICS, StrategyTag::FXCS, StrategyTag::RNCS, StrategyTag::OTPS}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
}

TEST(Rncs, DrawsAmongLowerHops) {
  const std::vector<NeighborHop> nb = {{1, 1}, {2, 1}, {3, 3}, {1, 1}};
  RngStream rng = derive_rng_stream(1, 5, "rncs");
  std::map<NodeId, int> counts;
  for (int i = 0; i < 4000; ++i) ++counts[*rncs_next_hop(nb, 2, rng)];
  EXPECT_EQ(counts.size(), 2u);
  EXPECT_NEAR(counts[1], 2000, 200);
  EXPECT_NEAR(counts[2], 2000, 200);
}

TEST(Rncs, SingleAndNone) {
  RngStream rng = derive_rng_stream(1, 5, "rncs");
  for (int i = 0; i < 20; ++i) EXPECT_EQ(rncs_next_hop({{7, 0}, {8, 4}}, 2, rng), std::optional<NodeId>(7));
  EXPECT_FALSE(rncs_next_hop({{8, 4}}, 2, rng));
}

TEST(Fxcs, ScansEveryBatch) {
  SenderState s;
  const auto policy = policy_for(StrategyTag::FXCS);
  EXPECT_EQ(run_batch(s, policy, {msg(1)}, 3), 3);
  EXPECT_FALSE(s.flag_match);
  EXPECT_EQ(run_batch(s, policy, {msg(2)}, 3), 3);
}

TEST(Rics, ScansOnce) {
  SenderState s;
  const auto policy = policy_for(StrategyTag::RICS);
  EXPECT_EQ(run_batch(s, policy, {msg(1)}, 3), 3);
  EXPECT_TRUE(s.flag_match);
  EXPECT_EQ(run_batch(s, policy, {msg(2), msg(3)}, 3), 0);
}

TEST(Fxcs, SingleBatchSameAsRics) {
  SenderState a;
  SenderState b;
  EXPECT_EQ(run_batch(a, policy_for(StrategyTag::FXCS), {msg(1), msg(2)}, 4),
            run_batch(b, policy_for(StrategyTag::RICS), {msg(1), msg(2)}, 4));
}

TEST(Sink, NextHopMatchedWithoutScan) {
  SenderState s;
  begin_batch(s, policy_for(StrategyTag::FXCS), kSinkId, std::nullopt);
  EXPECT_TRUE(s.flag_match);
  EXPECT_EQ(s.id_next, std::optional<NodeId>(kSinkId));
}

TEST(LostMatch, RicsWaitsThenRescansSameHop) {
  const ChargingSpec spec(50);
  ForwardingParams p;
  SenderState s;
  s.flag_match = true;
  s.id_next = 4;
  const auto plan = on_lost_match(s, policy_for(StrategyTag::RICS), 1000, spec, p, std::nullopt);
  EXPECT_EQ(plan.role, Role::Recovering);
  EXPECT_EQ(plan.recover_until, 1000 + 867u);
  EXPECT_FALSE(s.flag_match);
  EXPECT_EQ(s.target, std::optional<NodeId>(4));
  on_exhausted(s, policy_for(StrategyTag::RICS));
  EXPECT_FALSE(s.target);
}

TEST(LostMatch, OtpsProbesImmediately) {
  SenderState s;
  s.flag_match = true;
  s.id_next = 4;
  const auto plan = on_lost_match(s, policy_for(StrategyTag::OTPS), 1000, ChargingSpec(5), {}, std::nullopt);
  EXPECT_EQ(plan.role, Role::Sender);
  EXPECT_FALSE(s.flag_match);
  EXPECT_FALSE(s.target);
}

TEST(LostMatch, RncsRedraws) {
  SenderState s;
  s.flag_match = true;
  s.id_next = 4;
  on_lost_match(s, policy_for(StrategyTag::RNCS), 1000, ChargingSpec(5), {}, NodeId{6});
  EXPECT_EQ(s.target, std::optional<NodeId>(6));
  on_lost_match(s, policy_for(StrategyTag::RNCS), 1000, ChargingSpec(5), {}, kSinkId);
  EXPECT_TRUE(s.flag_match);
}

TEST(EndBatch, CachePolicy) {
  SenderState s;
  s.flag_match = true;
  s.id_next = 4;
  s.offset_forth = 2;
  end_batch(s, policy_for(StrategyTag::OTPS));
  EXPECT_TRUE(s.flag_match);
  end_batch(s, policy_for(StrategyTag::RNCS));
  EXPECT_FALSE(s.flag_match);
  EXPECT_FALSE(s.target);
}
