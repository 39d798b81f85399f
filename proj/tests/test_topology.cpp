#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "icroute/experiments.hpp"
#include "icroute/topology.hpp"

using namespace icroute;

namespace {

Scenario chain(std::uint32_t t, const std::vector<Position>& pos, std::vector<std::uint32_t> offsets = {}) {
  Scenario sc;
  sc.spec = ChargingSpec(t);
  sc.range_m = 10.0;
  for (NodeId i = 0; i < pos.size(); ++i) {
    const std::uint32_t o = i < offsets.size() ? offsets[i] : 0;
    sc.nodes.push_back(NodeSpec{i, pos[i], WorkOffset{o}});
  }
  return sc;
}

/// Bellman-Ford style relaxation until nothing changes.
std::vector<HopCount> relaxation_oracle(const Scenario& sc) {
  const std::size_t n = sc.size();
  std::vector<HopCount> d(n, kInfiniteHop);
  d[0] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || d[b] == kInfiniteHop) continue;
        if (distance(sc.nodes[a].pos, sc.nodes[b].pos) <= sc.range_m && d[b] + 1 < d[a]) {
          d[a] = d[b] + 1;
          changed = true;
        }
      }
    }
  }
  return d;
}

TopologyResult result_from_oracle(const Scenario& sc, const std::vector<HopCount>& hop) {
  TopologyResult r;
  r.hop = hop;
  r.next_hop.assign(hop.size(), std::nullopt);
  const RangeMatrix range(sc);
  for (NodeId i = 1; i < hop.size(); ++i) {
    for (NodeId j = 0; j < hop.size(); ++j) {
      if (range(i, j) && hop[j] + 1 == hop[i]) {
        r.next_hop[i] = j;
        break;
      }
    }
  }
  r.converged_at.assign(hop.size(), 0);
  r.unreachable.assign(hop.size(), false);
  return r;
}

}  // namespace

TEST(SinkSchedule, Lengths) {
  const auto s5 = sink_schedule(ChargingSpec(5));
  EXPECT_EQ(s5.silent, 5u);
  EXPECT_EQ(s5.transmit_end - s5.transmit_begin, 6u);
  EXPECT_EQ(s5.total, 11u);
  const auto s1 = sink_schedule(ChargingSpec(1));
  EXPECT_EQ(s1.silent, 1u);
  EXPECT_EQ(s1.transmit_end - s1.transmit_begin, 2u);
  EXPECT_EQ(s1.total, 3u);
  EXPECT_EQ(s5.round_at(4), std::nullopt);
  EXPECT_EQ(s5.round_at(5), std::optional<std::uint32_t>(0));
  EXPECT_EQ(s5.round_at(10), std::optional<std::uint32_t>(5));
  EXPECT_EQ(s5.round_at(11), std::nullopt);
}

TEST(SinkSchedule, EveryOffsetHearsOnce) {
  const ChargingSpec spec(5);
  const auto s = sink_schedule(spec);
  for (std::uint32_t o = 0; o <= 5; ++o) {
    int hits = 0;
    for (Slot now = s.transmit_begin; now < s.transmit_end; ++now) hits += is_working(WorkOffset{o}, spec, now);
    EXPECT_EQ(hits, 1) << "offset " << o;
  }
}

TEST(HopFrame, FirstHopFromSink) {
  const ChargingSpec spec(5);
  TopoParams p{10, WaitMode::Rounds};
  const auto out = on_hop_frame(initial_topo_state(WorkOffset{1}), make_hop_frame(kSinkId, 0, 2, spec), 7, spec, p);
  EXPECT_TRUE(out.updated);
  EXPECT_TRUE(out.ack);
  EXPECT_EQ(out.state.hop, 1u);
  EXPECT_EQ(out.state.next_hop, std::optional<NodeId>(kSinkId));
  EXPECT_EQ(out.state.phase, TopoPhase::Waiting);
  // the sink's rounds are single slots
  EXPECT_EQ(out.state.timer_slots, 3u);
}

TEST(HopFrame, IcSenderWaitsRemainingRounds) {
  const ChargingSpec spec(5);
  TopoParams p{10, WaitMode::Rounds};
  const auto out = on_hop_frame(initial_topo_state(WorkOffset{1}), make_hop_frame(4, 0, 2, spec), 7, spec, p);
  EXPECT_EQ(out.state.hop, 1u);
  EXPECT_EQ(out.state.timer_slots, 18u);
  EXPECT_EQ(out.state.broadcast_start, ceil_to_cycle(7 + 1 + 18, spec));
  p.wait_mode = WaitMode::LiteralSlots;
  EXPECT_EQ(on_hop_frame(initial_topo_state(WorkOffset{1}), make_hop_frame(4, 0, 2, spec), 7, spec, p).state.timer_slots,
            3u);
}

TEST(HopFrame, WorseOrEqualIgnored) {
  const ChargingSpec spec(5);
  TopoParams p{10, WaitMode::Rounds};
  TopoState s = initial_topo_state(WorkOffset{0});
  s.hop = 2;
  s.next_hop = 9;
  const auto out = on_hop_frame(s, make_hop_frame(4, 3, 0, spec), 50, spec, p);
  EXPECT_FALSE(out.updated);
  EXPECT_EQ(out.state.hop, 2u);
  EXPECT_EQ(out.state.next_hop, std::optional<NodeId>(9));
  EXPECT_EQ(on_hop_frame(s, make_hop_frame(4, 1, 0, spec), 50, spec, p).updated, false);
}

TEST(HopFrame, BetterRestartsWait) {
  const ChargingSpec spec(5);
  TopoParams p{10, WaitMode::Rounds};
  TopoState s = initial_topo_state(WorkOffset{0});
  s = on_hop_frame(s, make_hop_frame(4, 1, 0, spec), 20, spec, p).state;
  ASSERT_EQ(s.hop, 2u);
  const auto out = on_hop_frame(s, make_hop_frame(kSinkId, 0, 4, spec), 30, spec, p);
  EXPECT_TRUE(out.updated);
  EXPECT_EQ(out.state.hop, 1u);
  EXPECT_EQ(out.state.phase, TopoPhase::Waiting);
  EXPECT_EQ(out.state.timer_slots, 1u);
  EXPECT_EQ(out.state.converged_at, 30u);
}

TEST(HopFrame, MalformedRoundCounted) {
  const ChargingSpec spec(5);
  Frame f{3, std::nullopt, HopCountPayload{1, 9}, 0};
  const auto out = on_hop_frame(initial_topo_state(WorkOffset{0}), f, 5, spec, TopoParams{});
  EXPECT_TRUE(out.protocol_error);
  EXPECT_FALSE(out.updated);
  EXPECT_EQ(out.state.hop, kInfiniteHop);
}

TEST(Broadcast, RotatedOffsets) {
  const ChargingSpec spec(5);
  TopoState s = initial_topo_state(WorkOffset{2});
  s.hop = 1;
  s.phase = TopoPhase::Waiting;
  s.broadcast_start = 60;
  std::vector<std::uint32_t> seen;
  Slot first = 0;
  Slot last = 0;
  for (Slot cycle = 10; cycle < 17; ++cycle) {
    const WorkOffset o = topo_wake_offset(s, cycle, spec);
    const Slot now = cycle_start(cycle, spec) + o.value;
    if (!broadcast_due(s, now)) break;
    auto out = broadcast_step(s, 1, now, spec);
    s = out.state;
    if (out.emission) {
      if (seen.empty()) first = cycle_start(cycle, spec);
      last = cycle_start(cycle, spec) + spec.cycle_len();
      seen.push_back(o.value);
    }
  }
  EXPECT_EQ(seen, (std::vector<std::uint32_t>{2, 3, 4, 5, 0, 1}));
  EXPECT_EQ(s.phase, TopoPhase::Listening);
  EXPECT_EQ(s.current_offset, WorkOffset{2});
  EXPECT_EQ(topo_wake_offset(s, 17, spec), WorkOffset{2});
  EXPECT_EQ(last - first, 36u);
}

TEST(Broadcast, EveryNeighborOffsetCoveredOnce) {
  for (std::uint32_t t = 1; t <= 8; ++t) {
    const ChargingSpec spec(t);
    for (std::uint32_t base = 0; base <= t; ++base) {
      TopoState s = initial_topo_state(WorkOffset{base});
      s.hop = 1;
      s.phase = TopoPhase::Waiting;
      s.broadcast_start = 0;
      std::vector<Slot> tx;
      for (Slot cycle = 0; cycle <= t; ++cycle) {
        const Slot now = cycle_start(cycle, spec) + topo_wake_offset(s, cycle, spec).value;
        auto out = broadcast_step(s, 1, now, spec);
        s = out.state;
        if (out.emission) tx.push_back(now);
      }
      ASSERT_EQ(tx.size(), t + 1u);
      for (std::uint32_t o = 0; o <= t; ++o) {
        int hits = 0;
        for (Slot now : tx) hits += is_working(WorkOffset{o}, spec, now);
        EXPECT_EQ(hits, 1) << "t=" << t << " base=" << base << " offset=" << o;
      }
    }
  }
}

TEST(Fallback, Threshold) {
  EXPECT_EQ(fallback_threshold(ChargingSpec(5), TopoParams{10, WaitMode::Rounds}), 420u);
  TopoState s = initial_topo_state(WorkOffset{0});
  const TopoParams p{10, WaitMode::Rounds};
  EXPECT_FALSE(listen_fallback(s, 420, ChargingSpec(5), p));
  EXPECT_TRUE(listen_fallback(s, 421, ChargingSpec(5), p));
  EXPECT_EQ(s.phase, TopoPhase::Probing);
  EXPECT_THROW((TopoParams{0, WaitMode::Rounds}.validate()), std::invalid_argument);
}

TEST(Fallback, ProbeAdoptsResponderHop) {
  const ChargingSpec spec(5);
  TopoState s = initial_topo_state(WorkOffset{0});
  s.phase = TopoPhase::Probing;
  s = probe_on_ack(s, 4, std::nullopt, 100, spec);
  EXPECT_EQ(s.probe_attempts, 1u);
  EXPECT_EQ(topo_wake_offset(s, 20, spec), WorkOffset{1});
  const Frame ack{7, 4, AckPayload{4, 3}, 0};
  s = probe_on_ack(s, 4, ack, 106, spec);
  EXPECT_EQ(s.hop, 4u);
  EXPECT_EQ(s.next_hop, std::optional<NodeId>(7));
  EXPECT_EQ(s.phase, TopoPhase::Waiting);
  EXPECT_EQ(s.broadcast_start, 108u);
  EXPECT_FALSE(s.broadcast_done);
}

TEST(Fallback, ProbeGivesUp) {
  const ChargingSpec spec(5);
  TopoState s = initial_topo_state(WorkOffset{0});
  s.phase = TopoPhase::Probing;
  for (int i = 0; i < 6; ++i) s = probe_on_ack(s, 4, std::nullopt, 100 + i * 6, spec);
  EXPECT_EQ(s.phase, TopoPhase::Unreachable);
  EXPECT_TRUE(topo_settled(s));
}

TEST(Oracle, SmallGraphs) {
  const Scenario pair = chain(5, {{0, 0}, {5, 0}});
  EXPECT_EQ(bfs_oracle(pair)[1], 1u);
  const Scenario line = chain(5, {{0, 0}, {8, 0}, {16, 0}});
  EXPECT_EQ(bfs_oracle(line), (std::vector<HopCount>{0, 1, 2}));
}

TEST(Oracle, MatchesRelaxation) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ExperimentConfig c;
    c.seed = seed;
    c.n_nodes = 50;
    c.shape = seed % 2 ? AreaShape::Square : AreaShape::Rectangle;
    const Scenario sc = generate_scenario(c).scenario;
    EXPECT_EQ(bfs_oracle(sc), relaxation_oracle(sc)) << "seed " << seed;
  }
}

TEST(Verify, AcceptsOracleTree) {
  ExperimentConfig c;
  c.seed = 3;
  const Scenario sc = generate_scenario(c).scenario;
  const auto oracle = bfs_oracle(sc);
  const RangeMatrix range(sc);
  EXPECT_TRUE(verify_least_hop(result_from_oracle(sc, oracle), oracle, &range).pass);
}

TEST(Verify, CorruptedHopReported) {
  ExperimentConfig c;
  c.seed = 3;
  const Scenario sc = generate_scenario(c).scenario;
  const auto oracle = bfs_oracle(sc);
  TopologyResult r = result_from_oracle(sc, oracle);
  r.hop[5] += 1;
  const auto rep = verify_least_hop(r, oracle);
  EXPECT_FALSE(rep.pass);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].node, 5u);
  EXPECT_EQ(rep.violations[0].kind, ViolationKind::WrongHop);
}

TEST(Verify, CycleReported) {
  TopologyResult r;
  r.hop = {0, 1, 1};
  r.next_hop = {std::nullopt, 2, 1};
  const auto rep = verify_least_hop(r, {0, 1, 1});
  EXPECT_FALSE(rep.pass);
  std::set<ViolationKind> kinds;
  for (const auto& v : rep.violations) kinds.insert(v.kind);
  EXPECT_TRUE(kinds.count(ViolationKind::Cycle) == 1 || kinds.count(ViolationKind::PathLength) == 1);
}

TEST(Verify, LongCycleReported) {
  TopologyResult r;
  r.hop = {0, 2, 2, 2};
  r.next_hop = {std::nullopt, 2, 3, 1};
  const auto rep = verify_least_hop(r, {0, 2, 2, 2});
  EXPECT_FALSE(rep.pass);
  bool cycle = false;
  for (const auto& v : rep.violations) cycle = cycle || v.kind == ViolationKind::Cycle;
  EXPECT_TRUE(cycle);
}

TEST(Verify, OutOfRangePointer) {
  const Scenario sc = chain(5, {{0, 0}, {8, 0}, {16, 0}});
  TopologyResult r;
  r.hop = {0, 1, 1};
  r.next_hop = {std::nullopt, 0, 0};
  const RangeMatrix range(sc);
  const auto rep = verify_least_hop(r, {0, 1, 1}, &range);
  EXPECT_FALSE(rep.pass);
}
