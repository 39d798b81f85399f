#pragma once

// Broadcast-wait hop-count construction.
//
// The sink stays silent for t slots and then transmits HopCount(0, r) once per
// slot for r = 0..t. An IC node that learns a strictly smaller hop count waits
// until its sender's broadcast is over, then broadcasts its own hop count for
// t + 1 rounds. Rounds are aligned to charging cycles and in round r the node
// is awake at (base + r) mod (t + 1), so every fixed neighbor offset is
// visited by exactly one round.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icroute/core.hpp"
#include "icroute/scenario.hpp"

namespace icroute {

enum class TopoPhase { Listening, Waiting, Broadcasting, Probing, Unreachable };

inline const char* to_string(TopoPhase p) {
  switch (p) {
    case TopoPhase::Listening:
      return "listening";
    case TopoPhase::Waiting:
      return "waiting";
    case TopoPhase::Broadcasting:
      return "broadcasting";
    case TopoPhase::Probing:
      return "probing";
    case TopoPhase::Unreachable:
      return "unreachable";
  }
  return "?";
}

/// How a receiver converts the sender's round number into a wait.
enum class WaitMode {
  /// Wait the sender's remaining t - r rounds of t + 1 slots each.
  Rounds,
  /// Wait t - r slots, the literal reading; kept for comparison runs.
  LiteralSlots,
};

struct TopoParams {
  std::uint32_t n_maxhop = 1;
  WaitMode wait_mode = WaitMode::Rounds;

  void validate() const {
    if (n_maxhop < 1) {
      throw std::invalid_argument("N_maxhop must be >= 1");
    }
  }
};

struct TopoState {
  HopCount hop = kInfiniteHop;
  std::optional<NodeId> next_hop;
  TopoPhase phase = TopoPhase::Listening;
  /// Wait computed on the last update, in slots.
  Slot timer_slots = 0;
  /// Cycle boundary at which round 0 of the broadcast begins.
  Slot broadcast_start = 0;
  std::uint32_t round = 0;
  WorkOffset base_offset;
  WorkOffset current_offset;
  Slot listen_elapsed = 0;
  std::uint32_t probe_attempts = 0;
  /// Slot of the last hop update.
  Slot converged_at = 0;
  bool broadcast_done = false;
};

inline TopoState initial_topo_state(WorkOffset base) {
  TopoState s;
  s.base_offset = base;
  s.current_offset = base;
  return s;
}

inline TopoState sink_topo_state() {
  TopoState s;
  s.hop = 0;
  s.broadcast_done = true;
  return s;
}

/// Node has a final answer: finite hop and no pending broadcast, or gave up.
inline bool topo_settled(const TopoState& s) {
  return (s.phase == TopoPhase::Listening && s.hop != kInfiniteHop) || s.phase == TopoPhase::Unreachable;
}

// ---------------------------------------------------------------------------
// Sink

struct SinkSchedule {
  Slot silent = 0;
  Slot transmit_begin = 0;
  Slot transmit_end = 0;  // exclusive
  Slot total = 0;

  std::optional<std::uint32_t> round_at(Slot now) const {
    if (now < transmit_begin || now >= transmit_end) {
      return std::nullopt;
    }
    return static_cast<std::uint32_t>(now - transmit_begin);
  }
};

inline SinkSchedule sink_schedule(const ChargingSpec& spec) {
  const Slot t = spec.t();
  return SinkSchedule{t, t, 2 * t + 1, 2 * t + 1};
}

// ---------------------------------------------------------------------------
// Receiving a hop count

struct HopFrameOutcome {
  TopoState state;
  bool updated = false;
  bool ack = false;
  bool protocol_error = false;
};

/// Slots a receiver waits after hearing round `round` from `src`. The sink's
/// rounds are single slots; an IC sender's rounds last a full cycle unless the
/// literal reading is selected.
inline Slot hop_wait_slots(NodeId src, std::uint32_t round, const ChargingSpec& spec, const TopoParams& params) {
  const Slot remaining = spec.t() - round;
  if (src == kSinkId || params.wait_mode == WaitMode::LiteralSlots) {
    return remaining;
  }
  return remaining * spec.cycle_len();
}

inline HopFrameOutcome on_hop_frame(TopoState state, const Frame& frame, Slot now, const ChargingSpec& spec,
                                    const TopoParams& params) {
  const auto* hc = std::get_if<HopCountPayload>(&frame.payload);
  if (hc == nullptr || hc->round > spec.t() || hc->hop == kInfiniteHop) {
    return HopFrameOutcome{std::move(state), false, false, hc != nullptr && hc->round > spec.t()};
  }
  HopFrameOutcome out{std::move(state), false, true, false};
  if (out.state.phase == TopoPhase::Broadcasting || out.state.phase == TopoPhase::Probing) {
    return out;
  }
  if (static_cast<std::uint64_t>(hc->hop) + 1 < out.state.hop) {
    TopoState& s = out.state;
    s.hop = hc->hop + 1;
    s.next_hop = frame.src;
    s.phase = TopoPhase::Waiting;
    s.timer_slots = hop_wait_slots(frame.src, hc->round, spec, params);
    s.broadcast_start = ceil_to_cycle(now + 1 + s.timer_slots, spec);
    s.round = 0;
    s.converged_at = now;
    s.broadcast_done = false;
    out.updated = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Broadcasting

/// Offset at which the node is awake during `cycle`.
inline WorkOffset topo_wake_offset(const TopoState& s, Slot cycle, const ChargingSpec& spec) {
  if (s.phase == TopoPhase::Waiting || s.phase == TopoPhase::Broadcasting) {
    const Slot start_cycle = s.broadcast_start / spec.cycle_len();
    if (cycle >= start_cycle && cycle - start_cycle <= spec.t()) {
      return wrap_offset(s.base_offset.value + (cycle - start_cycle), spec);
    }
  }
  if (s.phase == TopoPhase::Probing) {
    return wrap_offset(static_cast<std::uint64_t>(s.base_offset.value) + s.probe_attempts, spec);
  }
  return s.base_offset;
}

inline bool broadcast_due(const TopoState& s, Slot now) {
  return (s.phase == TopoPhase::Waiting && now >= s.broadcast_start) || s.phase == TopoPhase::Broadcasting;
}

struct BroadcastOutcome {
  TopoState state;
  std::optional<Frame> emission;
};

/// One round of the rotated broadcast. Called in the node's working slot once
/// the wait has expired.
inline BroadcastOutcome broadcast_step(TopoState s, NodeId self, Slot now, const ChargingSpec& spec) {
  if (!broadcast_due(s, now)) {
    return BroadcastOutcome{std::move(s), std::nullopt};
  }
  const Slot start_cycle = s.broadcast_start / spec.cycle_len();
  const Slot r = cycle_of(now, spec) - start_cycle;
  if (r > spec.t()) {
    s.phase = TopoPhase::Listening;
    s.current_offset = s.base_offset;
    s.broadcast_done = true;
    return BroadcastOutcome{std::move(s), std::nullopt};
  }
  s.phase = TopoPhase::Broadcasting;
  s.round = static_cast<std::uint32_t>(r);
  s.current_offset = wrap_offset(s.base_offset.value + r, spec);
  Frame f = make_hop_frame(self, s.hop, s.round, spec);
  if (r == spec.t()) {
    s.phase = TopoPhase::Listening;
    s.current_offset = s.base_offset;
    s.broadcast_done = true;
  }
  return BroadcastOutcome{std::move(s), std::move(f)};
}

// ---------------------------------------------------------------------------
// Listen fallback and active probing

inline Slot fallback_threshold(const ChargingSpec& spec, const TopoParams& params) {
  return spec.cycle_len() * (spec.cycle_len() + 1) * params.n_maxhop;
}

/// Switches a node that never heard a hop count to active probing once the
/// maximum listening time is exceeded. Returns true if it fired.
inline bool listen_fallback(TopoState& s, Slot elapsed, const ChargingSpec& spec, const TopoParams& params) {
  s.listen_elapsed = elapsed;
  if (s.phase != TopoPhase::Listening || s.hop != kInfiniteHop) {
    return false;
  }
  if (elapsed <= fallback_threshold(spec, params)) {
    return false;
  }
  s.phase = TopoPhase::Probing;
  s.probe_attempts = 0;
  return true;
}

inline Frame probe_frame(NodeId self, const ChargingSpec& spec) { return make_hop_frame(self, kInfiniteHop, 0, spec); }

/// Probe result for one working slot; `ack` is the acknowledgment decoded in
/// that slot, if any. A node that gives up keeps listening at its base offset
/// and still accepts a hop count heard later.
inline TopoState probe_on_ack(TopoState s, NodeId self, const std::optional<Frame>& ack, Slot now,
                              const ChargingSpec& spec) {
  if (ack) {
    const auto* a = std::get_if<AckPayload>(&ack->payload);
    if (a != nullptr && a->ack_dst == self && a->responder_hop != kInfiniteHop) {
      // The new hop is announced like any other update, from the next cycle.
      s.hop = a->responder_hop + 1;
      s.next_hop = ack->src;
      s.phase = TopoPhase::Waiting;
      s.timer_slots = 0;
      s.broadcast_start = ceil_to_cycle(now + 1, spec);
      s.round = 0;
      s.current_offset = s.base_offset;
      s.converged_at = now;
      s.broadcast_done = false;
      return s;
    }
  }
  ++s.probe_attempts;
  if (s.probe_attempts >= spec.cycle_len()) {
    s.phase = TopoPhase::Unreachable;
    s.current_offset = s.base_offset;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Verification

struct TopologyResult {
  std::vector<HopCount> hop;
  std::vector<std::optional<NodeId>> next_hop;
  std::vector<Slot> converged_at;
  std::vector<bool> unreachable;
};

inline std::vector<HopCount> bfs_oracle(const Scenario& sc) { return bfs_distances(build_adjacency(sc), kSinkId); }

enum class ViolationKind { WrongHop, BrokenPointer, Cycle, PathLength, NotInRange };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::WrongHop:
      return "wrong-hop";
    case ViolationKind::BrokenPointer:
      return "broken-pointer";
    case ViolationKind::Cycle:
      return "cycle";
    case ViolationKind::PathLength:
      return "path-length";
    case ViolationKind::NotInRange:
      return "not-in-range";
  }
  return "?";
}

struct Violation {
  NodeId node = 0;
  ViolationKind kind = ViolationKind::WrongHop;
  std::string detail;
};

struct VerifyReport {
  bool pass = true;
  std::vector<Violation> violations;
};

/// Every hop must equal the BFS distance and next-hop pointers must reach the
/// sink in exactly `hop` steps. `range` is optional; when given, every pointer
/// must also name an in-range neighbor.
inline VerifyReport verify_least_hop(const TopologyResult& run, const std::vector<HopCount>& oracle,
                                     const RangeMatrix* range = nullptr) {
  VerifyReport rep;
  const std::size_t n = oracle.size();
  auto fail = [&](NodeId node, ViolationKind kind, std::string detail) {
    rep.pass = false;
    rep.violations.push_back(Violation{node, kind, std::move(detail)});
  };
  if (run.hop.size() != n || run.next_hop.size() != n) {
    fail(0, ViolationKind::BrokenPointer, "result size mismatch");
    return rep;
  }
  for (NodeId i = 1; i < n; ++i) {
    if (run.hop[i] != oracle[i]) {
      fail(i, ViolationKind::WrongHop, "hop " + hop_to_string(run.hop[i]) + " != bfs " + hop_to_string(oracle[i]));
      continue;
    }
    NodeId cur = i;
    std::size_t steps = 0;
    bool ok = true;
    while (cur != kSinkId) {
      const auto& nh = run.next_hop[cur];
      if (!nh || *nh >= n) {
        fail(i, ViolationKind::BrokenPointer, "node " + std::to_string(cur) + " has no valid next hop");
        ok = false;
        break;
      }
      if (range != nullptr && !(*range)(cur, *nh)) {
        fail(i, ViolationKind::NotInRange, "next hop " + std::to_string(*nh) + " out of range of " + std::to_string(cur));
        ok = false;
        break;
      }
      cur = *nh;
      if (++steps > n) {
        fail(i, ViolationKind::Cycle, "next-hop pointers cycle");
        ok = false;
        break;
      }
    }
    if (ok && steps != run.hop[i]) {
      fail(i, ViolationKind::PathLength,
           "path of " + std::to_string(steps) + " steps for hop " + hop_to_string(run.hop[i]));
    }
  }
  return rep;
}

}  // namespace icroute
