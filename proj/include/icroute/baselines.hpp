#pragma once

// Sender strategies. RICS is the caching pendulum sender; the others differ
// in what they keep between batches and what they do when a match is lost.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icroute/core.hpp"
#include "icroute/forwarding.hpp"
#include "icroute/rng.hpp"

namespace icroute {

enum class StrategyTag { RICS, FXCS, RNCS, OTPS };

inline std::string to_string(StrategyTag s) {
  switch (s) {
    case StrategyTag::RICS:
      return "rics";
    case StrategyTag::FXCS:
      return "fxcs";
    case StrategyTag::RNCS:
      return "rncs";
    case StrategyTag::OTPS:
      return "otps";
  }
  return "rics";
}

inline StrategyTag parse_strategy(std::string_view s) {
  std::string low(s);
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
  if (low == "rics") return StrategyTag::RICS;
  if (low == "fxcs") return StrategyTag::FXCS;
  if (low == "rncs") return StrategyTag::RNCS;
  if (low == "otps") return StrategyTag::OTPS;
  throw std::invalid_argument("unknown strategy '" + std::string(s) + "' (expected rics, fxcs, rncs or otps)");
}

enum class NextHopChoice { Topology, Random };
enum class LostMatchAction { WaitThenRescan, OpenProbe, Redraw };

struct SenderPolicy {
  bool cache_across_batches = true;
  NextHopChoice next_hop = NextHopChoice::Topology;
  LostMatchAction on_lost = LostMatchAction::WaitThenRescan;
};

inline SenderPolicy policy_for(StrategyTag s) {
  switch (s) {
    case StrategyTag::RICS:
      return {true, NextHopChoice::Topology, LostMatchAction::WaitThenRescan};
    case StrategyTag::FXCS:
      return {false, NextHopChoice::Topology, LostMatchAction::WaitThenRescan};
    case StrategyTag::RNCS:
      return {false, NextHopChoice::Random, LostMatchAction::Redraw};
    case StrategyTag::OTPS:
      return {true, NextHopChoice::Topology, LostMatchAction::OpenProbe};
  }
  return {};
}

struct NeighborHop {
  NodeId id = 0;
  HopCount hop = kInfiniteHop;
};

/// Uniform draw among neighbors with a smaller hop count; nullopt for a dead
/// end.
inline std::optional<NodeId> rncs_next_hop(const std::vector<NeighborHop>& neighbors, HopCount self_hop,
                                           RngStream& rng) {
  std::vector<NodeId> eligible;
  for (const auto& n : neighbors) {
    if (n.hop < self_hop) {
      eligible.push_back(n.id);
    }
  }
  if (eligible.empty()) {
    return std::nullopt;
  }
  std::sort(eligible.begin(), eligible.end());
  eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
  return eligible[rng.uniform(eligible.size())];
}

/// Aims a fresh batch. A node that already holds a cached match keeps it.
inline void begin_batch(SenderState& s, const SenderPolicy& policy, std::optional<NodeId> topology_next,
                        std::optional<NodeId> drawn_next) {
  s.batch_sent = 0;
  if (s.flag_match) {
    return;
  }
  if (!s.rescanning) {
    s.target = policy.next_hop == NextHopChoice::Random ? drawn_next : topology_next;
  }
  if (s.target && *s.target == kSinkId) {
    match_sink(s);
  }
}

/// FXCS and RNCS forget the offset once the queue is drained.
inline void end_batch(SenderState& s, const SenderPolicy& policy) {
  s.batch_sent = 0;
  if (!policy.cache_across_batches) {
    clear_match(s);
    s.target.reset();
    s.rescanning = false;
  }
}

/// OTPS: give up on the cached next hop and accept the first lower-hop node
/// that answers.
inline void otps_probe(SenderState& s) {
  const auto lost = s.id_next;
  clear_match(s);
  s.target.reset();
  s.rescanning = lost.has_value();
}

struct LostMatchPlan {
  Role role = Role::Sender;
  Slot recover_until = 0;
};

inline LostMatchPlan on_lost_match(SenderState& s, const SenderPolicy& policy, Slot now, const ChargingSpec& spec,
                                   const ForwardingParams& params, std::optional<NodeId> redraw) {
  switch (policy.on_lost) {
    case LostMatchAction::WaitThenRescan: {
      const auto previous = s.id_next;
      clear_match(s);
      s.target = previous;
      s.rescanning = true;
      return LostMatchPlan{Role::Recovering, now + failure_recovery_wait(spec, params)};
    }
    case LostMatchAction::OpenProbe:
      otps_probe(s);
      return LostMatchPlan{Role::Sender, 0};
    case LostMatchAction::Redraw:
      clear_match(s);
      s.target = redraw;
      s.rescanning = true;
      if (s.target && *s.target == kSinkId) {
        match_sink(s);
      }
      return LostMatchPlan{Role::Sender, 0};
  }
  return {};
}

/// A scan ran t + 1 attempts without an answer.
inline void on_exhausted(SenderState& s, const SenderPolicy& policy) {
  if (s.rescanning && s.target && policy.on_lost == LostMatchAction::WaitThenRescan) {
    // The previous next hop stays silent; look for any lower-hop node.
    s.target.reset();
  }
  if (policy.next_hop == NextHopChoice::Random) {
    // draw again on the next batch
    s.rescanning = false;
    s.target.reset();
  }
}

}  // namespace icroute
