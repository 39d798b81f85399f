#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "icroute/core.hpp"

namespace icroute {

enum class TraceKind { Tx, Rx, Collision, State };

inline const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Tx:
      return "tx";
    case TraceKind::Rx:
      return "rx";
    case TraceKind::Collision:
      return "collision";
    case TraceKind::State:
      return "state";
  }
  return "?";
}

struct TraceEvent {
  Slot slot = 0;
  NodeId node = 0;
  TraceKind kind = TraceKind::State;
  std::string detail;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class EventTrace {
 public:
  explicit EventTrace(bool enabled = false) : enabled_(enabled) {}

  bool enabled() const { return enabled_; }

  void add(Slot slot, NodeId node, TraceKind kind, std::string detail) {
    if (enabled_) {
      events_.push_back(TraceEvent{slot, node, kind, std::move(detail)});
    }
  }

  /// Orders by slot, then node; events of one node in one slot keep their
  /// emission order.
  void finish() {
    std::stable_sort(events_.begin(), events_.end(), [](const TraceEvent& a, const TraceEvent& b) {
      return a.slot != b.slot ? a.slot < b.slot : a.node < b.node;
    });
  }

  const std::vector<TraceEvent>& events() const { return events_; }

  std::string to_jsonl() const {
    std::string out;
    for (const auto& e : events_) {
      nlohmann::json j = {{"slot", e.slot}, {"node", e.node}, {"kind", to_string(e.kind)}, {"detail", e.detail}};
      out += j.dump();
      out += '\n';
    }
    return out;
  }

 private:
  bool enabled_;
  std::vector<TraceEvent> events_;
};

struct MessageRecord {
  MessageId id = 0;
  NodeId origin = 0;
  std::uint32_t seq = 0;
  Slot created_at = 0;
  std::optional<Slot> delivered_at;
  std::vector<NodeId> path;

  /// Links traversed; the path holds the origin and every relay.
  std::uint32_t hops() const { return static_cast<std::uint32_t>(path.size()); }
};

/// One acknowledged data frame.
struct SendLog {
  Slot slot = 0;
  NodeId sender = 0;
  NodeId receiver = 0;
  MessageId msg_id = 0;
  bool is_start = false;
  bool is_end = false;
};

struct FramingReport {
  std::size_t complete = 0;
  std::size_t abandoned = 0;
  std::size_t violations = 0;
};

/// Per sender, acknowledged frames must form start ... end runs. A batch cut
/// short by a lost match (a new start with no end) is counted as abandoned.
inline FramingReport check_batch_framing(const std::vector<SendLog>& sends, std::size_t node_count) {
  FramingReport rep;
  std::vector<std::uint8_t> open(node_count, 0);
  for (const auto& s : sends) {
    if (s.sender >= node_count) {
      ++rep.violations;
      continue;
    }
    if (s.is_start) {
      if (open[s.sender] != 0) {
        ++rep.abandoned;
      }
      open[s.sender] = 1;
    } else if (open[s.sender] == 0) {
      ++rep.violations;
    }
    if (s.is_end) {
      open[s.sender] = 0;
      ++rep.complete;
    }
  }
  return rep;
}

struct RunMetrics {
  /// Slot of the last hop-count update.
  Slot topo_time_slots = 0;
  /// Slot after the last topology broadcast.
  Slot topo_done_slots = 0;
  Slot forwarding_start = 0;
  Slot end_slot = 0;

  std::vector<MessageRecord> messages;
  std::vector<SendLog> sends;

  /// Slots from entering the sender role to the first acknowledged attempt.
  std::vector<Slot> sync_latencies;
  /// Unacknowledged scan attempts before each match.
  std::vector<std::uint32_t> scan_cycles;
  std::uint64_t scan_attempts = 0;
  /// Scan attempts by nodes that had already been matched once.
  std::uint64_t resync_attempts = 0;
  std::uint64_t lost_matches = 0;

  std::uint64_t collisions = 0;
  std::uint64_t ack_collisions = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t drops_queue_full = 0;
  std::uint64_t duplicates_at_sink = 0;
  std::uint64_t duplicate_receptions = 0;
  std::uint64_t stale_unlocks = 0;
  std::uint64_t pendulum_violations = 0;
  std::uint64_t fallback_fired = 0;
  std::uint64_t unreachable = 0;

  std::size_t created() const { return messages.size(); }
  std::size_t delivered() const {
    return static_cast<std::size_t>(
        std::count_if(messages.begin(), messages.end(), [](const MessageRecord& m) { return m.delivered_at.has_value(); }));
  }
  std::size_t undelivered() const { return created() - delivered(); }

  std::vector<Slot> delivery_times() const {
    std::vector<Slot> out;
    for (const auto& m : messages) {
      if (m.delivered_at) {
        out.push_back(*m.delivered_at - m.created_at);
      }
    }
    return out;
  }

  double mean_sync_latency() const {
    if (sync_latencies.empty()) {
      return 0.0;
    }
    double s = 0.0;
    for (Slot x : sync_latencies) {
      s += static_cast<double>(x);
    }
    return s / static_cast<double>(sync_latencies.size());
  }
};

}  // namespace icroute
