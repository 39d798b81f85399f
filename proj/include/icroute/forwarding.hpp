#pragma once

// Pendulum-sync forwarding: sender and receiver procedures.
//
// A sender scans toward its next hop by moving its wakeup one slot per cycle
// (attempt k uses forth = k). The first acknowledged attempt fixes the offset,
// which is cached and reused for later batches. The node swings forth to send
// and back to its base offset to listen.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "icroute/core.hpp"

namespace icroute {

struct Message {
  MessageId id = 0;
  NodeId origin = 0;
  std::uint32_t seq = 0;
  Slot created_at = 0;
  /// Origin first, then every relay that enqueued this copy.
  std::vector<NodeId> path;
};

struct ForwardingParams {
  std::uint32_t th = 1;
  std::uint32_t q_max = 16;
  /// Tolerance wait; defaults to t + 1 when unset.
  std::optional<Slot> delta;

  Slot delta_or_default(const ChargingSpec& spec) const { return delta.value_or(spec.cycle_len()); }

  void validate() const {
    if (q_max < 1 || th < 1 || th > q_max) {
      throw std::invalid_argument("forwarding params need 1 <= TH <= q_max");
    }
  }
};

enum class Role { Receiver, Sender, Recovering };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Receiver:
      return "receiver";
    case Role::Sender:
      return "sender";
    case Role::Recovering:
      return "recovering";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Swing

enum class SwingDirection { Forth, Back };

/// forth: base + cached. back: applied to the swung offset, adds
/// (t + 1) - cached and lands on base again.
inline WorkOffset swing(WorkOffset base, std::uint32_t cached_offset, SwingDirection dir, const ChargingSpec& spec) {
  if (cached_offset > spec.t()) {
    throw std::out_of_range("cached offset outside [0, t]");
  }
  const WorkOffset forth = wrap_offset(static_cast<std::uint64_t>(base.value) + cached_offset, spec);
  if (dir == SwingDirection::Forth) {
    return forth;
  }
  const std::uint64_t back = spec.cycle_len() - cached_offset;
  return wrap_offset(forth.value + back, spec);
}

inline Slot failure_recovery_wait(const ChargingSpec& spec, const ForwardingParams& params) {
  return spec.cycle_len() * params.q_max + params.delta_or_default(spec);
}

// ---------------------------------------------------------------------------
// Sender

struct SenderState {
  std::uint32_t attempt_send = 0;
  bool flag_match = false;
  std::optional<NodeId> id_next;
  std::uint32_t offset_forth = 0;
  std::uint32_t offset_back = 0;
  std::size_t max_messages = 0;
  /// Messages acknowledged in the current batch.
  std::uint32_t batch_sent = 0;
  /// Node the scan is aimed at; unset means any lower-hop node may answer.
  std::optional<NodeId> target;
  /// Consecutive unacknowledged sends while matched.
  std::uint32_t failures = 0;
  bool ever_matched = false;
  /// Set while rescanning after a lost match.
  bool rescanning = false;
  Slot scan_started_at = 0;
};

/// Offset within the cycle at which a sender wakes next.
inline WorkOffset sender_wake_offset(const SenderState& s, WorkOffset base, const ChargingSpec& spec) {
  const std::uint32_t forth = s.flag_match ? s.offset_forth : s.attempt_send % spec.cycle_len();
  return swing(base, forth, SwingDirection::Forth, spec);
}

enum class SendEvent { Emitted, QueueEmpty, Exhausted };

struct SenderEmit {
  SendEvent event = SendEvent::QueueEmpty;
  std::optional<DataPayload> payload;
  std::optional<NodeId> dst;
  /// This emission is an unmatched scan attempt.
  bool scan_attempt = false;
};

/// Sender action in its working slot. The front message is stamped and
/// broadcast; it stays at the front of the queue until acknowledged.
inline SenderEmit sender_emit(SenderState& s, const std::deque<Message>& queue, HopCount hop,
                              const ChargingSpec& spec) {
  if (queue.empty()) {
    s.offset_back = static_cast<std::uint32_t>(spec.cycle_len() - s.offset_forth);
    s.batch_sent = 0;
    return SenderEmit{SendEvent::QueueEmpty, std::nullopt, std::nullopt, false};
  }
  if (!s.flag_match && s.attempt_send >= spec.cycle_len()) {
    s.attempt_send = 0;
    s.offset_forth = 0;
    return SenderEmit{SendEvent::Exhausted, std::nullopt, std::nullopt, false};
  }
  bool scan = false;
  if (!s.flag_match) {
    s.offset_forth = s.attempt_send;
    ++s.attempt_send;
    s.offset_back = static_cast<std::uint32_t>(spec.cycle_len() - s.offset_forth);
    s.max_messages = queue.size();
    scan = true;
  }
  const Message& m = queue.front();
  DataPayload p;
  p.msg_id = m.id;
  p.origin = m.origin;
  p.seq = m.seq;
  p.created_at = m.created_at;
  p.is_start = s.batch_sent == 0;
  p.is_end = queue.size() == 1;
  p.src_hop = hop;
  p.src_id_next = s.flag_match ? s.id_next : s.target;
  return SenderEmit{SendEvent::Emitted, p, p.src_id_next, scan};
}

enum class AckEvent { Success, Fail, Exhausted, MatchLost };

struct AckOutcome {
  AckEvent event = AckEvent::Fail;
  bool newly_matched = false;
  bool batch_done = false;
  std::optional<Message> popped;
};

/// Outcome of the emission made in this slot. `ack_src` is the source of the
/// acknowledgment decoded by the sender, `ack` its payload.
/// A matched sender declares the match lost after `lost_after` consecutive
/// failures (0 means t + 1).
inline AckOutcome sender_on_ack(SenderState& s, std::deque<Message>& queue, NodeId self,
                                const std::optional<NodeId>& ack_src, const AckPayload* ack, bool was_end,
                                const ChargingSpec& spec, std::uint32_t lost_after = 0) {
  const std::optional<NodeId> expected = s.flag_match ? s.id_next : s.target;
  const bool good = ack_src && ack != nullptr && ack->ack_dst == self && (!expected || *expected == *ack_src);
  AckOutcome out;
  if (good) {
    out.event = AckEvent::Success;
    out.popped = std::move(queue.front());
    queue.pop_front();
    out.newly_matched = !s.flag_match;
    s.flag_match = true;
    s.id_next = *ack_src;
    s.failures = 0;
    s.attempt_send = 0;
    s.ever_matched = true;
    s.rescanning = false;
    ++s.batch_sent;
    if (was_end) {
      s.batch_sent = 0;
      out.batch_done = true;
    }
    return out;
  }
  if (s.flag_match) {
    ++s.failures;
    const Slot limit = lost_after == 0 ? spec.cycle_len() : lost_after;
    out.event = s.failures >= limit ? AckEvent::MatchLost : AckEvent::Fail;
    return out;
  }
  if (s.attempt_send >= spec.cycle_len()) {
    s.attempt_send = 0;
    s.offset_forth = 0;
    out.event = AckEvent::Exhausted;
    return out;
  }
  out.event = AckEvent::Fail;
  return out;
}

/// Drops the cached offset; the next send starts a fresh scan.
inline void clear_match(SenderState& s) {
  s.flag_match = false;
  s.id_next.reset();
  s.offset_forth = 0;
  s.offset_back = 0;
  s.attempt_send = 0;
  s.failures = 0;
  s.batch_sent = 0;
}

/// Next hop is the always-awake sink: no scan is needed.
inline void match_sink(SenderState& s) {
  s.flag_match = true;
  s.id_next = kSinkId;
  s.offset_forth = 0;
  s.offset_back = 0;
  s.attempt_send = 0;
  s.failures = 0;
}

// ---------------------------------------------------------------------------
// Receiver

struct ReceiverState {
  std::optional<NodeId> id_match;
  std::uint32_t time_wait = 0;
  /// Messages enqueued from the locked sender; dropped again if the lock
  /// turns out to be stale.
  std::vector<MessageId> locked_msgs;
};

struct RecvOutcome {
  bool legitimate = false;
  bool ack = false;
  bool enqueued = false;
  bool duplicate = false;
  bool dropped_full = false;
  bool end_received = false;
  bool stale_unlock = false;
  std::size_t stale_popped = 0;
};

inline bool is_legitimate(const ReceiverState& r, NodeId self, HopCount hop, NodeId src, const DataPayload& d) {
  if (!(d.src_hop > hop)) {
    return false;
  }
  if (r.id_match && *r.id_match != src) {
    return false;
  }
  return (d.src_id_next && *d.src_id_next == self) || (!d.src_id_next && !r.id_match);
}

/// Receiver handling of one decoded data frame. `msg` is the on-air copy; a
/// legitimate new message is appended to `queue` with `self` added to its path.
inline RecvOutcome receiver_on_data(ReceiverState& r, std::deque<Message>& queue,
                                    std::unordered_set<MessageId>& seen, NodeId self, HopCount hop, NodeId src,
                                    const DataPayload& d, const Message& msg, const ForwardingParams& params) {
  RecvOutcome out;
  if (r.id_match && *r.id_match == src && d.src_id_next && *d.src_id_next != self) {
    // The locked sender has matched someone else.
    for (MessageId id : r.locked_msgs) {
      auto it = std::find_if(queue.begin(), queue.end(), [id](const Message& m) { return m.id == id; });
      if (it != queue.end()) {
        queue.erase(it);
        seen.erase(id);
        ++out.stale_popped;
      }
    }
    r.locked_msgs.clear();
    r.id_match.reset();
    r.time_wait = 0;
    out.stale_unlock = true;
    return out;
  }
  if (!is_legitimate(r, self, hop, src, d)) {
    return out;
  }
  out.legitimate = true;
  if (seen.count(d.msg_id) != 0) {
    out.duplicate = true;
  } else if (queue.size() >= params.q_max) {
    out.dropped_full = true;
    return out;
  } else {
    Message copy = msg;
    copy.path.push_back(self);
    queue.push_back(std::move(copy));
    seen.insert(d.msg_id);
    out.enqueued = true;
  }
  out.ack = true;
  if (d.is_start) {
    r.id_match = src;
    r.time_wait = 0;
    r.locked_msgs.clear();
  }
  if (r.id_match) {
    r.time_wait = 0;
    if (out.enqueued) {
      r.locked_msgs.push_back(d.msg_id);
    }
  }
  if (d.is_end) {
    r.id_match.reset();
    r.locked_msgs.clear();
    out.end_received = true;
  }
  return out;
}

/// End of a receiver wake. Counts idle wakes while locked, forces an unlock
/// after t + 1 of them, and reports whether the node should become a sender.
inline bool receiver_end_of_wake(ReceiverState& r, bool had_legitimate, std::size_t queue_size,
                                 const ForwardingParams& params, const ChargingSpec& spec) {
  if (r.id_match && !had_legitimate) {
    ++r.time_wait;
    if (r.time_wait > spec.cycle_len()) {
      r.id_match.reset();
      r.locked_msgs.clear();
      r.time_wait = 0;
    }
  }
  return !r.id_match && queue_size >= params.th;
}

}  // namespace icroute
