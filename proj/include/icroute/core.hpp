#pragma once

// Slot arithmetic, node identity, working-time offsets and on-air frames.
//
// Time is a global grid of aligned slots. A node charges for t slots and is
// awake for exactly one slot per charging cycle of t + 1 slots; the position
// of that slot inside the cycle is its working-time offset.

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace icroute {

using NodeId = std::uint32_t;
using Slot = std::uint64_t;
using MessageId = std::uint64_t;
using HopCount = std::uint32_t;

/// The sink always carries id 0; IC nodes are numbered 1..n.
inline constexpr NodeId kSinkId = 0;
inline constexpr HopCount kInfiniteHop = std::numeric_limits<HopCount>::max();

class ChargingSpec {
 public:
  explicit ChargingSpec(std::uint32_t t) : t_(t) {
    if (t_ == 0) {
      throw std::invalid_argument("charging time t must be >= 1 slot");
    }
  }

  std::uint32_t t() const { return t_; }
  /// t charging slots followed by one working slot.
  Slot cycle_len() const { return static_cast<Slot>(t_) + 1; }

  friend bool operator==(const ChargingSpec&, const ChargingSpec&) = default;

 private:
  std::uint32_t t_;
};

struct WorkOffset {
  std::uint32_t value = 0;

  friend auto operator<=>(const WorkOffset&, const WorkOffset&) = default;
};

inline Slot cycle_length(const ChargingSpec& spec) { return spec.cycle_len(); }

inline WorkOffset make_offset(std::uint64_t value, const ChargingSpec& spec) {
  if (value > spec.t()) {
    throw std::out_of_range("work offset " + std::to_string(value) + " outside [0, " +
                            std::to_string(spec.t()) + "]");
  }
  return WorkOffset{static_cast<std::uint32_t>(value)};
}

/// Offset (modulo t + 1) reduced from an arbitrary integer.
inline WorkOffset wrap_offset(std::uint64_t value, const ChargingSpec& spec) {
  return WorkOffset{static_cast<std::uint32_t>(value % spec.cycle_len())};
}

inline bool is_working(WorkOffset offset, const ChargingSpec& spec, Slot now) {
  return now % spec.cycle_len() == offset.value;
}

/// Delays the working slot by one; wraps from t back to 0.
inline WorkOffset delay_offset(WorkOffset offset, const ChargingSpec& spec) {
  return wrap_offset(static_cast<std::uint64_t>(offset.value) + 1, spec);
}

inline Slot cycle_of(Slot now, const ChargingSpec& spec) { return now / spec.cycle_len(); }
inline Slot cycle_start(Slot cycle, const ChargingSpec& spec) { return cycle * spec.cycle_len(); }

/// First cycle boundary at or after `slot`.
inline Slot ceil_to_cycle(Slot slot, const ChargingSpec& spec) {
  const Slot len = spec.cycle_len();
  return (slot + len - 1) / len * len;
}

// ---------------------------------------------------------------------------
// Frames

struct HopCountPayload {
  /// kInfiniteHop marks an active probe from a node without a hop count.
  HopCount hop = 0;
  std::uint32_t round = 0;
};

struct DataPayload {
  MessageId msg_id = 0;
  NodeId origin = 0;
  std::uint32_t seq = 0;
  Slot created_at = 0;
  bool is_start = false;
  bool is_end = false;
  HopCount src_hop = 0;
  /// Unset while the sender searches for any lower-hop neighbor.
  std::optional<NodeId> src_id_next;
};

struct AckPayload {
  NodeId ack_dst = 0;
  /// Hop count of the acknowledging node (used by topology probing).
  HopCount responder_hop = kInfiniteHop;
};

using Payload = std::variant<HopCountPayload, DataPayload, AckPayload>;

struct Frame {
  NodeId src = 0;
  std::optional<NodeId> dst;  // nullopt = broadcast
  Payload payload;
  std::uint32_t jitter = 0;

  bool is_hop_count() const { return std::holds_alternative<HopCountPayload>(payload); }
  bool is_data() const { return std::holds_alternative<DataPayload>(payload); }
  bool is_ack() const { return std::holds_alternative<AckPayload>(payload); }
};

inline Frame make_hop_frame(NodeId src, HopCount hop, std::uint32_t round, const ChargingSpec& spec) {
  if (round > spec.t()) {
    throw std::out_of_range("hop-count round outside [0, t]");
  }
  return Frame{src, std::nullopt, HopCountPayload{hop, round}, 0};
}

inline std::string hop_to_string(HopCount hop) {
  return hop == kInfiniteHop ? std::string("inf") : std::to_string(hop);
}

}  // namespace icroute
