#pragma once

// Unit-disk propagation and the per-slot collision rule.
//
// Every frame in a slot carries a jitter value in [0, M). A listener decodes
// the in-range frame with the strictly smallest jitter; a tie at the minimum
// destroys all of them for that listener. A node that transmits in a slot
// decodes nothing in that slot.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "icroute/core.hpp"

namespace icroute {

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Boundary inclusive. Compared on squared distance so integer-valued
/// coordinates on the boundary are exact.
inline bool within_range(Position a, Position b, double range_m) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy <= range_m * range_m;
}

struct RadioConfig {
  std::uint32_t micro_slots = 16;
  bool ack_in_same_slot = true;

  void validate() const {
    if (micro_slots < 2) {
      throw std::invalid_argument("radio micro_slots must be >= 2");
    }
    if (!ack_in_same_slot) {
      throw std::invalid_argument("only same-slot acknowledgments are supported");
    }
  }
};

struct Transmission {
  Frame frame;
  Position pos;
};

struct Listener {
  NodeId id = 0;
  Position pos;
};

struct DecodeResult {
  NodeId listener = 0;
  /// Index into the transmission list of the decoded frame.
  std::optional<std::size_t> decoded;
  /// At least one in-range frame was heard but the minimum jitter was shared.
  bool collision = false;
  /// Number of in-range frames heard in this slot.
  std::size_t heard = 0;
};

/// Collision rule for one listener. `in_range(i)` reports whether frame i
/// reaches the listener.
template <typename InRange>
DecodeResult resolve_for_listener(NodeId listener, std::span<const Frame> frames, InRange&& in_range) {
  DecodeResult out{listener, std::nullopt, false, 0};
  std::uint32_t best = 0;
  std::size_t best_count = 0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].src == listener) {
      // half-duplex
      return DecodeResult{listener, std::nullopt, false, 0};
    }
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!in_range(i)) {
      continue;
    }
    ++out.heard;
    const std::uint32_t j = frames[i].jitter;
    if (best_count == 0 || j < best) {
      best = j;
      best_count = 1;
      best_index = i;
    } else if (j == best) {
      ++best_count;
    }
  }
  if (best_count == 1) {
    out.decoded = best_index;
  } else if (best_count > 1) {
    out.collision = true;
  }
  return out;
}

/// Resolves one slot for every listener, positions given explicitly.
inline std::vector<DecodeResult> resolve_slot(std::span<const Transmission> transmissions,
                                              std::span<const Listener> listeners, double range_m,
                                              const RadioConfig& cfg) {
  cfg.validate();
  std::vector<Frame> frames;
  frames.reserve(transmissions.size());
  for (const auto& tx : transmissions) {
    if (tx.frame.jitter >= cfg.micro_slots) {
      throw std::out_of_range("frame jitter outside [0, M)");
    }
    frames.push_back(tx.frame);
  }
  std::vector<DecodeResult> out;
  out.reserve(listeners.size());
  for (const auto& l : listeners) {
    out.push_back(resolve_for_listener(l.id, frames, [&](std::size_t i) {
      return within_range(transmissions[i].pos, l.pos, range_m);
    }));
  }
  return out;
}

}  // namespace icroute
