#pragma once

// Working-time synchronization between a sender and a reactive receiver.
//
// In cycle c of a scan the sender is awake at (origin + c) mod (t + 1); the
// receiver stays at its own offset. They meet after d = (o_r - o_s) mod (t+1)
// cycles, in the receiver's working slot of that cycle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icroute/core.hpp"
#include "icroute/rng.hpp"

namespace icroute {

struct SyncScanState {
  std::uint32_t attempts = 0;
  WorkOffset current_offset;
  WorkOffset origin_offset;
  bool matched = false;
  bool exhausted = false;
};

inline SyncScanState start_scan(WorkOffset origin) {
  SyncScanState s;
  s.current_offset = origin;
  s.origin_offset = origin;
  return s;
}

/// One scan attempt. `decoded_ack` says whether the attempt made in the
/// current cycle was acknowledged.
inline SyncScanState scan_step(SyncScanState s, bool decoded_ack, const ChargingSpec& spec) {
  if (s.matched) {
    throw std::logic_error("scan_step on a matched scan");
  }
  if (s.exhausted) {
    return s;
  }
  if (decoded_ack) {
    s.matched = true;
    return s;
  }
  ++s.attempts;
  s.current_offset = delay_offset(s.current_offset, spec);
  if (s.attempts >= spec.cycle_len()) {
    s.exhausted = true;
  }
  return s;
}

/// Number of cycles the scan needs before the two offsets align.
inline std::uint32_t scan_cycles(WorkOffset o_s, WorkOffset o_r, const ChargingSpec& spec) {
  const std::uint64_t len = spec.cycle_len();
  return static_cast<std::uint32_t>((o_r.value + len - o_s.value) % len);
}

/// First global slot (from slot 0) at which the scanning sender and the
/// receiver are both awake.
inline Slot closed_form_latency(WorkOffset o_s, WorkOffset o_r, const ChargingSpec& spec) {
  return static_cast<Slot>(scan_cycles(o_s, o_r, spec)) * spec.cycle_len() + o_r.value;
}

/// Slot-by-slot simulation of both nodes; nullopt if they never meet before
/// `horizon`.
inline std::optional<Slot> brute_force_sync_latency(WorkOffset o_s, WorkOffset o_r, const ChargingSpec& spec,
                                                    Slot horizon) {
  const Slot len = spec.cycle_len();
  for (Slot now = 0; now < horizon; ++now) {
    const Slot cycle = now / len;
    const bool sender_awake = now % len == (o_s.value + cycle) % len;
    const bool receiver_awake = now % len == o_r.value;
    if (sender_awake && receiver_awake) {
      return now;
    }
  }
  return std::nullopt;
}

inline double analytic_mean_latency(const ChargingSpec& spec) {
  const double t = spec.t();
  return t / 2.0 * (t + 1.0) + t / 2.0;
}

struct LatencyStats {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t samples = 0;
  std::size_t censored = 0;
};

inline LatencyStats summarize(const std::vector<double>& xs, std::size_t censored = 0) {
  LatencyStats st;
  st.samples = xs.size();
  st.censored = censored;
  if (xs.empty()) {
    return st;
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  st.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - st.mean) * (x - st.mean);
  }
  st.variance = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return st;
}

/// Closed-form latencies for `trials` offset pairs drawn uniformly from [0, t].
inline std::vector<double> scan_latency_samples(const ChargingSpec& spec, std::size_t trials, RngStream& rng) {
  std::vector<double> out;
  out.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    const WorkOffset o_s{static_cast<std::uint32_t>(rng.uniform(spec.cycle_len()))};
    const WorkOffset o_r{static_cast<std::uint32_t>(rng.uniform(spec.cycle_len()))};
    out.push_back(static_cast<double>(closed_form_latency(o_s, o_r, spec)));
  }
  return out;
}

inline double mean_scan_latency(const ChargingSpec& spec, std::size_t trials, RngStream& rng) {
  if (trials == 0) {
    throw std::invalid_argument("mean_scan_latency needs at least one trial");
  }
  return summarize(scan_latency_samples(spec, trials, rng)).mean;
}

// ---------------------------------------------------------------------------
// Geometric random-delay baseline: each cycle the sender delays by one slot
// with probability p and otherwise keeps its offset.

struct GeometricState {
  WorkOffset current_offset;
  std::uint64_t cycles = 0;
  bool matched = false;
};

inline void check_probability(double p, bool allow_degenerate) {
  const bool ok = allow_degenerate ? (p >= 0.0 && p <= 1.0) : (p > 0.0 && p < 1.0);
  if (!ok) {
    throw std::invalid_argument("geometric delay probability out of range");
  }
}

inline GeometricState geometric_baseline_step(GeometricState s, bool decoded_ack, double p, RngStream& rng,
                                              const ChargingSpec& spec, bool allow_degenerate = false) {
  check_probability(p, allow_degenerate);
  if (s.matched) {
    return s;
  }
  if (decoded_ack) {
    s.matched = true;
    return s;
  }
  ++s.cycles;
  if (rng.bernoulli(p)) {
    s.current_offset = delay_offset(s.current_offset, spec);
  }
  return s;
}

/// Latency of the geometric scan from slot 0; nullopt if no match within
/// `max_cycles`.
inline std::optional<Slot> geometric_latency(WorkOffset o_s, WorkOffset o_r, double p, RngStream& rng,
                                             const ChargingSpec& spec, std::uint64_t max_cycles,
                                             bool allow_degenerate = false) {
  GeometricState s{o_s, 0, false};
  for (std::uint64_t c = 0; c < max_cycles; ++c) {
    const bool aligned = s.current_offset == o_r;
    s = geometric_baseline_step(s, aligned, p, rng, spec, allow_degenerate);
    if (s.matched) {
      return c * spec.cycle_len() + o_r.value;
    }
  }
  return std::nullopt;
}

inline std::vector<double> geometric_latency_samples(const ChargingSpec& spec, double p, std::size_t trials,
                                                     RngStream& offsets, RngStream& coin, std::size_t* censored) {
  std::vector<double> out;
  out.reserve(trials);
  const std::uint64_t max_cycles = 1000ULL * spec.cycle_len();
  std::size_t lost = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const WorkOffset o_s{static_cast<std::uint32_t>(offsets.uniform(spec.cycle_len()))};
    const WorkOffset o_r{static_cast<std::uint32_t>(offsets.uniform(spec.cycle_len()))};
    auto lat = geometric_latency(o_s, o_r, p, coin, spec, max_cycles);
    if (lat) {
      out.push_back(static_cast<double>(*lat));
    } else {
      ++lost;
    }
  }
  if (censored != nullptr) {
    *censored = lost;
  }
  return out;
}

struct GeometricChoice {
  double p = 0.5;
  LatencyStats stats;
};

/// Grid search over p in {0.1, ..., 0.9} for the smallest latency variance.
inline GeometricChoice best_geometric_p(const ChargingSpec& spec, std::size_t trials, std::uint64_t seed) {
  GeometricChoice best;
  bool have = false;
  for (int k = 1; k <= 9; ++k) {
    const double p = k / 10.0;
    RngStream offsets = derive_rng_stream(seed, 0, "sync-offsets");
    RngStream coin = derive_rng_stream(seed, static_cast<NodeId>(k), "sync-geometric");
    std::size_t censored = 0;
    auto xs = geometric_latency_samples(spec, p, trials, offsets, coin, &censored);
    const LatencyStats st = summarize(xs, censored);
    if (!have || st.variance < best.stats.variance) {
      best = GeometricChoice{p, st};
      have = true;
    }
  }
  return best;
}

struct SyncSample {
  std::uint32_t t = 0;
  std::string mechanism;
  std::size_t trial = 0;
  Slot latency_slots = 0;
};

}  // namespace icroute
