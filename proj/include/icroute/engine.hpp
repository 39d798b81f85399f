#pragma once

// Slot engine. Every node wakes once per cycle; the engine walks cycles,
// sorts the awake nodes by wake slot and resolves each occupied slot in two
// phases (frames, then acknowledgments). Slots in which nobody is awake are
// skipped.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "icroute/baselines.hpp"
#include "icroute/core.hpp"
#include "icroute/forwarding.hpp"
#include "icroute/metrics.hpp"
#include "icroute/radio.hpp"
#include "icroute/rng.hpp"
#include "icroute/scenario.hpp"
#include "icroute/topology.hpp"
#include "icroute/workload.hpp"

namespace icroute {

struct NodeKill {
  NodeId node = 0;
  Slot at = 0;
};

/// Acknowledgments addressed to `node` are lost during [from, to).
struct AckDrop {
  NodeId node = 0;
  Slot from = 0;
  Slot to = 0;
};

struct FaultPlan {
  std::vector<NodeKill> kills;
  std::vector<AckDrop> ack_drops;

  bool alive(NodeId n, Slot now) const {
    for (const auto& k : kills) {
      if (k.node == n && now >= k.at) {
        return false;
      }
    }
    return true;
  }

  bool ack_lost(NodeId n, Slot now) const {
    for (const auto& d : ack_drops) {
      if (d.node == n && now >= d.from && now < d.to) {
        return true;
      }
    }
    return false;
  }

  bool empty() const { return kills.empty() && ack_drops.empty(); }
};

struct RunConfig {
  StrategyTag strategy = StrategyTag::RICS;
  /// Messages per node; 0 runs topology construction only.
  std::uint32_t rounds = 0;
  /// Horizon; 0 picks one from the scenario size.
  Slot max_slots = 0;
  bool trace = false;
  /// Seed for jitter and random next hops; defaults to the scenario seed.
  std::optional<std::uint64_t> seed;
  TopoParams topo{0, WaitMode::Rounds};
  ForwardingParams fwd;
  RadioConfig radio;
  FaultPlan faults;
  /// Consecutive failures after which an OTPS sender probes for a new next
  /// hop; 0 means t + 1.
  std::uint32_t otps_trigger = 0;
};

enum class RunStatus { Ok, DidNotConverge };

inline const char* to_string(RunStatus s) { return s == RunStatus::Ok ? "ok" : "did not converge"; }

struct RunResult {
  RunStatus status = RunStatus::Ok;
  TopologyResult topology;
  RunMetrics metrics;
  EventTrace trace;
  /// Message ids still held in some queue or pending buffer at the horizon.
  std::vector<MessageId> resident;
  std::vector<WorkOffset> final_wake_offsets;
  std::vector<Role> final_roles;
};

namespace detail {

struct NodeRt {
  TopoState topo;
  Role role = Role::Receiver;
  SenderState snd;
  ReceiverState rcv;
  std::deque<Message> queue;
  std::deque<Message> pending;
  std::unordered_set<MessageId> seen;
  Slot recover_until = 0;
  Slot role_since = 0;
  std::vector<NeighborHop> heard;
  RngStream jitter;
  RngStream ack_jitter;
  RngStream rncs;
  WorkOffset wake;
};

struct Emission {
  NodeId node = 0;
  Frame frame;
};

class Engine {
 public:
  Engine(const Scenario& sc, const RunConfig& cfg)
      : sc_(sc),
        cfg_(cfg),
        spec_(sc.spec),
        len_(sc.spec.cycle_len()),
        range_(sc),
        policy_(policy_for(cfg.strategy)),
        trace_(cfg.trace) {
    sc_.validate_layout();
    cfg_.radio.validate();
    cfg_.fwd.validate();
    if (cfg_.topo.n_maxhop == 0) {
      cfg_.topo.n_maxhop = static_cast<std::uint32_t>(std::max<std::size_t>(1, sc_.size()));
    }
    cfg_.topo.validate();
    const std::uint64_t seed = cfg_.seed.value_or(sc_.seed);
    nodes_.resize(sc_.size());
    for (NodeId i = 0; i < sc_.size(); ++i) {
      NodeRt& n = nodes_[i];
      n.topo = i == kSinkId ? sink_topo_state() : initial_topo_state(sc_.nodes[i].initial_offset);
      n.jitter = derive_rng_stream(seed, i, "jitter");
      n.ack_jitter = derive_rng_stream(seed, i, "ackjitter");
      n.rncs = derive_rng_stream(seed, i, "rncs");
      n.wake = sc_.nodes[i].initial_offset;
    }
  }

  RunResult run() {
    const Slot topo_horizon = cfg_.max_slots != 0 ? cfg_.max_slots : default_topology_horizon();
    const bool converged = run_topology(topo_horizon);
    RunResult res;
    res.status = converged ? RunStatus::Ok : RunStatus::DidNotConverge;
    if (converged && cfg_.rounds > 0) {
      const Slot horizon = cfg_.max_slots != 0 ? cfg_.max_slots : default_forwarding_horizon();
      run_forwarding(horizon);
    }
    res.topology = topology_result();
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      for (const auto& m : nodes_[i].queue) res.resident.push_back(m.id);
      for (const auto& m : nodes_[i].pending) res.resident.push_back(m.id);
      if (nodes_[i].topo.phase == TopoPhase::Unreachable) ++metrics_.unreachable;
    }
    std::sort(res.resident.begin(), res.resident.end());
    for (const auto& n : nodes_) {
      res.final_wake_offsets.push_back(n.wake);
      res.final_roles.push_back(n.role);
    }
    trace_.finish();
    res.metrics = std::move(metrics_);
    res.trace = std::move(trace_);
    return res;
  }

 private:
  // Room for one fallback window plus a repair wave across the network.
  Slot default_topology_horizon() const {
    return 2 * len_ * (len_ + 1) * (static_cast<Slot>(cfg_.topo.n_maxhop) + 1);
  }

  Slot default_forwarding_horizon() const {
    const Slot work = static_cast<Slot>(cfg_.rounds) * sc_.ic_count() + 20;
    return metrics_.forwarding_start + 2 * len_ * len_ * work + len_ * cfg_.rounds;
  }

  bool alive(NodeId n, Slot now) const { return n == kSinkId || cfg_.faults.alive(n, now); }

  std::uint32_t draw_jitter(NodeRt& n) { return static_cast<std::uint32_t>(n.jitter.uniform(cfg_.radio.micro_slots)); }
  std::uint32_t draw_ack_jitter(NodeRt& n) {
    return static_cast<std::uint32_t>(n.ack_jitter.uniform(cfg_.radio.micro_slots));
  }

  /// Decodes for one listener among `frames`.
  DecodeResult decode(NodeId listener, const std::vector<Emission>& em, std::vector<Frame>& scratch) const {
    scratch.clear();
    for (const auto& e : em) scratch.push_back(e.frame);
    return resolve_for_listener(listener, std::span<const Frame>(scratch),
                                [&](std::size_t i) { return range_(em[i].node, listener); });
  }

  TopologyResult topology_result() const {
    TopologyResult r;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      r.hop.push_back(nodes_[i].topo.hop);
      r.next_hop.push_back(nodes_[i].topo.next_hop);
      r.converged_at.push_back(nodes_[i].topo.converged_at);
      r.unreachable.push_back(nodes_[i].topo.phase == TopoPhase::Unreachable);
    }
    return r;
  }

  // -------------------------------------------------------------------------
  // Topology construction

  bool topology_done(Slot next_cycle_start) const {
    if (next_cycle_start < sink_schedule(spec_).transmit_end) {
      return false;
    }
    for (NodeId i = 1; i < nodes_.size(); ++i) {
      if (!alive(i, next_cycle_start)) continue;
      if (!topo_settled(nodes_[i].topo)) return false;
    }
    return true;
  }

  bool run_topology(Slot horizon) {
    const SinkSchedule sink = sink_schedule(spec_);
    std::vector<std::pair<std::uint32_t, NodeId>> order;
    std::vector<Emission> em;
    std::vector<Emission> acks;
    std::vector<NodeId> listeners;
    std::vector<Frame> scratch;
    Slot last_emission = 0;
    for (Slot cycle = 0;; ++cycle) {
      const Slot base = cycle_start(cycle, spec_);
      if (base >= horizon) {
        metrics_.end_slot = horizon;
        return false;
      }
      order.clear();
      for (NodeId i = 1; i < nodes_.size(); ++i) {
        nodes_[i].wake = topo_wake_offset(nodes_[i].topo, cycle, spec_);
        order.emplace_back(nodes_[i].wake.value, i);
      }
      // Sink transmission slots inside this cycle.
      for (Slot s = std::max(base, sink.transmit_begin); s < std::min(base + len_, sink.transmit_end); ++s) {
        order.emplace_back(static_cast<std::uint32_t>(s - base), kSinkId);
      }
      std::sort(order.begin(), order.end());
      std::size_t k = 0;
      while (k < order.size()) {
        const std::uint32_t off = order[k].first;
        const Slot now = base + off;
        if (now >= horizon) break;
        std::vector<NodeId> awake;
        bool sink_tx = false;
        while (k < order.size() && order[k].first == off) {
          if (order[k].second == kSinkId) {
            sink_tx = true;
          } else if (alive(order[k].second, now)) {
            awake.push_back(order[k].second);
          }
          ++k;
        }
        topology_slot(now, awake, sink_tx, sink, em, acks, listeners, scratch, last_emission);
      }
      const Slot next = base + len_;
      if (topology_done(next)) {
        Slot latest = 0;
        for (NodeId i = 1; i < nodes_.size(); ++i) {
          if (nodes_[i].topo.hop != kInfiniteHop) latest = std::max(latest, nodes_[i].topo.converged_at);
        }
        metrics_.topo_time_slots = latest;
        metrics_.topo_done_slots = last_emission + 1;
        metrics_.forwarding_start = next;
        metrics_.end_slot = next;
        return true;
      }
    }
  }

  void topology_slot(Slot now, const std::vector<NodeId>& awake, bool sink_tx, const SinkSchedule& sink,
                     std::vector<Emission>& em, std::vector<Emission>& acks, std::vector<NodeId>& listeners,
                     std::vector<Frame>& scratch, Slot& last_emission) {
    em.clear();
    acks.clear();
    listeners.clear();
    if (sink_tx) {
      if (auto r = sink.round_at(now)) {
        Frame f = make_hop_frame(kSinkId, 0, *r, spec_);
        f.jitter = draw_jitter(nodes_[kSinkId]);
        em.push_back(Emission{kSinkId, f});
        trace_.add(now, kSinkId, TraceKind::Tx, "hop=0 round=" + std::to_string(*r));
      }
    }
    for (NodeId i : awake) {
      NodeRt& n = nodes_[i];
      if (n.topo.phase == TopoPhase::Listening && n.topo.hop == kInfiniteHop) {
        if (listen_fallback(n.topo, now, spec_, cfg_.topo)) {
          ++metrics_.fallback_fired;
          trace_.add(now, i, TraceKind::State, "fallback probing");
        }
      }
      if (broadcast_due(n.topo, now)) {
        auto out = broadcast_step(n.topo, i, now, spec_);
        n.topo = out.state;
        if (out.emission) {
          out.emission->jitter = draw_jitter(n);
          em.push_back(Emission{i, *out.emission});
          last_emission = std::max(last_emission, now);
          trace_.add(now, i, TraceKind::Tx,
                     "hop=" + hop_to_string(n.topo.hop) + " round=" + std::to_string(n.topo.round));
          continue;
        }
      } else if (n.topo.phase == TopoPhase::Probing) {
        Frame f = probe_frame(i, spec_);
        f.jitter = draw_jitter(n);
        em.push_back(Emission{i, f});
        trace_.add(now, i, TraceKind::Tx, "probe attempt=" + std::to_string(n.topo.probe_attempts));
        continue;
      }
      listeners.push_back(i);
    }
    if (em.empty()) {
      return;
    }
    if (!sink_tx) {
      listeners.push_back(kSinkId);
    }
    for (NodeId l : listeners) {
      const DecodeResult d = decode(l, em, scratch);
      if (d.collision) {
        ++metrics_.collisions;
        trace_.add(now, l, TraceKind::Collision, "heard=" + std::to_string(d.heard));
      }
      if (!d.decoded) continue;
      const Emission& e = em[*d.decoded];
      const auto& hc = std::get<HopCountPayload>(e.frame.payload);
      NodeRt& n = nodes_[l];
      if (hc.hop == kInfiniteHop) {
        if (n.topo.hop != kInfiniteHop) {
          Frame a{l, e.node, AckPayload{e.node, n.topo.hop}, draw_ack_jitter(n)};
          acks.push_back(Emission{l, a});
        }
        continue;
      }
      if (l == kSinkId) continue;
      n.heard.push_back(NeighborHop{e.node, hc.hop});
      const HopCount before = n.topo.hop;
      auto out = on_hop_frame(n.topo, e.frame, now, spec_, cfg_.topo);
      n.topo = out.state;
      if (out.protocol_error) ++metrics_.protocol_errors;
      if (out.updated) {
        trace_.add(now, l, TraceKind::Rx,
                   "hop " + hop_to_string(before) + "->" + hop_to_string(n.topo.hop) + " via " +
                       std::to_string(e.node) + " round=" + std::to_string(hc.round));
      }
      if (out.ack) {
        Frame a{l, e.node, AckPayload{e.node, n.topo.hop}, draw_ack_jitter(n)};
        acks.push_back(Emission{l, a});
      }
    }
    // Only probing nodes act on acknowledgments during construction.
    for (const auto& e : em) {
      if (e.node == kSinkId) continue;
      NodeRt& n = nodes_[e.node];
      if (n.topo.phase != TopoPhase::Probing) continue;
      std::optional<Frame> got;
      if (!acks.empty() && !cfg_.faults.ack_lost(e.node, now)) {
        const DecodeResult d = decode(e.node, acks, scratch);
        if (d.collision) ++metrics_.ack_collisions;
        if (d.decoded) got = acks[*d.decoded].frame;
      }
      const bool was_unknown = n.topo.hop == kInfiniteHop;
      n.topo = probe_on_ack(n.topo, e.node, got, now, spec_);
      if (got && was_unknown && n.topo.hop != kInfiniteHop) {
        const auto& a = std::get<AckPayload>(got->payload);
        n.heard.push_back(NeighborHop{got->src, a.responder_hop});
        trace_.add(now, e.node, TraceKind::State, "probe matched hop=" + hop_to_string(n.topo.hop));
      } else if (n.topo.phase == TopoPhase::Unreachable) {
        trace_.add(now, e.node, TraceKind::State, "unreachable");
      }
    }
  }

  // -------------------------------------------------------------------------
  // Forwarding

  std::optional<NodeId> draw_next(NodeId i) {
    NodeRt& n = nodes_[i];
    return rncs_next_hop(n.heard, n.topo.hop, n.rncs);
  }

  WorkOffset forwarding_wake(NodeId i) const {
    const NodeRt& n = nodes_[i];
    if (n.role == Role::Sender) {
      return sender_wake_offset(n.snd, n.topo.base_offset, spec_);
    }
    return n.topo.base_offset;
  }

  void flush_pending(NodeRt& n) {
    while (!n.pending.empty() && n.queue.size() < cfg_.fwd.q_max) {
      n.seen.insert(n.pending.front().id);
      n.queue.push_back(std::move(n.pending.front()));
      n.pending.pop_front();
    }
  }

  void enter_sender(NodeId i, Slot now) {
    NodeRt& n = nodes_[i];
    n.role = Role::Sender;
    n.role_since = now;
    std::optional<NodeId> drawn;
    if (policy_.next_hop == NextHopChoice::Random && !n.snd.flag_match && !n.snd.rescanning) {
      drawn = draw_next(i);
    }
    begin_batch(n.snd, policy_, n.topo.next_hop, drawn);
    n.snd.scan_started_at = now;
    trace_.add(now, i, TraceKind::State,
               std::string("sender target=") + (n.snd.target ? std::to_string(*n.snd.target) : "any") +
                   (n.snd.flag_match ? " cached=" + std::to_string(n.snd.offset_forth) : ""));
  }

  void leave_sender(NodeId i, Slot now, const char* why) {
    NodeRt& n = nodes_[i];
    n.role = Role::Receiver;
    n.role_since = now;
    trace_.add(now, i, TraceKind::State, std::string("receiver (") + why + ")");
  }

  struct Tx {
    NodeId node;
    Frame frame;
    bool is_end;
    bool scan;
  };

  void run_forwarding(Slot horizon) {
    const Slot start = metrics_.forwarding_start;
    const Slot first_cycle = start / len_;
    std::vector<WorkOffset> bases;
    std::vector<bool> skip;
    for (const auto& n : nodes_) {
      bases.push_back(n.topo.base_offset);
      skip.push_back(n.topo.hop == kInfiniteHop);
    }
    for (const WorkloadItem& w : message_workload(start, cfg_.rounds, bases, spec_, skip)) {
      MessageRecord r;
      r.id = w.msg_id;
      r.origin = w.node;
      r.seq = w.round;
      r.created_at = w.created_at;
      r.path = {w.node};
      metrics_.messages.push_back(r);
    }
    const std::size_t total = metrics_.messages.size();
    std::vector<std::size_t> next_gen(nodes_.size(), 0);
    std::vector<std::vector<MessageId>> gen_of(nodes_.size());
    for (const auto& m : metrics_.messages) gen_of[m.origin].push_back(m.id);

    std::size_t delivered = 0;
    // (offset, kind, node): kind 0 = message creation, 1 = wake.
    std::vector<std::tuple<std::uint32_t, int, NodeId>> order;
    std::vector<Tx> txs;
    std::vector<Emission> em;
    std::vector<Emission> acks;
    std::vector<NodeId> listeners;
    std::vector<Frame> scratch;
    std::vector<std::optional<Message>> onair;
    std::vector<std::uint8_t> legit(nodes_.size(), 0);

    for (Slot cycle = first_cycle;; ++cycle) {
      const Slot base = cycle_start(cycle, spec_);
      if (base >= horizon || (delivered == total && cycle >= first_cycle + cfg_.rounds)) {
        metrics_.end_slot = std::min(base, horizon);
        break;
      }
      order.clear();
      for (NodeId i = 1; i < nodes_.size(); ++i) {
        NodeRt& n = nodes_[i];
        if (n.topo.hop == kInfiniteHop) continue;
        n.wake = forwarding_wake(i);
        order.emplace_back(n.wake.value, 1, i);
        if (next_gen[i] < gen_of[i].size() && metrics_.messages[gen_of[i][next_gen[i]]].created_at < base + len_) {
          order.emplace_back(n.topo.base_offset.value, 0, i);
        }
      }
      std::sort(order.begin(), order.end());
      std::size_t k = 0;
      while (k < order.size()) {
        const std::uint32_t off = std::get<0>(order[k]);
        const Slot now = base + off;
        if (now >= horizon) break;
        std::vector<NodeId> awake;
        while (k < order.size() && std::get<0>(order[k]) == off) {
          const auto [o, kind, i] = order[k];
          ++k;
          if (!alive(i, now)) continue;
          if (kind == 0) {
            const MessageRecord& r = metrics_.messages[gen_of[i][next_gen[i]++]];
            nodes_[i].pending.push_back(Message{r.id, r.origin, r.seq, r.created_at, r.path});
            flush_pending(nodes_[i]);
          } else {
            awake.push_back(i);
          }
        }
        if (!awake.empty()) {
          forwarding_slot(now, awake, txs, em, acks, listeners, scratch, onair, legit, delivered);
        }
      }
    }
  }

  void forwarding_slot(Slot now, const std::vector<NodeId>& awake, std::vector<Tx>& txs, std::vector<Emission>& em,
                       std::vector<Emission>& acks, std::vector<NodeId>& listeners, std::vector<Frame>& scratch,
                       std::vector<std::optional<Message>>& onair, std::vector<std::uint8_t>& legit,
                       std::size_t& delivered) {
    txs.clear();
    em.clear();
    acks.clear();
    listeners.clear();
    onair.clear();
    for (NodeId i : awake) {
      NodeRt& n = nodes_[i];
      flush_pending(n);
      if (n.role != Role::Sender) {
        if (n.wake.value != n.topo.base_offset.value) ++metrics_.pendulum_violations;
        listeners.push_back(i);
        continue;
      }
      SenderEmit out = sender_emit(n.snd, n.queue, n.topo.hop, spec_);
      if (out.event == SendEvent::QueueEmpty) {
        end_batch(n.snd, policy_);
        leave_sender(i, now, "queue empty");
        continue;
      }
      if (out.event == SendEvent::Exhausted) {
        on_exhausted(n.snd, policy_);
        leave_sender(i, now, "scan exhausted");
        continue;
      }
      if (out.scan_attempt) {
        ++metrics_.scan_attempts;
        if (n.snd.ever_matched) ++metrics_.resync_attempts;
      }
      Frame f{i, out.dst, *out.payload, draw_jitter(n)};
      trace_.add(now, i, TraceKind::Tx,
                 "data msg=" + std::to_string(out.payload->msg_id) + " to=" +
                     (out.dst ? std::to_string(*out.dst) : std::string("any")) +
                     (out.payload->is_start ? " start" : "") + (out.payload->is_end ? " end" : "") +
                     (out.scan_attempt ? " scan=" + std::to_string(n.snd.offset_forth) : ""));
      txs.push_back(Tx{i, f, out.payload->is_end, out.scan_attempt});
      em.push_back(Emission{i, f});
      onair.emplace_back(n.queue.front());
    }
    if (!em.empty()) {
      listeners.push_back(kSinkId);
    }
    for (NodeId l : listeners) legit[l] = 0;
    for (NodeId l : listeners) {
      if (em.empty()) break;
      const DecodeResult d = decode(l, em, scratch);
      if (d.collision) {
        ++metrics_.collisions;
        trace_.add(now, l, TraceKind::Collision, "heard=" + std::to_string(d.heard));
      }
      if (!d.decoded) continue;
      const Emission& e = em[*d.decoded];
      const auto& data = std::get<DataPayload>(e.frame.payload);
      const Message& msg = *onair[*d.decoded];
      if (l == kSinkId) {
        if (data.src_hop == 0 || (data.src_id_next && *data.src_id_next != kSinkId)) continue;
        MessageRecord& rec = metrics_.messages[data.msg_id];
        if (!rec.delivered_at) {
          rec.delivered_at = now;
          rec.path = msg.path;
          ++delivered;
          trace_.add(now, kSinkId, TraceKind::Rx, "deliver msg=" + std::to_string(data.msg_id));
        } else {
          ++metrics_.duplicates_at_sink;
        }
        acks.push_back(Emission{kSinkId, Frame{kSinkId, e.node, AckPayload{e.node, 0}, draw_ack_jitter(nodes_[0])}});
        continue;
      }
      NodeRt& n = nodes_[l];
      const RecvOutcome r =
          receiver_on_data(n.rcv, n.queue, n.seen, l, n.topo.hop, e.node, data, msg, cfg_.fwd);
      if (r.stale_unlock) {
        ++metrics_.stale_unlocks;
        trace_.add(now, l, TraceKind::State,
                   "stale lock on " + std::to_string(e.node) + " popped=" + std::to_string(r.stale_popped));
      }
      if (r.dropped_full) ++metrics_.drops_queue_full;
      if (r.duplicate) ++metrics_.duplicate_receptions;
      if (r.legitimate) legit[l] = 1;
      if (r.enqueued) {
        trace_.add(now, l, TraceKind::Rx, "msg=" + std::to_string(data.msg_id) + " from " + std::to_string(e.node));
      }
      if (r.ack) {
        acks.push_back(Emission{l, Frame{l, e.node, AckPayload{e.node, n.topo.hop}, draw_ack_jitter(n)}});
      }
    }
    // Acknowledgment phase.
    for (std::size_t t = 0; t < txs.size(); ++t) {
      const NodeId i = txs[t].node;
      NodeRt& n = nodes_[i];
      std::optional<NodeId> ack_src;
      const AckPayload* ack = nullptr;
      if (!acks.empty() && !cfg_.faults.ack_lost(i, now)) {
        const DecodeResult d = decode(i, acks, scratch);
        if (d.collision) ++metrics_.ack_collisions;
        if (d.decoded) {
          ack_src = acks[*d.decoded].node;
          ack = &std::get<AckPayload>(acks[*d.decoded].frame.payload);
        }
      }
      const auto& data = std::get<DataPayload>(txs[t].frame.payload);
      const std::uint32_t attempts_before = n.snd.attempt_send;
      const AckOutcome out = sender_on_ack(n.snd, n.queue, i, ack_src, ack, txs[t].is_end, spec_,
                                             cfg_.strategy == StrategyTag::OTPS ? cfg_.otps_trigger : 0);
      switch (out.event) {
        case AckEvent::Success: {
          metrics_.sends.push_back(SendLog{now, i, *ack_src, data.msg_id, data.is_start, data.is_end});
          if (out.newly_matched) {
            metrics_.sync_latencies.push_back(now - n.snd.scan_started_at);
            metrics_.scan_cycles.push_back(attempts_before == 0 ? 0 : attempts_before - 1);
            trace_.add(now, i, TraceKind::State,
                       "matched " + std::to_string(*ack_src) + " forth=" + std::to_string(n.snd.offset_forth));
          }
          if (n.queue.empty()) {
            flush_pending(n);
          }
          if (n.queue.empty()) {
            end_batch(n.snd, policy_);
            leave_sender(i, now, "batch done");
          }
          break;
        }
        case AckEvent::Fail:
          break;
        case AckEvent::Exhausted:
          on_exhausted(n.snd, policy_);
          leave_sender(i, now, "scan exhausted");
          break;
        case AckEvent::MatchLost: {
          ++metrics_.lost_matches;
          std::optional<NodeId> redraw;
          if (policy_.on_lost == LostMatchAction::Redraw) redraw = draw_next(i);
          const LostMatchPlan plan = on_lost_match(n.snd, policy_, now, spec_, cfg_.fwd, redraw);
          n.snd.scan_started_at = now;
          if (plan.role == Role::Recovering) {
            n.role = Role::Recovering;
            n.recover_until = plan.recover_until;
            trace_.add(now, i, TraceKind::State, "recovering until " + std::to_string(plan.recover_until));
          } else {
            trace_.add(now, i, TraceKind::State, "match lost, rescanning");
          }
          break;
        }
      }
    }
    // End of wake for listening nodes.
    for (NodeId l : listeners) {
      if (l == kSinkId) continue;
      NodeRt& n = nodes_[l];
      const bool go = receiver_end_of_wake(n.rcv, legit[l] != 0, n.queue.size(), cfg_.fwd, spec_);
      if (n.role == Role::Recovering) {
        if (now >= n.recover_until && go) {
          enter_sender(l, now);
        } else if (now >= n.recover_until && n.queue.empty()) {
          n.role = Role::Receiver;
        }
        continue;
      }
      if (go) enter_sender(l, now);
    }
  }

  Scenario sc_;
  RunConfig cfg_;
  ChargingSpec spec_;
  Slot len_;
  RangeMatrix range_;
  SenderPolicy policy_;
  std::vector<NodeRt> nodes_;
  RunMetrics metrics_;
  EventTrace trace_;
};

}  // namespace detail

/// Topology construction followed, when `cfg.rounds > 0`, by the forwarding
/// workload. Deterministic in (scenario, cfg).
inline RunResult run(const Scenario& scenario, const RunConfig& cfg) {
  detail::Engine engine(scenario, cfg);
  return engine.run();
}

}  // namespace icroute
