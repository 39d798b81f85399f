#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "icroute/core.hpp"
#include "icroute/radio.hpp"

namespace icroute {

enum class AreaShape { Square, Rectangle, Custom };

inline std::string to_string(AreaShape s) {
  switch (s) {
    case AreaShape::Square:
      return "square";
    case AreaShape::Rectangle:
      return "rectangle";
    case AreaShape::Custom:
      return "custom";
  }
  return "custom";
}

struct Area {
  double width = 0.0;
  double height = 0.0;
  AreaShape shape = AreaShape::Custom;

  bool contains(Position p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height; }
};

struct NodeSpec {
  NodeId id = 0;
  Position pos;
  WorkOffset initial_offset;
};

/// Immutable world description. `nodes[0]` is always the sink; IC node i is
/// stored at index i.
struct Scenario {
  std::vector<NodeSpec> nodes;
  ChargingSpec spec{1};
  double range_m = 10.0;
  std::uint64_t seed = 0;
  Area area;

  std::size_t size() const { return nodes.size(); }
  std::size_t ic_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  const NodeSpec& sink() const { return nodes.at(kSinkId); }

  void validate_layout() const {
    if (nodes.empty() || nodes[0].id != kSinkId) {
      throw std::invalid_argument("scenario must start with the sink at id 0");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id != i) {
        throw std::invalid_argument("node ids must be dense indices");
      }
      if (nodes[i].initial_offset.value > spec.t()) {
        throw std::invalid_argument("initial offset outside [0, t]");
      }
    }
  }
};

using Adjacency = std::vector<std::vector<NodeId>>;

inline Adjacency build_adjacency(const Scenario& sc) {
  const std::size_t n = sc.size();
  Adjacency adj(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (within_range(sc.nodes[a].pos, sc.nodes[b].pos, sc.range_m)) {
        adj[a].push_back(static_cast<NodeId>(b));
        adj[b].push_back(static_cast<NodeId>(a));
      }
    }
  }
  return adj;
}

/// Dense symmetric in-range matrix for the slot engine.
class RangeMatrix {
 public:
  explicit RangeMatrix(const Scenario& sc) : n_(sc.size()), bits_(n_ * n_, 0) {
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = 0; b < n_; ++b) {
        if (a != b && within_range(sc.nodes[a].pos, sc.nodes[b].pos, sc.range_m)) {
          bits_[a * n_ + b] = 1;
        }
      }
    }
  }

  bool operator()(NodeId a, NodeId b) const { return bits_[a * n_ + b] != 0; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

/// Breadth-first hop distances from `root`; kInfiniteHop for unreachable nodes.
inline std::vector<HopCount> bfs_distances(const Adjacency& adj, NodeId root) {
  std::vector<HopCount> dist(adj.size(), kInfiniteHop);
  std::queue<NodeId> todo;
  dist[root] = 0;
  todo.push(root);
  while (!todo.empty()) {
    const NodeId u = todo.front();
    todo.pop();
    for (NodeId v : adj[u]) {
      if (dist[v] == kInfiniteHop) {
        dist[v] = dist[u] + 1;
        todo.push(v);
      }
    }
  }
  return dist;
}

inline bool connected_to_sink(const Scenario& sc) {
  const auto dist = bfs_distances(build_adjacency(sc), kSinkId);
  for (HopCount d : dist) {
    if (d == kInfiniteHop) {
      return false;
    }
  }
  return true;
}

}  // namespace icroute
