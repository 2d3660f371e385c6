#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "distance_field.hpp"
#include "grid.hpp"
#include "path.hpp"
#include "reservation_table.hpp"

namespace mapf_lns {

// horizon = max(longest reserved arrival, d(start)) + width*height
template <HardConstraints Hard>
int default_horizon(const GridMap& map, const Hard& hard, int start_distance) {
  return std::max(hard.static_after(), start_distance) + map.size();
}

struct SoftPlan {
  Path path;
  int collisions = 0;
};

namespace detail {

// Placeholder soft layer: no penalties anywhere.
struct NoSoftConstraints {
  int vertex_penalty(Vertex, int) const { return 0; }
  int edge_penalty(Vertex, Vertex, int) const { return 0; }
  int future_visits(Vertex, int) const { return 0; }
  int static_after() const { return -1; }
};

// Best-g bookkeeping over (vertex, clamped time). Dense with generation
// stamps when the state space is small enough, hashed otherwise.
class StateTable {
 public:
  StateTable(int num_vertices, int time_slots) : nv_(num_vertices) {
    const std::uint64_t states = static_cast<std::uint64_t>(num_vertices) * static_cast<std::uint64_t>(time_slots);
    dense_ = states <= kDenseLimit;
    if (dense_) {
      Buffers& b = buffers();
      if (b.stamp.size() < states) {
        b.stamp.assign(states, 0);
        b.best.resize(states);
      }
      if (++b.generation == 0) {
        std::fill(b.stamp.begin(), b.stamp.end(), 0);
        b.generation = 1;
      }
    }
  }

  // Records g if it improves on the stored value.
  bool improve(Vertex v, int t, int g) {
    const std::uint64_t k = static_cast<std::uint64_t>(t) * nv_ + static_cast<std::uint64_t>(v);
    if (dense_) {
      Buffers& b = buffers();
      if (b.stamp[k] == b.generation && b.best[k] <= g) return false;
      b.stamp[k] = b.generation;
      b.best[k] = g;
      return true;
    }
    auto [it, inserted] = sparse_.try_emplace(k, g);
    if (!inserted) {
      if (it->second <= g) return false;
      it->second = g;
    }
    return true;
  }

  bool stale(Vertex v, int t, int g) const {
    const std::uint64_t k = static_cast<std::uint64_t>(t) * nv_ + static_cast<std::uint64_t>(v);
    if (dense_) return buffers().best[k] < g;
    return sparse_.at(k) < g;
  }

 private:
  static constexpr std::uint64_t kDenseLimit = 1u << 23;
  struct Buffers {
    std::vector<std::uint32_t> stamp;
    std::vector<int> best;
    std::uint32_t generation = 0;
  };
  static Buffers& buffers() {
    thread_local Buffers b;
    return b;
  }

  std::uint64_t nv_;
  bool dense_ = false;
  std::unordered_map<std::uint64_t, int> sparse_;
};

struct Node {
  Vertex v;
  int t;
  int g;
  int f;
  int parent;
  bool terminal;
};

template <HardConstraints Hard, class Soft>
std::optional<SoftPlan> search(const GridMap& map, Vertex start, Vertex goal, const Hard& hard, const Soft& soft,
                               const DistanceField& heuristic, int horizon, bool use_soft) {
  if (!map.passable(start) || !map.passable(goal) || !heuristic.reachable(start)) return std::nullopt;
  if (hard.vertex_blocked(start, 0)) return std::nullopt;

  // Beyond this timestep every constraint is time-invariant, so states that
  // differ only in later times are merged.
  const int static_time = std::max(hard.static_after(), soft.static_after()) + 1;
  const int hold_time = hard.latest_visit(goal) + 1;
  auto h = [&](Vertex v, int t) { return std::max(heuristic[v], hold_time - t); };
  auto clamp = [&](int t) { return std::min(t, static_time); };

  std::vector<Node> nodes;
  nodes.reserve(1024);
  // f ascending, then larger g, then (time, row, col).
  auto worse = [&nodes](int a, int b) {
    const Node& x = nodes[a];
    const Node& y = nodes[b];
    if (x.f != y.f) return x.f > y.f;
    if (x.g != y.g) return x.g < y.g;
    if (x.t != y.t) return x.t > y.t;
    if (x.v != y.v) return x.v > y.v;
    return x.terminal < y.terminal;
  };
  std::priority_queue<int, std::vector<int>, decltype(worse)> open(worse);
  StateTable best(map.size(), static_time + 1);

  const int g0 = use_soft ? soft.vertex_penalty(start, 0) : 0;
  nodes.push_back({start, 0, g0, g0 + h(start, 0), -1, false});
  best.improve(start, 0, g0);
  open.push(0);

  auto reconstruct = [&](int idx) {
    SoftPlan plan;
    const Node& last = nodes[idx];
    plan.collisions = last.g - last.t;
    for (int i = last.terminal ? last.parent : idx; i >= 0; i = nodes[i].parent) plan.path.push_back(nodes[i].v);
    std::reverse(plan.path.begin(), plan.path.end());
    return plan;
  };

  while (!open.empty()) {
    const int idx = open.top();
    open.pop();
    const Node cur = nodes[idx];
    if (cur.terminal) return reconstruct(idx);
    if (best.stale(cur.v, clamp(cur.t), cur.g)) continue;

    if (cur.v == goal && cur.t >= hold_time) {
      if (!use_soft) return reconstruct(idx);
      const int g = cur.g + soft.future_visits(goal, cur.t);
      nodes.push_back({goal, cur.t, g, g, idx, true});
      open.push(static_cast<int>(nodes.size()) - 1);
    }
    if (cur.t >= horizon) continue;

    const int t = cur.t + 1;
    auto expand = [&](Vertex n) {
      if (!heuristic.reachable(n)) return;
      if (hard.vertex_blocked(n, t) || hard.edge_blocked(cur.v, n, t - 1)) return;
      int g = cur.g + 1;
      if (use_soft) g += soft.vertex_penalty(n, t) + soft.edge_penalty(cur.v, n, t - 1);
      if (!best.improve(n, clamp(t), g)) return;
      nodes.push_back({n, t, g, g + h(n, t), idx, false});
      open.push(static_cast<int>(nodes.size()) - 1);
    };
    expand(cur.v);
    for (Vertex n : map.neighbors(cur.v)) expand(n);
  }
  return std::nullopt;
}

}  // namespace detail

// Shortest path from start (at time 0) to goal that respects every
// reservation in `hard` and can then hold the goal forever. Fails when no
// such path arrives within `horizon`.
template <HardConstraints Hard>
std::optional<Path> spacetime_astar(const GridMap& map, Vertex start, Vertex goal, const Hard& hard,
                                    const DistanceField& heuristic, int horizon) {
  auto plan = detail::search(map, start, goal, hard, detail::NoSoftConstraints{}, heuristic, horizon, false);
  if (!plan) return std::nullopt;
  return std::move(plan->path);
}

template <HardConstraints Hard>
std::optional<Path> spacetime_astar(const GridMap& map, Vertex start, Vertex goal, const Hard& hard,
                                    const DistanceField& heuristic) {
  return spacetime_astar(map, start, goal, hard, heuristic, default_horizon(map, hard, heuristic[start]));
}

// Collision-tolerant variant: reservations in `soft` cost one unit per
// conflicting step (vertex, swap, or later visit to the held goal) on top of
// path length; `hard` still prunes.
template <HardConstraints Hard, SoftConstraints Soft>
std::optional<SoftPlan> soft_spacetime_astar(const GridMap& map, Vertex start, Vertex goal, const Hard& hard,
                                             const Soft& soft, const DistanceField& heuristic, int horizon) {
  return detail::search(map, start, goal, hard, soft, heuristic, horizon, true);
}

}  // namespace mapf_lns
