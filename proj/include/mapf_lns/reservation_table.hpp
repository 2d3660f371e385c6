#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "path.hpp"

namespace mapf_lns {

// Anything space-time A* can plan against with hard constraints.
template <class T>
concept HardConstraints = requires(const T& c, Vertex u, Vertex v, int t) {
  { c.vertex_blocked(v, t) } -> std::convertible_to<bool>;
  { c.edge_blocked(u, v, t) } -> std::convertible_to<bool>;
  { c.latest_visit(v) } -> std::convertible_to<int>;
  { c.static_after() } -> std::convertible_to<int>;
};

// Soft obstacles: each conflicting step costs a penalty instead of pruning.
template <class T>
concept SoftConstraints = requires(const T& c, Vertex u, Vertex v, int t) {
  { c.vertex_penalty(v, t) } -> std::convertible_to<int>;
  { c.edge_penalty(u, v, t) } -> std::convertible_to<int>;
  { c.future_visits(v, t) } -> std::convertible_to<int>;
  { c.static_after() } -> std::convertible_to<int>;
};

struct PermanentReservation {
  int arrival = 0;
  AgentId agent = kNoAgent;
};

// Time-indexed occupancy of a set of paths.
//
// Timed reservations are stored densely per vertex (slot t holds the first
// occupant at timestep t, extra occupants of the same slot go to an overflow
// map so colliding path sets can be represented too). Each path's final cell
// becomes a permanent reservation from its arrival time on. Edge reservations
// are implied by consecutive timed reservations of the same agent, which is
// what the swap test reads.
class ReservationTable {
 public:
  ReservationTable() = default;
  explicit ReservationTable(int num_vertices) : slots_(num_vertices), permanent_(num_vertices) {}

  int num_vertices() const { return static_cast<int>(slots_.size()); }

  void insert(AgentId agent, const Path& path) {
    const int arrival = path_length(path);
    for (int t = 0; t <= arrival; ++t) {
      auto& slot = slots_[path[t]];
      if (static_cast<int>(slot.size()) <= t) slot.resize(t + 1, kNoAgent);
      if (slot[t] == kNoAgent)
        slot[t] = agent;
      else
        extra_.emplace(key(path[t], t), agent);
    }
    auto& perm = permanent_[path.back()];
    if (perm.agent != kNoAgent)
      throw InconsistencyError("two reserved paths end at the same cell");
    perm = {arrival, agent};
    if (static_cast<int>(arrivals_.size()) <= arrival) arrivals_.resize(arrival + 1, 0);
    ++arrivals_[arrival];
    static_after_ = std::max(static_after_, arrival);
    timed_count_ += arrival;
    edge_count_ += arrival;
    ++permanent_count_;
  }

  void remove(AgentId agent, const Path& path) {
    const int arrival = path_length(path);
    for (int t = 0; t <= arrival; ++t) {
      auto& slot = slots_[path[t]];
      if (t >= static_cast<int>(slot.size())) throw InconsistencyError("removing a path that was never reserved");
      if (slot[t] == agent) {
        auto range = extra_.equal_range(key(path[t], t));
        if (range.first != range.second) {
          slot[t] = range.first->second;
          extra_.erase(range.first);
        } else {
          slot[t] = kNoAgent;
        }
      } else {
        auto range = extra_.equal_range(key(path[t], t));
        auto it = std::find_if(range.first, range.second, [agent](const auto& kv) { return kv.second == agent; });
        if (it == range.second) throw InconsistencyError("removing a path that was never reserved");
        extra_.erase(it);
      }
      while (!slot.empty() && slot.back() == kNoAgent) slot.pop_back();
    }
    auto& perm = permanent_[path.back()];
    if (perm.agent == agent) perm = {};
    --arrivals_[arrival];
    while (!arrivals_.empty() && arrivals_.back() == 0) arrivals_.pop_back();
    static_after_ = static_cast<int>(arrivals_.size()) - 1;
    timed_count_ -= arrival;
    edge_count_ -= arrival;
    --permanent_count_;
  }

  // Occupant at (v, t), counting permanent reservations; kNoAgent if free.
  AgentId occupant(Vertex v, int t) const {
    const auto& slot = slots_[v];
    if (t < static_cast<int>(slot.size()) && slot[t] != kNoAgent) return slot[t];
    const auto& perm = permanent_[v];
    if (perm.agent != kNoAgent && perm.arrival <= t) return perm.agent;
    return kNoAgent;
  }

  // Agents whose paths are at (v, t), ignoring anyone parked there after arrival.
  void timed_occupants(Vertex v, int t, std::vector<AgentId>& out) const {
    out.clear();
    const auto& slot = slots_[v];
    if (t < static_cast<int>(slot.size()) && slot[t] != kNoAgent) {
      out.push_back(slot[t]);
      if (!extra_.empty()) {
        auto range = extra_.equal_range(key(v, t));
        for (auto it = range.first; it != range.second; ++it) out.push_back(it->second);
      }
    }
  }

  // All agents at (v, t), permanent holders included.
  void occupants(Vertex v, int t, std::vector<AgentId>& out) const {
    timed_occupants(v, t, out);
    const auto& perm = permanent_[v];
    if (perm.agent != kNoAgent && perm.arrival < t) out.push_back(perm.agent);
  }

  bool vertex_blocked(Vertex v, int t) const { return occupant(v, t) != kNoAgent; }

  // Moving from -> to during [t, t+1] swaps with an agent doing to -> from.
  bool edge_blocked(Vertex from, Vertex to, int t) const {
    if (from == to) return false;
    const AgentId there = timed(to, t);
    if (there == kNoAgent) return false;
    if (extra_.empty()) return timed(from, t + 1) == there;
    std::vector<AgentId> a, b;
    timed_occupants(to, t, a);
    timed_occupants(from, t + 1, b);
    for (AgentId x : a)
      if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    return false;
  }

  // Last timestep with a timed reservation at v, -1 if none.
  int latest_visit(Vertex v) const { return static_cast<int>(slots_[v].size()) - 1; }

  // No timed reservation exists strictly after this timestep.
  int static_after() const { return static_after_; }

  std::optional<PermanentReservation> permanent(Vertex v) const {
    if (permanent_[v].agent == kNoAgent) return std::nullopt;
    return permanent_[v];
  }

  int vertex_penalty(Vertex v, int t) const {
    int n = 0;
    const auto& slot = slots_[v];
    if (t < static_cast<int>(slot.size()) && slot[t] != kNoAgent) n += 1 + static_cast<int>(extra_.count(key(v, t)));
    const auto& perm = permanent_[v];
    if (perm.agent != kNoAgent && perm.arrival < t) ++n;
    return n;
  }

  int edge_penalty(Vertex from, Vertex to, int t) const {
    if (from == to) return 0;
    if (extra_.empty()) return edge_blocked(from, to, t) ? 1 : 0;
    std::vector<AgentId> here, there;
    occupants(to, t, there);
    occupants(from, t + 1, here);
    int n = 0;
    for (AgentId a : there)
      if (std::find(here.begin(), here.end(), a) != here.end()) ++n;
    return n;
  }

  // Timed occupancies of v strictly after t.
  int future_visits(Vertex v, int t) const {
    int n = 0;
    const auto& slot = slots_[v];
    for (int s = t + 1; s < static_cast<int>(slot.size()); ++s)
      if (slot[s] != kNoAgent) n += 1 + static_cast<int>(extra_.empty() ? 0 : extra_.count(key(v, s)));
    return n;
  }

  // Reservation counts: timesteps before arrival, transitions, and goals.
  long timed_count() const { return timed_count_; }
  long edge_count() const { return edge_count_; }
  long permanent_count() const { return permanent_count_; }
  bool empty() const { return permanent_count_ == 0; }

 private:
  AgentId timed(Vertex v, int t) const {
    const auto& slot = slots_[v];
    return t < static_cast<int>(slot.size()) ? slot[t] : kNoAgent;
  }

  static std::uint64_t key(Vertex v, int t) {
    return (static_cast<std::uint64_t>(t) << 32) | static_cast<std::uint32_t>(v);
  }

  std::vector<std::vector<AgentId>> slots_;
  std::vector<PermanentReservation> permanent_;
  std::unordered_multimap<std::uint64_t, AgentId> extra_;
  std::vector<int> arrivals_;  // reserved paths per arrival time
  int static_after_ = -1;
  long timed_count_ = 0;
  long edge_count_ = 0;
  long permanent_count_ = 0;
};

inline ReservationTable build_reservation(int num_vertices, const std::vector<std::pair<AgentId, const Path*>>& fixed) {
  ReservationTable table(num_vertices);
  for (const auto& [agent, path] : fixed) table.insert(agent, *path);
  return table;
}

inline ReservationTable build_reservation(int num_vertices, const std::vector<Path>& paths) {
  ReservationTable table(num_vertices);
  for (AgentId i = 0; i < static_cast<AgentId>(paths.size()); ++i) table.insert(i, paths[i]);
  return table;
}

// Reserves a path for the lifetime of the guard.
class ScopedReservation {
 public:
  ScopedReservation(ReservationTable& table, AgentId agent, const Path& path)
      : table_(table), agent_(agent), path_(path) {
    table_.insert(agent_, path_);
  }
  ~ScopedReservation() { table_.remove(agent_, path_); }
  ScopedReservation(const ScopedReservation&) = delete;
  ScopedReservation& operator=(const ScopedReservation&) = delete;

 private:
  ReservationTable& table_;
  AgentId agent_;
  const Path& path_;
};

static_assert(HardConstraints<ReservationTable>);
static_assert(SoftConstraints<ReservationTable>);

}  // namespace mapf_lns
