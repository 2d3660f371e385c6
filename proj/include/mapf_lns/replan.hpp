#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "conflicts.hpp"
#include "instance.hpp"
#include "path.hpp"
#include "random.hpp"
#include "reservation_table.hpp"
#include "spacetime_astar.hpp"

namespace mapf_lns {

// Repair input. `table` holds exactly the fixed paths (agents outside the
// neighborhood) on entry; solvers may reserve temporarily but leave it as
// they found it. Fixed paths themselves are never touched.
struct ReplanRequest {
  const MapfInstance& instance;
  ReservationTable& table;
  std::span<const AgentId> neighborhood;
  Rng& rng;
  // Give up once the neighborhood's summed path length reaches this value;
  // such a candidate could never be accepted.
  std::optional<long> cost_bound = std::nullopt;
};

// Paths of a successful repair, aligned with request.neighborhood.
using ReplanResult = std::optional<std::vector<Path>>;

// Removes every path it reserved when it goes out of scope.
class ReservationBatch {
 public:
  explicit ReservationBatch(ReservationTable& table) : table_(table) {}
  ~ReservationBatch() {
    for (auto it = held_.rbegin(); it != held_.rend(); ++it) table_.remove(it->first, *it->second);
  }
  ReservationBatch(const ReservationBatch&) = delete;
  ReservationBatch& operator=(const ReservationBatch&) = delete;

  void add(AgentId agent, const Path& path) {
    table_.insert(agent, path);
    held_.emplace_back(agent, &path);
  }

 private:
  ReservationTable& table_;
  std::vector<std::pair<AgentId, const Path*>> held_;
};

inline std::optional<Path> plan_agent(const MapfInstance& instance, AgentId agent, const ReservationTable& table) {
  const DistanceField& h = instance.heuristic(agent);
  const Vertex start = instance.start(agent);
  return spacetime_astar(instance.map(), start, instance.goal(agent), table, h,
                         default_horizon(instance.map(), table, h[start]));
}

// Prioritized planning in a uniformly shuffled order; each agent avoids the
// fixed paths and every neighborhood agent planned before it. One attempt.
inline ReplanResult pp_replan(const ReplanRequest& req) {
  const std::size_t n = req.neighborhood.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(order, req.rng);

  std::vector<Path> planned(n);
  ReservationBatch batch(req.table);
  // Planned lengths so far plus shortest distances of the agents still to go.
  long total = 0;
  for (AgentId agent : req.neighborhood) total += req.instance.shortest(agent);
  if (req.cost_bound && total >= *req.cost_bound) return std::nullopt;
  for (std::size_t slot : order) {
    const AgentId agent = req.neighborhood[slot];
    auto path = plan_agent(req.instance, agent, req.table);
    if (!path) return std::nullopt;
    total += path_length(*path) - req.instance.shortest(agent);
    if (req.cost_bound && total >= *req.cost_bound) return std::nullopt;
    planned[slot] = std::move(*path);
    batch.add(agent, planned[slot]);
  }
  return planned;
}

// Search node over partial priority orderings among neighborhood agents.
// Indices are positions in the request's neighborhood.
struct PbsNode {
  std::vector<std::pair<int, int>> priorities;  // (higher, lower)
  std::vector<Path> paths;
  long cost = 0;
};

struct PbsOutcome {
  std::vector<Path> paths;
  std::vector<std::pair<AgentId, AgentId>> priorities;  // (higher, lower) agent ids
  int expansions = 0;
};

namespace detail {

inline std::vector<std::vector<int>> priority_graph(int n, const std::vector<std::pair<int, int>>& pairs, bool upward) {
  std::vector<std::vector<int>> g(n);
  for (auto [hi, lo] : pairs) {
    if (upward)
      g[lo].push_back(hi);
    else
      g[hi].push_back(lo);
  }
  return g;
}

inline std::vector<bool> reachable_from(const std::vector<std::vector<int>>& g, int source) {
  std::vector<bool> seen(g.size(), false);
  std::vector<int> stack{source};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : g[v])
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return seen;
}

// Kahn's algorithm, smallest index first; empty if cyclic.
inline std::vector<int> topological_order(int n, const std::vector<std::pair<int, int>>& pairs) {
  auto down = priority_graph(n, pairs, false);
  std::vector<int> indegree(n, 0);
  for (auto [hi, lo] : pairs) ++indegree[lo];
  std::vector<int> ready, order;
  for (int i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    int v = *it;
    ready.erase(it);
    order.push_back(v);
    for (int w : down[v])
      if (--indegree[w] == 0) ready.push_back(w);
  }
  if (static_cast<int>(order.size()) != n) return {};
  return order;
}

inline long total_length(const std::vector<Path>& paths) {
  long s = 0;
  for (const Path& p : paths) s += path_length(p);
  return s;
}

// Adds (hi, lo) and replans lo plus every lower-priority agent whose path
// now collides with a replanned higher-priority one.
inline std::optional<PbsNode> pbs_child(const ReplanRequest& req, const PbsNode& parent, int hi, int lo) {
  const int n = static_cast<int>(req.neighborhood.size());
  auto up = priority_graph(n, parent.priorities, true);
  if (reachable_from(up, hi)[lo]) return std::nullopt;  // lo already outranks hi

  PbsNode child = parent;
  child.priorities.emplace_back(hi, lo);
  up = priority_graph(n, child.priorities, true);
  const auto down = priority_graph(n, child.priorities, false);
  const auto order = topological_order(n, child.priorities);

  std::vector<bool> pending(n, false);
  pending[lo] = true;
  for (int a : order) {
    if (!pending[a]) continue;
    const auto higher = reachable_from(up, a);
    {
      ReservationBatch batch(req.table);
      for (int b = 0; b < n; ++b)
        if (higher[b]) batch.add(req.neighborhood[b], child.paths[b]);
      auto path = plan_agent(req.instance, req.neighborhood[a], req.table);
      if (!path) return std::nullopt;
      child.paths[a] = std::move(*path);
    }
    const auto lower = reachable_from(down, a);
    for (int b = 0; b < n; ++b)
      if (lower[b] && !pending[b] &&
          first_conflict(req.neighborhood[a], child.paths[a], req.neighborhood[b], child.paths[b]))
        pending[b] = true;
  }
  child.cost = total_length(child.paths);
  return child;
}

// Earliest collision among the given paths; agents are reported as indices.
inline std::optional<Conflict> earliest_conflict(const std::vector<Path>& paths) {
  std::optional<Conflict> best;
  const int n = static_cast<int>(paths.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto c = first_conflict(i, paths[i], j, paths[j]);
      if (c && (!best || c->time < best->time)) best = c;
    }
  return best;
}

}  // namespace detail

// Priority-based search, depth-first with the cheaper child expanded first.
// Fails when the expansion budget runs out or every branch is infeasible.
inline std::optional<PbsOutcome> pbs_search(const ReplanRequest& req, int node_budget) {
  const int n = static_cast<int>(req.neighborhood.size());
  PbsNode root;
  root.paths.resize(n);
  for (int i = 0; i < n; ++i) {
    auto path = plan_agent(req.instance, req.neighborhood[i], req.table);
    if (!path) return std::nullopt;
    root.paths[i] = std::move(*path);
  }
  root.cost = detail::total_length(root.paths);

  std::vector<PbsNode> stack;
  stack.push_back(std::move(root));
  int expansions = 0;
  while (!stack.empty() && expansions < node_budget) {
    PbsNode node = std::move(stack.back());
    stack.pop_back();
    ++expansions;
    auto conflict = detail::earliest_conflict(node.paths);
    if (!conflict) {
      PbsOutcome out{std::move(node.paths), {}, expansions};
      for (auto [hi, lo] : node.priorities) out.priorities.emplace_back(req.neighborhood[hi], req.neighborhood[lo]);
      return out;
    }
    const auto [i, j] = conflict->agents;
    // Child replanning j (i outranks j) and child replanning i.
    std::vector<std::pair<PbsNode, AgentId>> children;
    if (auto c = detail::pbs_child(req, node, i, j)) children.emplace_back(std::move(*c), req.neighborhood[j]);
    if (auto c = detail::pbs_child(req, node, j, i)) children.emplace_back(std::move(*c), req.neighborhood[i]);
    // Push the worse child first so the better one is popped next.
    std::sort(children.begin(), children.end(), [](const auto& a, const auto& b) {
      if (a.first.cost != b.first.cost) return a.first.cost > b.first.cost;
      return a.second > b.second;
    });
    for (auto& c : children) stack.push_back(std::move(c.first));
  }
  return std::nullopt;
}

inline ReplanResult pbs_replan(const ReplanRequest& req, int node_budget = 64) {
  auto outcome = pbs_search(req, node_budget);
  if (!outcome) return std::nullopt;
  if (req.cost_bound && detail::total_length(outcome->paths) >= *req.cost_bound) return std::nullopt;
  return std::move(outcome->paths);
}

}  // namespace mapf_lns
