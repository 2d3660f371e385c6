#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "instance.hpp"
#include "path.hpp"

namespace mapf_lns {

enum class ConflictKind { Vertex, Swap };

// agents.first < agents.second. For vertex conflicts `from` is the shared
// cell and `to` is kNoVertex; for swaps (from, to) is the edge as traversed
// by agents.first between time-1 and time.
struct Conflict {
  ConflictKind kind = ConflictKind::Vertex;
  std::pair<AgentId, AgentId> agents;
  int time = 0;
  Vertex from = kNoVertex;
  Vertex to = kNoVertex;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

inline bool conflict_order(const Conflict& a, const Conflict& b) {
  return std::tie(a.time, a.agents, a.kind, a.from, a.to) < std::tie(b.time, b.agents, b.kind, b.from, b.to);
}

enum class DefectKind { Empty, WrongStart, WrongGoal, BlockedCell, BadStep };

struct PathDefect {
  AgentId agent = kNoAgent;
  DefectKind kind = DefectKind::Empty;
  int time = 0;
};

inline std::string to_string(DefectKind k) {
  switch (k) {
    case DefectKind::Empty: return "empty path";
    case DefectKind::WrongStart: return "path does not begin at the start cell";
    case DefectKind::WrongGoal: return "path does not end at the goal cell";
    case DefectKind::BlockedCell: return "path enters a blocked or out-of-bounds cell";
    case DefectKind::BadStep: return "consecutive cells are neither equal nor adjacent";
  }
  return "?";
}

// Malformed paths are reported separately from conflicts; defective paths
// take no part in conflict detection.
struct Validation {
  std::vector<PathDefect> defects;
  std::vector<Conflict> conflicts;
  bool ok() const { return defects.empty() && conflicts.empty(); }
};

inline std::optional<PathDefect> check_path(const MapfInstance& instance, AgentId agent, const Path& path) {
  const GridMap& map = instance.map();
  if (path.empty()) return PathDefect{agent, DefectKind::Empty, 0};
  for (std::size_t t = 0; t < path.size(); ++t)
    if (!map.passable(path[t])) return PathDefect{agent, DefectKind::BlockedCell, static_cast<int>(t)};
  if (path.front() != instance.start(agent)) return PathDefect{agent, DefectKind::WrongStart, 0};
  for (std::size_t t = 1; t < path.size(); ++t)
    if (path[t] != path[t - 1] && !map.adjacent(path[t - 1], path[t]))
      return PathDefect{agent, DefectKind::BadStep, static_cast<int>(t)};
  if (path.back() != instance.goal(agent))
    return PathDefect{agent, DefectKind::WrongGoal, static_cast<int>(path.size()) - 1};
  return std::nullopt;
}

// Enumerates every vertex conflict (one per agent pair and timestep,
// finished agents occupying their goals forever) and every swap conflict,
// sorted by (time, agent pair).
inline Validation validate_solution(const MapfInstance& instance, const std::vector<Path>& paths) {
  if (static_cast<int>(paths.size()) != instance.num_agents())
    throw ShapeError("expected " + std::to_string(instance.num_agents()) + " paths, got " +
                     std::to_string(paths.size()));
  Validation out;
  std::vector<bool> usable(paths.size(), false);
  for (AgentId i = 0; i < instance.num_agents(); ++i) {
    if (auto d = check_path(instance, i, paths[i]))
      out.defects.push_back(*d);
    else
      usable[i] = true;
  }

  const std::uint64_t nv = static_cast<std::uint64_t>(instance.map().size());
  auto vkey = [nv](Vertex v, int t) { return static_cast<std::uint64_t>(t) * nv + static_cast<std::uint64_t>(v); };
  auto ekey = [nv](Vertex u, Vertex v, int t) {
    return (static_cast<std::uint64_t>(t) * nv + static_cast<std::uint64_t>(u)) * nv + static_cast<std::uint64_t>(v);
  };

  // Goal cell -> (owner, arrival time)
  std::unordered_map<Vertex, std::pair<AgentId, int>> goal_owner;
  std::unordered_map<std::uint64_t, std::vector<AgentId>> visits;
  std::unordered_map<std::uint64_t, std::vector<AgentId>> moves;
  for (AgentId i = 0; i < instance.num_agents(); ++i) {
    if (!usable[i]) continue;
    goal_owner[paths[i].back()] = {i, path_length(paths[i])};
  }

  for (AgentId j = 0; j < instance.num_agents(); ++j) {
    if (!usable[j]) continue;
    const Path& p = paths[j];
    for (int t = 0; t < static_cast<int>(p.size()); ++t) {
      visits[vkey(p[t], t)].push_back(j);
      auto g = goal_owner.find(p[t]);
      if (g != goal_owner.end() && g->second.first != j && t > g->second.second) {
        AgentId owner = g->second.first;
        out.conflicts.push_back({ConflictKind::Vertex, {std::min(owner, j), std::max(owner, j)}, t, p[t], kNoVertex});
      }
    }
    for (int t = 0; t + 1 < static_cast<int>(p.size()); ++t) {
      if (p[t] == p[t + 1]) continue;
      auto opposite = moves.find(ekey(p[t + 1], p[t], t));
      if (opposite != moves.end())
        for (AgentId other : opposite->second) {
          Conflict c{ConflictKind::Swap, {std::min(other, j), std::max(other, j)}, t + 1, p[t], p[t + 1]};
          if (c.agents.first != j) std::swap(c.from, c.to);
          out.conflicts.push_back(c);
        }
      moves[ekey(p[t], p[t + 1], t)].push_back(j);
    }
  }
  for (auto& [key, agents] : visits) {
    if (agents.size() < 2) continue;
    const int t = static_cast<int>(key / nv);
    const Vertex v = static_cast<Vertex>(key % nv);
    std::sort(agents.begin(), agents.end());
    for (std::size_t a = 0; a < agents.size(); ++a)
      for (std::size_t b = a + 1; b < agents.size(); ++b)
        out.conflicts.push_back({ConflictKind::Vertex, {agents[a], agents[b]}, t, v, kNoVertex});
  }
  std::sort(out.conflicts.begin(), out.conflicts.end(), conflict_order);
  return out;
}

inline Validation validate_solution(const MapfInstance& instance, const Solution& solution) {
  return validate_solution(instance, solution.paths);
}

// Number of conflicts each agent takes part in.
inline std::vector<int> conflicts_per_agent(int num_agents, const std::vector<Conflict>& conflicts) {
  std::vector<int> counts(num_agents, 0);
  for (const Conflict& c : conflicts) {
    ++counts[c.agents.first];
    ++counts[c.agents.second];
  }
  return counts;
}

// Earliest conflict between two paths (stay-at-target), if any. The returned
// conflict names `a` first.
inline std::optional<Conflict> first_conflict(AgentId a, const Path& pa, AgentId b, const Path& pb) {
  const int horizon = static_cast<int>(std::max(pa.size(), pb.size()));
  for (int t = 0; t < horizon; ++t) {
    const Vertex la = location_at(pa, t), lb = location_at(pb, t);
    if (la == lb) return Conflict{ConflictKind::Vertex, {a, b}, t, la, kNoVertex};
    if (t + 1 < horizon) {
      const Vertex na = location_at(pa, t + 1), nb = location_at(pb, t + 1);
      if (la != na && la == nb && na == lb) return Conflict{ConflictKind::Swap, {a, b}, t + 1, la, na};
    }
  }
  return std::nullopt;
}

}  // namespace mapf_lns
