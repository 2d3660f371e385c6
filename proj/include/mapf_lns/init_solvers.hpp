#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "conflicts.hpp"
#include "instance.hpp"
#include "path.hpp"
#include "random.hpp"
#include "replan.hpp"
#include "reservation_table.hpp"
#include "spacetime_astar.hpp"

namespace mapf_lns {

enum class InitSolver { Lns2Lite, PpRestart };

inline std::string to_string(InitSolver s) { return s == InitSolver::Lns2Lite ? "lns2lite" : "pp-restart"; }

struct InitStats {
  std::string solver;
  int pp_attempts = 0;
  int repair_iterations = 0;
  int repair_accepted = 0;
  int initial_collisions = 0;
  double seconds = 0.0;
};

namespace detail {

class Deadline {
 public:
  explicit Deadline(double seconds)
      : start_(std::chrono::steady_clock::now()),
        end_(start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(seconds))) {}
  bool expired() const { return std::chrono::steady_clock::now() >= end_; }
  double elapsed() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point end_;
};

inline std::vector<AgentId> all_agents(const MapfInstance& instance) {
  std::vector<AgentId> ids(instance.num_agents());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace detail

// Full-instance prioritized planning, restarted with a fresh random order
// until one attempt succeeds or the budget runs out.
inline std::optional<Solution> pp_restart_initial(const MapfInstance& instance, double budget_s, std::uint64_t seed,
                                                  InitStats* stats = nullptr) {
  detail::Deadline deadline(budget_s);
  Rng rng = derive_rng(seed, 0x1717);
  const auto agents = detail::all_agents(instance);
  InitStats local{"pp-restart"};
  std::optional<Solution> result;
  do {
    ++local.pp_attempts;
    ReservationTable table(instance.map().size());
    ReplanRequest req{instance, table, agents, rng};
    if (auto paths = pp_replan(req)) {
      result = make_solution(instance, std::move(*paths));
      break;
    }
  } while (!deadline.expired());
  local.seconds = deadline.elapsed();
  if (stats) *stats = local;
  return result;
}

struct Lns2LiteOptions {
  int neighborhood_size = 8;
  // repair-phase cost of one conflicting step, in units of path length
  int collision_weight = 64;
};

namespace detail {

struct WeightedSoft {
  const ReservationTable& table;
  int weight;
  int vertex_penalty(Vertex v, int t) const { return weight * table.vertex_penalty(v, t); }
  int edge_penalty(Vertex u, Vertex v, int t) const { return weight * table.edge_penalty(u, v, t); }
  int future_visits(Vertex v, int t) const { return weight * table.future_visits(v, t); }
  int static_after() const { return table.static_after(); }
};

}  // namespace detail

// Collision-repair initializer. Phase 1 plans everyone with soft
// reservations (one unit per conflicting step). Phase 2 repeatedly replans a
// neighborhood around one collision: the pair, their collision partners,
// agents crossing the collision cell, its neighbors or the pair's endpoints,
// then random agents. The group is planned
// in random order, hard against itself and soft (weighted) against everyone
// else; a repair is kept only if the total collision count drops.
inline std::optional<Solution> lns2lite_initial(const MapfInstance& instance, double budget_s, std::uint64_t seed,
                                                const Lns2LiteOptions& options = {}, InitStats* stats = nullptr) {
  detail::Deadline deadline(budget_s);
  Rng rng = derive_rng(seed, 0x2727);
  const int n = instance.num_agents();
  const int nv = instance.map().size();
  InitStats local{"lns2lite"};
  auto finish = [&](std::optional<Solution> s) {
    local.seconds = deadline.elapsed();
    if (stats) *stats = local;
    return s;
  };

  auto soft_plan = [&](AgentId a, const ReservationTable& hard, const ReservationTable& soft, int weight) {
    const DistanceField& h = instance.heuristic(a);
    const Vertex s = instance.start(a);
    const int horizon = std::max({hard.static_after(), soft.static_after(), h[s]}) + nv;
    return soft_spacetime_astar(instance.map(), s, instance.goal(a), hard, detail::WeightedSoft{soft, weight}, h,
                                horizon);
  };

  std::vector<Path> paths(n);
  {
    auto order = detail::all_agents(instance);
    shuffle_in_place(order, rng);
    ReservationTable none(nv), soft(nv);
    for (AgentId a : order) {
      auto plan = soft_plan(a, none, soft, 1);
      if (!plan) return finish(std::nullopt);
      paths[a] = std::move(plan->path);
      soft.insert(a, paths[a]);
    }
  }

  auto conflicts = validate_solution(instance, paths).conflicts;
  local.initial_collisions = static_cast<int>(conflicts.size());
  while (!conflicts.empty()) {
    if (deadline.expired()) return finish(std::nullopt);
    ++local.repair_iterations;

    const Conflict& picked = conflicts[uniform_index(rng, conflicts.size())];
    const AgentId a = picked.agents.first, b = picked.agents.second;
    std::vector<AgentId> partners;
    for (const Conflict& c : conflicts) {
      for (auto [x, y] : {std::pair{c.agents.first, c.agents.second}, std::pair{c.agents.second, c.agents.first}})
        if ((x == a || x == b) && y != a && y != b && std::find(partners.begin(), partners.end(), y) == partners.end())
          partners.push_back(y);
    }
    shuffle_in_place(partners, rng);
    const int want = std::min(options.neighborhood_size, n);
    std::vector<AgentId> group{a, b};
    std::vector<bool> in_group(n, false);
    in_group[a] = in_group[b] = true;
    auto add = [&](AgentId x) {
      if (static_cast<int>(group.size()) >= want || in_group[x]) return;
      group.push_back(x);
      in_group[x] = true;
    };
    for (AgentId p : partners) add(p);

    if (static_cast<int>(group.size()) < want) {
      std::vector<bool> hot(nv, false);
      for (Vertex v : {picked.from, picked.to}) {
        if (v == kNoVertex) continue;
        hot[v] = true;
        for (Vertex u : instance.map().neighbors(v)) hot[u] = true;
      }
      for (AgentId x : {a, b}) hot[instance.start(x)] = hot[instance.goal(x)] = true;
      std::vector<AgentId> near;
      for (AgentId i = 0; i < n; ++i)
        if (!in_group[i] && std::any_of(paths[i].begin(), paths[i].end(), [&](Vertex v) { return hot[v]; }))
          near.push_back(i);
      shuffle_in_place(near, rng);
      for (AgentId x : near) add(x);
      while (static_cast<int>(group.size()) < want) add(static_cast<AgentId>(uniform_index(rng, n)));
    }

    ReservationTable hard(nv), soft(nv);
    for (AgentId i = 0; i < n; ++i)
      if (!in_group[i]) soft.insert(i, paths[i]);

    shuffle_in_place(group, rng);
    std::vector<Path> candidate = paths;
    bool planned = true;
    for (AgentId g : group) {
      auto plan = soft_plan(g, hard, soft, options.collision_weight);
      if (!plan) {
        planned = false;
        break;
      }
      candidate[g] = std::move(plan->path);
      hard.insert(g, candidate[g]);
    }
    if (!planned) continue;
    auto next = validate_solution(instance, candidate).conflicts;
    if (next.size() < conflicts.size()) {
      ++local.repair_accepted;
      paths = std::move(candidate);
      conflicts = std::move(next);
    }
  }
  return finish(make_solution(instance, std::move(paths)));
}

// lns2lite first, then pp-restart with whatever budget remains.
inline std::optional<Solution> initial_solution(const MapfInstance& instance, InitSolver first, double budget_s,
                                                std::uint64_t seed, InitStats* stats = nullptr) {
  detail::Deadline deadline(budget_s);
  InitStats local;
  std::optional<Solution> s;
  if (first == InitSolver::Lns2Lite) {
    s = lns2lite_initial(instance, budget_s, seed, {}, &local);
    if (!s) {
      const double rest = std::max(0.0, budget_s - deadline.elapsed());
      InitStats fallback;
      s = pp_restart_initial(instance, rest, seed, &fallback);
      local.solver += "+pp-restart";
      local.pp_attempts = fallback.pp_attempts;
    }
  } else {
    s = pp_restart_initial(instance, budget_s, seed, &local);
  }
  local.seconds = deadline.elapsed();
  if (stats) *stats = local;
  return s;
}

}  // namespace mapf_lns
