#pragma once

// Independent reference implementations used by the suites. None of these
// share code with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "mapf_lns/mapf_lns.hpp"

namespace oracle {

using namespace mapf_lns;

// ---- generators -----------------------------------------------------------

inline GridMap random_grid(Rng& rng, int w, int h, double obstacle_fraction) {
  std::vector<bool> passable(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < passable.size(); ++i) passable[i] = uniform01(rng) >= obstacle_fraction;
  return GridMap(w, h, std::move(passable), "rand");
}

// Up to `agents` agents with distinct starts and distinct goals inside the
// largest component; nullopt when the component is too small.
inline std::optional<MapfInstance> random_instance(Rng& rng, int w, int h, double obstacle_fraction, int agents) {
  GridMap map = random_grid(rng, w, h, obstacle_fraction);
  auto cells = largest_component(map);
  if (static_cast<int>(cells.size()) < agents) return std::nullopt;
  auto starts = cells, goals = cells;
  shuffle_in_place(starts, rng);
  shuffle_in_place(goals, rng);
  std::vector<AgentTask> tasks;
  for (int i = 0; i < agents; ++i) tasks.push_back({i, map.cell(starts[i]), map.cell(goals[i])});
  return MapfInstance(std::move(map), std::move(tasks));
}

// A random walk of `steps` moves (waits included) from `start`.
inline Path random_walk_path(const GridMap& map, Vertex start, int steps, Rng& rng) {
  Path p{start};
  for (int i = 0; i < steps; ++i) {
    std::vector<Vertex> options{p.back()};
    for (Vertex n : map.neighbors(p.back())) options.push_back(n);
    p.push_back(options[uniform_index(rng, options.size())]);
  }
  return p;
}

// ---- distances ------------------------------------------------------------

inline std::vector<int> dijkstra(const GridMap& map, Vertex goal) {
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> dist(map.size(), inf);
  using Item = std::pair<int, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[goal] = 0;
  pq.push({0, goal});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    const Cell c = map.cell(v);
    const Cell around[4] = {{c.row - 1, c.col}, {c.row + 1, c.col}, {c.row, c.col - 1}, {c.row, c.col + 1}};
    for (Cell n : around) {
      if (!map.passable(n)) continue;
      const Vertex u = map.vertex(n);
      if (d + 1 < dist[u]) {
        dist[u] = d + 1;
        pq.push({d + 1, u});
      }
    }
  }
  return dist;
}

// ---- conflicts ------------------------------------------------------------

inline Vertex at(const Path& p, int t) { return t < static_cast<int>(p.size()) ? p[t] : p.back(); }

struct RawConflict {
  bool swap;
  int a, b, t;
  auto operator<=>(const RawConflict&) const = default;
};

// Every (pair, time) vertex and swap collision, with agents parked at their
// final cell forever.
inline std::set<RawConflict> all_conflicts(const std::vector<Path>& paths) {
  std::set<RawConflict> out;
  int horizon = 0;
  for (const Path& p : paths) horizon = std::max<int>(horizon, p.size());
  for (int a = 0; a < static_cast<int>(paths.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(paths.size()); ++b)
      for (int t = 0; t < horizon; ++t) {
        if (at(paths[a], t) == at(paths[b], t)) out.insert({false, a, b, t});
        if (t > 0 && at(paths[a], t) == at(paths[b], t - 1) && at(paths[a], t - 1) == at(paths[b], t) &&
            at(paths[a], t) != at(paths[a], t - 1))
          out.insert({true, a, b, t});
      }
  return out;
}

// ---- single agent ---------------------------------------------------------

// Earliest arrival at `goal` after which the agent can wait there forever,
// moving through the time-expanded grid with the fixed paths as moving
// obstacles; -1 if none arrives by `horizon`.
inline int time_expanded_bfs(const GridMap& map, Vertex start, Vertex goal, const std::vector<Path>& fixed,
                             int horizon) {
  int settle = 0;
  for (const Path& p : fixed) settle = std::max<int>(settle, p.size());
  auto occupied = [&](Vertex v, int t) {
    for (const Path& p : fixed)
      if (at(p, t) == v) return true;
    return false;
  };
  // Moving v -> u into time t against someone doing u -> v.
  auto swapped = [&](Vertex u, Vertex v, int t) {
    for (const Path& p : fixed)
      if (at(p, t - 1) == u && at(p, t) == v) return true;
    return false;
  };
  auto can_hold = [&](int t) {
    for (int s = t; s <= std::max(t, settle); ++s)
      if (occupied(goal, s)) return false;
    return true;
  };
  if (occupied(start, 0)) return -1;
  std::vector<char> here(map.size(), 0);
  here[start] = 1;
  for (int t = 0; t <= horizon; ++t) {
    if (here[goal] && can_hold(t)) return t;
    if (t == horizon) break;
    std::vector<char> next(map.size(), 0);
    for (Vertex v = 0; v < map.size(); ++v) {
      if (!here[v]) continue;
      std::vector<Vertex> moves{v};
      for (Vertex n : map.neighbors(v)) moves.push_back(n);
      for (Vertex u : moves)
        if (!occupied(u, t + 1) && !(u != v && swapped(u, v, t + 1))) next[u] = 1;
    }
    here.swap(next);
  }
  return -1;
}

// ---- multi agent ----------------------------------------------------------

// Optimal sum of path lengths by Dijkstra over joint positions plus a mask
// of agents that have committed to staying at their goal. Each step costs
// one per uncommitted agent, so an agent's total is its final arrival time.
inline std::optional<long> optimal_sum_of_costs(const MapfInstance& inst) {
  const int n = inst.num_agents();
  const GridMap& map = inst.map();
  using State = std::pair<std::vector<Vertex>, unsigned>;
  std::map<State, long> best;
  using Item = std::tuple<long, std::vector<Vertex>, unsigned>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const unsigned all = (1u << n) - 1;

  std::vector<Vertex> start(n);
  for (int i = 0; i < n; ++i) start[i] = inst.start(i);
  // Initial commitments: any subset of agents already on their goal.
  unsigned at_goal = 0;
  for (int i = 0; i < n; ++i)
    if (start[i] == inst.goal(i)) at_goal |= 1u << i;
  for (unsigned sub = at_goal;; sub = (sub - 1) & at_goal) {
    best[{start, sub}] = 0;
    pq.push({0, start, sub});
    if (sub == 0) break;
  }

  while (!pq.empty()) {
    auto [cost, pos, done] = pq.top();
    pq.pop();
    if (best[{pos, done}] < cost) continue;
    if (done == all) return cost;
    const long step = n - __builtin_popcount(done);
    // Enumerate joint moves recursively.
    std::vector<Vertex> next(n);
    auto expand = [&](auto&& self, int i) -> void {
      if (i == n) {
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b) {
            if (next[a] == next[b]) return;
            if (next[a] == pos[b] && next[b] == pos[a] && next[a] != pos[a]) return;
          }
        unsigned can = 0;
        for (int a = 0; a < n; ++a)
          if (!(done >> a & 1) && next[a] == inst.goal(a)) can |= 1u << a;
        for (unsigned sub = can;; sub = (sub - 1) & can) {
          State s{next, done | sub};
          auto it = best.find(s);
          if (it == best.end() || cost + step < it->second) {
            best[s] = cost + step;
            pq.push({cost + step, next, done | sub});
          }
          if (sub == 0) break;
        }
        return;
      }
      if (done >> i & 1) {
        next[i] = pos[i];
        self(self, i + 1);
        return;
      }
      next[i] = pos[i];
      self(self, i + 1);
      for (Vertex u : map.neighbors(pos[i])) {
        next[i] = u;
        self(self, i + 1);
      }
    };
    expand(expand, 0);
  }
  return std::nullopt;
}

inline std::optional<long> optimal_sum_of_delays(const MapfInstance& inst) {
  auto soc = optimal_sum_of_costs(inst);
  if (!soc) return std::nullopt;
  long shortest = 0;
  for (int i = 0; i < inst.num_agents(); ++i) shortest += inst.shortest(i);
  return *soc - shortest;
}

// ---- metrics --------------------------------------------------------------

// Midpoint Riemann sum of the best-so-far step function on [0, limit].
inline double riemann_auc(const Trajectory& traj, double limit, double dt) {
  const long steps = std::lround(limit / dt);
  double area = 0.0;
  std::size_t k = 0;
  for (long i = 0; i < steps; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * dt;
    while (k + 1 < traj.size() && traj[k + 1].time <= t) ++k;
    area += static_cast<double>(traj[k].delay) * dt;
  }
  return area;
}

// ---- statistics -----------------------------------------------------------

// Upper-tail p-value of Pearson's chi-square statistic.
inline double chi_square_p(const std::vector<long>& observed, const std::vector<double>& expected_prob) {
  long total = 0;
  for (long o : observed) total += o;
  double stat = 0.0;
  int df = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected_prob[i] <= 0.0) continue;
    const double e = expected_prob[i] * static_cast<double>(total);
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++df;
  }
  if (df <= 0) return 1.0;
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

}  // namespace oracle
