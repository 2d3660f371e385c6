#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "instance.hpp"
#include "path.hpp"
#include "random.hpp"
#include "reservation_table.hpp"

namespace mapf_lns {

enum class Strategy { RandomWalk, RandomWalkProb, Intersection, Random, Adaptive, Bandit, UniBandit };

// The destroy rules that Adaptive and the bandits mix over.
enum class BaseStrategy { RandomWalk = 0, Intersection = 1, Random = 2 };
inline constexpr int kNumBase = 3;
inline constexpr std::array<int, 5> kBanditSizes{2, 4, 8, 16, 32};

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::RandomWalk: return "randomwalk";
    case Strategy::RandomWalkProb: return "randomwalkprob";
    case Strategy::Intersection: return "intersection";
    case Strategy::Random: return "random";
    case Strategy::Adaptive: return "adaptive";
    case Strategy::Bandit: return "bandit";
    case Strategy::UniBandit: return "unibandit";
  }
  return "?";
}

inline std::string to_string(BaseStrategy s) {
  switch (s) {
    case BaseStrategy::RandomWalk: return "randomwalk";
    case BaseStrategy::Intersection: return "intersection";
    case BaseStrategy::Random: return "random";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::RandomWalk, Strategy::RandomWalkProb, Strategy::Intersection, Strategy::Random,
                     Strategy::Adaptive, Strategy::Bandit, Strategy::UniBandit})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

struct Neighborhood {
  std::vector<AgentId> agents;  // selection order, no duplicates
  Strategy strategy_tag = Strategy::Random;
  int size_used = 0;
};

// Read-only view of the current LNS state. `table` reserves every path in
// `paths`, `delays` is the per-agent delay.
struct SelectionContext {
  const MapfInstance& instance;
  const std::vector<Path>& paths;
  const ReservationTable& table;
  const std::vector<int>& delays;
};

struct Selection {
  Neighborhood neighborhood;
  bool converged = false;  // no agent is delayed
  bool fell_back = false;  // intersection selector had nothing to work with
};

struct AdaptiveParams {
  double gamma = 0.01;
  double floor = 0.01;
  double initial_weight = 1.0;
};

struct NormalGammaPrior {
  double mu0 = 0.0;
  double kappa0 = 1.0;
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

// Running reward statistics for one arm (Welford).
struct ArmStats {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
};

struct StrategyParams {
  int walk_attempt_factor = 2;
  int intersection_radius = 5;
  AdaptiveParams adaptive;
  NormalGammaPrior prior;
};

class IntersectionIndex {
 public:
  explicit IntersectionIndex(const GridMap& map) {
    for (Vertex v = 0; v < map.size(); ++v)
      if (map.passable(v) && map.degree(v) > 2) vertices_.push_back(v);
  }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  bool empty() const { return vertices_.empty(); }

 private:
  std::vector<Vertex> vertices_;
};

struct StrategyState {
  explicit StrategyState(Rng rng_in, StrategyParams p = {}) : rng(std::move(rng_in)), params(p) {
    adaptive_weights.fill(params.adaptive.initial_weight);
  }

  Rng rng;
  StrategyParams params;
  std::vector<AgentId> tabu;
  int delayed_snapshot = 0;
  std::array<double, kNumBase> adaptive_weights{};
  std::array<ArmStats, kNumBase> strategy_arms{};
  std::array<std::array<ArmStats, kBanditSizes.size()>, kNumBase> size_arms{};
  std::optional<IntersectionIndex> intersections;
};

namespace detail {

inline std::vector<AgentId> delayed_agents(const std::vector<int>& delays) {
  std::vector<AgentId> out;
  for (AgentId i = 0; i < static_cast<AgentId>(delays.size()); ++i)
    if (delays[i] > 0) out.push_back(i);
  return out;
}

inline bool contains(const std::vector<AgentId>& v, AgentId a) { return std::find(v.begin(), v.end(), a) != v.end(); }

inline Selection converged_selection(const SelectionContext& ctx, StrategyState& state, Strategy tag, int m) {
  Selection s;
  s.converged = true;
  s.neighborhood.strategy_tag = tag;
  s.neighborhood.size_used = m;
  if (ctx.instance.num_agents() > 0)
    s.neighborhood.agents.push_back(static_cast<AgentId>(uniform_index(state.rng, ctx.instance.num_agents())));
  return s;
}

}  // namespace detail

// One step of a synthesized walk: from `from` at time-1 to `to` at time.
struct WalkStep {
  Vertex from;
  Vertex to;
  int time;
};

struct WalkTrace {
  int start_time = 0;
  std::vector<WalkStep> steps;
};

// Agents (other than `agent`) that the move from -> to arriving at t collides
// with: vertex occupants at (to, t), including parked agents, and swaps.
inline void colliding_agents(const ReservationTable& table, AgentId agent, Vertex from, Vertex to, int t,
                             std::vector<AgentId>& out) {
  out.clear();
  std::vector<AgentId> buf;
  table.occupants(to, t, buf);
  for (AgentId a : buf)
    if (a != agent) out.push_back(a);
  if (from != to) {
    std::vector<AgentId> there;
    table.timed_occupants(to, t - 1, there);
    table.timed_occupants(from, t, buf);
    for (AgentId a : there)
      if (a != agent && detail::contains(buf, a)) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

// Random walk from a random timestep of the agent's path toward shortcuts:
// each step goes to a random neighbor (or stays) from which the goal is still
// reachable strictly earlier than the current arrival, and every agent the
// step collides with joins the neighborhood, lowest id first, until it holds m.
inline WalkTrace random_walk_inner(const SelectionContext& ctx, AgentId agent, std::vector<AgentId>& nb, int m,
                                   Rng& rng) {
  WalkTrace trace;
  const Path& path = ctx.paths[agent];
  const int l = path_length(path);
  const DistanceField& h = ctx.instance.heuristic(agent);
  const GridMap& map = ctx.instance.map();
  trace.start_time = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(l) + 1));
  if (static_cast<int>(nb.size()) >= m) return trace;

  Vertex x = path[trace.start_time];
  std::vector<Vertex> frontier;
  std::vector<AgentId> hit;
  for (int t = trace.start_time; static_cast<int>(nb.size()) < m; ++t) {
    frontier.clear();
    for (Vertex v : map.neighbors(x))
      if (h[v] != kUnreachable && t + 1 + h[v] < l) frontier.push_back(v);
    if (h[x] != kUnreachable && t + 1 + h[x] < l) frontier.push_back(x);
    if (frontier.empty()) break;
    const Vertex y = frontier[uniform_index(rng, frontier.size())];
    trace.steps.push_back({x, y, t + 1});
    colliding_agents(ctx.table, agent, x, y, t + 1, hit);
    for (AgentId a : hit) {
      if (static_cast<int>(nb.size()) >= m) break;
      if (!detail::contains(nb, a)) nb.push_back(a);
    }
    x = y;
  }
  return trace;
}

inline Selection select_randomwalk(StrategyState& state, const SelectionContext& ctx, int m) {
  const auto delayed = detail::delayed_agents(ctx.delays);
  if (delayed.empty()) return detail::converged_selection(ctx, state, Strategy::RandomWalk, m);

  // Keep only agents that are still delayed; the list restarts once every
  // delayed agent has had a turn.
  state.delayed_snapshot = static_cast<int>(delayed.size());
  std::erase_if(state.tabu, [&](AgentId a) { return ctx.delays[a] <= 0; });
  if (static_cast<int>(state.tabu.size()) >= state.delayed_snapshot) state.tabu.clear();

  AgentId start = kNoAgent;
  for (AgentId a : delayed)
    if (!detail::contains(state.tabu, a) && (start == kNoAgent || ctx.delays[a] > ctx.delays[start])) start = a;
  state.tabu.push_back(start);
  if (static_cast<int>(state.tabu.size()) == state.delayed_snapshot) state.tabu.clear();

  Selection s;
  s.neighborhood.strategy_tag = Strategy::RandomWalk;
  s.neighborhood.size_used = m;
  auto& nb = s.neighborhood.agents;
  nb.push_back(start);
  AgentId walker = start;
  const int attempts = state.params.walk_attempt_factor * m;
  for (int i = 0; i < attempts && static_cast<int>(nb.size()) < m; ++i) {
    random_walk_inner(ctx, walker, nb, m, state.rng);
    walker = nb[uniform_index(state.rng, nb.size())];
  }
  return s;
}

inline Selection select_randomwalkprob(StrategyState& state, const SelectionContext& ctx, int m) {
  const auto delayed = detail::delayed_agents(ctx.delays);
  if (delayed.empty()) return detail::converged_selection(ctx, state, Strategy::RandomWalkProb, m);

  std::discrete_distribution<AgentId> law(ctx.delays.begin(), ctx.delays.end());
  Selection s;
  s.neighborhood.strategy_tag = Strategy::RandomWalkProb;
  s.neighborhood.size_used = m;
  auto& nb = s.neighborhood.agents;
  AgentId walker = law(state.rng);
  nb.push_back(walker);
  const int attempts = state.params.walk_attempt_factor * m;
  for (int i = 0; i < attempts && static_cast<int>(nb.size()) < m; ++i) {
    random_walk_inner(ctx, walker, nb, m, state.rng);
    if (static_cast<int>(nb.size()) >= m) break;
    walker = law(state.rng);
    if (!detail::contains(nb, walker)) nb.push_back(walker);
  }
  return s;
}

inline Selection select_random(StrategyState& state, const SelectionContext& ctx, int m) {
  const int n = ctx.instance.num_agents();
  const int k = std::min(m, n);
  std::vector<AgentId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < k; ++i) std::swap(ids[i], ids[i + uniform_index(state.rng, n - i)]);
  ids.resize(k);
  Selection s;
  s.neighborhood = {std::move(ids), Strategy::Random, m};
  return s;
}

// Agents whose paths pass through v, ordered by first visit (ties by id).
inline std::vector<AgentId> agents_visiting(const ReservationTable& table, Vertex v) {
  std::vector<AgentId> out, here;
  for (int t = 0; t <= table.latest_visit(v); ++t) {
    table.timed_occupants(v, t, here);
    std::sort(here.begin(), here.end());
    for (AgentId a : here)
      if (!detail::contains(out, a)) out.push_back(a);
  }
  return out;
}

inline Selection select_intersection(StrategyState& state, const SelectionContext& ctx, int m) {
  const GridMap& map = ctx.instance.map();
  if (!state.intersections) state.intersections.emplace(map);

  std::vector<Vertex> visited;
  for (Vertex v : state.intersections->vertices())
    if (ctx.table.latest_visit(v) >= 0) visited.push_back(v);
  if (visited.empty()) {
    Selection s = select_random(state, ctx, m);
    s.fell_back = true;
    return s;
  }

  Selection s;
  s.neighborhood.strategy_tag = Strategy::Intersection;
  s.neighborhood.size_used = m;
  auto& nb = s.neighborhood.agents;
  const int cap = std::min(m, ctx.instance.num_agents());
  auto take = [&](Vertex v) {
    for (AgentId a : agents_visiting(ctx.table, v)) {
      if (static_cast<int>(nb.size()) >= cap) return;
      if (!detail::contains(nb, a)) nb.push_back(a);
    }
  };

  const Vertex root = visited[uniform_index(state.rng, visited.size())];
  take(root);

  // Breadth-first over nearby cells, harvesting each intersection reached.
  std::vector<int> depth(map.size(), -1);
  std::deque<Vertex> queue{root};
  depth[root] = 0;
  while (!queue.empty() && static_cast<int>(nb.size()) < cap) {
    const Vertex u = queue.front();
    queue.pop_front();
    if (u != root && map.degree(u) > 2) take(u);
    if (depth[u] == state.params.intersection_radius) continue;
    for (Vertex w : map.neighbors(u))
      if (depth[w] < 0) {
        depth[w] = depth[u] + 1;
        queue.push_back(w);
      }
  }

  while (static_cast<int>(nb.size()) < cap) {
    const auto a = static_cast<AgentId>(uniform_index(state.rng, ctx.instance.num_agents()));
    if (!detail::contains(nb, a)) nb.push_back(a);
  }
  return s;
}

inline Selection select_base(StrategyState& state, const SelectionContext& ctx, BaseStrategy base, int m) {
  switch (base) {
    case BaseStrategy::RandomWalk: return select_randomwalk(state, ctx, m);
    case BaseStrategy::Intersection: return select_intersection(state, ctx, m);
    case BaseStrategy::Random: return select_random(state, ctx, m);
  }
  throw std::logic_error("unknown base strategy");
}

// Adaptive

inline std::array<double, kNumBase> adaptive_probabilities(const StrategyState& state) {
  const auto& w = state.adaptive_weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::array<double, kNumBase> p{};
  for (int i = 0; i < kNumBase; ++i) p[i] = w[i] / total;
  return p;
}

inline BaseStrategy adaptive_select(StrategyState& state) {
  const auto& w = state.adaptive_weights;
  std::discrete_distribution<int> law(w.begin(), w.end());
  return static_cast<BaseStrategy>(law(state.rng));
}

inline void adaptive_update(StrategyState& state, BaseStrategy chosen, double improvement) {
  const auto& p = state.params.adaptive;
  double& w = state.adaptive_weights[static_cast<int>(chosen)];
  w = std::max(p.floor, (1.0 - p.gamma) * w + p.gamma * std::max(improvement, 0.0));
}

// Thompson sampling with a Normal-Gamma posterior over each arm's mean reward.

inline double sample_arm_mean(const ArmStats& arm, const NormalGammaPrior& prior, Rng& rng) {
  const double n = static_cast<double>(arm.n);
  const double kappa = prior.kappa0 + n;
  const double mu = (prior.kappa0 * prior.mu0 + n * arm.mean) / kappa;
  const double alpha = prior.alpha0 + n / 2.0;
  const double diff = arm.mean - prior.mu0;
  const double beta = prior.beta0 + arm.m2 / 2.0 + prior.kappa0 * n * diff * diff / (2.0 * kappa);
  const double precision = std::gamma_distribution<double>(alpha, 1.0 / beta)(rng);
  return std::normal_distribution<double>(mu, 1.0 / std::sqrt(kappa * precision))(rng);
}

template <std::size_t K>
int thompson_pick(const std::array<ArmStats, K>& arms, const NormalGammaPrior& prior, Rng& rng) {
  int best = 0;
  double best_draw = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(K); ++i) {
    const double draw = sample_arm_mean(arms[i], prior, rng);
    if (draw > best_draw) {
      best_draw = draw;
      best = i;
    }
  }
  return best;
}

struct BanditChoice {
  BaseStrategy strategy = BaseStrategy::Random;
  int size_index = 0;
  int size() const { return kBanditSizes[size_index]; }
};

inline BanditChoice bandit_select(StrategyState& state) {
  BanditChoice c;
  const int s = thompson_pick(state.strategy_arms, state.params.prior, state.rng);
  c.strategy = static_cast<BaseStrategy>(s);
  c.size_index = thompson_pick(state.size_arms[s], state.params.prior, state.rng);
  return c;
}

inline void bandit_update(StrategyState& state, const BanditChoice& choice, double reward) {
  const int s = static_cast<int>(choice.strategy);
  state.strategy_arms[s].add(reward);
  state.size_arms[s][choice.size_index].add(reward);
}

inline int unibandit_size(StrategyState& state) {
  return kBanditSizes[uniform_index(state.rng, kBanditSizes.size())];
}

// Strategy arm by Thompson sampling, size uniform. Only the strategy arm learns.
inline BanditChoice unibandit_select(StrategyState& state) {
  BanditChoice c;
  c.strategy = static_cast<BaseStrategy>(thompson_pick(state.strategy_arms, state.params.prior, state.rng));
  const int size = unibandit_size(state);
  c.size_index = static_cast<int>(std::find(kBanditSizes.begin(), kBanditSizes.end(), size) - kBanditSizes.begin());
  return c;
}

inline void unibandit_update(StrategyState& state, const BanditChoice& choice, double reward) {
  state.strategy_arms[static_cast<int>(choice.strategy)].add(reward);
}

}  // namespace mapf_lns
