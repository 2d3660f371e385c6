#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conflicts.hpp"
#include "init_solvers.hpp"
#include "instance.hpp"
#include "metrics.hpp"
#include "path.hpp"
#include "random.hpp"
#include "replan.hpp"
#include "reservation_table.hpp"
#include "strategies.hpp"

namespace mapf_lns {

enum class ReplanSolver { PP, PBS };

inline std::string to_string(ReplanSolver r) { return r == ReplanSolver::PP ? "pp" : "pbs"; }

// Stop after this much core time, or after this many iterations. In
// iteration mode the trajectory's time axis counts iterations.
struct Budget {
  enum class Kind { CoreSeconds, Iterations };
  Kind kind = Kind::CoreSeconds;
  double seconds = 60.0;
  long iterations = 0;

  static Budget core_seconds(double s) { return {Kind::CoreSeconds, s, 0}; }
  static Budget max_iterations(long n) { return {Kind::Iterations, 0.0, n}; }
  bool by_iterations() const { return kind == Kind::Iterations; }
  double limit() const { return by_iterations() ? static_cast<double>(iterations) : seconds; }
};

struct LnsConfig {
  Strategy strategy = Strategy::Adaptive;
  int nb_size = 8;
  ReplanSolver replan = ReplanSolver::PP;
  int pbs_node_budget = 64;
  InitSolver init = InitSolver::Lns2Lite;
  double init_budget_s = 10.0;
  Budget budget;
  std::uint64_t seed = 0;
  StrategyParams strategy_params;
  int validate_every = 0;  // 0 disables the periodic full validation
};

inline void check_config(const LnsConfig& c, int num_agents) {
  if (c.nb_size < 1) throw std::invalid_argument("neighborhood size must be positive");
  if (num_agents > 0 && c.nb_size > num_agents &&
      std::find(kBanditSizes.begin(), kBanditSizes.end(), c.nb_size) == kBanditSizes.end())
    throw std::invalid_argument("neighborhood size exceeds the agent count");
  if (c.budget.by_iterations() ? c.budget.iterations <= 0 : !(c.budget.seconds > 0.0))
    throw std::invalid_argument("budget must be positive");
  if (c.pbs_node_budget < 1) throw std::invalid_argument("PBS node budget must be positive");
}

// Accumulates steady-clock time across start/stop spans.
class CoreTimer {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  void stop() { total_ += std::chrono::steady_clock::now() - begin_; }
  double seconds() const { return std::chrono::duration<double>(total_).count(); }

 private:
  std::chrono::steady_clock::time_point begin_{};
  std::chrono::steady_clock::duration total_{};
};

inline bool accept_candidate(long current, long candidate) { return candidate < current; }

struct RunRecord {
  LnsConfig config;
  long initial_delay = 0;
  Trajectory trajectory;
  long iterations = 0;
  long accepted = 0;
  long failed_replans = 0;
  std::map<std::string, long> strategy_usage;
  long final_delay = 0;
  double auc = 0.0;
  double core_time_s = 0.0;
  Solution solution;
};

struct IterationInfo {
  long iteration = 0;
  const Neighborhood& neighborhood;
  bool replanned = false;
  bool accepted = false;
  long sum_of_delays = 0;
};

struct LnsHooks {
  // Called after every iteration, outside the core-time spans.
  std::function<void(const IterationInfo&)> on_iteration;
  // Replaces the configured repair operator.
  std::function<ReplanResult(const ReplanRequest&)> replan;
};

inline RunRecord lns_run(const MapfInstance& instance, const Solution& initial, const LnsConfig& config,
                         const LnsHooks& hooks = {}) {
  check_config(config, instance.num_agents());
  if (!validate_solution(instance, initial).ok()) throw std::invalid_argument("initial solution is not valid");

  RunRecord rec;
  rec.config = config;
  rec.solution = make_solution(instance, initial.paths);
  std::vector<Path>& paths = rec.solution.paths;
  long& current = rec.solution.sum_of_delays;
  rec.initial_delay = current;
  rec.trajectory.push_back({0.0, current});

  ReservationTable table = build_reservation(instance.map().size(), paths);
  std::vector<int> delays = agent_delays(instance, rec.solution);
  StrategyState state(derive_rng(config.seed, 1), config.strategy_params);
  Rng replan_rng = derive_rng(config.seed, 2);
  CoreTimer timer;
  const int n = instance.num_agents();

  auto out_of_budget = [&] {
    return config.budget.by_iterations() ? rec.iterations >= config.budget.iterations
                                         : timer.seconds() >= config.budget.seconds;
  };

  while (!out_of_budget() && current > 0) {
    timer.start();
    const SelectionContext ctx{instance, paths, table, delays};
    BaseStrategy base = BaseStrategy::Random;
    BanditChoice arm;
    Selection sel;
    auto size_for = [&](int m) { return std::min(m, n); };
    switch (config.strategy) {
      case Strategy::RandomWalk: sel = select_randomwalk(state, ctx, size_for(config.nb_size)); break;
      case Strategy::RandomWalkProb: sel = select_randomwalkprob(state, ctx, size_for(config.nb_size)); break;
      case Strategy::Intersection: sel = select_intersection(state, ctx, size_for(config.nb_size)); break;
      case Strategy::Random: sel = select_random(state, ctx, size_for(config.nb_size)); break;
      case Strategy::Adaptive:
        base = adaptive_select(state);
        sel = select_base(state, ctx, base, size_for(config.nb_size));
        break;
      case Strategy::Bandit:
      case Strategy::UniBandit:
        arm = config.strategy == Strategy::Bandit ? bandit_select(state) : unibandit_select(state);
        base = arm.strategy;
        sel = select_base(state, ctx, base, size_for(arm.size()));
        sel.neighborhood.size_used = arm.size();
        break;
    }
    const auto& nb = sel.neighborhood.agents;

    long old_length = 0, old_delay = 0;
    for (AgentId a : nb) {
      old_length += path_length(paths[a]);
      old_delay += delays[a];
      table.remove(a, paths[a]);
    }
    const ReplanRequest req{instance, table, nb, replan_rng, old_length};
    ReplanResult result;
    if (hooks.replan)
      result = hooks.replan(req);
    else if (config.replan == ReplanSolver::PP)
      result = pp_replan(req);
    else
      result = pbs_replan(req, config.pbs_node_budget);
    timer.stop();
    ++rec.iterations;

    const std::string tag = config.strategy == Strategy::Adaptive || config.strategy == Strategy::Bandit ||
                                    config.strategy == Strategy::UniBandit
                                ? to_string(base)
                                : to_string(config.strategy);
    ++rec.strategy_usage[tag];

    long candidate = current;
    if (result) {
      long new_delay = 0;
      for (std::size_t k = 0; k < nb.size(); ++k) new_delay += compute_delay((*result)[k], instance.shortest(nb[k]));
      candidate = current - old_delay + new_delay;
    } else {
      ++rec.failed_replans;
    }
    const bool accepted = result && accept_candidate(current, candidate);
    if (accepted) {
      for (std::size_t k = 0; k < nb.size(); ++k) {
        const AgentId a = nb[k];
        paths[a] = std::move((*result)[k]);
        delays[a] = compute_delay(paths[a], instance.shortest(a));
        table.insert(a, paths[a]);
      }
      const double improvement = static_cast<double>(current - candidate);
      current = candidate;
      ++rec.accepted;
      double x = config.budget.by_iterations() ? static_cast<double>(rec.iterations) : timer.seconds();
      if (x <= rec.trajectory.back().time) x = std::nextafter(rec.trajectory.back().time, INFINITY);
      rec.trajectory.push_back({x, current});
      if (config.strategy == Strategy::Adaptive) adaptive_update(state, base, improvement);
      if (config.strategy == Strategy::Bandit) bandit_update(state, arm, improvement);
      if (config.strategy == Strategy::UniBandit) unibandit_update(state, arm, improvement);
    } else {
      for (AgentId a : nb) table.insert(a, paths[a]);
      if (config.strategy == Strategy::Adaptive) adaptive_update(state, base, 0.0);
      if (config.strategy == Strategy::Bandit) bandit_update(state, arm, 0.0);
      if (config.strategy == Strategy::UniBandit) unibandit_update(state, arm, 0.0);
    }

    if (config.validate_every > 0 && rec.iterations % config.validate_every == 0) {
      auto v = validate_solution(instance, paths);
      if (!v.ok()) throw InconsistencyError("LNS state became invalid at iteration " + std::to_string(rec.iterations));
    }
    if (hooks.on_iteration)
      hooks.on_iteration(IterationInfo{rec.iterations, sel.neighborhood, result.has_value(), accepted, current});
  }

  rec.core_time_s = timer.seconds();
  rec.final_delay = current;
  rec.auc = auc(rec.trajectory, config.budget.limit());
  return rec;
}

}  // namespace mapf_lns
