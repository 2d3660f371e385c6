#include <gtest/gtest.h>

#include "mapf_lns/mapf_lns.hpp"
#include "oracles.hpp"

using namespace mapf_lns;

namespace {

struct Fixture {
  MapfInstance inst;
  Solution sol;
};

std::optional<Fixture> solved_instance(Rng& rng, int side, int agents) {
  auto inst = oracle::random_instance(rng, side, side, 0.15, agents);
  if (!inst) return std::nullopt;
  auto sol = pp_restart_initial(*inst, 1.0, rng());
  if (!sol) return std::nullopt;
  return Fixture{std::move(*inst), std::move(*sol)};
}

std::vector<AgentId> pick(Rng& rng, int n, int k) {
  std::vector<AgentId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  shuffle_in_place(ids, rng);
  ids.resize(std::min(n, k));
  return ids;
}

// Table holding every path except the neighborhood's.
ReservationTable fixed_table(const Fixture& f, const std::vector<AgentId>& nb) {
  ReservationTable t(f.inst.map().size());
  for (AgentId i = 0; i < f.inst.num_agents(); ++i)
    if (std::find(nb.begin(), nb.end(), i) == nb.end()) t.insert(i, f.sol.paths[i]);
  return t;
}

std::vector<Path> splice(const Fixture& f, const std::vector<AgentId>& nb, const std::vector<Path>& repl) {
  auto paths = f.sol.paths;
  for (std::size_t k = 0; k < nb.size(); ++k) paths[nb[k]] = repl[k];
  return paths;
}

struct TableShape {
  long timed, edges, goals;
  int static_after;
  bool operator==(const TableShape&) const = default;
};

TableShape shape(const ReservationTable& t) {
  return {t.timed_count(), t.edge_count(), t.permanent_count(), t.static_after()};
}

}  // namespace

// Property: a successful repair spliced into the solution is valid, and the
// shared table is handed back unchanged.
TEST(PpReplan, ProducesValidSolutionsAndRestoresTable) {
  Rng rng(41);
  int successes = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto f = solved_instance(rng, 10, 12);
    if (!f) continue;
    auto nb = pick(rng, f->inst.num_agents(), 1 + uniform_index(rng, 6));
    ReservationTable table = fixed_table(*f, nb);
    const auto before = shape(table);
    Rng r = derive_rng(trial, 0);
    auto result = pp_replan({f->inst, table, nb, r});
    EXPECT_EQ(shape(table), before);
    if (!result) continue;
    ++successes;
    ASSERT_EQ(result->size(), nb.size());
    EXPECT_TRUE(validate_solution(f->inst, splice(*f, nb, *result)).ok());
  }
  EXPECT_GT(successes, 100);
}

// Property: the cost bound only turns a full attempt into a failure when
// that attempt would have reached the bound; otherwise results coincide.
TEST(PpReplan, CostBoundIsAnEarlyExitOnly) {
  Rng rng(42);
  int pruned = 0, kept = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto f = solved_instance(rng, 10, 14);
    if (!f) continue;
    auto nb = pick(rng, f->inst.num_agents(), 2 + uniform_index(rng, 6));
    long old_len = 0;
    for (AgentId a : nb) old_len += path_length(f->sol.paths[a]);
    ReservationTable table = fixed_table(*f, nb);
    Rng r1 = derive_rng(trial, 3), r2 = r1;
    auto full = pp_replan({f->inst, table, nb, r1});
    auto bounded = pp_replan({f->inst, table, nb, r2, old_len});
    long full_len = 0;
    if (full)
      for (const Path& p : *full) full_len += path_length(p);
    const bool should_keep = full && full_len < old_len;
    ASSERT_EQ(bounded.has_value(), should_keep) << "trial " << trial;
    if (bounded) {
      EXPECT_EQ(*bounded, *full);
      ++kept;
    } else {
      ++pruned;
    }
  }
  EXPECT_GT(pruned, 0);
  EXPECT_GT(kept, 0);
}

TEST(PpReplan, FailsWhenCorridorIsBlocked) {
  // Corridor 0-1-2 with a pocket below 1; a fixed agent parks at 1.
  GridMap map(3, 2, {true, true, true, false, true, false});
  MapfInstance inst(map, {{0, {0, 0}, {0, 2}}, {1, {1, 1}, {0, 1}}});
  ReservationTable table(map.size());
  std::vector<AgentId> nb{0};
  table.insert(1, Path{4, 1});
  Rng r(1);
  EXPECT_FALSE(pp_replan({inst, table, nb, r}).has_value());
}

// Corridor of four cells with a pocket below the third. Only "agent 0 first"
// is feasible: agent 1 ducks into the pocket and comes back.
MapfInstance pocket_instance() {
  GridMap map(4, 2, {true, true, true, true, false, false, true, false});
  return MapfInstance(map, {{0, {0, 0}, {0, 3}}, {1, {0, 3}, {0, 0}}});
}

TEST(PbsSearch, ResolvesHeadOnCorridor) {
  MapfInstance inst = pocket_instance();
  ReservationTable table(inst.map().size());
  std::vector<AgentId> nb{0, 1};
  Rng r(1);
  auto out = pbs_search({inst, table, nb, r}, 64);
  ASSERT_TRUE(out);
  EXPECT_TRUE(validate_solution(inst, out->paths).ok());
  ASSERT_EQ(out->priorities.size(), 1u);
  EXPECT_EQ(out->priorities[0], (std::pair<AgentId, AgentId>{0, 1}));
  EXPECT_EQ(out->expansions, 2);
  EXPECT_EQ(sum_of_delays(inst, out->paths), 2);
  EXPECT_FALSE(pbs_search({inst, table, nb, r}, 1).has_value());
}

TEST(PbsSearch, BothOrdersInfeasibleFails) {
  GridMap map(3, 2, {true, true, true, false, true, false});
  MapfInstance inst(map, {{0, {0, 0}, {0, 2}}, {1, {0, 2}, {0, 0}}});
  ReservationTable table(map.size());
  std::vector<AgentId> nb{0, 1};
  Rng r(1);
  EXPECT_FALSE(pbs_search({inst, table, nb, r}, 64).has_value());
}

// Property: PBS output is valid, respects its own priority pairs, and
// leaves the table unchanged.
TEST(PbsSearch, ProducesValidSolutionsAndRestoresTable) {
  Rng rng(43);
  int successes = 0;
  for (int trial = 0; trial < 120; ++trial) {
    auto f = solved_instance(rng, 9, 12);
    if (!f) continue;
    auto nb = pick(rng, f->inst.num_agents(), 2 + uniform_index(rng, 5));
    ReservationTable table = fixed_table(*f, nb);
    const auto before = shape(table);
    Rng r(trial);
    auto out = pbs_search({f->inst, table, nb, r}, 64);
    EXPECT_EQ(shape(table), before);
    if (!out) continue;
    ++successes;
    EXPECT_LE(out->expansions, 64);
    auto paths = splice(*f, nb, out->paths);
    EXPECT_TRUE(validate_solution(f->inst, paths).ok());
    for (auto [hi, lo] : out->priorities) {
      EXPECT_TRUE(std::find(nb.begin(), nb.end(), hi) != nb.end());
      EXPECT_FALSE(first_conflict(hi, paths[hi], lo, paths[lo]).has_value());
    }
  }
  EXPECT_GT(successes, 80);
}

TEST(PbsReplan, CostBoundChecksTheResult) {
  MapfInstance inst = pocket_instance();
  ReservationTable table(inst.map().size());
  std::vector<AgentId> nb{0, 1};
  Rng r(1);
  auto ok = pbs_replan({inst, table, nb, r, 9L});
  ASSERT_TRUE(ok);
  EXPECT_EQ(path_length((*ok)[0]) + path_length((*ok)[1]), 8);
  EXPECT_FALSE(pbs_replan({inst, table, nb, r, 8L}).has_value());
}

// Property: both initializers return valid solutions whose cached objective
// matches a recomputation.
TEST(Initializers, ProduceValidSolutions) {
  Rng rng(44);
  int ok_pp = 0, ok_lns = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = oracle::random_instance(rng, 10, 10, 0.2, 15);
    if (!inst) continue;
    InitStats a, b;
    auto pp = pp_restart_initial(*inst, 1.0, trial, &a);
    auto lns = lns2lite_initial(*inst, 1.0, trial, {}, &b);
    EXPECT_EQ(a.solver, "pp-restart");
    EXPECT_EQ(b.solver, "lns2lite");
    if (pp) {
      ++ok_pp;
      EXPECT_TRUE(validate_solution(*inst, *pp).ok());
      EXPECT_EQ(pp->sum_of_delays, sum_of_delays(*inst, *pp));
      EXPECT_GE(a.pp_attempts, 1);
    }
    if (lns) {
      ++ok_lns;
      EXPECT_TRUE(validate_solution(*inst, *lns).ok());
      EXPECT_EQ(lns->sum_of_delays, sum_of_delays(*inst, *lns));
      EXPECT_LE(b.repair_accepted, b.repair_iterations);
    }
  }
  EXPECT_GT(ok_pp, 40);
  EXPECT_GT(ok_lns, 40);
}

TEST(Initializers, DeterministicForASeed) {
  Rng rng(45);
  auto inst = oracle::random_instance(rng, 12, 12, 0.2, 30);
  ASSERT_TRUE(inst);
  auto a = lns2lite_initial(*inst, 5.0, 17), b = lns2lite_initial(*inst, 5.0, 17);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->paths, b->paths);
  auto c = pp_restart_initial(*inst, 5.0, 17), d = pp_restart_initial(*inst, 5.0, 17);
  ASSERT_TRUE(c && d);
  EXPECT_EQ(c->paths, d->paths);
}

TEST(Initializers, RepairPhaseRunsOnCrowdedMaps) {
  const std::filesystem::path root = MAPF_LNS_DATA;
  GridMap map = load_map(root / "maps" / "random-32-32-20.map");
  auto inst = make_instance(load_scenario_file(root / "scens" / "random-32-32-20-random-1.scen"), map, 150);
  InitStats stats;
  auto s = initial_solution(inst, InitSolver::Lns2Lite, 10.0, 1, &stats);
  ASSERT_TRUE(s);
  EXPECT_TRUE(validate_solution(inst, *s).ok());
  EXPECT_GT(stats.initial_collisions, 0);
  EXPECT_GT(stats.repair_accepted, 0);
}

TEST(Initializers, ZeroBudgetStillTriesOnce) {
  Rng rng(46);
  auto inst = oracle::random_instance(rng, 8, 8, 0.0, 3);
  ASSERT_TRUE(inst);
  InitStats stats;
  auto s = initial_solution(*inst, InitSolver::PpRestart, 0.0, 1, &stats);
  EXPECT_EQ(stats.pp_attempts, 1);
  if (s) {
    EXPECT_TRUE(validate_solution(*inst, *s).ok());
  }
}
