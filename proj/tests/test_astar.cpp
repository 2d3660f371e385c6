#include <gtest/gtest.h>

#include "mapf_lns/mapf_lns.hpp"
#include "oracles.hpp"

using namespace mapf_lns;

namespace {

struct Case {
  GridMap map;
  Vertex start, goal;
  std::vector<Path> fixed;
};

// Fixed paths are random walks with pairwise distinct end cells and
// distinct start cells; the agent's start avoids their t=0 cells.
std::optional<Case> random_case(Rng& rng, int max_side, int max_fixed, int max_len) {
  const int w = 2 + uniform_index(rng, max_side - 1), h = 2 + uniform_index(rng, max_side - 1);
  GridMap map = oracle::random_grid(rng, w, h, 0.2 * uniform01(rng));
  auto cells = largest_component(map);
  const int k = uniform_index(rng, max_fixed + 1);
  if (static_cast<int>(cells.size()) < k + 2) return std::nullopt;
  shuffle_in_place(cells, rng);
  Case c{map, cells[0], cells[1], {}};
  std::set<Vertex> ends{c.goal};
  for (int i = 0; i < k; ++i) {
    Path p = oracle::random_walk_path(map, cells[2 + i], uniform_index(rng, max_len + 1), rng);
    if (!ends.insert(p.back()).second) continue;
    c.fixed.push_back(std::move(p));
  }
  return c;
}

ReservationTable table_of(const Case& c) {
  ReservationTable t(c.map.size());
  for (std::size_t i = 0; i < c.fixed.size(); ++i) t.insert(static_cast<AgentId>(i + 1), c.fixed[i]);
  return t;
}

bool respects(const Path& p, const std::vector<Path>& fixed) {
  std::vector<Path> all{p};
  all.insert(all.end(), fixed.begin(), fixed.end());
  for (const auto& c : oracle::all_conflicts(all))
    if (c.a == 0) return false;
  return true;
}

bool well_formed(const GridMap& map, const Path& p, Vertex s, Vertex g) {
  if (p.empty() || p.front() != s || p.back() != g) return false;
  for (std::size_t t = 1; t < p.size(); ++t)
    if (p[t] != p[t - 1] && !map.adjacent(p[t], p[t - 1])) return false;
  return true;
}

}  // namespace

TEST(SpacetimeAstar, StraightLineOnEmptyGrid) {
  GridMap map = empty_map(5, 1, "line");
  ReservationTable table(map.size());
  auto h = bfs_distance_field(map, Vertex{4});
  auto p = spacetime_astar(map, 0, 4, table, h);
  ASSERT_TRUE(p);
  EXPECT_EQ(*p, (Path{0, 1, 2, 3, 4}));
}

TEST(SpacetimeAstar, WaitsForCrossingAgent) {
  // Plus-shaped map; a fixed agent crosses the centre at t=1.
  GridMap map(3, 3, {false, true, false, true, true, true, false, true, false});
  ReservationTable table(map.size());
  const Path crossing{1, 4, 7};
  table.insert(1, crossing);
  auto h = bfs_distance_field(map, Vertex{5});
  auto p = spacetime_astar(map, 3, 5, table, h);
  ASSERT_TRUE(p);
  EXPECT_EQ(path_length(*p), 3);
  EXPECT_TRUE(respects(*p, {crossing}));
}

TEST(SpacetimeAstar, WaitsUntilGoalIsFreeForGood) {
  // 3x2 grid; another agent passes through the goal (cell 2) at t=4.
  GridMap map = empty_map(3, 2, "box");
  ReservationTable table(map.size());
  const Path visitor{5, 5, 5, 5, 2, 1, 0};
  table.insert(1, visitor);
  auto h = bfs_distance_field(map, Vertex{2});
  auto p = spacetime_astar(map, 3, 2, table, h);
  ASSERT_TRUE(p);
  EXPECT_EQ(path_length(*p), 5);
  EXPECT_EQ(path_length(*p), oracle::time_expanded_bfs(map, 3, 2, {visitor}, 30));
  EXPECT_TRUE(respects(*p, {visitor}));
}

TEST(SpacetimeAstar, GoalHeldByParkedAgentIsUnreachable) {
  GridMap map = empty_map(4, 1, "line");
  ReservationTable table(map.size());
  table.insert(1, Path{3, 2, 1});
  auto h = bfs_distance_field(map, Vertex{0});
  EXPECT_FALSE(spacetime_astar(map, 3, 0, table, h).has_value());
}

TEST(SpacetimeAstar, StartBlockedFails) {
  GridMap map = empty_map(3, 1, "line");
  ReservationTable table(map.size());
  table.insert(1, Path{0});
  auto h = bfs_distance_field(map, Vertex{2});
  EXPECT_FALSE(spacetime_astar(map, 0, 2, table, h).has_value());
}

TEST(SpacetimeAstar, HorizonCutsOffLateArrivals) {
  GridMap map = empty_map(6, 1, "line");
  ReservationTable table(map.size());
  auto h = bfs_distance_field(map, Vertex{5});
  EXPECT_FALSE(spacetime_astar(map, 0, 5, table, h, 4).has_value());
  EXPECT_TRUE(spacetime_astar(map, 0, 5, table, h, 5).has_value());
}

// Property: optimal length equals the time-expanded BFS on random cases.
TEST(SpacetimeAstar, MatchesTimeExpandedBfs) {
  Rng rng(2024);
  int checked = 0;
  while (checked < 300) {
    auto c = random_case(rng, 6, 3, 10);
    if (!c) continue;
    const int horizon = 1 + uniform_index(rng, 24);
    ReservationTable table = table_of(*c);
    auto h = bfs_distance_field(c->map, c->goal);
    auto p = spacetime_astar(c->map, c->start, c->goal, table, h, horizon);
    const int ref = oracle::time_expanded_bfs(c->map, c->start, c->goal, c->fixed, horizon);
    ASSERT_EQ(p.has_value(), ref >= 0) << "case " << checked;
    if (p) {
      EXPECT_EQ(path_length(*p), ref);
      EXPECT_TRUE(well_formed(c->map, *p, c->start, c->goal));
      EXPECT_TRUE(respects(*p, c->fixed));
    }
    ++checked;
  }
}

TEST(SoftSpacetimeAstar, CountsCollisionsItCannotAvoid) {
  // 1x3 corridor with another agent parked in the middle.
  GridMap map = empty_map(3, 1, "line");
  ReservationTable hard(map.size()), soft(map.size());
  soft.insert(1, Path{1});
  auto h = bfs_distance_field(map, Vertex{2});
  auto plan = soft_spacetime_astar(map, 0, 2, hard, soft, h, 10);
  ASSERT_TRUE(plan);
  EXPECT_EQ(plan->path, (Path{0, 1, 2}));
  EXPECT_EQ(plan->collisions, 1);
}

// Property: reported collisions equal the brute-force count, and the
// objective length + collisions never exceeds the collision-free optimum.
TEST(SoftSpacetimeAstar, CollisionCountMatchesBruteForce) {
  Rng rng(77);
  int checked = 0;
  while (checked < 300) {
    auto c = random_case(rng, 6, 4, 8);
    if (!c) continue;
    ReservationTable none(c->map.size());
    ReservationTable soft = table_of(*c);
    auto h = bfs_distance_field(c->map, c->goal);
    const int horizon = std::max(soft.static_after(), h[c->start]) + c->map.size();
    auto plan = soft_spacetime_astar(c->map, c->start, c->goal, none, soft, h, horizon);
    ASSERT_TRUE(plan);
    EXPECT_TRUE(well_formed(c->map, plan->path, c->start, c->goal));
    std::vector<Path> all{plan->path};
    all.insert(all.end(), c->fixed.begin(), c->fixed.end());
    int brute = 0;
    for (const auto& k : oracle::all_conflicts(all))
      if (k.a == 0) ++brute;
    EXPECT_EQ(plan->collisions, brute) << "case " << checked;
    EXPECT_GE(path_length(plan->path), h[c->start]);
    if (auto hard = spacetime_astar(c->map, c->start, c->goal, soft, h, horizon)) {
      EXPECT_LE(path_length(plan->path) + plan->collisions, path_length(*hard));
    }
    ++checked;
  }
}
