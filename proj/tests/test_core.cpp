#include <gtest/gtest.h>

#include "mapf_lns/mapf_lns.hpp"
#include "oracles.hpp"

using namespace mapf_lns;

namespace {

GridMap open_grid(int w, int h) { return empty_map(w, h, "open"); }

MapfInstance two_agent_corridor() {
  // 1x4 corridor: agent 0 left to right, agent 1 parked in the middle.
  GridMap map(4, 1, {true, true, true, true}, "corridor");
  return MapfInstance(map, {{0, {0, 0}, {0, 3}}, {1, {0, 2}, {0, 2}}});
}

}  // namespace

TEST(Grid, NeighborsAreFourConnectedAndPassable) {
  GridMap map(3, 3, {true, false, true, true, true, true, true, true, false});
  EXPECT_EQ(map.degree(map.vertex({1, 1})), 3);
  EXPECT_EQ(map.degree(map.vertex({0, 0})), 1);
  EXPECT_FALSE(map.passable(Cell{2, 2}));
  EXPECT_FALSE(map.passable(Cell{3, 0}));
  EXPECT_TRUE(map.adjacent(map.vertex({1, 0}), map.vertex({1, 1})));
  EXPECT_FALSE(map.adjacent(map.vertex({0, 0}), map.vertex({1, 1})));
  EXPECT_EQ(map.passable_count(), 7);
  EXPECT_EQ(map.cell(map.vertex({2, 1})), (Cell{2, 1}));
}

TEST(DistanceField, MatchesDijkstraOnRandomMaps) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 2 + uniform_index(rng, 12), h = 2 + uniform_index(rng, 12);
    GridMap map = oracle::random_grid(rng, w, h, 0.3);
    std::vector<Vertex> open;
    for (Vertex v = 0; v < map.size(); ++v)
      if (map.passable(v)) open.push_back(v);
    if (open.empty()) continue;
    const Vertex goal = open[uniform_index(rng, open.size())];
    const auto field = bfs_distance_field(map, goal);
    const auto ref = oracle::dijkstra(map, goal);
    for (Vertex v = 0; v < map.size(); ++v) {
      if (ref[v] == std::numeric_limits<int>::max())
        EXPECT_FALSE(field.reachable(v));
      else
        EXPECT_EQ(field[v], ref[v]);
    }
  }
}

TEST(DistanceField, RejectsBlockedGoal) {
  GridMap map(2, 1, {true, false});
  EXPECT_THROW(bfs_distance_field(map, Vertex{1}), std::invalid_argument);
  EXPECT_THROW(bfs_distance_field(map, Cell{0, 5}), std::invalid_argument);
}

TEST(Instance, RejectsBadTasks) {
  GridMap map(3, 1, {true, false, true});
  EXPECT_THROW(MapfInstance(map, {{0, {0, 1}, {0, 0}}}), LoadError);
  EXPECT_THROW(MapfInstance(map, {{0, {0, 0}, {0, 2}}}), LoadError);  // unreachable
  GridMap open = open_grid(3, 3);
  EXPECT_THROW(MapfInstance(open, {{0, {0, 0}, {1, 1}}, {1, {0, 0}, {2, 2}}}), LoadError);
  EXPECT_THROW(MapfInstance(open, {{0, {0, 0}, {1, 1}}, {1, {0, 1}, {1, 1}}}), LoadError);
  EXPECT_THROW(MapfInstance(open, {{1, {0, 0}, {1, 1}}}), LoadError);
}

TEST(Instance, ShortestDistances) {
  MapfInstance inst(open_grid(5, 5), {{0, {0, 0}, {4, 4}}, {1, {2, 2}, {2, 2}}});
  EXPECT_EQ(inst.shortest(0), 8);
  EXPECT_EQ(inst.shortest(1), 0);
  EXPECT_EQ(inst.heuristic(0)[inst.start(0)], 8);
}

TEST(Path, LengthDelayAndLocation) {
  const Path p{0, 1, 1, 2};
  EXPECT_EQ(path_length(p), 3);
  EXPECT_EQ(location_at(p, 1), 1);
  EXPECT_EQ(location_at(p, 10), 2);
  EXPECT_EQ(compute_delay(p, 2), 1);
  EXPECT_THROW(compute_delay(p, 4), InconsistencyError);
  EXPECT_THROW(path_length(Path{}), MalformedPath);
}

TEST(Path, SumOfDelaysChecksShape) {
  auto inst = two_agent_corridor();
  EXPECT_THROW(sum_of_delays(inst, std::vector<Path>{{0, 1, 2, 3}}), ShapeError);
  auto s = make_solution(inst, {{0, 1, 1, 2, 3}, {2}});
  EXPECT_EQ(s.sum_of_delays, 1);
  EXPECT_EQ(agent_delays(inst, s), (std::vector<int>{1, 0}));
}

TEST(Validate, ReportsDefects) {
  GridMap map(3, 2, {true, true, true, true, false, true});
  MapfInstance inst(map, {{0, {0, 0}, {0, 2}}});
  auto defect = [&](Path p) {
    auto v = validate_solution(inst, std::vector<Path>{std::move(p)});
    return v.defects.empty() ? std::optional<DefectKind>{} : v.defects.front().kind;
  };
  EXPECT_EQ(defect({}), DefectKind::Empty);
  EXPECT_EQ(defect({1, 2}), DefectKind::WrongStart);
  EXPECT_EQ(defect({0, 1}), DefectKind::WrongGoal);
  EXPECT_EQ(defect({0, 3, 4, 5, 2}), DefectKind::BlockedCell);
  EXPECT_EQ(defect({0, 2}), DefectKind::BadStep);
  EXPECT_FALSE(defect({0, 1, 2}).has_value());
}

TEST(Validate, ParkedAgentIsAnObstacle) {
  auto inst = two_agent_corridor();
  auto v = validate_solution(inst, std::vector<Path>{{0, 1, 2, 3}, {2}});
  ASSERT_EQ(v.conflicts.size(), 1u);
  EXPECT_EQ(v.conflicts[0].kind, ConflictKind::Vertex);
  EXPECT_EQ(v.conflicts[0].time, 2);
  EXPECT_EQ(v.conflicts[0].from, 2);
}

TEST(Validate, SwapConflict) {
  GridMap map(2, 1, {true, true});
  MapfInstance inst(map, {{0, {0, 0}, {0, 1}}, {1, {0, 1}, {0, 0}}});
  auto v = validate_solution(inst, std::vector<Path>{{0, 1}, {1, 0}});
  ASSERT_EQ(v.conflicts.size(), 1u);
  EXPECT_EQ(v.conflicts[0].kind, ConflictKind::Swap);
  EXPECT_EQ(v.conflicts[0].time, 1);
  EXPECT_EQ(v.conflicts[0].agents, (std::pair<AgentId, AgentId>{0, 1}));
  EXPECT_EQ(v.conflicts[0].from, 0);
  EXPECT_EQ(v.conflicts[0].to, 1);
}

// Property: the validator reports exactly the brute-force collision set.
TEST(Validate, MatchesBruteForceEnumeration) {
  Rng rng(5);
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int agents = 2 + uniform_index(rng, 5);
    auto inst = oracle::random_instance(rng, 3 + uniform_index(rng, 4), 3 + uniform_index(rng, 4), 0.15, agents);
    if (!inst) continue;
    std::vector<Path> paths;
    for (int i = 0; i < agents; ++i) {
      // Walk, then go straight to the goal so the path is well formed.
      Path p = oracle::random_walk_path(inst->map(), inst->start(i), uniform_index(rng, 6), rng);
      const auto& h = inst->heuristic(i);
      while (p.back() != inst->goal(i))
        for (Vertex n : inst->map().neighbors(p.back()))
          if (h[n] == h[p.back()] - 1) {
            p.push_back(n);
            break;
          }
      paths.push_back(std::move(p));
    }
    const auto v = validate_solution(*inst, paths);
    ASSERT_TRUE(v.defects.empty());
    std::set<oracle::RawConflict> got;
    for (const auto& c : v.conflicts) got.insert({c.kind == ConflictKind::Swap, c.agents.first, c.agents.second, c.time});
    EXPECT_EQ(got, oracle::all_conflicts(paths));
    EXPECT_EQ(got.size(), v.conflicts.size());
    EXPECT_TRUE(std::is_sorted(v.conflicts.begin(), v.conflicts.end(), conflict_order));
    // first_conflict agrees with the earliest pairwise entry.
    for (int a = 0; a < agents; ++a)
      for (int b = a + 1; b < agents; ++b) {
        auto fc = first_conflict(a, paths[a], b, paths[b]);
        std::optional<int> earliest;
        for (const auto& c : got)
          if (c.a == a && c.b == b && (!earliest || c.t < *earliest)) earliest = c.t;
        EXPECT_EQ(fc.has_value(), earliest.has_value());
        if (fc && earliest) {
          EXPECT_EQ(fc->time, *earliest);
        }
      }
    ++compared;
  }
  EXPECT_GT(compared, 300);
}

TEST(Validate, ConflictsPerAgent) {
  std::vector<Conflict> cs{{ConflictKind::Vertex, {0, 1}, 1, 3, kNoVertex}, {ConflictKind::Vertex, {0, 2}, 2, 4, kNoVertex}};
  EXPECT_EQ(conflicts_per_agent(3, cs), (std::vector<int>{2, 1, 1}));
}

TEST(ReservationTable, TimedAndPermanent) {
  ReservationTable table(4);
  const Path p{0, 1, 2};
  table.insert(7, p);
  EXPECT_EQ(table.occupant(1, 1), 7);
  EXPECT_EQ(table.occupant(2, 50), 7);
  EXPECT_EQ(table.occupant(2, 1), kNoAgent);
  EXPECT_TRUE(table.edge_blocked(1, 0, 0));  // would swap with 0->1
  EXPECT_FALSE(table.edge_blocked(0, 1, 0));
  EXPECT_EQ(table.latest_visit(2), 2);
  EXPECT_EQ(table.static_after(), 2);
  ASSERT_TRUE(table.permanent(2).has_value());
  EXPECT_EQ(table.permanent(2)->arrival, 2);
  table.remove(7, p);
  EXPECT_TRUE(table.empty());
  EXPECT_EQ(table.occupant(2, 50), kNoAgent);
}

TEST(ReservationTable, OverlappingPathsAndPenalties) {
  ReservationTable table(4);
  const Path a{0, 1, 2}, b{3, 1, 1};
  table.insert(0, a);
  table.insert(1, b);
  std::vector<AgentId> occ;
  table.occupants(1, 1, occ);
  std::sort(occ.begin(), occ.end());
  EXPECT_EQ(occ, (std::vector<AgentId>{0, 1}));
  EXPECT_EQ(table.vertex_penalty(1, 1), 2);
  EXPECT_EQ(table.vertex_penalty(1, 5), 1);  // b parks at 1
  EXPECT_EQ(table.future_visits(1, 0), 3);
  table.remove(0, a);
  table.occupants(1, 1, occ);
  EXPECT_EQ(occ, (std::vector<AgentId>{1}));
  EXPECT_THROW(table.remove(0, a), InconsistencyError);
}

TEST(ReservationTable, SharedGoalIsRejected) {
  ReservationTable table(3);
  table.insert(0, Path{0, 1});
  EXPECT_THROW(table.insert(1, Path{2, 1}), InconsistencyError);
}

// Property: after inserting and removing random path sets the table's
// occupancy agrees with a direct scan of the remaining paths.
TEST(ReservationTable, AgreesWithDirectScan) {
  Rng rng(3);
  GridMap map = open_grid(4, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vertex> ends(map.size());
    std::iota(ends.begin(), ends.end(), 0);
    shuffle_in_place(ends, rng);
    std::vector<Path> paths;
    for (int i = 0; i < 5; ++i) {
      Path p = oracle::random_walk_path(map, static_cast<Vertex>(uniform_index(rng, map.size())), 6, rng);
      // Force a distinct last cell.
      while (p.back() != ends[i]) {
        const Cell c = map.cell(p.back()), g = map.cell(ends[i]);
        Cell n = c;
        if (c.row != g.row)
          n.row += c.row < g.row ? 1 : -1;
        else
          n.col += c.col < g.col ? 1 : -1;
        p.push_back(map.vertex(n));
      }
      paths.push_back(std::move(p));
    }
    ReservationTable table = build_reservation(map.size(), paths);
    std::vector<bool> kept(paths.size(), true);
    for (int i = 0; i < 5; ++i)
      if (uniform01(rng) < 0.5) {
        table.remove(i, paths[i]);
        kept[i] = false;
      }
    std::vector<AgentId> occ;
    for (Vertex v = 0; v < map.size(); ++v)
      for (int t = 0; t < 16; ++t) {
        std::vector<AgentId> expected;
        for (int i = 0; i < 5; ++i) {
          if (!kept[i]) continue;
          if (oracle::at(paths[i], t) == v) expected.push_back(i);
        }
        table.occupants(v, t, occ);
        std::sort(occ.begin(), occ.end());
        EXPECT_EQ(occ, expected) << "v=" << v << " t=" << t;
        EXPECT_EQ(table.vertex_blocked(v, t), !expected.empty());
      }
  }
}
