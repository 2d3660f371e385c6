#pragma once

#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace mapf_lns {

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Exact 4-connected distances to a fixed goal. dist(goal) == 0; cells that
// cannot reach the goal hold kUnreachable.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(Vertex goal, std::vector<int> dist) : goal_(goal), dist_(std::move(dist)) {}

  Vertex goal() const { return goal_; }
  int operator[](Vertex v) const { return dist_[v]; }
  bool reachable(Vertex v) const { return dist_[v] != kUnreachable; }
  const std::vector<int>& values() const { return dist_; }

 private:
  Vertex goal_ = kNoVertex;
  std::vector<int> dist_;
};

inline DistanceField bfs_distance_field(const GridMap& map, Vertex goal) {
  if (!map.passable(goal)) throw std::invalid_argument("distance field goal is not a passable cell");
  std::vector<int> dist(map.size(), kUnreachable);
  std::queue<Vertex> frontier;
  dist[goal] = 0;
  frontier.push(goal);
  while (!frontier.empty()) {
    Vertex v = frontier.front();
    frontier.pop();
    for (Vertex n : map.neighbors(v)) {
      if (dist[n] != kUnreachable) continue;
      dist[n] = dist[v] + 1;
      frontier.push(n);
    }
  }
  return {goal, std::move(dist)};
}

inline DistanceField bfs_distance_field(const GridMap& map, Cell goal) {
  if (!map.in_bounds(goal)) throw std::invalid_argument("distance field goal is out of bounds");
  return bfs_distance_field(map, map.vertex(goal));
}

}  // namespace mapf_lns
