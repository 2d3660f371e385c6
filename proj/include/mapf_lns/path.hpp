#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "instance.hpp"

namespace mapf_lns {

// One vertex per timestep t = 0..T. Consecutive entries are equal (wait)
// or 4-adjacent (move). After its last entry the agent stays at its goal.
using Path = std::vector<Vertex>;

// Edges traversed, waits included.
inline int path_length(const Path& path) {
  if (path.empty()) throw MalformedPath("empty path has no length");
  return static_cast<int>(path.size()) - 1;
}

// Vertex occupied at timestep t under stay-at-target semantics.
inline Vertex location_at(const Path& path, int t) {
  return t < static_cast<int>(path.size()) ? path[t] : path.back();
}

inline int compute_delay(const Path& path, int shortest) {
  const int length = path_length(path);
  if (length < shortest)
    throw InconsistencyError("path of length " + std::to_string(length) + " is shorter than the shortest distance " +
                             std::to_string(shortest));
  return length - shortest;
}

// Paths plus the cached objective. Confined to one LNS run.
struct Solution {
  std::vector<Path> paths;
  long sum_of_delays = 0;
};

inline long sum_of_delays(const MapfInstance& instance, const std::vector<Path>& paths) {
  if (static_cast<int>(paths.size()) != instance.num_agents())
    throw ShapeError("expected " + std::to_string(instance.num_agents()) + " paths, got " +
                     std::to_string(paths.size()));
  long total = 0;
  for (AgentId i = 0; i < instance.num_agents(); ++i) total += compute_delay(paths[i], instance.shortest(i));
  return total;
}

inline long sum_of_delays(const MapfInstance& instance, const Solution& solution) {
  return sum_of_delays(instance, solution.paths);
}

inline Solution make_solution(const MapfInstance& instance, std::vector<Path> paths) {
  Solution s{std::move(paths), 0};
  s.sum_of_delays = sum_of_delays(instance, s.paths);
  return s;
}

inline std::vector<int> agent_delays(const MapfInstance& instance, const Solution& solution) {
  std::vector<int> out(instance.num_agents());
  for (AgentId i = 0; i < instance.num_agents(); ++i) out[i] = compute_delay(solution.paths[i], instance.shortest(i));
  return out;
}

}  // namespace mapf_lns
