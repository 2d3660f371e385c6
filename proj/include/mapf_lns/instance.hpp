#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "distance_field.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace mapf_lns {

struct AgentTask {
  AgentId agent_id = 0;
  Cell start;
  Cell goal;
};

// Immutable problem statement. Goal distance fields are computed once at
// construction and shared (cheaply copyable, safe to read from many runs).
class MapfInstance {
 public:
  MapfInstance() = default;

  MapfInstance(GridMap map, std::vector<AgentTask> tasks)
      : map_(std::make_shared<const GridMap>(std::move(map))), tasks_(std::move(tasks)) {
    auto fields = std::make_shared<std::vector<DistanceField>>();
    fields->reserve(tasks_.size());
    std::set<Vertex> starts, goals;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const AgentTask& task = tasks_[i];
      const std::string who = "agent " + std::to_string(task.agent_id);
      if (!map_->passable(task.start)) throw LoadError(who + ": start cell is blocked or out of bounds");
      if (!map_->passable(task.goal)) throw LoadError(who + ": goal cell is blocked or out of bounds");
      if (task.agent_id != static_cast<AgentId>(i)) throw LoadError(who + ": agent ids must be 0..N-1 in order");
      if (!starts.insert(map_->vertex(task.start)).second) throw LoadError(who + ": start shared with another agent");
      if (!goals.insert(map_->vertex(task.goal)).second) throw LoadError(who + ": goal shared with another agent");
      fields->push_back(bfs_distance_field(*map_, task.goal));
      if (!fields->back().reachable(map_->vertex(task.start)))
        throw LoadError(who + ": goal unreachable from start");
      starts_.push_back(map_->vertex(task.start));
      goals_.push_back(map_->vertex(task.goal));
      shortest_.push_back(fields->back()[starts_.back()]);
    }
    fields_ = std::move(fields);
  }

  const GridMap& map() const { return *map_; }
  const std::vector<AgentTask>& tasks() const { return tasks_; }
  int num_agents() const { return static_cast<int>(tasks_.size()); }

  Vertex start(AgentId i) const { return starts_[i]; }
  Vertex goal(AgentId i) const { return goals_[i]; }
  // d(s_i, g_i)
  int shortest(AgentId i) const { return shortest_[i]; }
  const std::vector<int>& shortest() const { return shortest_; }
  const DistanceField& heuristic(AgentId i) const { return (*fields_)[i]; }

 private:
  std::shared_ptr<const GridMap> map_ = std::make_shared<const GridMap>();
  std::vector<AgentTask> tasks_;
  std::vector<Vertex> starts_;
  std::vector<Vertex> goals_;
  std::vector<int> shortest_;
  std::shared_ptr<const std::vector<DistanceField>> fields_ = std::make_shared<std::vector<DistanceField>>();
};

}  // namespace mapf_lns
