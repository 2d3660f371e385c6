#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace mapf_lns {

struct TrajectoryPoint {
  double time = 0.0;
  long delay = 0;
  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

using Trajectory = std::vector<TrajectoryPoint>;

// Throws unless the trajectory starts at 0 with strictly increasing times and
// non-increasing delays.
inline void check_trajectory(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("trajectory is empty");
  if (traj.front().time != 0.0) throw std::invalid_argument("trajectory must start at time 0");
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj[i].time > traj[i - 1].time)) throw std::invalid_argument("trajectory times must strictly increase");
    if (traj[i].delay > traj[i - 1].delay) throw std::invalid_argument("trajectory delays must not increase");
  }
}

// Area under the best-so-far step curve over [0, limit]. Points past the
// limit are clipped; the last level extends to the limit.
inline double auc(const Trajectory& traj, double limit) {
  check_trajectory(traj);
  if (!(limit >= 0.0)) throw std::invalid_argument("time limit must be non-negative");
  double area = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double a = std::min(traj[i].time, limit);
    const double b = i + 1 < traj.size() ? std::min(traj[i + 1].time, limit) : limit;
    area += static_cast<double>(traj[i].delay) * (b - a);
  }
  return area;
}

// One CSV line of the results table. Empty optionals mark a failed cell.
struct RunResultRow {
  std::string map;
  int scene = 0;
  int agents = 0;
  std::string strategy;
  int nb_size = 0;
  std::string replan;
  std::string init;
  std::uint64_t seed = 0;
  double time_limit_s = 0.0;
  std::optional<long> max_iters;
  std::optional<long> init_delay;
  std::optional<long> final_delay;
  std::optional<double> auc;
  long iters = 0;
  long accepted_iters = 0;
  double core_time_s = 0.0;

  bool failed() const { return !final_delay.has_value(); }
  friend bool operator==(const RunResultRow&, const RunResultRow&) = default;
};

struct SceneAggregate {
  std::size_t count = 0;
  double mean_final_delay = 0.0;
  double mean_auc = 0.0;
  double variance_final_delay = 0.0;  // sample variance, 0 for a single record
  double stddev_final_delay = 0.0;
};

// Means over scenes (and seeds) of one configuration. Failed rows are an error.
inline SceneAggregate aggregate_over_scenes(const std::vector<RunResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("nothing to aggregate");
  auto key = [](const RunResultRow& r) {
    return std::tie(r.map, r.agents, r.strategy, r.nb_size, r.replan, r.init, r.time_limit_s, r.max_iters);
  };
  for (const auto& r : rows) {
    if (key(r) != key(rows.front())) throw std::invalid_argument("rows mix different configurations");
    if (r.failed()) throw std::invalid_argument("cannot aggregate a failed run");
  }
  SceneAggregate agg;
  agg.count = rows.size();
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    agg.mean_final_delay += static_cast<double>(*r.final_delay) / n;
    agg.mean_auc += r.auc.value_or(0.0) / n;
  }
  if (rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : rows) {
      const double d = static_cast<double>(*r.final_delay) - agg.mean_final_delay;
      ss += d * d;
    }
    agg.variance_final_delay = ss / (n - 1.0);
    agg.stddev_final_delay = std::sqrt(agg.variance_final_delay);
  }
  return agg;
}

}  // namespace mapf_lns
