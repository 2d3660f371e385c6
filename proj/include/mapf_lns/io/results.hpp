#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "../conflicts.hpp"
#include "../errors.hpp"
#include "../lns.hpp"
#include "../metrics.hpp"
#include "movingai.hpp"

namespace mapf_lns {

using Json = nlohmann::ordered_json;

inline std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline std::string format_number(long x) { return std::to_string(x); }

// ---- results CSV

inline constexpr std::string_view kResultsHeader =
    "map,scene,agents,strategy,nb_size,replan,init,seed,time_limit_s,init_delay,final_delay,auc,iters,"
    "accepted_iters,core_time_s";

namespace detail {

inline void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw std::invalid_argument("CSV text field contains a separator: '" + s + "'");
}

template <class T>
std::string na_or(const std::optional<T>& v) {
  return v ? format_number(*v) : std::string("NA");
}

inline std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Failed cells carry NA in the outcome columns; iteration budgets appear as
// `it:N` in time_limit_s. core_time_s is NA when it was not measured.
inline std::string format_row(const RunResultRow& r, bool with_core_time = true) {
  for (const auto* s : {&r.map, &r.strategy, &r.replan, &r.init}) detail::check_field(*s);
  std::string line = r.map + ',' + std::to_string(r.scene) + ',' + std::to_string(r.agents) + ',' + r.strategy + ',' +
                     std::to_string(r.nb_size) + ',' + r.replan + ',' + r.init + ',' + std::to_string(r.seed) + ',';
  line += r.max_iters ? "it:" + std::to_string(*r.max_iters) : format_number(r.time_limit_s);
  line += ',' + detail::na_or(r.init_delay) + ',' + detail::na_or(r.final_delay) + ',' + detail::na_or(r.auc);
  line += ',' + std::to_string(r.iters) + ',' + std::to_string(r.accepted_iters) + ',';
  line += with_core_time ? format_number(r.core_time_s) : std::string("NA");
  return line;
}

inline void write_results_csv(const std::vector<RunResultRow>& rows, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_row(r, !r.max_iters) << '\n';
  if (!out) throw IoError("failed writing results CSV");
}

inline RunResultRow parse_row(std::string_view line, int lineno = 0) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = detail::split_commas(line);
  if (f.size() != 15) throw ParseError("expected 15 columns, got " + std::to_string(f.size()), lineno);
  RunResultRow r;
  auto need = [&](auto& out, std::string_view text, const char* col) {
    if (!detail::parse_number(text, out)) throw ParseError(std::string("bad value in column ") + col, lineno);
  };
  auto optional_field = [&](auto& out, std::string_view text, const char* col) {
    if (text == "NA") return;
    typename std::remove_reference_t<decltype(out)>::value_type v{};
    need(v, text, col);
    out = v;
  };
  r.map = std::string(f[0]);
  need(r.scene, f[1], "scene");
  need(r.agents, f[2], "agents");
  r.strategy = std::string(f[3]);
  need(r.nb_size, f[4], "nb_size");
  r.replan = std::string(f[5]);
  r.init = std::string(f[6]);
  need(r.seed, f[7], "seed");
  if (f[8].starts_with("it:")) {
    long n = 0;
    need(n, f[8].substr(3), "time_limit_s");
    r.max_iters = n;
  } else {
    need(r.time_limit_s, f[8], "time_limit_s");
  }
  optional_field(r.init_delay, f[9], "init_delay");
  optional_field(r.final_delay, f[10], "final_delay");
  optional_field(r.auc, f[11], "auc");
  need(r.iters, f[12], "iters");
  need(r.accepted_iters, f[13], "accepted_iters");
  if (f[14] != "NA") need(r.core_time_s, f[14], "core_time_s");
  return r;
}

inline std::vector<RunResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty results file", 1);
  if (detail::trim(line) != kResultsHeader) throw ParseError("unexpected results header", 1);
  std::vector<RunResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    rows.push_back(parse_row(line, lineno));
  }
  return rows;
}

inline std::vector<RunResultRow> read_results_csv(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  try {
    return read_results_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

// ---- trajectory JSON

struct RunLabel {
  std::string map;
  std::string scen;
  int scene = 0;
  int agents = 0;
};

inline Json config_json(const LnsConfig& c) {
  Json j;
  j["strategy"] = to_string(c.strategy);
  j["nb_size"] = c.nb_size;
  j["replan"] = to_string(c.replan);
  if (c.replan == ReplanSolver::PBS) j["pbs_node_budget"] = c.pbs_node_budget;
  j["init"] = to_string(c.init);
  j["init_budget_s"] = c.init_budget_s;
  if (c.budget.by_iterations())
    j["max_iters"] = c.budget.iterations;
  else
    j["time_limit_s"] = c.budget.seconds;
  j["walk_attempt_factor"] = c.strategy_params.walk_attempt_factor;
  j["intersection_radius"] = c.strategy_params.intersection_radius;
  j["adaptive"] = {{"gamma", c.strategy_params.adaptive.gamma},
                   {"floor", c.strategy_params.adaptive.floor},
                   {"initial_weight", c.strategy_params.adaptive.initial_weight}};
  const auto& p = c.strategy_params.prior;
  j["bandit_prior"] = {{"mu0", p.mu0}, {"kappa0", p.kappa0}, {"alpha0", p.alpha0}, {"beta0", p.beta0}};
  return j;
}

// Measured core time is left out in iteration mode so that repeated runs
// produce identical files.
inline Json trajectory_json(const RunRecord& rec, const RunLabel& label) {
  if (rec.trajectory.empty()) throw std::invalid_argument("trajectory is empty");
  Json j;
  Json cfg = config_json(rec.config);
  cfg["map"] = label.map;
  cfg["scen"] = label.scen;
  cfg["scene"] = label.scene;
  cfg["agents"] = label.agents;
  j["config"] = std::move(cfg);
  j["seed"] = rec.config.seed;
  Json traj = Json::array();
  for (const auto& p : rec.trajectory) traj.push_back({p.time, p.delay});
  j["trajectory"] = std::move(traj);
  Json summary;
  summary["time_axis"] = rec.config.budget.by_iterations() ? "iterations" : "core_seconds";
  summary["initial_delay"] = rec.initial_delay;
  summary["final_delay"] = rec.final_delay;
  summary["auc"] = rec.auc;
  summary["iterations"] = rec.iterations;
  summary["accepted"] = rec.accepted;
  summary["failed_replans"] = rec.failed_replans;
  summary["strategy_usage"] = rec.strategy_usage;
  if (!rec.config.budget.by_iterations()) summary["core_time_s"] = rec.core_time_s;
  j["summary"] = std::move(summary);
  return j;
}

inline void write_trajectory_json(const RunRecord& rec, const RunLabel& label, std::ostream& out) {
  out << trajectory_json(rec, label).dump(1) << '\n';
  if (!out) throw IoError("failed writing trajectory JSON");
}

struct TrajectoryFile {
  Json config;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  double limit = 0.0;
  std::optional<double> auc;
  std::string strategy;
};

inline TrajectoryFile read_trajectory_json(std::istream& in) {
  TrajectoryFile f;
  try {
    const Json j = Json::parse(in);
    f.config = j.at("config");
    f.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("trajectory")) {
      if (!p.is_array() || p.size() != 2) throw ParseError("trajectory points must be [time, delay] pairs");
      f.trajectory.push_back({p[0].get<double>(), p[1].get<long>()});
    }
    f.limit = f.config.contains("max_iters") ? f.config.at("max_iters").get<double>()
                                             : f.config.at("time_limit_s").get<double>();
    f.strategy = f.config.at("strategy").get<std::string>();
    if (j.contains("summary") && j["summary"].contains("auc")) f.auc = j["summary"]["auc"].get<double>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("trajectory JSON: ") + e.what());
  }
  return f;
}

inline TrajectoryFile read_trajectory_json(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  return read_trajectory_json(in);
}

// ---- solution paths JSON: {"map": name, "agents": N, "paths": [[[row, col], ...], ...]}

inline Json paths_json(const MapfInstance& instance, const std::vector<Path>& paths) {
  const GridMap& map = instance.map();
  Json j;
  j["map"] = map.name();
  j["agents"] = instance.num_agents();
  Json all = Json::array();
  for (const Path& p : paths) {
    Json cells = Json::array();
    for (Vertex v : p) {
      const Cell c = map.cell(v);
      cells.push_back({c.row, c.col});
    }
    all.push_back(std::move(cells));
  }
  j["paths"] = std::move(all);
  return j;
}

inline void write_paths_json(const MapfInstance& instance, const std::vector<Path>& paths, std::ostream& out) {
  out << paths_json(instance, paths).dump() << '\n';
  if (!out) throw IoError("failed writing paths JSON");
}

// Cells outside the map become kNoVertex so validation reports them.
inline std::vector<Path> read_paths_json(std::istream& in, const GridMap& map) {
  std::vector<Path> paths;
  try {
    const Json j = Json::parse(in);
    for (const auto& p : j.at("paths")) {
      Path path;
      for (const auto& c : p) {
        if (!c.is_array() || c.size() != 2) throw ParseError("path cells must be [row, col] pairs");
        const Cell cell{c[0].get<int>(), c[1].get<int>()};
        path.push_back(map.in_bounds(cell) ? map.vertex(cell) : kNoVertex);
      }
      paths.push_back(std::move(path));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("paths JSON: ") + e.what());
  }
  return paths;
}

// ---- cached initial solutions
//
//   mapf-lns-paths 1
//   map <name> <width> <height>
//   agents <N>
//   <sum_of_delays>
//   one line per agent: space-separated vertex indices

inline std::string render_paths_cache(const MapfInstance& instance, const Solution& s) {
  std::string out = "mapf-lns-paths 1\nmap " + instance.map().name() + ' ' + std::to_string(instance.map().width()) +
                    ' ' + std::to_string(instance.map().height()) + "\nagents " +
                    std::to_string(instance.num_agents()) + '\n' + std::to_string(s.sum_of_delays) + '\n';
  for (const Path& p : s.paths) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(p[i]);
    }
    out += '\n';
  }
  return out;
}

// Returns nullopt if the cache does not belong to this instance or fails validation.
inline std::optional<Solution> parse_paths_cache(std::string_view text, const MapfInstance& instance) {
  std::istringstream in{std::string(text)};
  std::string line;
  const std::string expect_map = "map " + instance.map().name() + ' ' + std::to_string(instance.map().width()) + ' ' +
                                 std::to_string(instance.map().height());
  if (!std::getline(in, line) || line != "mapf-lns-paths 1") return std::nullopt;
  if (!std::getline(in, line) || line != expect_map) return std::nullopt;
  if (!std::getline(in, line) || line != "agents " + std::to_string(instance.num_agents())) return std::nullopt;
  long recorded = 0;
  if (!std::getline(in, line) || !detail::parse_number(line, recorded)) return std::nullopt;
  std::vector<Path> paths;
  while (std::getline(in, line)) {
    Path p;
    for (auto tok : detail::split_ws(line)) {
      Vertex v = 0;
      if (!detail::parse_number(tok, v)) return std::nullopt;
      p.push_back(v);
    }
    paths.push_back(std::move(p));
  }
  if (static_cast<int>(paths.size()) != instance.num_agents()) return std::nullopt;
  if (!validate_solution(instance, paths).ok()) return std::nullopt;
  Solution s = make_solution(instance, std::move(paths));
  if (s.sum_of_delays != recorded) return std::nullopt;
  return s;
}

}  // namespace mapf_lns
