#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "init_solvers.hpp"
#include "io/movingai.hpp"
#include "io/results.hpp"
#include "io/svg.hpp"
#include "lns.hpp"
#include "metrics.hpp"

namespace mapf_lns {

namespace fs = std::filesystem;

// Benchmark files live in <root>/maps/<map>.map and
// <root>/scens/<map>-random-<scene>.scen.
struct BenchmarkLayout {
  fs::path root = "data";

  fs::path map_file(const std::string& map) const { return root / "maps" / (map + ".map"); }
  fs::path scen_file(const std::string& map, int scene) const {
    return root / "scens" / (map + "-random-" + std::to_string(scene) + ".scen");
  }
};

// Root for benchmark files: MAPF_BENCHMARK_DIR if set, else `fallback`.
inline fs::path benchmark_root(const fs::path& fallback) {
  if (const char* env = std::getenv("MAPF_BENCHMARK_DIR"); env && *env) return env;
  return fallback;
}

inline fs::path cache_root() {
  if (const char* env = std::getenv("MAPF_CACHE_DIR"); env && *env) return env;
  return "cache";
}

inline fs::path cache_file(const fs::path& root, const std::string& map, int scene, int agents, InitSolver init,
                           std::uint64_t seed) {
  return root / map /
         (std::to_string(scene) + '-' + std::to_string(agents) + '-' + to_string(init) + '-' + std::to_string(seed) +
          ".paths");
}

struct MatrixSpec {
  std::string name = "matrix";
  BenchmarkLayout layout;
  std::vector<std::string> maps;
  std::vector<int> scenes{1};
  std::vector<int> agents;
  std::vector<Strategy> strategies;
  std::vector<int> nb_sizes{8};
  std::vector<ReplanSolver> replans{ReplanSolver::PP};
  std::vector<InitSolver> inits{InitSolver::Lns2Lite};
  std::vector<std::uint64_t> seeds{0};
  Budget budget = Budget::core_seconds(60.0);
  double init_budget_s = 10.0;
  int pbs_node_budget = 64;
  StrategyParams strategy_params;
  bool svg = true;
};

namespace detail {

template <class T, class F>
std::vector<T> parse_list(const Json& j, const char* key, F&& convert, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  std::vector<T> out;
  if (!v.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  for (const auto& item : v) out.push_back(convert(item));
  if (out.empty()) throw ParseError(std::string("'") + key + "' must not be empty");
  return out;
}

}  // namespace detail

// JSON matrix description. Relative benchmark_dir paths resolve against
// `base` (the config file's directory).
inline MatrixSpec parse_matrix_spec(const Json& j, const fs::path& base = {}) {
  MatrixSpec m;
  try {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    static const std::set<std::string> known{"name", "benchmark_dir", "maps", "scenes", "agents", "strategies",
                                             "nb_sizes", "replans", "inits", "seeds", "time_limit_s", "max_iters",
                                             "init_budget_s", "pbs_node_budget", "walk_attempt_factor",
                                             "intersection_radius", "svg"};
    for (const auto& [key, _] : j.items())
      if (!known.count(key)) throw ParseError("unknown key '" + key + "'");
    m.name = j.value("name", m.name);
    if (j.contains("benchmark_dir")) {
      fs::path dir = j.at("benchmark_dir").get<std::string>();
      m.layout.root = dir.is_relative() ? base / dir : dir;
    } else {
      m.layout.root = base / "data";
    }
    m.layout.root = benchmark_root(m.layout.root);
    auto str = [](const Json& v) { return v.get<std::string>(); };
    auto integer = [](const Json& v) { return v.get<int>(); };
    m.maps = detail::parse_list<std::string>(j, "maps", str, {});
    if (m.maps.empty()) throw ParseError("'maps' is required");
    m.scenes = detail::parse_list<int>(j, "scenes", integer, m.scenes);
    m.agents = detail::parse_list<int>(j, "agents", integer, {});
    if (m.agents.empty()) throw ParseError("'agents' is required");
    m.strategies = detail::parse_list<Strategy>(
        j, "strategies",
        [](const Json& v) {
          auto s = parse_strategy(v.get<std::string>());
          if (!s) throw ParseError("unknown strategy '" + v.get<std::string>() + "'");
          return *s;
        },
        {});
    if (m.strategies.empty()) throw ParseError("'strategies' is required");
    m.nb_sizes = detail::parse_list<int>(j, "nb_sizes", integer, m.nb_sizes);
    m.replans = detail::parse_list<ReplanSolver>(
        j, "replans",
        [](const Json& v) {
          const auto s = v.get<std::string>();
          if (s == "pp") return ReplanSolver::PP;
          if (s == "pbs") return ReplanSolver::PBS;
          throw ParseError("unknown replan solver '" + s + "'");
        },
        m.replans);
    m.inits = detail::parse_list<InitSolver>(
        j, "inits",
        [](const Json& v) {
          const auto s = v.get<std::string>();
          if (s == "lns2lite") return InitSolver::Lns2Lite;
          if (s == "pp-restart") return InitSolver::PpRestart;
          throw ParseError("unknown initial solver '" + s + "'");
        },
        m.inits);
    m.seeds = detail::parse_list<std::uint64_t>(j, "seeds", [](const Json& v) { return v.get<std::uint64_t>(); },
                                                m.seeds);
    if (j.contains("max_iters") && j.contains("time_limit_s"))
      throw ParseError("give either 'time_limit_s' or 'max_iters', not both");
    if (j.contains("max_iters")) m.budget = Budget::max_iterations(j.at("max_iters").get<long>());
    if (j.contains("time_limit_s")) m.budget = Budget::core_seconds(j.at("time_limit_s").get<double>());
    m.init_budget_s = j.value("init_budget_s", m.init_budget_s);
    m.pbs_node_budget = j.value("pbs_node_budget", m.pbs_node_budget);
    m.strategy_params.walk_attempt_factor = j.value("walk_attempt_factor", m.strategy_params.walk_attempt_factor);
    m.strategy_params.intersection_radius = j.value("intersection_radius", m.strategy_params.intersection_radius);
    m.svg = j.value("svg", m.svg);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return m;
}

inline MatrixSpec load_matrix_spec(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(detail::read_file(path));
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return parse_matrix_spec(j, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

struct MatrixCell {
  std::string map;
  int scene = 0;
  int agents = 0;
  Strategy strategy = Strategy::Random;
  int nb_size = 0;
  ReplanSolver replan = ReplanSolver::PP;
  InitSolver init = InitSolver::Lns2Lite;
  std::uint64_t seed = 0;

  std::string id() const {
    return map + "_s" + std::to_string(scene) + "_a" + std::to_string(agents) + '_' + to_string(strategy) + "_nb" +
           std::to_string(nb_size) + '_' + to_string(replan) + '_' + to_string(init) + "_seed" +
           std::to_string(seed);
  }
};

inline std::vector<MatrixCell> expand_cells(const MatrixSpec& m) {
  std::vector<MatrixCell> cells;
  for (const auto& map : m.maps)
    for (int scene : m.scenes)
      for (int agents : m.agents)
        for (Strategy s : m.strategies)
          for (int nb : m.nb_sizes)
            for (ReplanSolver r : m.replans)
              for (InitSolver i : m.inits)
                for (auto seed : m.seeds) cells.push_back({map, scene, agents, s, nb, r, i, seed});
  return cells;
}

inline std::string replan_label(ReplanSolver r, int pbs_budget) {
  return r == ReplanSolver::PBS ? "pbs:" + std::to_string(pbs_budget) : "pp";
}

inline RunResultRow row_skeleton(const MatrixCell& c, const MatrixSpec& m) {
  RunResultRow r;
  r.map = c.map;
  r.scene = c.scene;
  r.agents = c.agents;
  r.strategy = to_string(c.strategy);
  r.nb_size = c.nb_size;
  r.replan = replan_label(c.replan, m.pbs_node_budget);
  r.init = to_string(c.init);
  r.seed = c.seed;
  if (m.budget.by_iterations())
    r.max_iters = m.budget.iterations;
  else
    r.time_limit_s = m.budget.seconds;
  return r;
}

inline LnsConfig cell_config(const MatrixCell& c, const MatrixSpec& m) {
  LnsConfig cfg;
  cfg.strategy = c.strategy;
  cfg.nb_size = c.nb_size;
  cfg.replan = c.replan;
  cfg.pbs_node_budget = m.pbs_node_budget;
  cfg.init = c.init;
  cfg.init_budget_s = m.init_budget_s;
  cfg.budget = m.budget;
  cfg.seed = c.seed;
  cfg.strategy_params = m.strategy_params;
  return cfg;
}

inline RunResultRow row_from_record(const MatrixCell& c, const MatrixSpec& m, const RunRecord& rec) {
  RunResultRow r = row_skeleton(c, m);
  r.init_delay = rec.initial_delay;
  r.final_delay = rec.final_delay;
  r.auc = rec.auc;
  r.iters = rec.iterations;
  r.accepted_iters = rec.accepted;
  r.core_time_s = rec.core_time_s;
  return r;
}

// Loads the cached initial solution or computes and stores it.
inline std::optional<Solution> cached_initial_solution(const MapfInstance& inst, const fs::path& cache,
                                                       InitSolver init, double budget_s, std::uint64_t seed) {
  if (!cache.empty()) {
    std::ifstream in(cache, std::ios::binary);
    if (in) {
      std::stringstream ss;
      ss << in.rdbuf();
      if (auto s = parse_paths_cache(ss.str(), inst)) return s;
    }
  }
  auto s = initial_solution(inst, init, budget_s, seed);
  if (s && !cache.empty()) {
    fs::create_directories(cache.parent_path());
    const fs::path tmp = cache.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
      std::ofstream out(tmp, std::ios::binary);
      out << render_paths_cache(inst, *s);
    }
    fs::rename(tmp, cache);
  }
  return s;
}

struct MatrixOptions {
  fs::path out_dir = "results";
  fs::path cache_dir = cache_root();
  int jobs = 1;
  bool resume = false;
  std::function<void(const std::string&)> log;
};

struct MatrixOutcome {
  std::vector<RunResultRow> rows;
  int ran = 0;
  int skipped = 0;
  int failed = 0;
};

namespace detail {

inline void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace detail

inline constexpr std::string_view kSummaryHeader =
    "map,agents,strategy,nb_size,replan,init,time_limit_s,runs,failed,mean_final_delay,mean_auc,"
    "var_final_delay,sd_final_delay";

// One line per configuration: means over scenes and seeds of the finished
// runs. Configurations with no finished run get NA statistics.
inline void write_summary_csv(const std::vector<RunResultRow>& rows, std::ostream& out) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunResultRow>> done;
  std::map<std::string, int> failed;
  for (const auto& r : rows) {
    std::string key = r.map + ',' + std::to_string(r.agents) + ',' + r.strategy + ',' + std::to_string(r.nb_size) +
                      ',' + r.replan + ',' + r.init + ',' +
                      (r.max_iters ? "it:" + std::to_string(*r.max_iters) : format_number(r.time_limit_s));
    if (!done.count(key) && !failed.count(key)) order.push_back(key);
    if (r.failed())
      ++failed[key];
    else
      done[key].push_back(r);
  }
  out << kSummaryHeader << '\n';
  for (const auto& key : order) {
    const auto& ok = done[key];
    out << key << ',' << ok.size() << ',' << failed[key];
    if (ok.empty()) {
      out << ",NA,NA,NA,NA\n";
      continue;
    }
    const SceneAggregate a = aggregate_over_scenes(ok);
    out << ',' << format_number(a.mean_final_delay) << ',' << format_number(a.mean_auc) << ','
        << format_number(a.variance_final_delay) << ',' << format_number(a.stddev_final_delay) << '\n';
  }
  if (!out) throw IoError("failed writing summary CSV");
}

// Runs every cell, writing <out>/results.csv, <out>/summary.csv,
// <out>/trajectories/<cell>.json and, if enabled, one SVG per
// (map, agents, scene-averaged) group.
inline MatrixOutcome run_matrix(const MatrixSpec& m, const MatrixOptions& opt) {
  const auto cells = expand_cells(m);
  const fs::path traj_dir = opt.out_dir / "trajectories";
  const fs::path csv_path = opt.out_dir / "results.csv";
  fs::create_directories(traj_dir);
  std::mutex log_mutex;
  auto log = [&](const std::string& s) {
    if (!opt.log) return;
    std::lock_guard lock(log_mutex);
    opt.log(s);
  };

  std::map<std::string, RunResultRow> previous;
  if (opt.resume && fs::exists(csv_path)) {
    for (auto& r : read_results_csv(csv_path)) {
      for (const auto& cell : cells) {
        const RunResultRow sk = row_skeleton(cell, m);
        if (sk.map == r.map && sk.scene == r.scene && sk.agents == r.agents && sk.strategy == r.strategy &&
            sk.nb_size == r.nb_size && sk.replan == r.replan && sk.init == r.init && sk.seed == r.seed &&
            sk.max_iters == r.max_iters && (sk.max_iters || sk.time_limit_s == r.time_limit_s) && !r.failed() &&
            fs::exists(traj_dir / (cell.id() + ".json")))
          previous[cell.id()] = r;
      }
    }
  }

  // Instances, loaded once per (map, scene, agents).
  using InstKey = std::tuple<std::string, int, int>;
  std::map<InstKey, std::optional<MapfInstance>> instances;
  std::map<InstKey, std::string> load_errors;
  std::map<std::string, std::optional<GridMap>> maps;
  for (const auto& c : cells) {
    const InstKey key{c.map, c.scene, c.agents};
    if (instances.count(key) || previous.count(c.id())) continue;
    try {
      if (!maps.count(c.map)) maps[c.map] = load_map(m.layout.map_file(c.map));
      const auto scen = load_scenario_file(m.layout.scen_file(c.map, c.scene));
      instances[key] = make_instance(scen, *maps[c.map], c.agents);
    } catch (const std::exception& e) {
      instances[key] = std::nullopt;
      load_errors[key] = e.what();
      log("load failed for " + c.map + " scene " + std::to_string(c.scene) + ": " + e.what());
    }
  }

  // Initial solutions shared by every strategy cell of the same key.
  using InitKey = std::tuple<std::string, int, int, InitSolver, std::uint64_t>;
  std::vector<InitKey> init_keys;
  for (const auto& c : cells) {
    if (previous.count(c.id())) continue;
    InitKey k{c.map, c.scene, c.agents, c.init, c.seed};
    if (std::find(init_keys.begin(), init_keys.end(), k) == init_keys.end()) init_keys.push_back(k);
  }
  std::vector<std::optional<Solution>> initials(init_keys.size());
  detail::parallel_for(static_cast<int>(init_keys.size()), opt.jobs, [&](int i) {
    const auto& [map, scene, agents, init, seed] = init_keys[i];
    const auto& inst = instances.at({map, scene, agents});
    if (!inst) return;
    const fs::path cache = opt.cache_dir.empty() ? fs::path{} : cache_file(opt.cache_dir, map, scene, agents, init, seed);
    initials[i] = cached_initial_solution(*inst, cache, init, m.init_budget_s, seed);
    if (!initials[i]) log("initial solution failed: " + map + " scene " + std::to_string(scene));
  });

  MatrixOutcome outcome;
  std::vector<std::optional<RunResultRow>> rows(cells.size());
  std::vector<std::optional<Trajectory>> trajectories(cells.size());
  std::atomic<int> ran{0}, failed{0};
  detail::parallel_for(static_cast<int>(cells.size()), opt.jobs, [&](int i) {
    const MatrixCell& c = cells[i];
    if (auto it = previous.find(c.id()); it != previous.end()) {
      rows[i] = it->second;
      return;
    }
    RunResultRow row = row_skeleton(c, m);
    const auto& inst = instances.at({c.map, c.scene, c.agents});
    const InitKey k{c.map, c.scene, c.agents, c.init, c.seed};
    const auto& init = initials[std::find(init_keys.begin(), init_keys.end(), k) - init_keys.begin()];
    ++ran;
    if (!inst || !init) {
      ++failed;
      rows[i] = row;
      return;
    }
    row.init_delay = init->sum_of_delays;
    try {
      const LnsConfig cfg = cell_config(c, m);
      const RunRecord rec = lns_run(*inst, *init, cfg);
      row = row_from_record(c, m, rec);
      std::ostringstream js;
      write_trajectory_json(rec, RunLabel{c.map, m.layout.scen_file(c.map, c.scene).filename().string(), c.scene,
                                          c.agents},
                            js);
      detail::write_text(traj_dir / (c.id() + ".json"), js.str());
      trajectories[i] = rec.trajectory;
      log(c.id() + ": " + std::to_string(rec.initial_delay) + " -> " + std::to_string(rec.final_delay));
    } catch (const std::exception& e) {
      ++failed;
      log(c.id() + " failed: " + e.what());
    }
    rows[i] = row;
  });

  for (auto& r : rows) outcome.rows.push_back(*r);
  outcome.ran = ran;
  outcome.failed = failed;
  outcome.skipped = static_cast<int>(previous.size());
  {
    std::ostringstream csv;
    write_results_csv(outcome.rows, csv);
    detail::write_text(csv_path, csv.str());
    std::ostringstream summary;
    write_summary_csv(outcome.rows, summary);
    detail::write_text(opt.out_dir / "summary.csv", summary.str());
  }

  if (m.svg) {
    // One plot per (map, agents, nb_size, replan, init): a curve per strategy.
    std::map<std::string, std::map<std::string, std::vector<Trajectory>>> groups;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const MatrixCell& c = cells[i];
      std::optional<Trajectory> traj = trajectories[i];
      if (!traj && previous.count(c.id())) {
        try {
          traj = read_trajectory_json(traj_dir / (c.id() + ".json")).trajectory;
        } catch (const std::exception&) {
        }
      }
      if (!traj) continue;
      const std::string group = c.map + "_a" + std::to_string(c.agents) + "_nb" + std::to_string(c.nb_size) + '_' +
                                to_string(c.replan) + '_' + to_string(c.init);
      groups[group][to_string(c.strategy)].push_back(*traj);
    }
    for (const auto& [group, by_strategy] : groups) {
      std::vector<PlotSeries> series;
      for (const auto& [label, runs] : by_strategy) series.push_back({label, runs, m.budget.limit()});
      detail::write_text(opt.out_dir / "plots" / (group + ".svg"),
                         render_svg_plot(series, m.budget.by_iterations() ? "iterations" : "core time (s)", group));
    }
  }
  return outcome;
}

struct CellDelta {
  std::string key;
  std::string metric;
  double baseline = 0.0;
  double candidate = 0.0;
  double relative = 0.0;
  bool regression = false;
};

struct CompareReport {
  std::vector<CellDelta> deltas;  // only cells that differ
  std::vector<std::string> missing;  // in baseline, absent from candidate
  int regressions = 0;
  bool ok() const { return regressions == 0 && missing.empty(); }
};

// Per-cell comparison of final delay and AUC; a regression is a candidate
// value above baseline by more than `rel_tol` (relative to the baseline).
inline CompareReport compare_tables(const std::vector<RunResultRow>& baseline,
                                    const std::vector<RunResultRow>& candidate, double rel_tol = 0.05) {
  auto key = [](const RunResultRow& r) {
    return r.map + ',' + std::to_string(r.scene) + ',' + std::to_string(r.agents) + ',' + r.strategy + ',' +
           std::to_string(r.nb_size) + ',' + r.replan + ',' + r.init + ',' + std::to_string(r.seed);
  };
  std::map<std::string, const RunResultRow*> cand;
  for (const auto& r : candidate) cand[key(r)] = &r;
  CompareReport rep;
  for (const auto& b : baseline) {
    const std::string k = key(b);
    auto it = cand.find(k);
    if (it == cand.end()) {
      rep.missing.push_back(k);
      continue;
    }
    const RunResultRow& c = *it->second;
    auto check = [&](const char* metric, std::optional<double> bv, std::optional<double> cv) {
      if (!bv) return;
      if (!cv) {
        rep.deltas.push_back({k, metric, *bv, NAN, INFINITY, true});
        ++rep.regressions;
        return;
      }
      if (*bv == *cv) return;
      const double rel = *bv != 0.0 ? (*cv - *bv) / std::abs(*bv) : (*cv > *bv ? INFINITY : -INFINITY);
      const bool regress = rel > rel_tol;
      rep.deltas.push_back({k, metric, *bv, *cv, rel, regress});
      rep.regressions += regress;
    };
    auto as_double = [](const std::optional<long>& v) -> std::optional<double> {
      return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
    };
    check("final_delay", as_double(b.final_delay), as_double(c.final_delay));
    check("auc", b.auc, c.auc);
  }
  return rep;
}

}  // namespace mapf_lns
