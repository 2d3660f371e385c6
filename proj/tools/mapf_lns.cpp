// mapf-lns: solve, bench, validate, plot, compare, synth.
//
// Exit codes: 0 success, 1 regressions found (compare), 2 usage,
// 3 infeasible instance / solve failure / invalid solution, 4 I/O or parse error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mapf_lns/mapf_lns.hpp"

namespace fs = std::filesystem;
using namespace mapf_lns;

namespace {

constexpr int kOk = 0;
constexpr int kRegression = 1;
constexpr int kUsage = 2;
constexpr int kInfeasible = 3;
constexpr int kIo = 4;

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

int scene_index(const fs::path& scen) {
  static const std::regex pattern(R"(-(\d+)$)");
  std::smatch m;
  const std::string stem = scen.stem().string();
  if (std::regex_search(stem, m, pattern)) return std::stoi(m[1]);
  return 0;
}

std::string cell_text(const GridMap& map, Vertex v) {
  if (v == kNoVertex) return "(?)";
  const Cell c = map.cell(v);
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

struct SolveOptions {
  std::string map, scen, out_dir = "out";
  int agents = -1;
  std::string strategy = "adaptive", replan = "pp", init = "lns2lite";
  int nb_size = 8, pbs_budget = 64, validate_every = 0;
  double time_limit = 60.0, init_budget = 10.0;
  long max_iters = 0;
  std::uint64_t seed = 0;
};

int cmd_solve(const SolveOptions& o) {
  const auto strategy = parse_strategy(o.strategy);
  LnsConfig cfg;
  cfg.strategy = *strategy;
  cfg.nb_size = o.nb_size;
  cfg.replan = o.replan == "pbs" ? ReplanSolver::PBS : ReplanSolver::PP;
  cfg.pbs_node_budget = o.pbs_budget;
  cfg.init = o.init == "pp-restart" ? InitSolver::PpRestart : InitSolver::Lns2Lite;
  cfg.init_budget_s = o.init_budget;
  cfg.budget = o.max_iters > 0 ? Budget::max_iterations(o.max_iters) : Budget::core_seconds(o.time_limit);
  cfg.seed = o.seed;
  cfg.validate_every = o.validate_every;

  const GridMap map = load_map(o.map);
  const ScenarioFile scen = load_scenario_file(o.scen);
  const MapfInstance inst =
      make_instance(scen, map, o.agents, [](const std::string& s) { std::cerr << "note: " << s << '\n'; });
  try {
    check_config(cfg, inst.num_agents());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  InitStats stats;
  const auto initial = initial_solution(inst, cfg.init, cfg.init_budget_s, cfg.seed, &stats);
  if (!initial) {
    std::cerr << "error: no initial solution within " << cfg.init_budget_s << " s (" << stats.solver << ")\n";
    return kInfeasible;
  }
  const RunRecord rec = lns_run(inst, *initial, cfg);

  const fs::path out(o.out_dir);
  const RunLabel label{map.name(), fs::path(o.scen).filename().string(), scene_index(o.scen), o.agents};
  {
    std::ostringstream js;
    write_trajectory_json(rec, label, js);
    write_file(out / "trajectory.json", js.str());
  }
  {
    RunResultRow row;
    row.map = map.name();
    row.scene = label.scene;
    row.agents = o.agents;
    row.strategy = to_string(cfg.strategy);
    row.nb_size = cfg.nb_size;
    row.replan = replan_label(cfg.replan, cfg.pbs_node_budget);
    row.init = to_string(cfg.init);
    row.seed = cfg.seed;
    if (cfg.budget.by_iterations())
      row.max_iters = cfg.budget.iterations;
    else
      row.time_limit_s = cfg.budget.seconds;
    row.init_delay = rec.initial_delay;
    row.final_delay = rec.final_delay;
    row.auc = rec.auc;
    row.iters = rec.iterations;
    row.accepted_iters = rec.accepted;
    row.core_time_s = rec.core_time_s;
    std::ostringstream csv;
    write_results_csv({row}, csv);
    write_file(out / "result.csv", csv.str());
  }
  {
    std::ostringstream js;
    write_paths_json(inst, rec.solution.paths, js);
    write_file(out / "solution.json", js.str());
  }
  std::cout << "initial_delay " << rec.initial_delay << '\n'
            << "final_delay " << rec.final_delay << '\n'
            << "auc " << format_number(rec.auc) << '\n'
            << "iterations " << rec.iterations << " accepted " << rec.accepted << '\n'
            << "core_time_s " << format_number(rec.core_time_s) << '\n';
  return kOk;
}

int cmd_validate(const std::string& map_path, const std::string& scen_path, const std::string& paths_path) {
  const GridMap map = load_map(map_path);
  std::ifstream in(paths_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + paths_path);
  const std::vector<Path> paths = read_paths_json(in, map);
  const MapfInstance inst = make_instance(load_scenario_file(scen_path), map, static_cast<int>(paths.size()));
  const Validation v = validate_solution(inst, paths);
  for (const auto& d : v.defects)
    std::cout << "malformed path: agent " << d.agent << " at time " << d.time << ": " << to_string(d.kind) << '\n';
  for (const auto& c : v.conflicts) {
    if (c.kind == ConflictKind::Vertex)
      std::cout << "vertex conflict: agents " << c.agents.first << " and " << c.agents.second << " at "
                << cell_text(map, c.from) << " time " << c.time << '\n';
    else
      std::cout << "swap conflict: agents " << c.agents.first << " and " << c.agents.second << " on "
                << cell_text(map, c.from) << "-" << cell_text(map, c.to) << " time " << c.time << '\n';
  }
  if (!v.ok()) return kInfeasible;
  std::cout << "valid, sum_of_delays " << sum_of_delays(inst, paths) << '\n';
  return kOk;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::map<std::string, PlotSeries> groups;
  std::string axis = "core time (s)";
  for (const auto& p : inputs) {
    const TrajectoryFile f = read_trajectory_json(fs::path(p));
    if (f.config.contains("max_iters")) axis = "iterations";
    PlotSeries& s = groups[f.strategy];
    s.label = f.strategy;
    s.limit = std::max(s.limit, f.limit);
    s.runs.push_back(f.trajectory);
  }
  std::vector<PlotSeries> series;
  for (auto& [_, s] : groups) series.push_back(std::move(s));
  write_file(out_path, render_svg_plot(series, axis));
  return kOk;
}

int cmd_compare(const std::string& baseline, const std::string& candidate, double tol) {
  const auto report = compare_tables(read_results_csv(fs::path(baseline)), read_results_csv(fs::path(candidate)), tol);
  for (const auto& k : report.missing) std::cout << "missing: " << k << '\n';
  for (const auto& d : report.deltas)
    std::cout << (d.regression ? "REGRESSION " : "delta ") << d.key << ' ' << d.metric << ' '
              << format_number(d.baseline) << " -> " << format_number(d.candidate) << " ("
              << format_number(d.relative * 100.0) << "%)\n";
  if (report.ok()) {
    std::cout << (report.deltas.empty() ? "identical\n" : "within tolerance\n");
    return kOk;
  }
  return kRegression;
}

int cmd_bench(const std::string& config, const std::string& out_dir, int jobs, bool resume,
              const std::string& cache_dir) {
  const MatrixSpec spec = load_matrix_spec(config);
  MatrixOptions opt;
  opt.out_dir = out_dir.empty() ? fs::path("results") / spec.name : fs::path(out_dir);
  if (!cache_dir.empty()) opt.cache_dir = cache_dir;
  opt.jobs = jobs;
  opt.resume = resume;
  opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
  const MatrixOutcome out = run_matrix(spec, opt);
  std::cout << "cells " << out.rows.size() << " ran " << out.ran << " skipped " << out.skipped << " failed "
            << out.failed << '\n'
            << "results " << (opt.out_dir / "results.csv").string() << '\n';
  return kOk;
}

int cmd_synth(const std::string& out_dir, int scenes, std::uint64_t seed) {
  const fs::path root(out_dir);
  Rng rng = derive_rng(seed, 0x5151);
  struct Spec {
    GridMap map;
    int entries;
  };
  std::vector<Spec> specs;
  specs.push_back({empty_map(32, 32, "empty-32-32"), 500});
  specs.push_back({random_map(32, 32, 0.2, rng, "random-32-32-20"), 350});
  specs.push_back({warehouse_map(WarehouseLayout{}, "warehouse-10-20-10-2-1"), 350});
  for (const auto& s : specs) {
    write_file(root / "maps" / (s.map.name() + ".map"), render_map(s.map));
    for (int k = 1; k <= scenes; ++k) {
      Rng scen_rng = derive_rng(seed, static_cast<std::uint64_t>(k) * 7919 + s.map.size());
      write_file(root / "scens" / (s.map.name() + "-random-" + std::to_string(k) + ".scen"),
                 render_scenario(random_scenario(s.map, s.entries, scen_rng)));
    }
    std::cout << s.map.name() << ": " << s.map.width() << "x" << s.map.height() << ", " << scenes << " scenarios\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime MAPF via large neighborhood search"};
  app.require_subcommand(1);

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Run the initial solver, then LNS, on one instance");
  solve->add_option("--map", so.map, "movingai .map file")->required();
  solve->add_option("--scen", so.scen, "movingai .scen file")->required();
  solve->add_option("--agents", so.agents, "number of agents (scenario prefix)")->required()->check(CLI::NonNegativeNumber);
  solve->add_option("--strategy", so.strategy, "neighborhood selection")
      ->check(CLI::IsMember({"randomwalk", "randomwalkprob", "intersection", "random", "adaptive", "bandit",
                             "unibandit"}))
      ->capture_default_str();
  solve->add_option("--nb-size", so.nb_size, "neighborhood size")->check(CLI::PositiveNumber)->capture_default_str();
  solve->add_option("--replan", so.replan, "repair solver")->check(CLI::IsMember({"pp", "pbs"}))->capture_default_str();
  solve->add_option("--pbs-budget", so.pbs_budget, "PBS node expansions per call")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve->add_option("--init", so.init, "initial solver")
      ->check(CLI::IsMember({"lns2lite", "pp-restart"}))
      ->capture_default_str();
  solve->add_option("--init-budget", so.init_budget, "initial solver budget in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* tl = solve->add_option("--time-limit", so.time_limit, "core-time budget in seconds")
                 ->check(CLI::PositiveNumber)
                 ->capture_default_str();
  auto* mi = solve->add_option("--max-iters", so.max_iters, "iteration budget (replaces --time-limit)")
                 ->check(CLI::PositiveNumber);
  tl->excludes(mi);
  solve->add_option("--seed", so.seed, "random seed")->capture_default_str();
  solve->add_option("--out-dir", so.out_dir, "output directory")->capture_default_str();
  solve->add_option("--validate-every", so.validate_every, "full validation every k iterations (0 = off)");

  std::string bench_config, bench_out, bench_cache;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool resume = false;
  auto* bench = app.add_subcommand("bench", "Run an experiment matrix from a JSON config");
  bench->add_option("config", bench_config, "matrix config (JSON)")->required();
  bench->add_option("--out-dir", bench_out, "output directory (default results/<name>)");
  bench->add_option("--jobs", jobs, "parallel runs (default: one per core)")->check(CLI::PositiveNumber);
  bench->add_flag("--resume", resume, "keep finished cells from a previous run");
  bench->add_option("--cache-dir", bench_cache, "initial-solution cache (default $MAPF_CACHE_DIR or ./cache)");

  std::string vmap, vscen, vpaths;
  auto* validate = app.add_subcommand("validate", "Check a solution file for conflicts");
  validate->add_option("--map", vmap)->required();
  validate->add_option("--scen", vscen)->required();
  validate->add_option("--paths", vpaths, "paths JSON")->required();

  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "Mean delay-vs-time curves per strategy as SVG");
  plot->add_option("inputs", plot_inputs, "trajectory JSON files")->required();
  plot->add_option("--out", plot_out)->capture_default_str();

  std::string baseline, candidate;
  double tol = 0.05;
  auto* compare = app.add_subcommand("compare", "Compare two results CSVs cell by cell");
  compare->add_option("baseline", baseline)->required();
  compare->add_option("candidate", candidate)->required();
  compare->add_option("--tol", tol, "relative tolerance")->capture_default_str();

  std::string synth_out = "data";
  int synth_scenes = 25;
  std::uint64_t synth_seed = 2024;
  auto* synth = app.add_subcommand("synth", "Generate benchmark-shaped maps and scenarios");
  synth->add_option("--out-dir", synth_out)->capture_default_str();
  synth->add_option("--scenes", synth_scenes)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(so);
    if (*bench) return cmd_bench(bench_config, bench_out, jobs, resume, bench_cache);
    if (*validate) return cmd_validate(vmap, vscen, vpaths);
    if (*plot) return cmd_plot(plot_inputs, plot_out);
    if (*compare) return cmd_compare(baseline, candidate, tol);
    if (*synth) return cmd_synth(synth_out, synth_scenes, synth_seed);
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  }
  return kUsage;
}
