#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../errors.hpp"
#include "../grid.hpp"
#include "../instance.hpp"

namespace mapf_lns {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && end == s.data() + s.size();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline bool passable_glyph(char c) { return c == '.' || c == 'G'; }
inline bool obstacle_glyph(char c) { return c == '@' || c == 'O' || c == 'T' || c == 'W'; }

// movingai .map: `type`, `height`, `width` header lines in any order, then
// `map`, then height rows of width glyphs.
inline GridMap parse_map(std::istream& in, std::string name = {}) {
  std::string line;
  int lineno = 0;
  int width = -1, height = -1;
  bool saw_type = false, saw_map = false;
  while (!saw_map && std::getline(in, line)) {
    ++lineno;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "type") {
      saw_type = true;
    } else if (tokens[0] == "height" || tokens[0] == "width") {
      int value = 0;
      if (tokens.size() != 2 || !detail::parse_number(tokens[1], value) || value < 1)
        throw ParseError("bad " + std::string(tokens[0]) + " line", lineno);
      (tokens[0] == "height" ? height : width) = value;
    } else if (tokens[0] == "map" && tokens.size() == 1) {
      saw_map = true;
    } else {
      throw ParseError("unexpected header line '" + std::string(detail::trim(line)) + "'", lineno);
    }
  }
  if (!saw_map) throw ParseError("missing 'map' line", lineno);
  if (!saw_type) throw ParseError("missing 'type' line", lineno);
  if (height < 0 || width < 0) throw ParseError("missing height or width", lineno);

  std::vector<bool> passable;
  passable.reserve(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    if (!std::getline(in, line)) throw ParseError("grid truncated: expected " + std::to_string(height) + " rows", lineno);
    ++lineno;
    std::string_view row = line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (static_cast<int>(row.size()) != width)
      throw ParseError("row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(width), lineno);
    for (char c : row) {
      if (passable_glyph(c))
        passable.push_back(true);
      else if (obstacle_glyph(c))
        passable.push_back(false);
      else
        throw ParseError(std::string("unknown glyph '") + c + "'", lineno);
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) throw ParseError("extra content after the grid", lineno);
  }
  return GridMap(width, height, std::move(passable), std::move(name));
}

inline GridMap parse_map(std::string_view text, std::string name = {}) {
  std::istringstream in{std::string(text)};
  return parse_map(in, std::move(name));
}

inline GridMap load_map(const std::filesystem::path& path) {
  return parse_map(std::string_view(detail::read_file(path)), path.stem().string());
}

// Debug renderer; parse_map(render_map(m)) reproduces m.
inline std::string render_map(const GridMap& map) {
  std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " + std::to_string(map.width()) +
                    "\nmap\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) out += map.passable(Cell{r, c}) ? '.' : '@';
    out += '\n';
  }
  return out;
}

struct ScenarioEntry {
  int bucket = 0;
  std::string map_name;
  int map_width = 0;
  int map_height = 0;
  int start_col = 0;
  int start_row = 0;
  int goal_col = 0;
  int goal_row = 0;
  double reference_length = 0.0;
  int line = 0;
};

struct ScenarioFile {
  std::string version;
  std::vector<ScenarioEntry> entries;
};

inline ScenarioFile parse_scenario_file(std::istream& in) {
  ScenarioFile scen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    if (scen.version.empty()) {
      if (tokens[0] != "version" || tokens.size() != 2) throw ParseError("expected 'version' header", lineno);
      scen.version = std::string(tokens[1]);
      continue;
    }
    if (tokens.size() != 9) throw ParseError("expected 9 fields, got " + std::to_string(tokens.size()), lineno);
    ScenarioEntry e;
    e.line = lineno;
    e.map_name = std::string(tokens[1]);
    const bool ok = detail::parse_number(tokens[0], e.bucket) && detail::parse_number(tokens[2], e.map_width) &&
                    detail::parse_number(tokens[3], e.map_height) && detail::parse_number(tokens[4], e.start_col) &&
                    detail::parse_number(tokens[5], e.start_row) && detail::parse_number(tokens[6], e.goal_col) &&
                    detail::parse_number(tokens[7], e.goal_row) &&
                    detail::parse_number(tokens[8], e.reference_length);
    if (!ok) throw ParseError("malformed scenario entry", lineno);
    scen.entries.push_back(std::move(e));
  }
  if (scen.version.empty()) throw ParseError("empty scenario file", lineno);
  return scen;
}

inline ScenarioFile parse_scenario_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_scenario_file(in);
}

using NoticeSink = std::function<void(const std::string&)>;

// First n entries become agents 0..n-1. Reference lengths are 8-connected
// values and only reported through `notice` when BFS comes out shorter.
inline MapfInstance make_instance(const ScenarioFile& scen, const GridMap& map, int n_agents,
                                  const NoticeSink& notice = {}) {
  if (n_agents < 0) throw LoadError("agent count must be non-negative");
  if (static_cast<int>(scen.entries.size()) < n_agents)
    throw LoadError("scenario has " + std::to_string(scen.entries.size()) + " entries, " + std::to_string(n_agents) +
                    " requested");
  std::vector<AgentTask> tasks;
  tasks.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const ScenarioEntry& e = scen.entries[i];
    const std::string where = "line " + std::to_string(e.line) + ": ";
    if (e.map_width != map.width() || e.map_height != map.height())
      throw LoadError(where + "scenario dimensions do not match the map");
    tasks.push_back({i, Cell{e.start_row, e.start_col}, Cell{e.goal_row, e.goal_col}});
  }
  for (int i = 0; i < n_agents; ++i) {
    const ScenarioEntry& e = scen.entries[i];
    if (!map.passable(tasks[i].start) || !map.passable(tasks[i].goal))
      throw LoadError("line " + std::to_string(e.line) + ": start or goal is blocked or out of bounds");
  }
  // Remaining checks (duplicates, reachability) name the agent, i.e. the entry index.
  MapfInstance inst(map, std::move(tasks));
  if (notice) {
    for (int i = 0; i < n_agents; ++i) {
      const ScenarioEntry& e = scen.entries[i];
      if (static_cast<double>(inst.shortest(i)) + 1e-9 < e.reference_length)
        notice("line " + std::to_string(e.line) + ": BFS distance " + std::to_string(inst.shortest(i)) +
               " is below the reference length " + std::to_string(e.reference_length));
    }
  }
  return inst;
}

inline MapfInstance parse_scen(std::istream& in, const GridMap& map, int n_agents, const NoticeSink& notice = {}) {
  return make_instance(parse_scenario_file(in), map, n_agents, notice);
}

inline MapfInstance parse_scen(std::string_view text, const GridMap& map, int n_agents,
                               const NoticeSink& notice = {}) {
  return make_instance(parse_scenario_file(text), map, n_agents, notice);
}

inline ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  try {
    return parse_scenario_file(std::string_view(detail::read_file(path)));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

// Serializes entries in the tab-separated movingai layout.
inline std::string render_scenario(const ScenarioFile& scen) {
  std::string out = "version " + (scen.version.empty() ? std::string("1") : scen.version) + "\n";
  for (const auto& e : scen.entries) {
    char len[32];
    auto [end, ec] = std::to_chars(len, len + sizeof len, e.reference_length);
    out += std::to_string(e.bucket) + '\t' + e.map_name + '\t' + std::to_string(e.map_width) + '\t' +
           std::to_string(e.map_height) + '\t' + std::to_string(e.start_col) + '\t' + std::to_string(e.start_row) +
           '\t' + std::to_string(e.goal_col) + '\t' + std::to_string(e.goal_row) + '\t' + std::string(len, end) +
           '\n';
  }
  return out;
}

}  // namespace mapf_lns
