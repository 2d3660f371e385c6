#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "distance_field.hpp"
#include "grid.hpp"
#include "io/movingai.hpp"
#include "random.hpp"

namespace mapf_lns {

// Generators for benchmark-shaped maps and scenario files, used when the
// original movingai files are not at hand.

inline GridMap empty_map(int width, int height, std::string name) {
  return GridMap(width, height, std::vector<bool>(static_cast<std::size_t>(width) * height, true), std::move(name));
}

// Exactly round(fraction * cells) obstacles at uniformly random cells.
inline GridMap random_map(int width, int height, double obstacle_fraction, Rng& rng, std::string name) {
  const int cells = width * height;
  const int blocked = static_cast<int>(std::lround(obstacle_fraction * cells));
  std::vector<int> order(cells);
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(order, rng);
  std::vector<bool> passable(cells, true);
  for (int i = 0; i < blocked; ++i) passable[order[i]] = false;
  return GridMap(width, height, std::move(passable), std::move(name));
}

// Rectangular shelf blocks separated by one-cell aisles, centred with open
// margins around the block field.
struct WarehouseLayout {
  int width = 161;
  int height = 63;
  int shelf_width = 10;
  int shelf_height = 2;
  int shelf_columns = 10;
  int shelf_rows = 20;
  int aisle = 1;
};

inline GridMap warehouse_map(const WarehouseLayout& w, std::string name) {
  const int field_w = w.shelf_columns * w.shelf_width + (w.shelf_columns - 1) * w.aisle;
  const int field_h = w.shelf_rows * w.shelf_height + (w.shelf_rows - 1) * w.aisle;
  if (field_w > w.width || field_h > w.height) throw std::invalid_argument("shelves do not fit the warehouse");
  const int left = (w.width - field_w) / 2, top = (w.height - field_h) / 2;
  std::vector<bool> passable(static_cast<std::size_t>(w.width) * w.height, true);
  for (int i = 0; i < w.shelf_rows; ++i)
    for (int j = 0; j < w.shelf_columns; ++j)
      for (int r = 0; r < w.shelf_height; ++r)
        for (int c = 0; c < w.shelf_width; ++c) {
          const int row = top + i * (w.shelf_height + w.aisle) + r;
          const int col = left + j * (w.shelf_width + w.aisle) + c;
          passable[static_cast<std::size_t>(row) * w.width + col] = false;
        }
  return GridMap(w.width, w.height, std::move(passable), std::move(name));
}

// Cells of the largest 4-connected passable component, ascending.
inline std::vector<Vertex> largest_component(const GridMap& map) {
  std::vector<int> label(map.size(), -1);
  std::vector<Vertex> best;
  for (Vertex s = 0; s < map.size(); ++s) {
    if (!map.passable(s) || label[s] >= 0) continue;
    std::vector<Vertex> comp{s};
    label[s] = s;
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (Vertex n : map.neighbors(comp[i]))
        if (label[n] < 0) {
          label[n] = s;
          comp.push_back(n);
        }
    if (comp.size() > best.size()) best = std::move(comp);
  }
  std::sort(best.begin(), best.end());
  return best;
}

// `entries` start/goal pairs, starts pairwise distinct and goals pairwise
// distinct, all inside the largest component. Reference length is the
// 4-connected distance; bucket groups lengths by 4.
inline ScenarioFile random_scenario(const GridMap& map, int entries, Rng& rng) {
  const auto cells = largest_component(map);
  if (static_cast<int>(cells.size()) < entries) throw std::invalid_argument("map too small for the requested entries");
  std::vector<Vertex> starts = cells, goals = cells;
  shuffle_in_place(starts, rng);
  shuffle_in_place(goals, rng);
  ScenarioFile scen;
  scen.version = "1";
  for (int i = 0; i < entries; ++i) {
    const Cell s = map.cell(starts[i]), g = map.cell(goals[i]);
    const int d = bfs_distance_field(map, goals[i])[starts[i]];
    ScenarioEntry e;
    e.bucket = d / 4;
    e.map_name = map.name() + ".map";
    e.map_width = map.width();
    e.map_height = map.height();
    e.start_col = s.col;
    e.start_row = s.row;
    e.goal_col = g.col;
    e.goal_row = g.row;
    e.reference_length = d;
    scen.entries.push_back(std::move(e));
  }
  return scen;
}

}  // namespace mapf_lns
