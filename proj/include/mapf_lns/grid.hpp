#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mapf_lns {

// Linear cell index: row * width + col.
using Vertex = std::int32_t;
using AgentId = std::int32_t;

inline constexpr Vertex kNoVertex = -1;
inline constexpr AgentId kNoAgent = -1;

// (row, column), origin at the top-left as in movingai files.
struct Cell {
  int row = 0;
  int col = 0;
  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

// 4-connected grid. Neighbor lists are precomputed over passable cells in
// a fixed order (up, left, right, down).
class GridMap {
 public:
  GridMap() = default;

  GridMap(int width, int height, std::vector<bool> passable, std::string name = {})
      : width_(width), height_(height), passable_(std::move(passable)), name_(std::move(name)) {
    if (width_ < 1 || height_ < 1)
      throw std::invalid_argument("grid dimensions must be positive");
    if (passable_.size() != static_cast<std::size_t>(width_) * height_)
      throw std::invalid_argument("passable mask size does not match width*height");
    build_adjacency();
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }
  const std::string& name() const { return name_; }

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_; }
  bool passable(Vertex v) const { return v >= 0 && v < size() && passable_[v]; }
  bool passable(Cell c) const { return in_bounds(c) && passable_[vertex(c)]; }

  Vertex vertex(Cell c) const { return c.row * width_ + c.col; }
  Cell cell(Vertex v) const { return {v / width_, v % width_}; }

  const std::vector<Vertex>& neighbors(Vertex v) const { return adjacency_[v]; }
  int degree(Vertex v) const { return static_cast<int>(adjacency_[v].size()); }

  bool adjacent(Vertex a, Vertex b) const {
    for (Vertex n : adjacency_[a])
      if (n == b) return true;
    return false;
  }

  int passable_count() const {
    int n = 0;
    for (bool p : passable_) n += p;
    return n;
  }

 private:
  void build_adjacency() {
    adjacency_.assign(size(), {});
    static constexpr std::array<std::pair<int, int>, 4> kMoves{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
    for (Vertex v = 0; v < size(); ++v) {
      if (!passable_[v]) continue;
      Cell c = cell(v);
      for (auto [dr, dc] : kMoves) {
        Cell n{c.row + dr, c.col + dc};
        if (passable(n)) adjacency_[v].push_back(vertex(n));
      }
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<bool> passable_;
  std::string name_;
  std::vector<std::vector<Vertex>> adjacency_;
};

}  // namespace mapf_lns
