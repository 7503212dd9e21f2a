#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dpp/graph.hpp"

namespace dpp {

// 4-connected unit-cost gridworld parsed from text: '#' wall, '.' free,
// 'S'/'G'/'D' free cells carrying start/goal/decoy markers. Rows must be
// equal length. Free cells get dense node ids in row-major scan order and
// coordinates (x=col, y=row).
struct GridWorld {
  WeightedGraph graph;
  int rows = 0;
  int cols = 0;
  std::vector<NodeId> cell_to_node;  // rows*cols, -1 for walls
  std::vector<std::pair<int, int>> node_to_cell;
  std::optional<NodeId> start;
  std::optional<NodeId> goal;
  std::optional<NodeId> decoy;
  std::string name;

  NodeId node_at(int row, int col) const {
    if (row < 0 || row >= rows || col < 0 || col >= cols) {
      throw InvalidArgumentError("gridworld: cell out of range");
    }
    const NodeId id = cell_to_node[static_cast<std::size_t>(row) *
                                       static_cast<std::size_t>(cols) +
                                   static_cast<std::size_t>(col)];
    if (id < 0) throw InvalidArgumentError("gridworld: cell is a wall");
    return id;
  }

  std::pair<int, int> cell_of(NodeId node) const {
    graph.require_node(node, "cell_of");
    return node_to_cell[static_cast<std::size_t>(node)];
  }
};

inline GridWorld parse_gridworld(const std::string& text,
                                 const std::string& name = "") {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
  }
  if (lines.empty()) throw DataError("gridworld: empty map");

  GridWorld world;
  world.name = name;
  world.rows = static_cast<int>(lines.size());
  world.cols = static_cast<int>(lines[0].size());
  if (world.cols == 0) throw DataError("gridworld: empty first row");

  world.cell_to_node.assign(
      static_cast<std::size_t>(world.rows) * static_cast<std::size_t>(world.cols),
      -1);
  std::vector<Point> coords;
  std::optional<std::pair<int, int>> start_cell, goal_cell, decoy_cell;

  for (int r = 0; r < world.rows; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != world.cols) {
      throw DataError("gridworld: row " + std::to_string(r) +
                      " length differs from row 0");
    }
    for (int c = 0; c < world.cols; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      if (ch == '#') continue;
      if (ch != '.' && ch != 'S' && ch != 'G' && ch != 'D') {
        throw DataError(std::string("gridworld: illegal character '") + ch +
                        "' at row " + std::to_string(r) + " col " +
                        std::to_string(c));
      }
      const auto mark = [&](std::optional<std::pair<int, int>>& slot,
                            const char* what) {
        if (slot.has_value()) {
          throw DataError(std::string("gridworld: duplicate ") + what +
                          " marker");
        }
        slot = {r, c};
      };
      if (ch == 'S') mark(start_cell, "start");
      if (ch == 'G') mark(goal_cell, "goal");
      if (ch == 'D') mark(decoy_cell, "decoy");

      const NodeId id = static_cast<NodeId>(world.node_to_cell.size());
      world.cell_to_node[static_cast<std::size_t>(r) *
                             static_cast<std::size_t>(world.cols) +
                         static_cast<std::size_t>(c)] = id;
      world.node_to_cell.push_back({r, c});
      coords.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
  }
  if (world.node_to_cell.empty()) throw DataError("gridworld: no free cells");

  std::vector<Edge> edges;
  for (NodeId id = 0; id < static_cast<NodeId>(world.node_to_cell.size()); ++id) {
    const auto [r, c] = world.node_to_cell[static_cast<std::size_t>(id)];
    // right and down neighbors only; the graph symmetrizes
    if (c + 1 < world.cols) {
      const NodeId right = world.cell_to_node[static_cast<std::size_t>(r) *
                                                  static_cast<std::size_t>(world.cols) +
                                              static_cast<std::size_t>(c) + 1];
      if (right >= 0) edges.push_back({id, right, 1.0});
    }
    if (r + 1 < world.rows) {
      const NodeId down =
          world.cell_to_node[(static_cast<std::size_t>(r) + 1) *
                                 static_cast<std::size_t>(world.cols) +
                             static_cast<std::size_t>(c)];
      if (down >= 0) edges.push_back({id, down, 1.0});
    }
  }
  world.graph = WeightedGraph(static_cast<int>(world.node_to_cell.size()), edges,
                              std::move(coords));
  if (start_cell) world.start = world.node_at(start_cell->first, start_cell->second);
  if (goal_cell) world.goal = world.node_at(goal_cell->first, goal_cell->second);
  if (decoy_cell) world.decoy = world.node_at(decoy_cell->first, decoy_cell->second);
  return world;
}

inline GridWorld load_gridworld(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("gridworld: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  if (name.size() > 4 && name.ends_with(".map")) {
    name = name.substr(0, name.size() - 4);
  }
  return parse_gridworld(buf.str(), name);
}

}  // namespace dpp
