#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "dpp/error.hpp"

namespace dpp {

using NodeId = int;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double euclidean(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Edge {
  NodeId u;
  NodeId v;
  double weight;
};

// Immutable undirected weighted graph over dense node ids 0..n-1, stored as
// CSR with per-node neighbor lists sorted by id. Weights are strictly
// positive; parallel edges and self-loops are rejected at construction.
class WeightedGraph {
 public:
  struct Neighbor {
    NodeId node;
    double weight;
  };

  WeightedGraph() = default;

  WeightedGraph(int node_count, std::span<const Edge> edges,
                std::vector<Point> coordinates = {}) {
    if (node_count < 0) throw InvalidArgumentError("graph: negative node count");
    if (!coordinates.empty() &&
        coordinates.size() != static_cast<std::size_t>(node_count)) {
      throw InvalidArgumentError("graph: coordinate count != node count");
    }
    coords_ = std::move(coordinates);

    std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(node_count));
    for (const Edge& e : edges) {
      if (e.u < 0 || e.u >= node_count || e.v < 0 || e.v >= node_count) {
        throw InvalidArgumentError("graph: edge endpoint out of range");
      }
      if (e.u == e.v) throw InvalidArgumentError("graph: self-loop");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        throw InvalidArgumentError("graph: edge weight must be finite and > 0");
      }
      adj[static_cast<std::size_t>(e.u)].push_back({e.v, e.weight});
      adj[static_cast<std::size_t>(e.v)].push_back({e.u, e.weight});
      total_weight_ += e.weight;
      ++edge_count_;
    }

    offsets_.reserve(static_cast<std::size_t>(node_count) + 1);
    for (auto& list : adj) {
      std::sort(list.begin(), list.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
      for (std::size_t i = 1; i < list.size(); ++i) {
        if (list[i].node == list[i - 1].node) {
          throw InvalidArgumentError("graph: duplicate edge");
        }
      }
      adjacency_.insert(adjacency_.end(), list.begin(), list.end());
      offsets_.push_back(static_cast<int>(adjacency_.size()));
    }
  }

  int node_count() const { return static_cast<int>(offsets_.size()) - 1; }
  int edge_count() const { return edge_count_; }
  bool empty() const { return node_count() <= 0; }

  bool has_node(NodeId u) const { return u >= 0 && u < node_count(); }

  void require_node(NodeId u, const char* what) const {
    if (!has_node(u)) {
      throw InvalidArgumentError(std::string(what) + ": unknown node id " +
                                 std::to_string(u));
    }
  }

  std::span<const Neighbor> neighbors(NodeId u) const {
    require_node(u, "neighbors");
    const auto lo = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(u)]);
    const auto hi = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(u) + 1]);
    return {adjacency_.data() + lo, hi - lo};
  }

  int degree(NodeId u) const { return static_cast<int>(neighbors(u).size()); }

  std::optional<double> edge_weight(NodeId u, NodeId v) const {
    for (const Neighbor& n : neighbors(u)) {
      if (n.node == v) return n.weight;
      if (n.node > v) break;
    }
    return std::nullopt;
  }

  double total_edge_weight() const { return total_weight_; }

  // Finite stand-in for "unreachable": strictly larger than any achievable
  // path cost, so attribute vectors never contain inf.
  double unreachable_distance() const { return total_weight_ + 1.0; }

  bool has_coordinates() const { return !coords_.empty(); }
  const std::vector<Point>& coordinates() const { return coords_; }
  Point coordinate(NodeId u) const {
    require_node(u, "coordinate");
    if (coords_.empty()) throw InvalidArgumentError("coordinate: graph has none");
    return coords_[static_cast<std::size_t>(u)];
  }

 private:
  std::vector<int> offsets_ = {0};
  std::vector<Neighbor> adjacency_;
  std::vector<Point> coords_;
  double total_weight_ = 0.0;
  int edge_count_ = 0;
};

// Dijkstra from a single source. Unreachable nodes map to
// graph.unreachable_distance().
inline std::vector<double> shortest_distances(const WeightedGraph& graph,
                                              NodeId source) {
  graph.require_node(source, "shortest_distances");
  const double unreachable = graph.unreachable_distance();
  std::vector<double> dist(static_cast<std::size_t>(graph.node_count()),
                           unreachable);
  dist[static_cast<std::size_t>(source)] = 0.0;

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& [v, w] : graph.neighbors(u)) {
      const double nd = d + w;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.push({nd, v});
      }
    }
  }
  return dist;
}

inline bool is_reachable(const WeightedGraph& graph, std::span<const double> dist,
                         NodeId node) {
  graph.require_node(node, "is_reachable");
  return dist[static_cast<std::size_t>(node)] < graph.unreachable_distance();
}

// Induced subgraph over the nodes within k unweighted hops of center.
// Local ids are assigned in ascending original-id order, so neighbor
// orderings agree between the subgraph and the parent graph.
struct Subgraph {
  WeightedGraph graph;
  std::vector<NodeId> to_original;  // local -> original, ascending

  NodeId original_of(int local) const {
    if (local < 0 || local >= static_cast<int>(to_original.size())) {
      throw InvalidArgumentError("subgraph: bad local id");
    }
    return to_original[static_cast<std::size_t>(local)];
  }

  // -1 when the original node is not part of the subgraph.
  int local_of(NodeId original) const {
    const auto it =
        std::lower_bound(to_original.begin(), to_original.end(), original);
    if (it == to_original.end() || *it != original) return -1;
    return static_cast<int>(it - to_original.begin());
  }
};

inline Subgraph k_hop_neighborhood(const WeightedGraph& graph, NodeId center,
                                   int k) {
  graph.require_node(center, "k_hop_neighborhood");
  if (k < 0) throw InvalidArgumentError("k_hop_neighborhood: negative radius");

  std::vector<int> hop(static_cast<std::size_t>(graph.node_count()), -1);
  hop[static_cast<std::size_t>(center)] = 0;
  std::queue<NodeId> frontier;
  frontier.push(center);
  std::vector<NodeId> members = {center};
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    const int hu = hop[static_cast<std::size_t>(u)];
    if (hu == k) continue;
    for (const auto& [v, w] : graph.neighbors(u)) {
      (void)w;
      if (hop[static_cast<std::size_t>(v)] < 0) {
        hop[static_cast<std::size_t>(v)] = hu + 1;
        members.push_back(v);
        frontier.push(v);
      }
    }
  }
  std::sort(members.begin(), members.end());

  std::vector<int> local(static_cast<std::size_t>(graph.node_count()), -1);
  for (std::size_t i = 0; i < members.size(); ++i) {
    local[static_cast<std::size_t>(members[i])] = static_cast<int>(i);
  }

  std::vector<Edge> edges;
  std::vector<Point> coords;
  const bool carry_coords = graph.has_coordinates();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const NodeId u = members[i];
    if (carry_coords) coords.push_back(graph.coordinate(u));
    for (const auto& [v, w] : graph.neighbors(u)) {
      const int lv = local[static_cast<std::size_t>(v)];
      if (lv >= 0 && u < v) {
        edges.push_back({static_cast<NodeId>(i), lv, w});
      }
    }
  }
  Subgraph out;
  out.graph = WeightedGraph(static_cast<int>(members.size()), edges,
                            std::move(coords));
  out.to_original = std::move(members);
  return out;
}

// Mutable per-episode state. `t` is the state index: 1 at the start state,
// incremented on every move, so trajectory.size() == t for discrete walks.
struct EpisodeContext {
  NodeId start = 0;
  std::vector<NodeId> goals;  // all candidate goals, true goal included
  int true_goal_index = 0;
  double budget = 0.0;  // T_max: allowed moves (steps) for discrete episodes
  int t = 1;
  std::vector<NodeId> trajectory;
  std::vector<char> visited;  // bitmap over node ids; the set of trajectory entries

  static EpisodeContext begin(const WeightedGraph& graph, NodeId start,
                              std::vector<NodeId> goals, int true_goal_index,
                              double budget) {
    graph.require_node(start, "episode start");
    if (goals.size() < 2) {
      throw InvalidArgumentError("episode: needs at least two candidate goals");
    }
    for (NodeId g : goals) graph.require_node(g, "episode goal");
    if (true_goal_index < 0 ||
        true_goal_index >= static_cast<int>(goals.size())) {
      throw InvalidArgumentError("episode: true goal index out of range");
    }
    for (std::size_t i = 0; i < goals.size(); ++i) {
      for (std::size_t j = i + 1; j < goals.size(); ++j) {
        if (goals[i] == goals[j]) {
          throw InvalidArgumentError("episode: duplicate goal");
        }
      }
    }
    EpisodeContext ctx;
    ctx.start = start;
    ctx.goals = std::move(goals);
    ctx.true_goal_index = true_goal_index;
    ctx.budget = budget;
    ctx.trajectory = {start};
    ctx.visited.assign(static_cast<std::size_t>(graph.node_count()), 0);
    ctx.visited[static_cast<std::size_t>(start)] = 1;
    ctx.first_visit_ = true;
    return ctx;
  }

  NodeId current() const { return trajectory.back(); }
  NodeId true_goal() const {
    return goals[static_cast<std::size_t>(true_goal_index)];
  }
  bool at_true_goal() const { return current() == true_goal(); }

  // True when the current state does not occur earlier in the trajectory.
  bool current_is_first_visit() const { return first_visit_; }

  void advance(const WeightedGraph& graph, NodeId next) {
    graph.require_node(next, "episode advance");
    if (!graph.edge_weight(current(), next).has_value()) {
      throw InvalidArgumentError("episode advance: target not adjacent");
    }
    first_visit_ = !visited[static_cast<std::size_t>(next)];
    visited[static_cast<std::size_t>(next)] = 1;
    trajectory.push_back(next);
    ++t;
  }

 private:
  bool first_visit_ = true;
};

// Optional attribute scaling; raw units by default.
struct AttributeOptions {
  bool normalized = false;
  double distance_scale = 1.0;  // typically d_c(start, true goal)
  double budget_scale = 1.0;    // typically the initial budget
};

// Per-node policy input: [visited, d_c(node, G*) first then the other goals
// in context order, budget - t]. distance_tables[i] is the full-graph
// shortest-distance table of context.goals[i].
inline std::vector<double> node_attributes(
    const WeightedGraph& graph, const EpisodeContext& context, NodeId node,
    std::span<const std::vector<double>> distance_tables,
    const AttributeOptions& options = {}) {
  graph.require_node(node, "node_attributes");
  if (distance_tables.size() != context.goals.size()) {
    throw InternalError("node_attributes: distance table per goal required");
  }
  for (const auto& table : distance_tables) {
    if (table.size() != static_cast<std::size_t>(graph.node_count())) {
      throw InternalError("node_attributes: distance table has wrong size");
    }
  }
  const double dscale =
      options.normalized ? std::max(options.distance_scale, 1e-12) : 1.0;
  const double bscale =
      options.normalized ? std::max(options.budget_scale, 1e-12) : 1.0;

  std::vector<double> attrs;
  attrs.reserve(context.goals.size() + 2);
  attrs.push_back(context.visited[static_cast<std::size_t>(node)] ? 1.0 : 0.0);
  const auto push_goal = [&](int goal_index) {
    const auto& table = distance_tables[static_cast<std::size_t>(goal_index)];
    attrs.push_back(table[static_cast<std::size_t>(node)] / dscale);
  };
  push_goal(context.true_goal_index);
  for (int i = 0; i < static_cast<int>(context.goals.size()); ++i) {
    if (i != context.true_goal_index) push_goal(i);
  }
  attrs.push_back((context.budget - static_cast<double>(context.t)) / bscale);
  return attrs;
}

}  // namespace dpp
