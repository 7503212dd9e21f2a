#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dpp/deception.hpp"
#include "dpp/error.hpp"
#include "dpp/graph.hpp"
#include "dpp/policy.hpp"
#include "dpp/rng.hpp"
#include "dpp/voronoi.hpp"

namespace dpp {

inline void to_json(nlohmann::json& j, const Point& p) {
  j = nlohmann::json::array({p.x, p.y});
}

inline void from_json(const nlohmann::json& j, Point& p) {
  if (!j.is_array() || j.size() != 2) {
    throw DataError("point: expected [x, y]");
  }
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Rect, min_x, min_y, max_x, max_y)

// Continuous 2-D world: trees are obstacles, navigation happens along the
// Voronoi ridges between them. Budgets here are distance-denominated; the
// same field that counts steps in discrete worlds carries world units.
struct ForestWorld {
  std::vector<Point> trees;
  Rect bounds;
  Point start;
  Point goal;
  Point decoy;
  double perception_radius = 8.0;
  double goal_capture_radius = 1.0;
  double distance_budget = 0.0;

  void validate() const {
    if (!bounds.valid()) throw DataError("forest: invalid bounds");
    if (trees.size() < 3) throw DataError("forest: needs at least 3 trees");
    for (const Point& t : trees) {
      if (!bounds.contains(t)) throw DataError("forest: tree outside bounds");
    }
    for (const Point* m : {&start, &goal, &decoy}) {
      if (!bounds.contains(*m)) throw DataError("forest: marker outside bounds");
      for (const Point& t : trees) {
        if (euclidean(*m, t) <= 1e-9) throw DataError("forest: marker on a tree");
      }
    }
    if (!(perception_radius > 0.0) || !std::isfinite(perception_radius)) {
      throw DataError("forest: perception radius must be positive");
    }
    if (!(goal_capture_radius > 0.0) || !std::isfinite(goal_capture_radius)) {
      throw DataError("forest: capture radius must be positive");
    }
  }
};

// Mean distance from each tree to its nearest neighbor.
inline double mean_nearest_tree_separation(std::span<const Point> trees) {
  if (trees.size() < 2) {
    throw InvalidArgumentError("tree separation: needs at least 2 trees");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < trees.size(); ++j) {
      if (i != j) best = std::min(best, euclidean(trees[i], trees[j]));
    }
    total += best;
  }
  return total / static_cast<double>(trees.size());
}

inline void to_json(nlohmann::json& j, const ForestWorld& w) {
  j = nlohmann::json{{"trees", w.trees},
                     {"bounds", w.bounds},
                     {"start", w.start},
                     {"goal", w.goal},
                     {"decoy", w.decoy},
                     {"perception_radius", w.perception_radius},
                     {"goal_capture_radius", w.goal_capture_radius},
                     {"distance_budget", w.distance_budget}};
}

inline void from_json(const nlohmann::json& j, ForestWorld& w) {
  j.at("trees").get_to(w.trees);
  j.at("bounds").get_to(w.bounds);
  j.at("start").get_to(w.start);
  j.at("goal").get_to(w.goal);
  j.at("decoy").get_to(w.decoy);
  j.at("perception_radius").get_to(w.perception_radius);
  if (j.contains("goal_capture_radius")) {
    j.at("goal_capture_radius").get_to(w.goal_capture_radius);
  } else {
    w.goal_capture_radius = w.trees.size() >= 2
                                ? 0.5 * mean_nearest_tree_separation(w.trees)
                                : 1.0;
  }
  w.distance_budget = j.value("distance_budget", 0.0);
}

inline void save_forest_world(const ForestWorld& world, const std::string& path) {
  world.validate();
  std::ofstream out(path);
  if (!out) throw DataError("forest: cannot write " + path);
  out << nlohmann::json(world).dump(2) << "\n";
}

inline ForestWorld load_forest_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("forest: cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("forest: " + path + ": " + e.what());
  }
  ForestWorld world;
  try {
    j.get_to(world);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("forest: " + path + ": " + e.what());
  }
  world.validate();
  return world;
}

// Poisson-disk style rejection sampling: uniform candidates, kept only when
// at least min_separation away from every accepted tree. Deterministic per
// seed; saturates (returns fewer trees) when the rectangle is full.
inline std::vector<Point> generate_forest(const Rect& bounds, double density,
                                          double min_separation,
                                          std::uint64_t seed) {
  if (!bounds.valid()) throw InvalidArgumentError("generate_forest: bad bounds");
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw InvalidArgumentError("generate_forest: density must be positive");
  }
  if (!(min_separation > 0.0) || !std::isfinite(min_separation)) {
    throw InvalidArgumentError("generate_forest: separation must be positive");
  }
  const double area = bounds.width() * bounds.height();
  const int target = std::max(1, static_cast<int>(std::llround(density * area)));
  Rng rng(seed);
  std::vector<Point> trees;
  int attempts = 0;
  while (static_cast<int>(trees.size()) < target && attempts < 80 * target) {
    ++attempts;
    const Point p{rng.uniform(bounds.min_x, bounds.max_x),
                  rng.uniform(bounds.min_y, bounds.max_y)};
    const bool blocked =
        std::any_of(trees.begin(), trees.end(), [&](const Point& t) {
          return euclidean(p, t) < min_separation;
        });
    if (!blocked) trees.push_back(p);
  }
  return trees;
}

// Trees plus a canonical marker layout: start at the left edge midline, goal
// at the right edge midline, decoy in the upper right. Trees blocking a
// marker's clearance are removed, so the world invariants hold as built.
inline ForestWorld generate_forest_world(const Rect& bounds, double density,
                                         double min_separation,
                                         std::uint64_t seed) {
  ForestWorld world;
  world.bounds = bounds;
  world.trees = generate_forest(bounds, density, min_separation, seed);
  const double w = bounds.width();
  const double h = bounds.height();
  world.start = {bounds.min_x + 0.06 * w, bounds.min_y + 0.5 * h};
  world.goal = {bounds.max_x - 0.06 * w, bounds.min_y + 0.5 * h};
  world.decoy = {bounds.max_x - 0.06 * w, bounds.min_y + 0.85 * h};
  std::erase_if(world.trees, [&](const Point& t) {
    return euclidean(t, world.start) < min_separation ||
           euclidean(t, world.goal) < min_separation ||
           euclidean(t, world.decoy) < min_separation;
  });
  if (world.trees.size() < 3) {
    throw GeometryError("generate_forest_world: too few trees survive");
  }
  world.perception_radius = 4.0 * min_separation;
  world.goal_capture_radius = 0.5 * mean_nearest_tree_separation(world.trees);
  world.validate();
  return world;
}

// Local Voronoi plan around one position: ridges of the trees inside the
// perception disk, clipped to disk and bounds, with Euclidean goal/decoy
// distances per node. Degraded means there is no usable local graph and the
// caller should step straight toward the goal instead.
struct LocalPlan {
  WeightedGraph graph;
  NodeId agent_node = -1;
  std::vector<double> goal_distance;
  std::vector<double> decoy_distance;
  double mean_edge_length = 0.0;
  bool degraded = false;
};

inline LocalPlan local_planning_graph(const ForestWorld& world,
                                      const Point& position) {
  LocalPlan plan;
  std::vector<Point> in_disk;
  for (const Point& t : world.trees) {
    if (euclidean(t, position) <= world.perception_radius) in_disk.push_back(t);
  }
  if (in_disk.size() < 3) {
    plan.degraded = true;
    return plan;
  }

  WeightedGraph ridges;
  try {
    ridges = voronoi_graph(in_disk, world.bounds, true);
  } catch (const GeometryError&) {
    plan.degraded = true;
    return plan;
  }

  detail::SegmentAccumulator acc;
  for (NodeId u = 0; u < ridges.node_count(); ++u) {
    for (const auto& nb : ridges.neighbors(u)) {
      if (nb.node < u) continue;
      const Point a = ridges.coordinate(u);
      const Point b = ridges.coordinate(nb.node);
      const auto span = detail::clip_parametric_to_disk(
          a, b.x - a.x, b.y - a.y, 0.0, 1.0, position, world.perception_radius);
      if (!span) continue;
      const auto [t0, t1] = *span;
      acc.add_segment({a.x + t0 * (b.x - a.x), a.y + t0 * (b.y - a.y)},
                      {a.x + t1 * (b.x - a.x), a.y + t1 * (b.y - a.y)});
    }
  }
  plan.graph = acc.build();
  if (plan.graph.node_count() == 0 || plan.graph.edge_count() == 0) {
    plan.degraded = true;
    return plan;
  }

  double best = std::numeric_limits<double>::infinity();
  double edge_total = 0.0;
  int edge_count = 0;
  plan.goal_distance.resize(static_cast<std::size_t>(plan.graph.node_count()));
  plan.decoy_distance.resize(static_cast<std::size_t>(plan.graph.node_count()));
  for (NodeId v = 0; v < plan.graph.node_count(); ++v) {
    const Point p = plan.graph.coordinate(v);
    plan.goal_distance[static_cast<std::size_t>(v)] = euclidean(p, world.goal);
    plan.decoy_distance[static_cast<std::size_t>(v)] = euclidean(p, world.decoy);
    const double d = euclidean(p, position);
    if (d < best) {
      best = d;
      plan.agent_node = v;
    }
    for (const auto& nb : plan.graph.neighbors(v)) {
      if (nb.node > v) {
        edge_total += nb.weight;
        ++edge_count;
      }
    }
  }
  plan.mean_edge_length = edge_total / static_cast<double>(edge_count);
  return plan;
}

enum class ForestStepKind { snap, ridge, straight, halt };

// One trajectory record: the state at index t plus the decision leaving it.
// chosen_edge indexes the agent node's neighbor list; -1 when the step was
// not a ridge move (snap, straight-line fallback, or the final record).
struct ForestStep {
  int t = 0;
  Point position;
  double budget_remaining = 0.0;
  int chosen_edge = -1;
  ForestStepKind kind = ForestStepKind::halt;
  bool plan_b_active = false;
};

struct ForestEpisodeResult {
  std::vector<ForestStep> steps;
  std::vector<Point> trajectory;
  double initial_budget = 0.0;
  double path_length = 0.0;
  bool reached_goal = false;
  bool budget_exhausted = false;
};

struct ForestOptions {
  bool greedy = true;
  AttributeOptions attributes;
};

// Runs the discrete policy in the continuous world without fine-tuning. The
// budget starts at the straight start-to-goal distance plus extra_distance
// and every move costs its Euclidean length. Each step rebuilds the local
// plan; when t_switch is set, decisions from that state index on read the
// decoy attribute from plan_b_decoy instead.
inline ForestEpisodeResult run_forest_episode(
    const ForestWorld& world, const PolicyParameters& params,
    const RewardConfig& reward, double extra_distance,
    std::optional<int> t_switch, std::optional<Point> plan_b_decoy, Rng& rng,
    const ForestOptions& options = {}) {
  world.validate();
  params.config.validate();
  if (!(reward.gamma > 0.0) || reward.gamma >= 1.0) {
    throw ConfigError("forest episode: gamma outside (0,1)");
  }
  if (extra_distance < 0.0 || !std::isfinite(extra_distance)) {
    throw InvalidArgumentError("forest episode: bad extra distance");
  }
  if (t_switch.has_value() && *t_switch < 1) {
    throw InvalidArgumentError("forest episode: t_switch starts at 1");
  }

  ForestEpisodeResult result;
  result.initial_budget = euclidean(world.start, world.goal) + extra_distance;

  Point position = world.start;
  double budget = result.initial_budget;
  int t = 1;
  result.trajectory.push_back(position);

  AttributeOptions attr_options = options.attributes;
  if (attr_options.normalized) {
    attr_options.distance_scale =
        std::max(euclidean(world.start, world.goal), 1.0);
    attr_options.budget_scale = std::max(result.initial_budget, 1.0);
  }

  const auto finish_step = [&](ForestStep step) {
    result.steps.push_back(step);
  };
  const auto move_to = [&](const Point& next) {
    const double len = euclidean(position, next);
    budget -= len;
    result.path_length += len;
    position = next;
    ++t;
    result.trajectory.push_back(position);
  };

  const int step_cap = 100000;
  while (true) {
    ForestStep step;
    step.t = t;
    step.position = position;
    step.budget_remaining = budget;

    if (euclidean(position, world.goal) <= world.goal_capture_radius &&
        budget >= -1e-9) {
      result.reached_goal = true;
      finish_step(step);
      break;
    }
    if (budget <= 1e-12 || t > step_cap) {
      result.budget_exhausted = true;
      finish_step(step);
      break;
    }

    const bool plan_b_now =
        t_switch.has_value() && plan_b_decoy.has_value() && t >= *t_switch;
    step.plan_b_active = plan_b_now;
    ForestWorld view = world;
    if (plan_b_now) view.decoy = *plan_b_decoy;

    const LocalPlan plan = local_planning_graph(view, position);
    if (plan.degraded) {
      const double to_goal = euclidean(position, world.goal);
      const double stride = std::min(
          {budget, to_goal, std::max(0.5 * world.perception_radius, 1e-6)});
      step.kind = ForestStepKind::straight;
      finish_step(step);
      move_to({position.x + stride * (world.goal.x - position.x) / to_goal,
               position.y + stride * (world.goal.y - position.y) / to_goal});
      continue;
    }

    const Point anchor = plan.graph.coordinate(plan.agent_node);
    if (euclidean(anchor, position) > 1e-9) {
      step.kind = ForestStepKind::snap;
      finish_step(step);
      move_to(anchor);
      continue;
    }

    const Subgraph view_graph = k_hop_neighborhood(plan.graph, plan.agent_node,
                                                   params.config.num_layers);
    const int agent_local = view_graph.local_of(plan.agent_node);
    if (view_graph.graph.degree(agent_local) == 0) {
      const double to_goal = euclidean(position, world.goal);
      const double stride = std::min(
          {budget, to_goal, std::max(0.5 * world.perception_radius, 1e-6)});
      step.kind = ForestStepKind::straight;
      finish_step(step);
      move_to({position.x + stride * (world.goal.x - position.x) / to_goal,
               position.y + stride * (world.goal.y - position.y) / to_goal});
      continue;
    }

    const double eps = 0.5 * plan.mean_edge_length;
    const double dscale =
        attr_options.normalized ? std::max(attr_options.distance_scale, 1e-12)
                                : 1.0;
    const double bscale =
        attr_options.normalized ? std::max(attr_options.budget_scale, 1e-12)
                                : 1.0;
    std::vector<std::vector<double>> attributes;
    attributes.reserve(view_graph.to_original.size());
    for (NodeId original : view_graph.to_original) {
      const Point p = plan.graph.coordinate(original);
      const bool visited = std::any_of(
          result.trajectory.begin(), result.trajectory.end(),
          [&](const Point& q) { return euclidean(p, q) <= eps; });
      attributes.push_back(
          {visited ? 1.0 : 0.0,
           plan.goal_distance[static_cast<std::size_t>(original)] / dscale,
           plan.decoy_distance[static_cast<std::size_t>(original)] / dscale,
           (budget - plan.mean_edge_length) / bscale});
    }

    const auto trace =
        policy_forward(params, view_graph, attributes, agent_local);
    const ActionChoice choice = options.greedy
                                    ? greedy_action(trace.output)
                                    : sample_action(trace.output, rng);
    const auto neighbors = view_graph.graph.neighbors(agent_local);
    const NodeId next_original = view_graph.original_of(
        neighbors[static_cast<std::size_t>(choice.index)].node);

    step.kind = ForestStepKind::ridge;
    step.chosen_edge = choice.index;
    finish_step(step);
    move_to(plan.graph.coordinate(next_original));
  }

  return result;
}

inline void to_json(nlohmann::json& j, const ForestStep& s) {
  static const char* kinds[] = {"snap", "ridge", "straight", "halt"};
  j = nlohmann::json{{"t", s.t},
                     {"x", s.position.x},
                     {"y", s.position.y},
                     {"budget_remaining", s.budget_remaining},
                     {"chosen_edge", s.chosen_edge},
                     {"kind", kinds[static_cast<int>(s.kind)]},
                     {"plan_b_active", s.plan_b_active}};
}

}  // namespace dpp
