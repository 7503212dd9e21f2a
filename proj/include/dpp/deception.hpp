#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dpp/error.hpp"
#include "dpp/graph.hpp"
#include "dpp/observer.hpp"

namespace dpp {

enum class RewardMode { exaggeration, ambiguity };

struct RewardConfig {
  RewardMode mode = RewardMode::exaggeration;
  double gamma = 0.99;
  double goal_reward = 1.0;
  double timeout_penalty = -1.0;
};

// How much more likely the observer finds the best decoy than the true goal.
inline double exaggeration_bonus(std::span<const double> posterior,
                                 int true_goal_index) {
  if (posterior.size() < 2) {
    throw ConfigError("exaggeration bonus: needs at least two goals");
  }
  if (true_goal_index < 0 ||
      true_goal_index >= static_cast<int>(posterior.size())) {
    throw InvalidArgumentError("exaggeration bonus: bad true-goal index");
  }
  double best_decoy = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    if (static_cast<int>(i) != true_goal_index) {
      best_decoy = std::max(best_decoy, posterior[i]);
    }
  }
  return best_decoy - posterior[static_cast<std::size_t>(true_goal_index)];
}

// Proximity parity with each decoy: 1 when the node is equidistant from the
// decoy and the true goal, falling to 0 when the gap reaches the
// decoy-to-goal distance. Summed over decoys; each term clamped to [0, 1]
// (the clamp only matters on disconnected inputs).
inline double ambiguity_bonus(
    const WeightedGraph& graph,
    std::span<const std::vector<double>> distance_tables,
    std::span<const NodeId> goals, int true_goal_index, NodeId node) {
  graph.require_node(node, "ambiguity_bonus");
  if (goals.size() < 2) {
    throw ConfigError("ambiguity bonus: needs at least two goals");
  }
  if (distance_tables.size() != goals.size()) {
    throw InternalError("ambiguity bonus: distance table per goal required");
  }
  if (true_goal_index < 0 || true_goal_index >= static_cast<int>(goals.size())) {
    throw InvalidArgumentError("ambiguity bonus: bad true-goal index");
  }
  const auto& true_table =
      distance_tables[static_cast<std::size_t>(true_goal_index)];
  const double d_true = true_table[static_cast<std::size_t>(node)];

  double bonus = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (static_cast<int>(i) == true_goal_index) continue;
    const double separation =
        true_table[static_cast<std::size_t>(goals[i])];
    if (separation <= 0.0 || separation >= graph.unreachable_distance()) {
      throw ConfigError(
          "ambiguity bonus: decoy co-located with or unreachable from the "
          "true goal");
    }
    const double d_decoy =
        distance_tables[i][static_cast<std::size_t>(node)];
    const double term = 1.0 - std::abs(d_decoy - d_true) / separation;
    bonus += std::clamp(term, 0.0, 1.0);
  }
  return bonus;
}

// Total pairwise posterior disagreement (ordered pairs); 0 iff uniform.
inline double classical_ambiguity(std::span<const double> posterior) {
  double total = 0.0;
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    for (std::size_t j = 0; j < posterior.size(); ++j) {
      total += std::abs(posterior[i] - posterior[j]);
    }
  }
  return total;
}

// 1 + Pr(G*) - max decoy probability, in [0, 2]; small means the observer
// leans toward a decoy. The trainer's bonus equals 1 minus this.
inline double classical_exaggeration(std::span<const double> posterior,
                                     int true_goal_index) {
  if (posterior.size() < 2) {
    throw ConfigError("classical exaggeration: needs at least two goals");
  }
  if (true_goal_index < 0 ||
      true_goal_index >= static_cast<int>(posterior.size())) {
    throw InvalidArgumentError("classical exaggeration: bad true-goal index");
  }
  double best_decoy = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    if (static_cast<int>(i) != true_goal_index) {
      best_decoy = std::max(best_decoy, posterior[i]);
    }
  }
  return 1.0 + posterior[static_cast<std::size_t>(true_goal_index)] - best_decoy;
}

// Rewards are tagged so retroactive nullification can identify bonus entries
// exactly, even when a bonus numerically equals the timeout penalty.
enum class RewardKind { timeout, goal, bonus, none };

struct StepReward {
  RewardKind kind = RewardKind::none;
  double value = 0.0;
};

// Reward on arrival at the current state. `t` counts states (1 at the start),
// so a walk of T_max moves ends at state index T_max + 1: reaching the goal
// there still counts, the timeout fires there otherwise, and episodes never
// run deeper.
inline StepReward classify_step(const EpisodeContext& context,
                                const RewardConfig& config, double bonus) {
  const double last_state = context.budget + 1.0;
  if (static_cast<double>(context.t) > last_state) {
    return {RewardKind::timeout, config.timeout_penalty};
  }
  if (context.at_true_goal()) {
    return {RewardKind::goal, config.goal_reward};
  }
  if (static_cast<double>(context.t) >= last_state) {
    return {RewardKind::timeout, config.timeout_penalty};
  }
  if (context.current_is_first_visit()) {
    return {RewardKind::bonus, bonus};
  }
  return {RewardKind::none, 0.0};
}

inline double step_reward(const EpisodeContext& context,
                          const RewardConfig& config, double bonus) {
  return classify_step(context, config, bonus).value;
}

inline bool episode_over(const EpisodeContext& context) {
  return context.at_true_goal() ||
         static_cast<double>(context.t) >= context.budget + 1.0;
}

// Zeroes every bonus entry when the goal was missed; exact by construction.
inline std::vector<StepReward> finalize_episode(
    std::span<const StepReward> rewards, bool reached_goal) {
  std::vector<StepReward> out(rewards.begin(), rewards.end());
  if (!reached_goal) {
    for (StepReward& r : out) {
      if (r.kind == RewardKind::bonus) r.value = 0.0;
    }
  }
  return out;
}

// Plain-sequence form. In a terminated episode every entry before the last is
// a first-visit bonus or 0 (a goal or timeout entry always ends the episode),
// so nullification is positional: zero all but the final entry.
inline std::vector<double> finalize_episode(std::span<const double> rewards,
                                            bool reached_goal) {
  std::vector<double> out(rewards.begin(), rewards.end());
  if (!reached_goal && !out.empty()) {
    std::fill(out.begin(), out.end() - 1, 0.0);
  }
  return out;
}

inline std::vector<double> reward_values(std::span<const StepReward> rewards) {
  std::vector<double> out;
  out.reserve(rewards.size());
  for (const StepReward& r : rewards) out.push_back(r.value);
  return out;
}

inline double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double scale = 1.0;
  for (double r : rewards) {
    total += scale * r;
    scale *= gamma;
  }
  return total;
}

enum class DeceptionMetric { classical_ambiguity, proposed_ambiguity, exaggeration };

// Evaluates the metric at every node; posterior-based metrics observe a
// hypothetical agent that started at `start` and now stands at the node.
inline std::vector<double> metric_heatmap(const WeightedGraph& graph,
                                          NodeId start,
                                          std::span<const NodeId> goals,
                                          int true_goal_index,
                                          DeceptionMetric metric,
                                          const ObserverConfig& observer = {}) {
  graph.require_node(start, "metric_heatmap");
  if (goals.size() < 2) {
    throw ConfigError("metric_heatmap: needs at least two goals");
  }
  for (NodeId g : goals) graph.require_node(g, "metric_heatmap");
  if (true_goal_index < 0 || true_goal_index >= static_cast<int>(goals.size())) {
    throw InvalidArgumentError("metric_heatmap: bad true-goal index");
  }

  const auto n = static_cast<std::size_t>(graph.node_count());
  std::vector<double> out(n, 0.0);
  if (metric == DeceptionMetric::proposed_ambiguity) {
    std::vector<std::vector<double>> tables;
    tables.reserve(goals.size());
    for (NodeId g : goals) tables.push_back(shortest_distances(graph, g));
    for (std::size_t v = 0; v < n; ++v) {
      out[v] = ambiguity_bonus(graph, tables, goals, true_goal_index,
                               static_cast<NodeId>(v));
    }
    return out;
  }

  const auto tables = build_observer(
      graph, std::vector<NodeId>(goals.begin(), goals.end()), observer);
  for (std::size_t v = 0; v < n; ++v) {
    const auto post = tables.posterior(start, static_cast<NodeId>(v));
    out[v] = metric == DeceptionMetric::classical_ambiguity
                 ? classical_ambiguity(post)
                 : exaggeration_bonus(post, true_goal_index);
  }
  return out;
}

}  // namespace dpp
