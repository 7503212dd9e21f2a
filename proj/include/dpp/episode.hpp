#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "dpp/deception.hpp"
#include "dpp/graph.hpp"
#include "dpp/observer.hpp"
#include "dpp/policy.hpp"
#include "dpp/rng.hpp"

namespace dpp {

struct EpisodeSpec {
  int graph_index = 0;
  NodeId start = 0;
  std::vector<NodeId> goals;  // true goal included
  int true_goal_index = 0;
  double budget = 0.0;
};

// Owns the worlds plus every expensive per-world artifact: shortest-distance
// tables, observer value tables, and k-hop views. Reward evaluation inside an
// episode never re-runs value iteration; the build counters make that
// assertable.
class WorldCache {
 public:
  explicit WorldCache(std::vector<WeightedGraph> graphs,
                      ObserverConfig observer_config = {})
      : graphs_(std::move(graphs)), observer_config_(observer_config) {
    if (graphs_.empty()) throw ConfigError("world cache: no graphs");
    state_.resize(graphs_.size());
  }

  int graph_count() const { return static_cast<int>(graphs_.size()); }

  const WeightedGraph& graph(int index) const {
    check_index(index);
    return graphs_[static_cast<std::size_t>(index)];
  }

  const ObserverConfig& observer_config() const { return observer_config_; }

  const std::vector<double>& distances_to(int graph_index, NodeId goal) {
    auto& per = state_at(graph_index);
    auto it = per.distances.find(goal);
    if (it == per.distances.end()) {
      ++distance_builds_;
      it = per.distances
               .emplace(goal, shortest_distances(graph(graph_index), goal))
               .first;
    }
    return it->second;
  }

  // Distance tables for a goal list, in list order.
  std::vector<std::vector<double>> distance_tables(
      int graph_index, std::span<const NodeId> goals) {
    std::vector<std::vector<double>> out;
    out.reserve(goals.size());
    for (NodeId g : goals) out.push_back(distances_to(graph_index, g));
    return out;
  }

  // Assembled from per-goal cached value tables with uniform priors;
  // identical to build_observer on the same inputs.
  ObserverTables observer(int graph_index, std::span<const NodeId> goals) {
    ObserverTables tables;
    tables.goals.assign(goals.begin(), goals.end());
    tables.values.reserve(goals.size());
    for (NodeId g : goals) tables.values.push_back(value_table(graph_index, g));
    tables.priors.assign(goals.size(), 1.0 / static_cast<double>(goals.size()));
    tables.config = observer_config_;
    return tables;
  }

  std::shared_ptr<const Subgraph> neighborhood(int graph_index, NodeId node,
                                               int radius) {
    auto& per = state_at(graph_index);
    const auto key = std::make_pair(node, radius);
    auto it = per.views.find(key);
    if (it == per.views.end()) {
      ++subgraph_builds_;
      it = per.views
               .emplace(key, std::make_shared<const Subgraph>(
                                 k_hop_neighborhood(graph(graph_index), node,
                                                    radius)))
               .first;
    }
    return it->second;
  }

  std::int64_t value_iteration_builds() const { return value_builds_; }
  std::int64_t distance_builds() const { return distance_builds_; }
  std::int64_t subgraph_builds() const { return subgraph_builds_; }

 private:
  struct PerGraph {
    std::map<NodeId, std::vector<double>> distances;
    std::map<NodeId, std::vector<double>> values;
    std::map<std::pair<NodeId, int>, std::shared_ptr<const Subgraph>> views;
  };

  void check_index(int index) const {
    if (index < 0 || index >= graph_count()) {
      throw InvalidArgumentError("world cache: graph index out of range");
    }
  }

  PerGraph& state_at(int index) {
    check_index(index);
    return state_[static_cast<std::size_t>(index)];
  }

  const std::vector<double>& value_table(int graph_index, NodeId goal) {
    auto& per = state_at(graph_index);
    auto it = per.values.find(goal);
    if (it == per.values.end()) {
      ++value_builds_;
      it = per.values
               .emplace(goal, softmax_value_iteration(graph(graph_index), goal,
                                                      observer_config_))
               .first;
    }
    return it->second;
  }

  std::vector<WeightedGraph> graphs_;
  ObserverConfig observer_config_;
  std::vector<PerGraph> state_;
  std::int64_t value_builds_ = 0;
  std::int64_t distance_builds_ = 0;
  std::int64_t subgraph_builds_ = 0;
};

// Mode-dependent bonus evaluator: exaggeration scores the observer posterior
// at the current state, ambiguity needs only distance tables, and the zero
// source silences shaping entirely. The goal list and true-goal index are
// fixed at construction so scoring needs only (start, current).
class BonusSource {
 public:
  static BonusSource exaggeration(ObserverTables tables, int true_goal_index) {
    BonusSource source;
    source.kind_ = Kind::exaggeration;
    source.goals_ = tables.goals;
    source.true_goal_index_ = true_goal_index;
    source.tables_ = std::move(tables);
    return source;
  }

  static BonusSource ambiguity(const WeightedGraph& graph,
                               std::vector<std::vector<double>> tables,
                               std::vector<NodeId> goals,
                               int true_goal_index) {
    BonusSource source;
    source.kind_ = Kind::ambiguity;
    source.goals_ = std::move(goals);
    source.true_goal_index_ = true_goal_index;
    source.graph_ = &graph;
    source.distance_tables_ = std::move(tables);
    return source;
  }

  static BonusSource zero(std::vector<NodeId> goals, int true_goal_index) {
    BonusSource source;
    source.kind_ = Kind::zero;
    source.goals_ = std::move(goals);
    source.true_goal_index_ = true_goal_index;
    return source;
  }

  double evaluate_at(NodeId start, NodeId current) const {
    switch (kind_) {
      case Kind::exaggeration:
        return exaggeration_bonus(tables_.posterior(start, current),
                                  true_goal_index_);
      case Kind::ambiguity:
        return ambiguity_bonus(*graph_, distance_tables_, goals_,
                               true_goal_index_, current);
      case Kind::zero:
        return 0.0;
    }
    throw InternalError("bonus source: unknown kind");
  }

  double evaluate(const EpisodeContext& context) const {
    if (context.goals != goals_ ||
        context.true_goal_index != true_goal_index_) {
      throw InternalError("bonus source: goals do not match episode");
    }
    return evaluate_at(context.start, context.current());
  }

 private:
  enum class Kind { exaggeration, ambiguity, zero };

  Kind kind_ = Kind::zero;
  std::vector<NodeId> goals_;
  int true_goal_index_ = 0;
  ObserverTables tables_;
  const WeightedGraph* graph_ = nullptr;
  std::vector<std::vector<double>> distance_tables_;
};

inline BonusSource make_bonus_source(WorldCache& cache,
                                     const EpisodeSpec& spec,
                                     RewardMode mode) {
  if (mode == RewardMode::exaggeration) {
    return BonusSource::exaggeration(
        cache.observer(spec.graph_index, spec.goals), spec.true_goal_index);
  }
  return BonusSource::ambiguity(
      cache.graph(spec.graph_index),
      cache.distance_tables(spec.graph_index, spec.goals), spec.goals,
      spec.true_goal_index);
}

// What the policy sees at one step: the k-hop view around the agent plus the
// per-node attribute vectors, in the view's local node order.
struct Observation {
  std::shared_ptr<const Subgraph> view;
  std::vector<std::vector<double>> attributes;
  int agent_local = -1;
};

inline Observation observe(WorldCache& cache, int graph_index,
                           const EpisodeContext& context,
                           std::span<const std::vector<double>> distance_tables,
                           int radius, const AttributeOptions& options = {}) {
  Observation obs;
  obs.view = cache.neighborhood(graph_index, context.current(), radius);
  obs.agent_local = obs.view->local_of(context.current());
  const auto& graph = cache.graph(graph_index);
  obs.attributes.reserve(obs.view->to_original.size());
  for (NodeId original : obs.view->to_original) {
    obs.attributes.push_back(
        node_attributes(graph, context, original, distance_tables, options));
  }
  return obs;
}

struct Transition {
  Observation observation;
  int action_index = -1;  // index into the agent's local neighbor list
  double log_prob = 0.0;
  double value = 0.0;     // critic output at the observed state
  double reward = 0.0;    // finalized reward earned on arrival
  RewardKind reward_kind = RewardKind::none;
  bool done = false;
};

struct EpisodeResult {
  std::vector<Transition> transitions;
  std::vector<StepReward> rewards;  // per state, entry 0 = start; finalized
  std::vector<NodeId> trajectory;
  bool reached_goal = false;
  double deception_score = 0.0;      // sum of finalized bonus entries
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
};

struct EpisodeOptions {
  bool greedy = false;
  AttributeOptions attributes;
};

// Rolls one episode. The perception radius equals the policy depth, the
// start-state reward lands in `rewards` but not in `transitions` (no action
// produced it), and bonuses are retroactively nullified on failure.
inline EpisodeResult run_episode(WorldCache& cache, const EpisodeSpec& spec,
                                 const PolicyParameters& params,
                                 const RewardConfig& reward, Rng& rng,
                                 const EpisodeOptions& options = {}) {
  const auto& graph = cache.graph(spec.graph_index);
  auto context = EpisodeContext::begin(graph, spec.start, spec.goals,
                                       spec.true_goal_index, spec.budget);
  const auto distance_tables =
      cache.distance_tables(spec.graph_index, context.goals);
  const auto bonus = make_bonus_source(cache, spec, reward.mode);
  const int radius = params.config.num_layers;
  AttributeOptions attr_options = options.attributes;
  if (attr_options.normalized) {
    const auto& d_true =
        distance_tables[static_cast<std::size_t>(spec.true_goal_index)];
    attr_options.distance_scale =
        std::max(d_true[static_cast<std::size_t>(spec.start)], 1.0);
    attr_options.budget_scale = std::max(spec.budget, 1.0);
  }

  std::vector<StepReward> tagged;
  tagged.push_back(classify_step(context, reward, bonus.evaluate(context)));

  EpisodeResult result;
  while (!episode_over(context)) {
    Observation obs = observe(cache, spec.graph_index, context,
                              distance_tables, radius, attr_options);
    const auto trace =
        policy_forward(params, *obs.view, obs.attributes, obs.agent_local);
    const ActionChoice choice = options.greedy
                                    ? greedy_action(trace.output)
                                    : sample_action(trace.output, rng);
    const auto neighbors = obs.view->graph.neighbors(obs.agent_local);
    const NodeId next =
        obs.view->original_of(neighbors[static_cast<std::size_t>(choice.index)].node);
    context.advance(graph, next);
    tagged.push_back(classify_step(context, reward, bonus.evaluate(context)));

    Transition transition;
    transition.observation = std::move(obs);
    transition.action_index = choice.index;
    transition.log_prob = choice.log_prob;
    transition.value = trace.output.value;
    transition.reward = tagged.back().value;
    transition.reward_kind = tagged.back().kind;
    transition.done = episode_over(context);
    result.transitions.push_back(std::move(transition));
  }

  result.reached_goal = context.at_true_goal();
  result.rewards = finalize_episode(tagged, result.reached_goal);
  for (std::size_t i = 0; i < result.transitions.size(); ++i) {
    result.transitions[i].reward = result.rewards[i + 1].value;
    result.transitions[i].reward_kind = result.rewards[i + 1].kind;
  }
  for (const StepReward& r : result.rewards) {
    if (r.kind == RewardKind::bonus) result.deception_score += r.value;
  }
  const auto values = reward_values(result.rewards);
  for (double v : values) result.undiscounted_return += v;
  result.discounted_return = discounted_return(values, reward.gamma);
  result.trajectory = std::move(context.trajectory);
  return result;
}

}  // namespace dpp
