#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dpp/episode.hpp"
#include "json.hpp"

namespace dpp {

// Replays a fixed walk through the exact episode reward pipeline. The walk
// must be a complete episode: it ends on goal arrival or at the timeout
// state and never continues past either.
struct WalkScore {
  std::vector<StepReward> rewards;  // finalized, entry 0 = start state
  bool reached_goal = false;
  double discounted_return = 0.0;
  double deception_score = 0.0;
};

inline WalkScore score_walk(WorldCache& cache, const EpisodeSpec& spec,
                            const RewardConfig& reward,
                            std::span<const NodeId> walk) {
  if (walk.empty() || walk.front() != spec.start) {
    throw InvalidArgumentError("score walk: walk must begin at the start");
  }
  const auto& graph = cache.graph(spec.graph_index);
  auto context = EpisodeContext::begin(graph, spec.start, spec.goals,
                                       spec.true_goal_index, spec.budget);
  const auto bonus = make_bonus_source(cache, spec, reward.mode);

  std::vector<StepReward> tagged;
  tagged.push_back(classify_step(context, reward, bonus.evaluate(context)));
  for (std::size_t i = 1; i < walk.size(); ++i) {
    if (episode_over(context)) {
      throw InvalidArgumentError("score walk: walk continues past episode end");
    }
    context.advance(graph, walk[i]);
    tagged.push_back(classify_step(context, reward, bonus.evaluate(context)));
  }
  if (!episode_over(context)) {
    throw InvalidArgumentError("score walk: walk stops before episode end");
  }

  WalkScore score;
  score.reached_goal = context.at_true_goal();
  score.rewards = finalize_episode(tagged, score.reached_goal);
  for (const StepReward& r : score.rewards) {
    if (r.kind == RewardKind::bonus) score.deception_score += r.value;
  }
  score.discounted_return =
      discounted_return(reward_values(score.rewards), reward.gamma);
  return score;
}

struct OracleResult {
  std::vector<NodeId> path;
  double discounted_return = -std::numeric_limits<double>::infinity();
  bool found = false;
  std::int64_t walks_scored = 0;
};

namespace detail {

struct DominanceKey {
  std::uint64_t mask = 0;
  NodeId node = 0;
  int t = 0;
  bool operator==(const DominanceKey&) const = default;
};

struct DominanceHash {
  std::size_t operator()(const DominanceKey& key) const {
    std::uint64_t h = key.mask * 0x9E3779B97F4A7C15ull;
    h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.node))
          << 32) |
         static_cast<std::uint32_t>(key.t);
    h *= 0xFF51AFD7ED558CCDull;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

// Minimum move count to `target` by breadth-first search; -1 if unreachable.
// The episode budget caps moves, not accumulated edge weight, so search
// feasibility has to count hops.
inline std::vector<int> hop_distances(const WeightedGraph& graph,
                                      NodeId target) {
  std::vector<int> hops(static_cast<std::size_t>(graph.node_count()), -1);
  hops[static_cast<std::size_t>(target)] = 0;
  std::vector<NodeId> frontier{target};
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (const NodeId u : frontier) {
      for (const auto& nb : graph.neighbors(u)) {
        auto& h = hops[static_cast<std::size_t>(nb.node)];
        if (h < 0) {
          h = hops[static_cast<std::size_t>(u)] + 1;
          next.push_back(nb.node);
        }
      }
    }
    frontier = std::move(next);
  }
  return hops;
}

}  // namespace detail

// Exhaustive depth-first enumeration of complete walks from the start that
// reach the true goal within budget, scored exactly as the episode pipeline
// scores them. Revisits are allowed (they earn nothing); descent is pruned
// when the goal is no longer reachable in the remaining moves, and partial
// walks are dominance-pruned on (node, visited set, t) where the visited set
// fits a 64-bit mask. Neighbors are explored in ascending order, so ties on
// the return resolve to the lexicographically lowest walk. A bonus override
// substitutes for the mode's own shaping; with BonusSource::zero the search
// reduces to fewest-moves optimality.
inline OracleResult brute_force_best_path(WorldCache& cache,
                                          const EpisodeSpec& spec,
                                          const RewardConfig& reward,
                                          const BonusSource* bonus_override =
                                              nullptr) {
  const auto& graph = cache.graph(spec.graph_index);
  const int n = graph.node_count();
  if (n > 25 && spec.budget > 14.0) {
    throw InvalidArgumentError(
        "brute force search refused: " + std::to_string(n) +
        " nodes with budget " + std::to_string(spec.budget) +
        " (needs nodes <= 25 or budget <= 14)");
  }
  const NodeId goal = spec.goals[static_cast<std::size_t>(spec.true_goal_index)];
  const auto hops = detail::hop_distances(graph, goal);
  std::optional<BonusSource> own_bonus;
  if (!bonus_override) {
    own_bonus.emplace(make_bonus_source(cache, spec, reward.mode));
  }
  const BonusSource& bonus = bonus_override ? *bonus_override : *own_bonus;
  const double budget = spec.budget;

  OracleResult best;
  const int start_hops = hops[static_cast<std::size_t>(spec.start)];
  if (start_hops < 0 || static_cast<double>(start_hops) > budget + 1e-9) {
    return best;  // goal not reachable in budget: no qualifying walk exists
  }

  std::vector<int> visit_count(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> path{spec.start};
  visit_count[static_cast<std::size_t>(spec.start)] = 1;

  const bool maskable = n <= 64;
  std::unordered_map<detail::DominanceKey, double, detail::DominanceHash> seen;
  std::uint64_t mask =
      maskable ? (std::uint64_t{1} << static_cast<unsigned>(spec.start)) : 0;
  std::int64_t expansions = 0;
  constexpr std::int64_t kExpansionCap = 10'000'000;

  const auto record = [&](double total) {
    ++best.walks_scored;
    if (!best.found || total > best.discounted_return ||
        (total == best.discounted_return && path < best.path)) {
      best.found = true;
      best.discounted_return = total;
      best.path = path;
    }
  };

  // Arrival reward at the start state, exactly as the pipeline orders it.
  const double start_reward =
      spec.start == goal ? reward.goal_reward
                         : bonus.evaluate_at(spec.start, spec.start);
  if (spec.start == goal) {
    record(start_reward);
    return best;
  }

  const auto descend = [&](auto&& self, NodeId u, int t, double total,
                           double scale) -> void {
    const double remaining = budget - static_cast<double>(t - 1);
    if (remaining < 1.0) return;
    if (++expansions > kExpansionCap) {
      throw InvalidArgumentError(
          "brute force search exceeded " + std::to_string(kExpansionCap) +
          " expansions; use a smaller graph or budget");
    }
    for (const auto& nb : graph.neighbors(u)) {
      const NodeId v = nb.node;
      if (v == goal) {
        const double finished = total + scale * reward.goal_reward;
        path.push_back(v);
        record(finished);
        path.pop_back();
        continue;
      }
      const int hv = hops[static_cast<std::size_t>(v)];
      if (hv < 0 || static_cast<double>(hv) > remaining - 1.0 + 1e-9) {
        continue;
      }
      const bool first_visit = visit_count[static_cast<std::size_t>(v)] == 0;
      const double r =
          first_visit ? bonus.evaluate_at(spec.start, v) : 0.0;
      const double new_total = total + scale * r;
      if (maskable) {
        const std::uint64_t new_mask =
            mask | (std::uint64_t{1} << static_cast<unsigned>(v));
        const detail::DominanceKey key{new_mask, v, t + 1};
        const auto it = seen.find(key);
        if (it != seen.end() && new_total <= it->second) continue;
        if (it != seen.end()) {
          it->second = new_total;
        } else {
          seen.emplace(key, new_total);
        }
        const std::uint64_t saved = mask;
        mask = new_mask;
        ++visit_count[static_cast<std::size_t>(v)];
        path.push_back(v);
        self(self, v, t + 1, new_total, scale * reward.gamma);
        path.pop_back();
        --visit_count[static_cast<std::size_t>(v)];
        mask = saved;
      } else {
        ++visit_count[static_cast<std::size_t>(v)];
        path.push_back(v);
        self(self, v, t + 1, new_total, scale * reward.gamma);
        path.pop_back();
        --visit_count[static_cast<std::size_t>(v)];
      }
    }
  };

  descend(descend, spec.start, 1, start_reward, reward.gamma);
  return best;
}

// Dijkstra descent from the start along exact distance equalities; ties break
// to the lowest-index neighbor, so the route is deterministic.
inline std::vector<NodeId> shortest_path(const WeightedGraph& graph,
                                         NodeId start, NodeId goal) {
  graph.require_node(start, "shortest_path");
  graph.require_node(goal, "shortest_path");
  const auto dist = shortest_distances(graph, goal);
  if (dist[static_cast<std::size_t>(start)] >= graph.unreachable_distance()) {
    throw DataError("shortest path: goal unreachable from start");
  }
  std::vector<NodeId> path{start};
  NodeId u = start;
  int guard = 0;
  while (u != goal) {
    if (++guard > graph.node_count()) {
      throw InternalError("shortest path: descent failed to terminate");
    }
    NodeId next = -1;
    for (const auto& nb : graph.neighbors(u)) {
      if (nb.weight + dist[static_cast<std::size_t>(nb.node)] ==
          dist[static_cast<std::size_t>(u)]) {
        next = nb.node;
        break;
      }
    }
    if (next < 0) {
      throw InternalError("shortest path: no descent neighbor");
    }
    path.push_back(next);
    u = next;
  }
  return path;
}

struct EvalReport {
  double goal_rate = 0.0;
  double mean_deceptiveness = 0.0;
  double mean_path_ratio = 0.0;  // goal-reaching episodes only; 0 if none
  double mean_discounted_return = 0.0;
  int episodes = 0;
};

inline void to_json(nlohmann::json& j, const EvalReport& report) {
  j = nlohmann::json{{"goal_rate", report.goal_rate},
                     {"mean_deceptiveness", report.mean_deceptiveness},
                     {"mean_path_ratio", report.mean_path_ratio},
                     {"mean_discounted_return", report.mean_discounted_return},
                     {"episodes", report.episodes}};
}

inline void from_json(const nlohmann::json& j, EvalReport& report) {
  j.at("goal_rate").get_to(report.goal_rate);
  j.at("mean_deceptiveness").get_to(report.mean_deceptiveness);
  j.at("mean_path_ratio").get_to(report.mean_path_ratio);
  j.at("mean_discounted_return").get_to(report.mean_discounted_return);
  j.at("episodes").get_to(report.episodes);
}

struct EvalSettings {
  int episodes_per_spec = 32;
  bool greedy = false;
  AttributeOptions attributes;
};

inline EvalReport evaluate_policy(WorldCache& cache,
                                  std::span<const EpisodeSpec> specs,
                                  const PolicyParameters& params,
                                  const RewardConfig& reward, Rng& rng,
                                  const EvalSettings& settings = {}) {
  if (specs.empty()) {
    throw InvalidArgumentError("evaluate: needs at least one spec");
  }
  if (settings.episodes_per_spec <= 0) {
    throw ConfigError("evaluate: episodes per spec must be positive");
  }
  int reached = 0;
  int ratio_count = 0;
  double deception_sum = 0.0;
  double ratio_sum = 0.0;
  double return_sum = 0.0;
  int total = 0;
  EpisodeOptions options;
  options.greedy = settings.greedy;
  options.attributes = settings.attributes;
  for (const EpisodeSpec& spec : specs) {
    const auto& d_true = cache.distances_to(
        spec.graph_index,
        spec.goals[static_cast<std::size_t>(spec.true_goal_index)]);
    const double shortest = d_true[static_cast<std::size_t>(spec.start)];
    const auto& graph = cache.graph(spec.graph_index);
    for (int e = 0; e < settings.episodes_per_spec; ++e) {
      const auto result =
          run_episode(cache, spec, params, reward, rng, options);
      ++total;
      return_sum += result.discounted_return;
      deception_sum += result.deception_score;
      if (result.reached_goal) {
        ++reached;
        double walked = 0.0;
        for (std::size_t i = 1; i < result.trajectory.size(); ++i) {
          walked += graph
                        .edge_weight(result.trajectory[i - 1],
                                     result.trajectory[i])
                        .value();
        }
        ratio_sum += shortest > 0.0 ? walked / shortest : 1.0;
        ++ratio_count;
      }
    }
  }
  EvalReport report;
  report.episodes = total;
  report.goal_rate = static_cast<double>(reached) / total;
  report.mean_deceptiveness = deception_sum / total;
  report.mean_path_ratio = ratio_count > 0 ? ratio_sum / ratio_count : 0.0;
  report.mean_discounted_return = return_sum / total;
  return report;
}

}  // namespace dpp
