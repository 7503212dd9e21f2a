#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dpp/gridworld.hpp"
#include "dpp/map_corpus.hpp"
#include "dpp/oracle.hpp"
#include "dpp/trainer.hpp"
#include "test_util.hpp"

namespace dpp {
namespace {

GridWorld map3() {
  return parse_gridworld(builtin_maps().at("open3"), "open3");
}

GridWorld map5() {
  return parse_gridworld(builtin_maps().at("open5"), "open5");
}

PolicyConfig tiny_config(int layers = 1, int hidden = 8) {
  PolicyConfig config;
  config.num_layers = layers;
  config.hidden_dim = hidden;
  config.input_dim = 4;
  return config;
}

EpisodeSpec make_spec(NodeId start, NodeId goal, NodeId decoy, double budget,
                      int graph_index = 0) {
  EpisodeSpec spec;
  spec.graph_index = graph_index;
  spec.start = start;
  spec.goals = {goal, decoy};
  spec.true_goal_index = 0;
  spec.budget = budget;
  return spec;
}

// Unpruned reference search: recursively extends walks exactly as the episode
// rules allow and scores every goal-reaching walk through score_walk. No
// feasibility pruning, no dominance, independent of the production search.
struct Enumerated {
  std::vector<NodeId> path;
  double discounted_return = -std::numeric_limits<double>::infinity();
  bool found = false;
  std::int64_t goal_walks = 0;
};

Enumerated enumerate_goal_walks(WorldCache& cache, const EpisodeSpec& spec,
                                const RewardConfig& reward) {
  const auto& graph = cache.graph(spec.graph_index);
  const NodeId goal =
      spec.goals[static_cast<std::size_t>(spec.true_goal_index)];
  Enumerated best;
  std::vector<NodeId> walk{spec.start};
  const auto visit = [&](auto&& self) -> void {
    if (walk.back() == goal) {
      const auto score = score_walk(cache, spec, reward, walk);
      ++best.goal_walks;
      if (!best.found || score.discounted_return > best.discounted_return ||
          (score.discounted_return == best.discounted_return &&
           walk < best.path)) {
        best.found = true;
        best.discounted_return = score.discounted_return;
        best.path = walk;
      }
      return;
    }
    if (static_cast<double>(walk.size()) >= spec.budget + 1.0) return;
    for (const auto& nb : graph.neighbors(walk.back())) {
      walk.push_back(nb.node);
      self(self);
      walk.pop_back();
    }
  };
  visit(visit);
  return best;
}

void expect_matches_enumeration(WorldCache& cache, const EpisodeSpec& spec,
                                const RewardConfig& reward) {
  const auto expected = enumerate_goal_walks(cache, spec, reward);
  const auto got = brute_force_best_path(cache, spec, reward);
  ASSERT_EQ(got.found, expected.found)
      << "start " << spec.start << " goal " << spec.goals[0] << " budget "
      << spec.budget;
  if (!expected.found) return;
  EXPECT_EQ(got.discounted_return, expected.discounted_return);
  EXPECT_EQ(got.path, expected.path);

  // Self-consistency: replaying the winner reproduces its return bit for bit.
  const auto replay = score_walk(cache, spec, reward, got.path);
  EXPECT_TRUE(replay.reached_goal);
  EXPECT_EQ(replay.discounted_return, got.discounted_return);
}

// --- score_walk ----------------------------------------------------------

TEST(ScoreWalk, RejectsMalformedWalks) {
  const auto world = map3();
  WorldCache cache({world.graph});
  RewardConfig reward;
  const auto spec = make_spec(0, 8, 2, 4);

  const std::vector<NodeId> wrong_start = {1, 2, 5, 8};
  EXPECT_THROW(score_walk(cache, spec, reward, wrong_start),
               InvalidArgumentError);

  const std::vector<NodeId> stops_early = {0, 1};
  EXPECT_THROW(score_walk(cache, spec, reward, stops_early),
               InvalidArgumentError);

  const std::vector<NodeId> past_goal = {0, 1, 2, 5, 8, 7};
  EXPECT_THROW(score_walk(cache, spec, reward, past_goal),
               InvalidArgumentError);

  const std::vector<NodeId> teleports = {0, 8, 7, 6, 3};
  EXPECT_THROW(score_walk(cache, spec, reward, teleports),
               InvalidArgumentError);
}

TEST(ScoreWalk, ReproducesEpisodePipelineOnSampledRollouts) {
  const auto open = map3();
  const auto wall = parse_gridworld(builtin_maps().at("wall5"), "wall5");
  WorldCache cache({open.graph, wall.graph});
  const auto params = init_policy(tiny_config(2), 3);
  Rng rng(41);

  for (int i = 0; i < 30; ++i) {
    RewardConfig reward;
    reward.mode = i % 2 == 0 ? RewardMode::exaggeration : RewardMode::ambiguity;
    const auto spec = sample_episode_spec(cache, rng);
    const auto result = run_episode(cache, spec, params, reward, rng);
    const auto score = score_walk(cache, spec, reward, result.trajectory);

    EXPECT_EQ(score.reached_goal, result.reached_goal);
    EXPECT_EQ(score.discounted_return, result.discounted_return);
    EXPECT_EQ(score.deception_score, result.deception_score);
    ASSERT_EQ(score.rewards.size(), result.rewards.size());
    for (std::size_t k = 0; k < score.rewards.size(); ++k) {
      EXPECT_EQ(score.rewards[k].kind, result.rewards[k].kind);
      EXPECT_EQ(score.rewards[k].value, result.rewards[k].value);
    }
  }
}

// --- brute-force search ---------------------------------------------------

TEST(BruteForce, MatchesExhaustiveEnumerationOnGrids) {
  const auto world = map3();
  WorldCache cache({world.graph});
  const std::vector<std::tuple<NodeId, NodeId, NodeId>> combos = {
      {6, 8, 2}, {0, 8, 4}, {3, 5, 1}};
  for (const auto mode : {RewardMode::exaggeration, RewardMode::ambiguity}) {
    RewardConfig reward;
    reward.mode = mode;
    for (const auto& [start, goal, decoy] : combos) {
      for (const double budget : {4.0, 6.0}) {
        expect_matches_enumeration(cache, make_spec(start, goal, decoy, budget),
                                   reward);
      }
    }
  }
}

TEST(BruteForce, MatchesExhaustiveEnumerationOnWeightedGraphs) {
  Rng rng(77);
  for (int g = 0; g < 6; ++g) {
    const auto graph = testutil::random_connected_graph(rng, 6, 3, false);
    WorldCache cache({graph});
    const auto hops = testutil::bfs_hops(graph, 5);
    const auto spec = make_spec(0, 5, 3, hops[0] + 2.0);
    RewardConfig reward;
    reward.mode = g % 2 == 0 ? RewardMode::exaggeration : RewardMode::ambiguity;
    reward.gamma = 0.9;
    expect_matches_enumeration(cache, spec, reward);
  }
}

TEST(BruteForce, PathGraphWithoutSlackHasUniqueShortestWalk) {
  const std::vector<Edge> line = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}};
  const WeightedGraph path(5, line);
  WorldCache cache({path});
  const std::vector<NodeId> expected = {0, 1, 2, 3, 4};
  for (const auto mode : {RewardMode::exaggeration, RewardMode::ambiguity}) {
    RewardConfig reward;
    reward.mode = mode;
    const auto result = brute_force_best_path(cache, make_spec(0, 4, 2, 4), reward);
    EXPECT_TRUE(result.found);
    EXPECT_EQ(result.path, expected);
    EXPECT_EQ(result.walks_scored, 1);
  }
}

TEST(BruteForce, BudgetCountsMovesNotEdgeWeight) {
  // Two moves of weight 10 each: infeasible by weighted distance, feasible by
  // move count. The budget is a move count.
  const std::vector<Edge> long_hops = {{0, 1, 10.0}, {1, 2, 10.0}};
  const WeightedGraph heavy(3, long_hops);
  WorldCache cache({heavy});
  RewardConfig reward;
  reward.mode = RewardMode::ambiguity;
  const auto result = brute_force_best_path(cache, make_spec(0, 2, 1, 2), reward);
  EXPECT_TRUE(result.found);
  EXPECT_EQ(result.path, (std::vector<NodeId>{0, 1, 2}));
}

TEST(BruteForce, ZeroBonusReducesToShortestPath) {
  const auto world = map5();
  WorldCache cache({world.graph});
  RewardConfig reward;
  const NodeId start = world.node_at(4, 0);
  const NodeId goal = world.node_at(0, 4);
  const auto spec = make_spec(start, goal, world.node_at(0, 0), 12);
  const auto silent = BonusSource::zero(spec.goals, spec.true_goal_index);

  const auto result = brute_force_best_path(cache, spec, reward, &silent);
  ASSERT_TRUE(result.found);
  ASSERT_EQ(result.path.size(), 9u);  // 8 moves on a 5x5 across the diagonal
  const std::vector<NodeId> expected_path = {20, 15, 10, 5, 0, 1, 2, 3, 4};
  EXPECT_EQ(result.path, expected_path);
  double expected_return = 1.0;
  for (int i = 0; i < 8; ++i) expected_return *= reward.gamma;
  EXPECT_EQ(result.discounted_return, expected_return);

  // No slack changes nothing: the shortest walk is already the optimum.
  const auto tight =
      brute_force_best_path(cache, make_spec(start, goal, 0, 8), reward, &silent);
  ASSERT_TRUE(tight.found);
  EXPECT_EQ(tight.path, expected_path);
  EXPECT_EQ(tight.discounted_return, expected_return);
}

TEST(BruteForce, ExaggerationLuresTheOptimumTowardTheDecoy) {
  const auto world = map3();
  WorldCache cache({world.graph});
  RewardConfig reward;
  reward.mode = RewardMode::exaggeration;
  const NodeId start = 6, goal = 8, decoy = 2;

  const auto slack = brute_force_best_path(cache, make_spec(start, goal, decoy, 6), reward);
  ASSERT_TRUE(slack.found);
  const auto direct = shortest_path(world.graph, start, goal);
  const auto& d_decoy = cache.distances_to(0, decoy);
  const auto closest = [&](const std::vector<NodeId>& path) {
    double best = std::numeric_limits<double>::infinity();
    for (NodeId v : path) {
      best = std::min(best, d_decoy[static_cast<std::size_t>(v)]);
    }
    return best;
  };
  EXPECT_LT(closest(slack.path), closest(direct));

  // A larger feasible set can only improve the optimum.
  const auto tight = brute_force_best_path(cache, make_spec(start, goal, decoy, 4), reward);
  ASSERT_TRUE(tight.found);
  EXPECT_GE(slack.discounted_return, tight.discounted_return);
}

TEST(BruteForce, RefusesOversizedInstancesButAcceptsSmallOnes) {
  const auto big = parse_gridworld(builtin_maps().at("train8_open"), "train8_open");
  const auto small = map3();
  WorldCache cache({big.graph, small.graph});
  RewardConfig reward;

  try {
    brute_force_best_path(cache, make_spec(0, 63, 7, 15, 0), reward);
    FAIL() << "expected refusal";
  } catch (const InvalidArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("refused"), std::string::npos);
  }

  // A small graph may take any budget.
  const auto result =
      brute_force_best_path(cache, make_spec(0, 8, 2, 20, 1), reward);
  EXPECT_TRUE(result.found);
}

TEST(BruteForce, UnreachableGoalReportsNothingFound) {
  const std::vector<Edge> halves = {{0, 1, 1.0}, {2, 3, 1.0}};
  const WeightedGraph split(4, halves);
  WorldCache cache({split});
  RewardConfig reward;  // exaggeration: ambiguity would reject the instance
  const auto result = brute_force_best_path(cache, make_spec(0, 2, 1, 6), reward);
  EXPECT_FALSE(result.found);
  EXPECT_EQ(result.walks_scored, 0);
}

TEST(BruteForce, StartOnGoalScoresTheEmptyWalk) {
  const auto world = map3();
  WorldCache cache({world.graph});
  RewardConfig reward;
  const auto result = brute_force_best_path(cache, make_spec(4, 4, 0, 3), reward);
  ASSERT_TRUE(result.found);
  EXPECT_EQ(result.path, std::vector<NodeId>{4});
  EXPECT_EQ(result.discounted_return, reward.goal_reward);
}

// --- shortest path --------------------------------------------------------

TEST(ShortestPath, FollowsExactDistanceDescent) {
  const std::vector<Edge> line = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}};
  const WeightedGraph path(5, line);
  EXPECT_EQ(shortest_path(path, 0, 4), (std::vector<NodeId>{0, 1, 2, 3, 4}));
  EXPECT_EQ(shortest_path(path, 4, 0), (std::vector<NodeId>{4, 3, 2, 1, 0}));
  EXPECT_EQ(shortest_path(path, 2, 2), std::vector<NodeId>{2});

  const auto world = map5();
  const auto route = shortest_path(world.graph, world.node_at(4, 0),
                                   world.node_at(0, 4));
  const std::vector<NodeId> expected = {20, 15, 10, 5, 0, 1, 2, 3, 4};
  EXPECT_EQ(route, expected);
  EXPECT_EQ(shortest_path(world.graph, world.node_at(4, 0), world.node_at(0, 4)),
            route);

  const std::vector<Edge> halves = {{0, 1, 1.0}, {2, 3, 1.0}};
  const WeightedGraph split(4, halves);
  EXPECT_THROW(shortest_path(split, 0, 3), DataError);
}

TEST(ShortestPath, WeightSumMatchesDistanceTable) {
  Rng rng(9);
  for (int g = 0; g < 10; ++g) {
    const auto graph = testutil::random_connected_graph(rng, 12, 6, false);
    const NodeId goal = static_cast<NodeId>(rng.uniform_int(0, 11));
    const NodeId start = static_cast<NodeId>(rng.uniform_int(0, 11));
    const auto dist = shortest_distances(graph, goal);
    const auto route = shortest_path(graph, start, goal);
    ASSERT_EQ(route.front(), start);
    ASSERT_EQ(route.back(), goal);
    double walked = 0.0;
    for (std::size_t i = 1; i < route.size(); ++i) {
      const auto w = graph.edge_weight(route[i - 1], route[i]);
      ASSERT_TRUE(w.has_value());
      walked += *w;
    }
    EXPECT_NEAR(walked, dist[static_cast<std::size_t>(start)], 1e-9);
  }
}

// --- policy evaluation -----------------------------------------------------

TEST(EvaluatePolicy, ReportFieldsStayWithinBounds) {
  const auto world = map5();
  WorldCache cache({world.graph});
  const auto params = init_policy(tiny_config(), 5);
  RewardConfig reward;
  reward.mode = RewardMode::ambiguity;
  Rng rng(13);
  const auto specs = sample_eval_specs(cache, 6, 2.0, rng);

  EvalSettings settings;
  settings.episodes_per_spec = 3;
  const auto report =
      evaluate_policy(cache, specs, params, reward, rng, settings);

  EXPECT_EQ(report.episodes, 18);
  EXPECT_GE(report.goal_rate, 0.0);
  EXPECT_LE(report.goal_rate, 1.0);
  EXPECT_TRUE(std::isfinite(report.mean_deceptiveness));
  EXPECT_TRUE(std::isfinite(report.mean_discounted_return));
  if (report.goal_rate > 0.0) {
    EXPECT_GE(report.mean_path_ratio, 1.0 - 1e-12);
  } else {
    EXPECT_EQ(report.mean_path_ratio, 0.0);
  }

  const nlohmann::json j = report;
  const auto back = j.get<EvalReport>();
  EXPECT_EQ(back.goal_rate, report.goal_rate);
  EXPECT_EQ(back.mean_deceptiveness, report.mean_deceptiveness);
  EXPECT_EQ(back.mean_path_ratio, report.mean_path_ratio);
  EXPECT_EQ(back.mean_discounted_return, report.mean_discounted_return);
  EXPECT_EQ(back.episodes, report.episodes);

  EXPECT_THROW(evaluate_policy(cache, {}, params, reward, rng, settings),
               InvalidArgumentError);
}

TEST(EvaluatePolicy, NoPolicyBeatsTheExhaustiveOptimum) {
  const auto world = map3();
  WorldCache cache({world.graph});
  const auto params = init_policy(tiny_config(), 21);
  Rng rng(55);
  const std::vector<EpisodeSpec> instances = {
      make_spec(6, 8, 2, 4), make_spec(0, 8, 2, 4), make_spec(3, 5, 1, 4),
      make_spec(6, 8, 2, 6)};

  for (const auto mode : {RewardMode::exaggeration, RewardMode::ambiguity}) {
    RewardConfig reward;
    reward.mode = mode;
    for (const auto& spec : instances) {
      const auto best = brute_force_best_path(cache, spec, reward);
      ASSERT_TRUE(best.found);
      EvalSettings settings;
      settings.episodes_per_spec = 16;
      const auto report = evaluate_policy(cache, {&spec, 1}, params, reward,
                                          rng, settings);
      EXPECT_LE(report.mean_discounted_return,
                best.discounted_return + 1e-9);
    }
  }
}

TEST(EvaluatePolicy, ShortestWalkDeceptionBoundedByOptimum) {
  const auto world = map3();
  WorldCache cache({world.graph});
  const std::vector<EpisodeSpec> instances = {
      make_spec(6, 8, 2, 4), make_spec(0, 8, 6, 6), make_spec(0, 8, 4, 4),
      make_spec(2, 6, 4, 6)};
  for (const auto mode : {RewardMode::exaggeration, RewardMode::ambiguity}) {
    RewardConfig reward;
    reward.mode = mode;
    for (const auto& spec : instances) {
      const auto direct =
          shortest_path(world.graph, spec.start, spec.goals[0]);
      const auto walk = score_walk(cache, spec, reward, direct);
      ASSERT_TRUE(walk.reached_goal);
      const auto best = brute_force_best_path(cache, spec, reward);
      ASSERT_TRUE(best.found);
      EXPECT_LE(walk.deception_score, best.discounted_return + 1e-9);
    }
  }
}

TEST(EvaluatePolicy, ExactBudgetForcesUnitPathRatio) {
  const auto world = map3();
  WorldCache cache({world.graph});
  const auto params = init_policy(tiny_config(), 2);
  RewardConfig reward;
  reward.mode = RewardMode::ambiguity;
  Rng rng(3);
  // Budget equal to the shortest distance: every goal-reaching walk is a
  // shortest path, so each counted ratio is exactly 1.
  const std::vector<EpisodeSpec> specs = {make_spec(0, 8, 2, 4),
                                          make_spec(6, 2, 0, 4)};
  EvalSettings settings;
  settings.episodes_per_spec = 32;
  const auto report = evaluate_policy(cache, specs, params, reward, rng, settings);
  if (report.goal_rate > 0.0) {
    EXPECT_DOUBLE_EQ(report.mean_path_ratio, 1.0);
  } else {
    EXPECT_EQ(report.mean_path_ratio, 0.0);
  }
}

}  // namespace
}  // namespace dpp
