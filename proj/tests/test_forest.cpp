#include "dpp/forest.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dpp/policy.hpp"
#include "dpp/rng.hpp"
#include "test_util.hpp"

namespace dpp {
namespace {

const Rect kBounds{0.0, 0.0, 30.0, 20.0};

ForestWorld small_world(std::uint64_t seed) {
  return generate_forest_world(kBounds, 0.1, 1.6, seed);
}

PolicyParameters tiny_policy(std::uint64_t seed) {
  PolicyConfig config;
  config.num_layers = 2;
  config.hidden_dim = 8;
  config.input_dim = 4;
  return init_policy(config, seed);
}

bool same_point(const Point& a, const Point& b, double tol = 1e-9) {
  return euclidean(a, b) <= tol;
}

TEST(GenerateForest, DeterministicSeparatedAndSaturating) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto trees = generate_forest(kBounds, 0.1, 1.6, seed);
    EXPECT_GE(trees.size(), 40u);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      EXPECT_TRUE(kBounds.contains(trees[i]));
      for (std::size_t j = i + 1; j < trees.size(); ++j) {
        EXPECT_GE(euclidean(trees[i], trees[j]), 1.6);
      }
    }
  }

  const auto a = generate_forest(kBounds, 0.1, 1.6, 7);
  const auto b = generate_forest(kBounds, 0.1, 1.6, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
  }

  const auto sparse = generate_forest(kBounds, 0.1, 2.0 * kBounds.diagonal(), 3);
  EXPECT_LE(sparse.size(), 1u);

  EXPECT_THROW(generate_forest(kBounds, -1.0, 1.0, 0), InvalidArgumentError);
  EXPECT_THROW(generate_forest(kBounds, 0.1, 0.0, 0), InvalidArgumentError);
}

TEST(ForestWorld, GeneratorKeepsMarkersClearAndValid) {
  const auto world = small_world(5);
  EXPECT_GE(world.trees.size(), 3u);
  for (const Point& t : world.trees) {
    EXPECT_GE(euclidean(t, world.start), 1.6);
    EXPECT_GE(euclidean(t, world.goal), 1.6);
    EXPECT_GE(euclidean(t, world.decoy), 1.6);
  }
  EXPECT_DOUBLE_EQ(world.perception_radius, 6.4);
  EXPECT_NEAR(world.goal_capture_radius,
              0.5 * mean_nearest_tree_separation(world.trees), 1e-12);
  EXPECT_NO_THROW(world.validate());
}

TEST(ForestWorld, JsonRoundTripAndDerivedCaptureRadius) {
  testutil::TempDir dir("forest_json");
  const auto world = small_world(11);
  const std::string path = (dir.path() / "world.json").string();
  save_forest_world(world, path);
  const auto loaded = load_forest_world(path);

  ASSERT_EQ(loaded.trees.size(), world.trees.size());
  for (std::size_t i = 0; i < world.trees.size(); ++i) {
    EXPECT_EQ(loaded.trees[i].x, world.trees[i].x);
    EXPECT_EQ(loaded.trees[i].y, world.trees[i].y);
  }
  EXPECT_EQ(loaded.start.x, world.start.x);
  EXPECT_EQ(loaded.goal.y, world.goal.y);
  EXPECT_EQ(loaded.decoy.x, world.decoy.x);
  EXPECT_EQ(loaded.perception_radius, world.perception_radius);
  EXPECT_EQ(loaded.goal_capture_radius, world.goal_capture_radius);
  EXPECT_EQ(loaded.bounds.max_x, world.bounds.max_x);

  nlohmann::json j = world;
  j.erase("goal_capture_radius");
  const std::string bare = (dir.path() / "bare.json").string();
  {
    std::ofstream out(bare);
    out << j.dump(2);
  }
  const auto derived = load_forest_world(bare);
  EXPECT_NEAR(derived.goal_capture_radius,
              0.5 * mean_nearest_tree_separation(world.trees), 1e-12);

  const std::string broken = (dir.path() / "broken.json").string();
  {
    std::ofstream out(broken);
    out << "{\"trees\": 3}";
  }
  EXPECT_THROW(load_forest_world(broken), DataError);
  EXPECT_THROW(load_forest_world((dir.path() / "missing.json").string()),
               DataError);

  j = world;
  j["start"] = nlohmann::json::array({-100.0, 0.0});
  const std::string outside = (dir.path() / "outside.json").string();
  {
    std::ofstream out(outside);
    out << j.dump(2);
  }
  EXPECT_THROW(load_forest_world(outside), DataError);
}

TEST(LocalPlanningGraph, FullVisibilityMatchesGlobalGraph) {
  auto world = small_world(21);
  world.perception_radius = kBounds.diagonal() + 1.0;
  const Point position{12.0, 11.0};

  const auto plan = local_planning_graph(world, position);
  ASSERT_FALSE(plan.degraded);
  const auto global = voronoi_graph(world.trees, world.bounds, true);

  ASSERT_EQ(plan.graph.node_count(), global.node_count());
  for (NodeId v = 0; v < global.node_count(); ++v) {
    bool found = false;
    for (NodeId u = 0; u < plan.graph.node_count() && !found; ++u) {
      found = same_point(plan.graph.coordinate(u), global.coordinate(v));
    }
    EXPECT_TRUE(found);
  }
  EXPECT_EQ(plan.graph.edge_count(), global.edge_count());
}

TEST(LocalPlanningGraph, NearestAgentDistancesAndDiskContainment) {
  const auto world = small_world(22);
  Rng rng(4);
  for (int trial = 0; trial < 12; ++trial) {
    const Point position{rng.uniform(5.0, 25.0), rng.uniform(5.0, 15.0)};
    const auto plan = local_planning_graph(world, position);
    if (plan.degraded) continue;

    double best = std::numeric_limits<double>::infinity();
    for (NodeId v = 0; v < plan.graph.node_count(); ++v) {
      const Point p = plan.graph.coordinate(v);
      EXPECT_LE(euclidean(p, position), world.perception_radius + 1e-9);
      EXPECT_DOUBLE_EQ(plan.goal_distance[static_cast<std::size_t>(v)],
                       euclidean(p, world.goal));
      EXPECT_DOUBLE_EQ(plan.decoy_distance[static_cast<std::size_t>(v)],
                       euclidean(p, world.decoy));
      best = std::min(best, euclidean(p, position));
    }
    ASSERT_GE(plan.agent_node, 0);
    EXPECT_DOUBLE_EQ(
        euclidean(plan.graph.coordinate(plan.agent_node), position), best);
    EXPECT_GT(plan.mean_edge_length, 0.0);
  }
}

TEST(LocalPlanningGraph, DegradesWithoutUsableLocalGeometry) {
  ForestWorld world;
  world.bounds = kBounds;
  world.trees = {{10.0, 10.0}, {12.0, 10.0}, {14.0, 10.0}};
  world.start = {2.0, 10.0};
  world.goal = {28.0, 10.0};
  world.decoy = {28.0, 17.0};
  world.perception_radius = 5.0;
  world.goal_capture_radius = 1.0;
  world.validate();

  EXPECT_TRUE(local_planning_graph(world, {12.0, 10.5}).degraded);

  world.perception_radius = 1.0;
  EXPECT_TRUE(local_planning_graph(world, {2.0, 2.0}).degraded);

  world.perception_radius = 2.5;
  EXPECT_TRUE(local_planning_graph(world, {11.0, 10.2}).degraded);
}

TEST(RunForestEpisode, BudgetTracksStepLengthsExactly) {
  const auto world = small_world(31);
  const auto params = tiny_policy(9);
  Rng rng(17);
  const auto result = run_forest_episode(world, params, RewardConfig{}, 12.0,
                                         std::nullopt, std::nullopt, rng);

  ASSERT_GE(result.steps.size(), 2u);
  ASSERT_EQ(result.steps.size(), result.trajectory.size());
  EXPECT_DOUBLE_EQ(result.initial_budget,
                   euclidean(world.start, world.goal) + 12.0);
  EXPECT_EQ(result.steps.front().t, 1);
  EXPECT_DOUBLE_EQ(result.steps.front().budget_remaining,
                   result.initial_budget);
  EXPECT_EQ(result.steps.back().kind, ForestStepKind::halt);
  EXPECT_EQ(result.steps.back().chosen_edge, -1);
  EXPECT_NE(result.reached_goal, result.budget_exhausted);

  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < result.steps.size(); ++i) {
    const double len =
        euclidean(result.trajectory[i], result.trajectory[i + 1]);
    EXPECT_GT(len, 0.0);
    walked += len;
    EXPECT_DOUBLE_EQ(result.steps[i + 1].budget_remaining,
                     result.steps[i].budget_remaining - len);
    EXPECT_EQ(result.steps[i].t + 1, result.steps[i + 1].t);
    EXPECT_EQ(result.steps[i].position.x, result.trajectory[i].x);
    EXPECT_EQ(result.steps[i].position.y, result.trajectory[i].y);
  }
  EXPECT_DOUBLE_EQ(result.path_length, walked);

  if (result.reached_goal) {
    EXPECT_LE(euclidean(result.trajectory.back(), world.goal),
              world.goal_capture_radius);
  } else {
    EXPECT_LE(result.steps.back().budget_remaining, 1e-12);
  }
}

TEST(RunForestEpisode, RidgeMovesReplayOnTheLocalPlan) {
  const auto world = small_world(32);
  const auto params = tiny_policy(10);
  Rng rng(18);
  const auto result = run_forest_episode(world, params, RewardConfig{}, 15.0,
                                         std::nullopt, std::nullopt, rng);

  int ridge_steps = 0;
  for (std::size_t i = 0; i + 1 < result.steps.size(); ++i) {
    const ForestStep& step = result.steps[i];
    const Point next = result.trajectory[i + 1];
    const auto plan = local_planning_graph(world, step.position);

    if (step.kind == ForestStepKind::snap) {
      ASSERT_FALSE(plan.degraded);
      EXPECT_TRUE(same_point(plan.graph.coordinate(plan.agent_node), next,
                             1e-12));
      continue;
    }
    if (step.kind != ForestStepKind::ridge) continue;
    ++ridge_steps;
    ASSERT_FALSE(plan.degraded);
    EXPECT_TRUE(same_point(plan.graph.coordinate(plan.agent_node),
                           step.position, 1e-9));
    bool adjacent = false;
    for (const auto& nb : plan.graph.neighbors(plan.agent_node)) {
      if (same_point(plan.graph.coordinate(nb.node), next, 1e-12)) {
        adjacent = true;
        EXPECT_NEAR(nb.weight, euclidean(step.position, next), 1e-9);
      }
    }
    EXPECT_TRUE(adjacent) << "step " << i << " left the ridge graph";
    EXPECT_GE(step.chosen_edge, 0);
  }
  EXPECT_GT(ridge_steps, 0);
}

TEST(RunForestEpisode, DeterministicAndSideEffectFree) {
  const auto world = small_world(33);
  const auto copy = world;
  const auto params = tiny_policy(11);

  Rng rng_a(5);
  const auto a = run_forest_episode(world, params, RewardConfig{}, 10.0,
                                    std::nullopt, std::nullopt, rng_a);
  Rng rng_b(5);
  const auto b = run_forest_episode(world, params, RewardConfig{}, 10.0,
                                    std::nullopt, std::nullopt, rng_b);

  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    EXPECT_EQ(a.trajectory[i].x, b.trajectory[i].x);
    EXPECT_EQ(a.trajectory[i].y, b.trajectory[i].y);
  }
  EXPECT_EQ(a.path_length, b.path_length);
  EXPECT_EQ(a.reached_goal, b.reached_goal);

  ForestOptions stochastic;
  stochastic.greedy = false;
  Rng rng_c(6);
  Rng rng_d(6);
  const auto c = run_forest_episode(world, params, RewardConfig{}, 10.0,
                                    std::nullopt, std::nullopt, rng_c,
                                    stochastic);
  const auto d = run_forest_episode(world, params, RewardConfig{}, 10.0,
                                    std::nullopt, std::nullopt, rng_d,
                                    stochastic);
  ASSERT_EQ(c.trajectory.size(), d.trajectory.size());
  for (std::size_t i = 0; i < c.trajectory.size(); ++i) {
    EXPECT_EQ(c.trajectory[i].x, d.trajectory[i].x);
  }

  ASSERT_EQ(world.trees.size(), copy.trees.size());
  EXPECT_EQ(world.start.x, copy.start.x);
  EXPECT_EQ(world.distance_budget, copy.distance_budget);
}

TEST(RunForestEpisode, PlanBSwitchTakesOverAtTheSwitchStep) {
  const auto world = small_world(34);
  const auto params = tiny_policy(12);

  Rng rng_a(1);
  const auto plain = run_forest_episode(world, params, RewardConfig{}, 14.0,
                                        std::nullopt, std::nullopt, rng_a);
  Rng rng_b(1);
  const auto same_decoy = run_forest_episode(world, params, RewardConfig{},
                                             14.0, 1, world.decoy, rng_b);
  ASSERT_EQ(plain.trajectory.size(), same_decoy.trajectory.size());
  for (std::size_t i = 0; i < plain.trajectory.size(); ++i) {
    EXPECT_EQ(plain.trajectory[i].x, same_decoy.trajectory[i].x);
    EXPECT_EQ(plain.trajectory[i].y, same_decoy.trajectory[i].y);
  }
  for (const ForestStep& s : plain.steps) EXPECT_FALSE(s.plan_b_active);

  const int t_switch = 4;
  Rng rng_c(1);
  const Point plan_b{world.bounds.min_x + 3.0, world.bounds.min_y + 3.0};
  const auto switched = run_forest_episode(world, params, RewardConfig{}, 14.0,
                                           t_switch, plan_b, rng_c);
  for (std::size_t i = 0; i + 1 < switched.steps.size(); ++i) {
    const ForestStep& s = switched.steps[i];
    EXPECT_EQ(s.plan_b_active, s.t >= t_switch) << "state t=" << s.t;
  }

  Rng rng_e(1);
  EXPECT_THROW(run_forest_episode(world, params, RewardConfig{}, 14.0, 0,
                                  plan_b, rng_e),
               InvalidArgumentError);
  Rng rng_f(1);
  EXPECT_THROW(run_forest_episode(world, params, RewardConfig{}, -1.0,
                                  std::nullopt, std::nullopt, rng_f),
               InvalidArgumentError);
}

TEST(RunForestEpisode, StartInsideCaptureRadiusStopsImmediately) {
  auto world = small_world(35);
  world.goal = {world.start.x + 0.5, world.start.y};
  world.goal_capture_radius = 1.0;
  const auto params = tiny_policy(13);
  Rng rng(2);
  const auto result = run_forest_episode(world, params, RewardConfig{}, 3.0,
                                         std::nullopt, std::nullopt, rng);
  EXPECT_TRUE(result.reached_goal);
  EXPECT_EQ(result.steps.size(), 1u);
  EXPECT_EQ(result.path_length, 0.0);
}

TEST(RunForestEpisode, StraightFallbackWalksTheDirectLine) {
  ForestWorld world;
  world.bounds = kBounds;
  world.trees = {{5.0, 18.0}, {15.0, 18.0}, {25.0, 18.0}};
  world.start = {2.0, 10.0};
  world.goal = {28.0, 10.0};
  world.decoy = {28.0, 17.0};
  world.perception_radius = 0.5;
  world.goal_capture_radius = 2.0;
  world.validate();

  const auto params = tiny_policy(14);
  Rng rng(3);
  const auto result = run_forest_episode(world, params, RewardConfig{}, 5.0,
                                         std::nullopt, std::nullopt, rng);
  EXPECT_TRUE(result.reached_goal);
  for (std::size_t i = 0; i + 1 < result.steps.size(); ++i) {
    EXPECT_EQ(result.steps[i].kind, ForestStepKind::straight);
    EXPECT_DOUBLE_EQ(result.trajectory[i].y, 10.0);
  }
  EXPECT_NEAR(result.path_length,
              euclidean(world.start, world.goal) - world.goal_capture_radius,
              0.5 * world.perception_radius + 1e-9);
}

}  // namespace
}  // namespace dpp
