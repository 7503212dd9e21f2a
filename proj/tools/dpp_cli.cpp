// Command-line front end: train/eval/heatmap/forest/oracle/gen-maps. Every
// command drops a run manifest next to its outputs and every SVG gets a
// sidecar file with the exact numbers rendered.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpp/deception.hpp"
#include "dpp/episode.hpp"
#include "dpp/error.hpp"
#include "dpp/forest.hpp"
#include "dpp/gridworld.hpp"
#include "dpp/manifest.hpp"
#include "dpp/map_corpus.hpp"
#include "dpp/oracle.hpp"
#include "dpp/policy.hpp"
#include "dpp/svg.hpp"
#include "dpp/trainer.hpp"
#include "dpp/version.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
  std::uint64_t seed = 0;
  fs::path out = "out";
  std::string config_path;
};

fs::path ensure_out_dir(const GlobalArgs& global) {
  fs::create_directories(global.out);
  return global.out;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dpp::DataError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw dpp::DataError(path + ": " + e.what());
  }
}

std::pair<int, int> parse_cell(const std::string& text, const char* what) {
  int r = 0;
  int c = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d%c", &r, &c, &tail) != 2) {
    throw dpp::InvalidArgumentError(std::string(what) +
                                    ": expected \"row,col\", got " + text);
  }
  return {r, c};
}

dpp::Point parse_point(const std::string& text, const char* what) {
  double x = 0.0;
  double y = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf%c", &x, &y, &tail) != 2) {
    throw dpp::InvalidArgumentError(std::string(what) +
                                    ": expected \"x,y\", got " + text);
  }
  return {x, y};
}

dpp::NodeId resolve_marker(const dpp::GridWorld& world, const std::string& flag,
                           std::optional<dpp::NodeId> marked,
                           const char* what) {
  if (!flag.empty()) {
    const auto [r, c] = parse_cell(flag, what);
    return world.node_at(r, c);
  }
  if (marked) return *marked;
  throw dpp::InvalidArgumentError(
      std::string(what) + ": pass --" + what + " row,col or mark the map");
}

dpp::RewardMode parse_mode(const std::string& mode) {
  if (mode == "exaggeration") return dpp::RewardMode::exaggeration;
  if (mode == "ambiguity") return dpp::RewardMode::ambiguity;
  throw dpp::InvalidArgumentError("mode must be exaggeration or ambiguity");
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string maps_dir;
  std::string mode = "exaggeration";
  std::string resume;
  int num_layers = 4;
  int hidden_dim = 64;
  int eval_specs = 8;
};

void run_train(const GlobalArgs& global, const TrainArgs& args,
               bool seed_given) {
  std::vector<fs::path> map_files;
  if (!fs::is_directory(args.maps_dir)) {
    throw dpp::InvalidArgumentError("train: " + args.maps_dir +
                                    " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(args.maps_dir)) {
    if (entry.path().extension() == ".map") map_files.push_back(entry.path());
  }
  std::sort(map_files.begin(), map_files.end());
  if (map_files.empty()) {
    throw dpp::InvalidArgumentError("train: no .map files in " +
                                    args.maps_dir);
  }

  std::vector<dpp::WeightedGraph> graphs;
  std::vector<std::string> inputs;
  for (const fs::path& p : map_files) {
    graphs.push_back(dpp::load_gridworld(p.string()).graph);
    inputs.push_back(p.string());
  }
  dpp::WorldCache worlds(std::move(graphs));

  dpp::TrainConfig config;
  if (!global.config_path.empty()) {
    config = load_json_file(global.config_path).get<dpp::TrainConfig>();
    inputs.push_back(global.config_path);
  }
  if (seed_given || global.config_path.empty()) config.seed = global.seed;
  config.validate();

  dpp::RewardConfig reward;
  reward.mode = parse_mode(args.mode);
  reward.gamma = config.gamma;

  dpp::PolicyConfig policy_config;
  policy_config.num_layers = args.num_layers;
  policy_config.hidden_dim = args.hidden_dim;

  std::optional<dpp::PolicyParameters> resume_params;
  if (!args.resume.empty()) {
    resume_params = dpp::load_policy(args.resume);
    policy_config = resume_params->config;
    inputs.push_back(args.resume);
  }

  const fs::path out = ensure_out_dir(global);
  dpp::TrainOptions options;
  options.metrics_path = out / "metrics.csv";
  options.checkpoint_path = out / "checkpoint.bin";
  if (resume_params) options.initial_params = &*resume_params;
  dpp::Rng eval_rng = dpp::Rng(config.seed).stream(0x5eedba5e);
  options.eval_specs =
      dpp::sample_eval_specs(worlds, args.eval_specs, 1.5, eval_rng);

  const auto summary = dpp::train(worlds, config, reward, policy_config, options);

  dpp::RunManifest manifest;
  manifest.command = "train";
  manifest.config = {{"train", config},
                     {"mode", args.mode},
                     {"num_layers", policy_config.num_layers},
                     {"hidden_dim", policy_config.hidden_dim},
                     {"eval_specs", args.eval_specs}};
  manifest.seed = config.seed;
  manifest.inputs = inputs;
  manifest.outputs = {options.metrics_path.string(),
                      options.checkpoint_path.string()};
  dpp::write_manifest(manifest, out / "manifest.json");

  std::printf("trained %lld episodes on %zu maps: goal_rate=%.3f deception=%.3f\n",
              static_cast<long long>(summary.episodes), map_files.size(),
              summary.final_goal_rate, summary.final_mean_deception);
  std::printf("checkpoint: %s\n", options.checkpoint_path.string().c_str());
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string map;
  std::string start;
  std::string goal;
  std::string decoy;
  std::string mode = "exaggeration";
  double extra_steps = 0.0;
  int episodes = 32;
  bool greedy = false;
  bool svg = true;
};

void run_eval(const GlobalArgs& global, const EvalArgs& args) {
  const auto world = dpp::load_gridworld(args.map);
  const auto params = dpp::load_policy(args.checkpoint);
  const dpp::NodeId start = resolve_marker(world, args.start, world.start, "start");
  const dpp::NodeId goal = resolve_marker(world, args.goal, world.goal, "goal");
  const dpp::NodeId decoy = resolve_marker(world, args.decoy, world.decoy, "decoy");
  if (args.extra_steps < 0.0) {
    throw dpp::InvalidArgumentError("eval: extra steps must be >= 0");
  }
  if (args.episodes <= 0) {
    throw dpp::InvalidArgumentError("eval: episode count must be positive");
  }

  dpp::WorldCache cache({world.graph});
  const auto& d_true = cache.distances_to(0, goal);
  if (!dpp::is_reachable(world.graph, d_true, start)) {
    throw dpp::DataError("eval: goal unreachable from start");
  }
  const double shortest = d_true[static_cast<std::size_t>(start)];

  dpp::EpisodeSpec spec;
  spec.graph_index = 0;
  spec.start = start;
  spec.goals = {goal, decoy};
  spec.true_goal_index = 0;
  spec.budget = shortest + args.extra_steps;

  dpp::RewardConfig reward;
  reward.mode = parse_mode(args.mode);

  dpp::Rng rng(global.seed);
  dpp::EpisodeOptions options;
  options.greedy = args.greedy;

  std::vector<double> visits(static_cast<std::size_t>(world.graph.node_count()),
                             0.0);
  nlohmann::json trajectories = nlohmann::json::array();
  dpp::EvalReport report;
  report.episodes = args.episodes;
  int reached = 0;
  int ratio_count = 0;
  double deception_sum = 0.0;
  double ratio_sum = 0.0;
  double return_sum = 0.0;
  for (int e = 0; e < args.episodes; ++e) {
    const auto result = dpp::run_episode(cache, spec, params, reward, rng, options);
    nlohmann::json cells = nlohmann::json::array();
    for (dpp::NodeId node : result.trajectory) {
      visits[static_cast<std::size_t>(node)] += 1.0;
      const auto [r, c] = world.cell_of(node);
      cells.push_back({r, c});
    }
    trajectories.push_back({{"episode", e},
                            {"reached_goal", result.reached_goal},
                            {"deception_score", result.deception_score},
                            {"discounted_return", result.discounted_return},
                            {"path", cells}});
    return_sum += result.discounted_return;
    deception_sum += result.deception_score;
    if (result.reached_goal) {
      ++reached;
      double walked = 0.0;
      for (std::size_t i = 1; i < result.trajectory.size(); ++i) {
        walked += world.graph
                      .edge_weight(result.trajectory[i - 1], result.trajectory[i])
                      .value();
      }
      ratio_sum += shortest > 0.0 ? walked / shortest : 1.0;
      ++ratio_count;
    }
  }
  report.goal_rate = static_cast<double>(reached) / args.episodes;
  report.mean_deceptiveness = deception_sum / args.episodes;
  report.mean_path_ratio = ratio_count > 0 ? ratio_sum / ratio_count : 0.0;
  report.mean_discounted_return = return_sum / args.episodes;

  const fs::path out = ensure_out_dir(global);
  dpp::atomic_write_file(out / "trajectories.json", trajectories.dump(2) + "\n");
  dpp::atomic_write_file(out / "report.json",
                         nlohmann::json(report).dump(2) + "\n");

  std::string csv = "node,row,col,visits\n";
  for (dpp::NodeId v = 0; v < world.graph.node_count(); ++v) {
    const auto [r, c] = world.cell_of(v);
    csv += std::to_string(v) + "," + std::to_string(r) + "," +
           std::to_string(c) + "," + csv_num(visits[static_cast<std::size_t>(v)]) +
           "\n";
  }
  dpp::atomic_write_file(out / "visits.csv", csv);

  std::vector<std::string> outputs = {(out / "trajectories.json").string(),
                                      (out / "report.json").string(),
                                      (out / "visits.csv").string()};
  if (args.svg) {
    dpp::GridRenderOptions render;
    render.start = start;
    render.goal = goal;
    render.decoy = decoy;
    render.title = "visit counts, n=" + std::to_string(args.episodes);
    dpp::atomic_write_file(out / "visits.svg",
                           dpp::render_grid_heatmap(world, visits, render));
    outputs.push_back((out / "visits.svg").string());
  }

  dpp::RunManifest manifest;
  manifest.command = "eval";
  manifest.config = {{"map", args.map},       {"mode", args.mode},
                     {"extra_steps", args.extra_steps},
                     {"episodes", args.episodes}, {"greedy", args.greedy},
                     {"budget", spec.budget}};
  manifest.seed = global.seed;
  manifest.inputs = {args.checkpoint, args.map};
  manifest.outputs = outputs;
  dpp::write_manifest(manifest, out / "manifest.json");

  std::printf("eval: goal_rate=%.3f deception=%.3f path_ratio=%.3f (n=%d)\n",
              report.goal_rate, report.mean_deceptiveness,
              report.mean_path_ratio, report.episodes);
}

// ---- heatmap ----------------------------------------------------------------

struct HeatmapArgs {
  std::string map;
  std::string start;
  std::string goal;
  std::string decoy;
  std::string metric = "ambiguity";
};

void run_heatmap(const GlobalArgs& global, const HeatmapArgs& args) {
  const auto world = dpp::load_gridworld(args.map);
  const dpp::NodeId start = resolve_marker(world, args.start, world.start, "start");
  const dpp::NodeId goal = resolve_marker(world, args.goal, world.goal, "goal");
  const dpp::NodeId decoy = resolve_marker(world, args.decoy, world.decoy, "decoy");

  dpp::DeceptionMetric metric;
  if (args.metric == "ambiguity") {
    metric = dpp::DeceptionMetric::proposed_ambiguity;
  } else if (args.metric == "classical-ambiguity") {
    metric = dpp::DeceptionMetric::classical_ambiguity;
  } else if (args.metric == "exaggeration") {
    metric = dpp::DeceptionMetric::exaggeration;
  } else {
    throw dpp::InvalidArgumentError(
        "metric must be ambiguity, classical-ambiguity, or exaggeration");
  }

  const std::vector<dpp::NodeId> goals = {goal, decoy};
  const auto values = dpp::metric_heatmap(world.graph, start, goals, 0, metric);

  const fs::path out = ensure_out_dir(global);
  std::string csv = "node,row,col,value\n";
  for (dpp::NodeId v = 0; v < world.graph.node_count(); ++v) {
    const auto [r, c] = world.cell_of(v);
    csv += std::to_string(v) + "," + std::to_string(r) + "," +
           std::to_string(c) + "," + csv_num(values[static_cast<std::size_t>(v)]) +
           "\n";
  }
  dpp::atomic_write_file(out / "heatmap.csv", csv);

  dpp::GridRenderOptions render;
  render.start = start;
  render.goal = goal;
  render.decoy = decoy;
  render.title = args.metric;
  dpp::atomic_write_file(out / "heatmap.svg",
                         dpp::render_grid_heatmap(world, values, render));

  dpp::RunManifest manifest;
  manifest.command = "heatmap";
  manifest.config = {{"map", args.map}, {"metric", args.metric}};
  manifest.seed = global.seed;
  manifest.inputs = {args.map};
  manifest.outputs = {(out / "heatmap.csv").string(),
                      (out / "heatmap.svg").string()};
  dpp::write_manifest(manifest, out / "manifest.json");

  std::printf("heatmap: %d cells -> %s\n", world.graph.node_count(),
              (out / "heatmap.svg").string().c_str());
}

// ---- forest -----------------------------------------------------------------

struct ForestArgs {
  std::string world_path;
  bool generate = false;
  std::string checkpoint;
  double extra_distance = 16.0;
  double visibility = 0.0;
  int t_switch = 0;
  std::string plan_b;
  double density = 0.1;
  double min_separation = 1.6;
  bool sample = false;
  bool ridges = true;
};

void run_forest(const GlobalArgs& global, const ForestArgs& args) {
  if (args.generate == !args.world_path.empty()) {
    throw dpp::InvalidArgumentError(
        "forest: pass exactly one of --world or --generate");
  }
  dpp::ForestWorld world;
  if (args.generate) {
    world = dpp::generate_forest_world({0.0, 0.0, 30.0, 20.0}, args.density,
                                       args.min_separation, global.seed);
  } else {
    world = dpp::load_forest_world(args.world_path);
  }
  if (args.visibility > 0.0) world.perception_radius = args.visibility;
  world.validate();

  const auto params = dpp::load_policy(args.checkpoint);
  std::optional<int> t_switch;
  std::optional<dpp::Point> plan_b;
  if (args.t_switch > 0) t_switch = args.t_switch;
  if (!args.plan_b.empty()) plan_b = parse_point(args.plan_b, "plan-b");
  if (t_switch.has_value() != plan_b.has_value()) {
    throw dpp::InvalidArgumentError(
        "forest: --t-switch and --plan-b go together");
  }

  dpp::Rng rng(global.seed);
  dpp::ForestOptions options;
  options.greedy = !args.sample;
  const auto result =
      dpp::run_forest_episode(world, params, dpp::RewardConfig{},
                              args.extra_distance, t_switch, plan_b, rng, options);

  const fs::path out = ensure_out_dir(global);
  world.distance_budget = result.initial_budget;
  dpp::save_forest_world(world, (out / "world.json").string());

  nlohmann::json traj{{"initial_budget", result.initial_budget},
                      {"path_length", result.path_length},
                      {"reached_goal", result.reached_goal},
                      {"budget_exhausted", result.budget_exhausted},
                      {"steps", result.steps}};
  dpp::atomic_write_file(out / "trajectory.json", traj.dump(2) + "\n");

  dpp::ForestRenderOptions render;
  render.trajectory = result.trajectory;
  dpp::WeightedGraph ridge_graph;
  if (args.ridges) {
    ridge_graph = dpp::voronoi_graph(world.trees, world.bounds, true);
    render.ridges = &ridge_graph;
  }
  char title[96];
  std::snprintf(title, sizeof(title), "extra=%.1f %s", args.extra_distance,
                result.reached_goal ? "reached" : "exhausted");
  render.title = title;
  dpp::atomic_write_file(out / "forest.svg", dpp::render_forest(world, render));

  dpp::RunManifest manifest;
  manifest.command = "forest";
  manifest.config = {{"extra_distance", args.extra_distance},
                     {"visibility", world.perception_radius},
                     {"t_switch", args.t_switch},
                     {"plan_b", args.plan_b},
                     {"density", args.density},
                     {"min_separation", args.min_separation},
                     {"sample", args.sample},
                     {"generated", args.generate}};
  manifest.seed = global.seed;
  manifest.inputs = {args.checkpoint};
  if (!args.world_path.empty()) manifest.inputs.push_back(args.world_path);
  manifest.outputs = {(out / "world.json").string(),
                      (out / "trajectory.json").string(),
                      (out / "forest.svg").string()};
  dpp::write_manifest(manifest, out / "manifest.json");

  std::printf("forest: %s, path length %.2f of budget %.2f in %zu steps\n",
              result.reached_goal ? "reached goal" : "budget exhausted",
              result.path_length, result.initial_budget, result.steps.size());
}

// ---- oracle -----------------------------------------------------------------

struct OracleArgs {
  std::string map;
  std::string start;
  std::string goal;
  std::string decoy;
  std::string mode = "exaggeration";
  double t_max = 0.0;
  bool svg = false;
};

void run_oracle(const GlobalArgs& global, const OracleArgs& args) {
  const auto world = dpp::load_gridworld(args.map);
  const dpp::NodeId start = resolve_marker(world, args.start, world.start, "start");
  const dpp::NodeId goal = resolve_marker(world, args.goal, world.goal, "goal");
  const dpp::NodeId decoy = resolve_marker(world, args.decoy, world.decoy, "decoy");

  dpp::WorldCache cache({world.graph});
  dpp::EpisodeSpec spec;
  spec.graph_index = 0;
  spec.start = start;
  spec.goals = {goal, decoy};
  spec.true_goal_index = 0;
  spec.budget = args.t_max;

  dpp::RewardConfig reward;
  reward.mode = parse_mode(args.mode);

  const auto result = dpp::brute_force_best_path(cache, spec, reward);

  nlohmann::json cells = nlohmann::json::array();
  for (dpp::NodeId node : result.path) {
    const auto [r, c] = world.cell_of(node);
    cells.push_back({r, c});
  }
  nlohmann::json doc{{"found", result.found},
                     {"discounted_return", result.discounted_return},
                     {"walks_scored", result.walks_scored},
                     {"path_nodes", result.path},
                     {"path_cells", cells},
                     {"t_max", args.t_max},
                     {"mode", args.mode}};

  const fs::path out = ensure_out_dir(global);
  dpp::atomic_write_file(out / "oracle.json", doc.dump(2) + "\n");
  std::vector<std::string> outputs = {(out / "oracle.json").string()};

  if (args.svg) {
    std::vector<double> zeros(
        static_cast<std::size_t>(world.graph.node_count()), 0.0);
    dpp::GridRenderOptions render;
    render.start = start;
    render.goal = goal;
    render.decoy = decoy;
    render.path = result.path;
    render.title = "oracle best path";
    dpp::atomic_write_file(out / "oracle.svg",
                           dpp::render_grid_heatmap(world, zeros, render));
    outputs.push_back((out / "oracle.svg").string());
  }

  dpp::RunManifest manifest;
  manifest.command = "oracle";
  manifest.config = {{"map", args.map},
                     {"mode", args.mode},
                     {"t_max", args.t_max}};
  manifest.seed = global.seed;
  manifest.inputs = {args.map};
  manifest.outputs = outputs;
  dpp::write_manifest(manifest, out / "manifest.json");

  if (result.found) {
    std::printf("oracle: return %.6f over %lld walks, path length %zu\n",
                result.discounted_return,
                static_cast<long long>(result.walks_scored),
                result.path.size() - 1);
  } else {
    std::printf("oracle: no goal-reaching walk within budget %.1f\n",
                args.t_max);
  }
}

// ---- gen-maps ---------------------------------------------------------------

void run_gen_maps(const GlobalArgs& global) {
  const fs::path out = ensure_out_dir(global);
  std::vector<std::string> outputs;
  for (const auto& [name, text] : dpp::builtin_maps()) {
    const fs::path path = out / (name + ".map");
    dpp::atomic_write_file(path, text);
    outputs.push_back(path.string());
  }
  dpp::RunManifest manifest;
  manifest.command = "gen-maps";
  manifest.seed = global.seed;
  manifest.outputs = outputs;
  dpp::write_manifest(manifest, out / "manifest.json");
  std::printf("wrote %zu maps to %s\n", outputs.size(), out.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Deceptive path planning: train and run tunably deceptive navigation "
      "policies over weighted graphs and continuous forests.\n"
      "SVG conventions: blue = start, green = true goal, orange = decoy; "
      "heatmaps shade dark blue (low) through teal to yellow (high)."};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpp::kVersion);

  GlobalArgs global;
  auto* seed_opt =
      app.add_option("--seed", global.seed, "Root RNG seed (default 0)");
  app.add_option("--out", global.out, "Output directory (default ./out)");
  app.add_option("--config", global.config_path,
                 "JSON config file (training hyperparameters)");

  auto* train = app.add_subcommand("train", "Train a policy on a map corpus");
  train->fallthrough();
  TrainArgs train_args;
  train->add_option("--maps", train_args.maps_dir, "Directory of .map files")
      ->required();
  train->add_option("--mode", train_args.mode,
                    "Deception bonus: exaggeration or ambiguity");
  train->add_option("--resume", train_args.resume,
                    "Checkpoint to continue training from");
  train->add_option("--num-layers", train_args.num_layers,
                    "Message-passing depth (= perception radius)");
  train->add_option("--hidden-dim", train_args.hidden_dim,
                    "Embedding width per layer");
  train->add_option("--eval-specs", train_args.eval_specs,
                    "Held-out evaluation instances per metrics row");

  auto* eval = app.add_subcommand("eval", "Roll out a checkpoint on one map");
  eval->fallthrough();
  EvalArgs eval_args;
  eval->add_option("--checkpoint", eval_args.checkpoint, "Policy checkpoint")
      ->required();
  eval->add_option("--map", eval_args.map, "Map file")->required();
  eval->add_option("--start", eval_args.start, "Start cell row,col");
  eval->add_option("--goal", eval_args.goal, "True goal cell row,col");
  eval->add_option("--decoy", eval_args.decoy, "Decoy cell row,col");
  eval->add_option("--mode", eval_args.mode,
                   "Bonus used for the deceptiveness score");
  eval->add_option("--extra-steps", eval_args.extra_steps,
                   "Budget beyond the shortest path (T_max = d_c + extra)");
  eval->add_option("-n,--episodes", eval_args.episodes, "Rollout count");
  eval->add_flag("--greedy", eval_args.greedy, "Argmax actions");
  eval->add_flag("!--no-svg", eval_args.svg, "Skip the visit-count SVG");

  auto* heatmap =
      app.add_subcommand("heatmap", "Render a deception metric per free cell");
  heatmap->fallthrough();
  HeatmapArgs heatmap_args;
  heatmap->add_option("--map", heatmap_args.map, "Map file")->required();
  heatmap->add_option("--start", heatmap_args.start, "Start cell row,col");
  heatmap->add_option("--goal", heatmap_args.goal, "True goal cell row,col");
  heatmap->add_option("--decoy", heatmap_args.decoy, "Decoy cell row,col");
  heatmap->add_option(
      "--metric", heatmap_args.metric,
      "ambiguity (proposed), classical-ambiguity, or exaggeration");

  auto* forest = app.add_subcommand(
      "forest", "Run a grid-trained policy through a continuous forest");
  forest->fallthrough();
  ForestArgs forest_args;
  forest->add_option("--world", forest_args.world_path, "Forest world JSON");
  forest->add_flag("--generate", forest_args.generate,
                   "Generate a world from --seed instead of loading one");
  forest->add_option("--checkpoint", forest_args.checkpoint, "Policy checkpoint")
      ->required();
  forest->add_option("--extra-distance", forest_args.extra_distance,
                     "Budget beyond the straight start-goal distance");
  forest->add_option("--visibility", forest_args.visibility,
                     "Perception disk radius override");
  forest->add_option("--t-switch", forest_args.t_switch,
                     "State index at which the decoy switches to --plan-b");
  forest->add_option("--plan-b", forest_args.plan_b,
                     "Replacement decoy \"x,y\" for --t-switch");
  forest->add_option("--density", forest_args.density,
                     "Trees per unit area when generating");
  forest->add_option("--min-separation", forest_args.min_separation,
                     "Minimum pairwise tree distance when generating");
  forest->add_flag("--sample", forest_args.sample,
                   "Sample actions instead of greedy argmax");
  forest->add_flag("!--no-ridges", forest_args.ridges,
                   "Skip the Voronoi ridge layer in the SVG");

  auto* oracle = app.add_subcommand(
      "oracle", "Exhaustive best deceptive walk on a small instance");
  oracle->fallthrough();
  OracleArgs oracle_args;
  oracle->add_option("--map", oracle_args.map, "Map file")->required();
  oracle->add_option("--start", oracle_args.start, "Start cell row,col");
  oracle->add_option("--goal", oracle_args.goal, "True goal cell row,col");
  oracle->add_option("--decoy", oracle_args.decoy, "Decoy cell row,col");
  oracle->add_option("--mode", oracle_args.mode,
                     "exaggeration or ambiguity bonus");
  oracle->add_option("--t-max", oracle_args.t_max, "Step budget")->required();
  oracle->add_flag("--svg", oracle_args.svg, "Render the best path");

  auto* gen_maps =
      app.add_subcommand("gen-maps", "Write the built-in map corpus");
  gen_maps->fallthrough();

  try {
    app.parse(argc, argv);
    if (*train) run_train(global, train_args, seed_opt->count() > 0);
    if (*eval) run_eval(global, eval_args);
    if (*heatmap) run_heatmap(global, heatmap_args);
    if (*forest) run_forest(global, forest_args);
    if (*oracle) run_oracle(global, oracle_args);
    if (*gen_maps) run_gen_maps(global);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const dpp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
