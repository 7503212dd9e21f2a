#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "dpp/episode.hpp"
#include "dpp/optimizer.hpp"
#include "dpp/oracle.hpp"
#include "json.hpp"

namespace dpp {

struct TrainConfig {
  std::int64_t total_episodes = 98304;
  double gamma = 0.99;
  double learning_rate = 4e-4;
  double weight_decay = 4e-4;
  double clip_epsilon = 0.2;
  double gae_lambda = 0.95;
  int epochs_per_batch = 4;
  int episodes_per_batch = 256;
  int minibatch_size = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double grad_clip_norm = 0.5;
  std::uint64_t seed = 0;
  bool normalize_advantages = true;
  bool normalize_attributes = false;
  int eval_every_batches = 8;
  int eval_episodes_per_spec = 1;

  void validate() const {
    if (total_episodes <= 0) throw ConfigError("train: total_episodes must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train: gamma outside (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
    if (weight_decay < 0.0) throw ConfigError("train: weight decay must be non-negative");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("train: clip epsilon outside (0, 1)");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("train: gae lambda outside [0, 1]");
    if (epochs_per_batch <= 0) throw ConfigError("train: epochs per batch must be positive");
    if (episodes_per_batch <= 0) throw ConfigError("train: episodes per batch must be positive");
    if (minibatch_size <= 0) throw ConfigError("train: minibatch size must be positive");
    if (value_coef < 0.0) throw ConfigError("train: value coefficient must be non-negative");
    if (entropy_coef < 0.0) throw ConfigError("train: entropy coefficient must be non-negative");
    if (!(grad_clip_norm > 0.0)) throw ConfigError("train: gradient clip norm must be positive");
    if (eval_every_batches <= 0) throw ConfigError("train: eval cadence must be positive");
    if (eval_episodes_per_spec <= 0) throw ConfigError("train: eval episodes per spec must be positive");
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    TrainConfig, total_episodes, gamma, learning_rate, weight_decay,
    clip_epsilon, gae_lambda, epochs_per_batch, episodes_per_batch,
    minibatch_size, value_coef, entropy_coef, grad_clip_norm, seed,
    normalize_advantages, normalize_attributes, eval_every_batches,
    eval_episodes_per_spec)

// T_max ~ integer uniform on [d(s, G*), d(s, G) + d(G, G*)] inclusive.
inline int sample_t_max(Rng& rng, double d_start_true, double d_start_decoy,
                        double d_decoy_true) {
  if (!std::isfinite(d_start_true) || !std::isfinite(d_start_decoy) ||
      !std::isfinite(d_decoy_true) || d_start_true < 0.0 ||
      d_start_decoy < 0.0 || d_decoy_true < 0.0) {
    throw InvalidArgumentError("sample_t_max: distances must be finite and non-negative");
  }
  const auto lo = static_cast<std::int64_t>(std::ceil(d_start_true - 1e-9));
  auto hi = static_cast<std::int64_t>(
      std::floor(d_start_decoy + d_decoy_true + 1e-9));
  if (hi < lo) hi = lo;
  return static_cast<int>(rng.uniform_int(lo, hi));
}

// Uniform world, start, and goal pair (without replacement); resamples until
// all three legs are mutually reachable.
inline EpisodeSpec sample_episode_spec(WorldCache& worlds, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int gi = static_cast<int>(rng.uniform_int(0, worlds.graph_count() - 1));
    const auto& graph = worlds.graph(gi);
    const std::int64_t n = graph.node_count();
    if (n < 2) continue;
    const auto start = static_cast<NodeId>(rng.uniform_int(0, n - 1));
    const auto g_true = static_cast<NodeId>(rng.uniform_int(0, n - 1));
    auto g_decoy = static_cast<NodeId>(rng.uniform_int(0, n - 2));
    if (g_decoy >= g_true) ++g_decoy;

    const double sentinel = graph.unreachable_distance();
    const auto& d_true = worlds.distances_to(gi, g_true);
    if (d_true[static_cast<std::size_t>(start)] >= sentinel ||
        d_true[static_cast<std::size_t>(g_decoy)] >= sentinel) {
      continue;
    }
    const auto& d_decoy = worlds.distances_to(gi, g_decoy);
    if (d_decoy[static_cast<std::size_t>(start)] >= sentinel) continue;

    EpisodeSpec spec;
    spec.graph_index = gi;
    spec.start = start;
    spec.goals = {g_true, g_decoy};
    spec.true_goal_index = 0;
    spec.budget = static_cast<double>(
        sample_t_max(rng, d_true[static_cast<std::size_t>(start)],
                     d_decoy[static_cast<std::size_t>(start)],
                     d_true[static_cast<std::size_t>(g_decoy)]));
    return spec;
  }
  throw DataError("episode sampling: no mutually reachable start/goal pair found");
}

// Held-out evaluation specs: distinct start/goals, budget = factor * d(s,G*).
inline std::vector<EpisodeSpec> sample_eval_specs(WorldCache& worlds, int count,
                                                  double budget_factor,
                                                  Rng& rng) {
  if (count <= 0) throw InvalidArgumentError("eval specs: count must be positive");
  if (!(budget_factor >= 1.0)) throw ConfigError("eval specs: budget factor must be >= 1");
  std::vector<EpisodeSpec> specs;
  specs.reserve(static_cast<std::size_t>(count));
  int attempts = 0;
  while (static_cast<int>(specs.size()) < count) {
    if (++attempts > 1000 * count) {
      throw DataError("eval specs: could not sample distinct reachable triples");
    }
    EpisodeSpec spec = sample_episode_spec(worlds, rng);
    if (spec.start == spec.goals[0] || spec.start == spec.goals[1]) continue;
    const auto& d_true = worlds.distances_to(spec.graph_index, spec.goals[0]);
    spec.budget = budget_factor * d_true[static_cast<std::size_t>(spec.start)];
    specs.push_back(std::move(spec));
  }
  return specs;
}

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> targets;
};

// GAE over a batch of concatenated episodes; done flags stop both the value
// bootstrap and the recursion at episode boundaries. Batch-level
// normalization to mean 0 / variance 1 unless disabled or degenerate.
inline AdvantageEstimate compute_advantages(std::span<const Transition> batch,
                                            double gamma, double lambda,
                                            bool normalize) {
  AdvantageEstimate out;
  const std::size_t n = batch.size();
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t idx = n; idx-- > 0;) {
    const double not_done = batch[idx].done ? 0.0 : 1.0;
    const double next_value =
        (!batch[idx].done && idx + 1 < n) ? batch[idx + 1].value : 0.0;
    const double delta = batch[idx].reward + gamma * next_value * not_done -
                         batch[idx].value;
    running = delta + gamma * lambda * not_done * running;
    out.advantages[idx] = running;
    out.targets[idx] = running + batch[idx].value;
  }
  if (normalize && n > 1) {
    double mean = 0.0;
    for (double a : out.advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : out.advantages) var += (a - mean) * (a - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n));
    if (stddev > 1e-8) {
      for (double& a : out.advantages) a = (a - mean) / stddev;
    }
  }
  return out;
}

struct PpoStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;  // raw mean squared error, before value_coef
  double entropy = 0.0;
  double mean_grad_norm = 0.0;  // pre-clip, averaged over minibatches
  int minibatches = 0;
  std::int64_t samples = 0;
};

namespace detail {

// Per-sample PPO loss and its gradient seeds with respect to the current
// logits and value, scaled by `scale` (1 / minibatch size). The policy term
// follows the active branch of min(ratio*A, clip(ratio)*A): a saturated clip
// contributes no gradient.
struct PpoSampleLoss {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_sq_error = 0.0;
  double entropy = 0.0;
  double ratio = 0.0;
  std::vector<double> logit_seed;
  double value_seed = 0.0;
};

inline PpoSampleLoss ppo_sample_loss(std::span<const double> logits,
                                     int action, double logp_old,
                                     double advantage, double target,
                                     double value, const TrainConfig& config,
                                     double scale) {
  PpoSampleLoss out;
  // Same operation order as log_softmax_at, so a re-forward under unchanged
  // parameters reproduces the stored log-probability bit for bit.
  const double lse = logsumexp(logits);
  std::vector<double> log_probs(logits.size());
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    log_probs[i] = logits[i] - lse;
    probs[i] = std::exp(log_probs[i]);
    out.entropy -= probs[i] * log_probs[i];
  }

  const auto a = static_cast<std::size_t>(action);
  out.ratio = std::exp(log_probs[a] - logp_old);
  const double unclipped = out.ratio * advantage;
  const double r_clip = std::clamp(out.ratio, 1.0 - config.clip_epsilon,
                                   1.0 + config.clip_epsilon);
  const double clipped_obj = r_clip * advantage;
  out.policy_loss = -std::min(unclipped, clipped_obj);
  const double value_error = value - target;
  out.value_sq_error = value_error * value_error;
  out.loss = out.policy_loss + config.value_coef * out.value_sq_error -
             config.entropy_coef * out.entropy;

  const bool within = out.ratio >= 1.0 - config.clip_epsilon &&
                      out.ratio <= 1.0 + config.clip_epsilon;
  const double coeff =
      (unclipped <= clipped_obj || within) ? -advantage * out.ratio : 0.0;
  out.logit_seed.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double indicator = i == a ? 1.0 : 0.0;
    out.logit_seed[i] =
        (coeff * (indicator - probs[i]) +
         config.entropy_coef * probs[i] * (log_probs[i] + out.entropy)) *
        scale;
  }
  out.value_seed = 2.0 * config.value_coef * value_error * scale;
  return out;
}

}  // namespace detail

// Clipped-surrogate PPO epochs over one collected batch. Advantages are fixed
// from rollout-time values; each minibatch re-forwards the stored
// observations under the current parameters. Stats are sample-weighted means.
inline PpoStats ppo_update(PolicyParameters& params, AdamW& optimizer,
                           std::span<const Transition> batch,
                           const TrainConfig& config, Rng& rng) {
  PpoStats stats;
  if (batch.empty() || config.epochs_per_batch <= 0) return stats;

  const auto estimate = compute_advantages(
      batch, config.gamma, config.gae_lambda, config.normalize_advantages);

  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double ratio_sum = 0.0;
  double policy_loss_sum = 0.0;
  double value_loss_sum = 0.0;
  double entropy_sum = 0.0;
  double grad_norm_sum = 0.0;
  std::int64_t clipped = 0;

  for (int epoch = 0; epoch < config.epochs_per_batch; ++epoch) {
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t end =
          std::min(begin + static_cast<std::size_t>(config.minibatch_size),
                   order.size());
      const auto count = static_cast<double>(end - begin);
      PolicyParameters grads = zeros_like_policy(params.config);

      for (std::size_t k = begin; k < end; ++k) {
        const Transition& tr = batch[order[k]];
        const auto& obs = tr.observation;
        const auto trace =
            policy_forward(params, *obs.view, obs.attributes, obs.agent_local);
        const auto sample = detail::ppo_sample_loss(
            trace.output.logits, tr.action_index, tr.log_prob,
            estimate.advantages[order[k]], estimate.targets[order[k]],
            trace.output.value, config, 1.0 / count);
        if (!std::isfinite(sample.loss) || !std::isfinite(sample.ratio)) {
          throw NumericError(
              "ppo update: non-finite loss",
              "epoch " + std::to_string(epoch) + ", sample " +
                  std::to_string(order[k]) + ", ratio " +
                  std::to_string(sample.ratio));
        }

        ratio_sum += sample.ratio;
        if (sample.ratio < 1.0 - config.clip_epsilon ||
            sample.ratio > 1.0 + config.clip_epsilon) {
          ++clipped;
        }
        policy_loss_sum += sample.policy_loss;
        value_loss_sum += sample.value_sq_error;
        entropy_sum += sample.entropy;
        ++stats.samples;

        const auto sample_grads = policy_backward(
            params, *obs.view, trace, sample.logit_seed, sample.value_seed);
        add_scaled(grads, sample_grads);
      }

      grad_norm_sum += clip_gradient_norm(grads, config.grad_clip_norm);
      optimizer.step(params, grads);
      ++stats.minibatches;
    }
  }

  if (stats.samples > 0) {
    const auto total = static_cast<double>(stats.samples);
    stats.mean_ratio = ratio_sum / total;
    stats.clip_fraction = static_cast<double>(clipped) / total;
    stats.policy_loss = policy_loss_sum / total;
    stats.value_loss = value_loss_sum / total;
    stats.entropy = entropy_sum / total;
  }
  if (stats.minibatches > 0) {
    stats.mean_grad_norm = grad_norm_sum / stats.minibatches;
  }
  return stats;
}

struct TrainOptions {
  std::filesystem::path metrics_path;     // empty: no metrics file
  std::filesystem::path checkpoint_path;  // empty: no checkpoints
  WorldCache* eval_worlds = nullptr;      // defaults to the training worlds
  std::vector<EpisodeSpec> eval_specs;    // empty: rows use training stats
  const PolicyParameters* initial_params = nullptr;
};

struct TrainSummary {
  PolicyParameters params;
  std::int64_t episodes = 0;
  int evaluations = 0;
  double final_goal_rate = 0.0;
  double final_mean_deception = 0.0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Sample episodes -> PPO update, with periodic greedy held-out evaluation,
// metrics rows, and checkpoints. Bit-deterministic for a fixed seed: the
// evaluation draws from its own RNG stream so cadence never perturbs
// training.
inline TrainSummary train(WorldCache& worlds, const TrainConfig& config,
                          const RewardConfig& reward,
                          const PolicyConfig& policy_config,
                          const TrainOptions& options = {}) {
  config.validate();
  policy_config.validate();
  if (options.initial_params &&
      !(options.initial_params->config == policy_config)) {
    throw ConfigError("train: initial parameters do not match policy config");
  }

  Rng rng(config.seed);
  Rng eval_rng = Rng(config.seed).stream(0x9e3779b9);
  TrainSummary summary;
  summary.params = options.initial_params ? *options.initial_params
                                          : init_policy(policy_config, config.seed);
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  adam.weight_decay = config.weight_decay;
  AdamW optimizer(policy_config, adam);

  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    metrics.open(options.metrics_path, std::ios::trunc);
    if (!metrics) {
      throw DataError("train: cannot open metrics file " +
                      options.metrics_path.string());
    }
    metrics << "episode,goal_rate,mean_deception,policy_loss,value_loss,entropy\n";
  }

  EpisodeOptions rollout_options;
  rollout_options.attributes.normalized = config.normalize_attributes;
  EvalSettings eval_settings;
  eval_settings.episodes_per_spec = config.eval_episodes_per_spec;
  eval_settings.greedy = true;
  eval_settings.attributes.normalized = config.normalize_attributes;
  WorldCache& eval_worlds = options.eval_worlds ? *options.eval_worlds : worlds;

  const std::int64_t batches =
      (config.total_episodes + config.episodes_per_batch - 1) /
      config.episodes_per_batch;
  double pol_loss_sum = 0.0, value_loss_sum = 0.0, entropy_sum = 0.0;
  std::int64_t loss_samples = 0;
  std::int64_t train_goal = 0, train_eps = 0;
  double train_dec = 0.0;

  for (std::int64_t b = 0; b < batches; ++b) {
    std::vector<Transition> batch;
    int batch_eps = 0;
    while (batch_eps < config.episodes_per_batch &&
           summary.episodes < config.total_episodes) {
      const EpisodeSpec spec = sample_episode_spec(worlds, rng);
      auto result =
          run_episode(worlds, spec, summary.params, reward, rng, rollout_options);
      train_goal += result.reached_goal ? 1 : 0;
      train_dec += result.deception_score;
      ++train_eps;
      for (auto& tr : result.transitions) batch.push_back(std::move(tr));
      ++batch_eps;
      ++summary.episodes;
    }
    const PpoStats stats =
        ppo_update(summary.params, optimizer, batch, config, rng);
    pol_loss_sum += stats.policy_loss * static_cast<double>(stats.samples);
    value_loss_sum += stats.value_loss * static_cast<double>(stats.samples);
    entropy_sum += stats.entropy * static_cast<double>(stats.samples);
    loss_samples += stats.samples;

    const bool row_due = (b + 1) % config.eval_every_batches == 0 ||
                         summary.episodes >= config.total_episodes;
    if (!row_due) continue;

    double goal_rate = 0.0;
    double mean_deception = 0.0;
    if (!options.eval_specs.empty()) {
      const EvalReport report =
          evaluate_policy(eval_worlds, options.eval_specs, summary.params,
                          reward, eval_rng, eval_settings);
      goal_rate = report.goal_rate;
      mean_deception = report.mean_deceptiveness;
    } else if (train_eps > 0) {
      goal_rate = static_cast<double>(train_goal) / static_cast<double>(train_eps);
      mean_deception = train_dec / static_cast<double>(train_eps);
    }
    const double mean_pol =
        loss_samples > 0 ? pol_loss_sum / static_cast<double>(loss_samples) : 0.0;
    const double mean_val =
        loss_samples > 0 ? value_loss_sum / static_cast<double>(loss_samples) : 0.0;
    const double mean_ent =
        loss_samples > 0 ? entropy_sum / static_cast<double>(loss_samples) : 0.0;

    if (metrics.is_open()) {
      metrics << summary.episodes << ','
              << detail::format_double(goal_rate) << ','
              << detail::format_double(mean_deception) << ','
              << detail::format_double(mean_pol) << ','
              << detail::format_double(mean_val) << ','
              << detail::format_double(mean_ent) << '\n';
      metrics.flush();
    }
    if (!options.checkpoint_path.empty()) {
      save_policy(summary.params, options.checkpoint_path);
    }
    ++summary.evaluations;
    summary.final_goal_rate = goal_rate;
    summary.final_mean_deception = mean_deception;
    pol_loss_sum = value_loss_sum = entropy_sum = 0.0;
    loss_samples = 0;
    train_goal = train_eps = 0;
    train_dec = 0.0;
  }
  return summary;
}

}  // namespace dpp
