#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dpp/error.hpp"
#include "dpp/graph.hpp"
#include "dpp/numeric.hpp"

namespace dpp {

// The observer watches positions only, so its rationality model reduces to
// per-goal value tables. alpha near 0 makes it an (almost) optimal planner;
// the default 0.01 is deliberate: at alpha = 1 the soft backup on 4-connected
// unit grids is dominated by the log-degree term (log 4 > 1), which inverts
// the value ordering and makes the posterior favor far goals.
struct ObserverConfig {
  double alpha = 0.01;
  double gamma_c = 0.99;
  double tolerance = 1e-6;
  int max_iterations = 10000;
};

// Soft-maximum Bellman fixed point for one goal:
//   Q(s, s') = -c(s, s') + gamma_c * V(s'),   V(s) = alpha * LSE_a(Q(s, a) / alpha)
// with the goal absorbing at value 0. Jacobi sweeps (whole table updated from
// the previous sweep) keep the result independent of node order.
inline std::vector<double> softmax_value_iteration(
    const WeightedGraph& graph, NodeId goal, const ObserverConfig& config = {}) {
  graph.require_node(goal, "softmax_value_iteration");
  if (!(config.alpha > 0.0)) {
    throw InvalidArgumentError("observer: alpha must be > 0");
  }
  if (!(config.gamma_c > 0.0) || config.gamma_c > 1.0) {
    throw InvalidArgumentError("observer: gamma_c must be in (0, 1]");
  }

  const auto n = static_cast<std::size_t>(graph.node_count());
  // Nodes with no outgoing edge have an empty soft-max; pin them to a floor
  // below any achievable value so they stay finite and maximally implausible.
  const double floor_value =
      -(graph.total_edge_weight() + 1.0) / (1.0 - std::min(config.gamma_c, 0.999999));

  std::vector<double> value(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<double> q;
  double residual = 0.0;
  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (static_cast<NodeId>(s) == goal) {
        next[s] = 0.0;
        continue;
      }
      const auto nb = graph.neighbors(static_cast<NodeId>(s));
      if (nb.empty()) {
        next[s] = floor_value;
      } else {
        q.clear();
        for (const auto& [v, w] : nb) {
          q.push_back((-w + config.gamma_c * value[static_cast<std::size_t>(v)]) /
                      config.alpha);
        }
        next[s] = std::max(config.alpha * logsumexp(q), floor_value);
      }
      residual = std::max(residual, std::abs(next[s] - value[s]));
    }
    value.swap(next);
    if (residual < config.tolerance) return value;
  }
  throw ConvergenceError("observer: value iteration did not converge", residual,
                         config.max_iterations);
}

// Per-goal value tables plus the prior; immutable once built.
struct ObserverTables {
  std::vector<NodeId> goals;
  std::vector<std::vector<double>> values;  // values[i][node] = V_{goals[i]}(node)
  std::vector<double> priors;
  ObserverConfig config;

  std::size_t goal_count() const { return goals.size(); }

  // Pr(G | trajectory) for a trajectory that started at `start` and is now at
  // `current`; depends on the endpoints only.
  std::vector<double> posterior(NodeId start, NodeId current) const {
    std::vector<double> log_mass(goals.size());
    for (std::size_t i = 0; i < goals.size(); ++i) {
      log_mass[i] = values[i][static_cast<std::size_t>(current)] -
                    values[i][static_cast<std::size_t>(start)] +
                    std::log(priors[i]);
    }
    const double shift = *std::max_element(log_mass.begin(), log_mass.end());
    if (!std::isfinite(shift)) {
      throw NumericError("observer posterior: degenerate masses");
    }
    double total = 0.0;
    std::vector<double> post(goals.size());
    for (std::size_t i = 0; i < goals.size(); ++i) {
      post[i] = std::exp(log_mass[i] - shift);
      total += post[i];
    }
    for (double& p : post) p /= total;
    return post;
  }
};

// Runs softmax value iteration once per goal. Priors default to uniform.
inline ObserverTables build_observer(const WeightedGraph& graph,
                                     std::vector<NodeId> goals,
                                     const ObserverConfig& config = {},
                                     std::vector<double> priors = {}) {
  if (goals.empty()) throw InvalidArgumentError("observer: no goals");
  if (priors.empty()) {
    priors.assign(goals.size(), 1.0 / static_cast<double>(goals.size()));
  }
  if (priors.size() != goals.size()) {
    throw InvalidArgumentError("observer: one prior per goal required");
  }
  double prior_sum = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw InvalidArgumentError("observer: priors must be > 0");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-12) {
    throw InvalidArgumentError("observer: priors must sum to 1");
  }

  ObserverTables tables;
  tables.goals = std::move(goals);
  tables.priors = std::move(priors);
  tables.config = config;
  tables.values.reserve(tables.goals.size());
  for (NodeId goal : tables.goals) {
    tables.values.push_back(softmax_value_iteration(graph, goal, config));
  }
  return tables;
}

}  // namespace dpp
