#pragma once

#include <cmath>
#include <cstdint>

#include "dpp/error.hpp"
#include "dpp/policy.hpp"

namespace dpp {

struct AdamConfig {
  double learning_rate = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 4e-4;  // decoupled; applied to weights, never biases
};

inline void add_scaled(PolicyParameters& dst, const PolicyParameters& src,
                       double scale = 1.0) {
  auto d = tensor_views(dst);
  auto s = tensor_views(const_cast<PolicyParameters&>(src));
  if (d.size() != s.size()) {
    throw InternalError("add_scaled: tensor layout mismatch");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].size != s[i].size) {
      throw InternalError("add_scaled: size mismatch for " + d[i].name);
    }
    for (std::size_t j = 0; j < d[i].size; ++j) {
      d[i].data[j] += scale * s[i].data[j];
    }
  }
}

inline double gradient_norm(const PolicyParameters& gradients) {
  auto views = tensor_views(const_cast<PolicyParameters&>(gradients));
  double sum = 0.0;
  for (const auto& view : views) {
    for (std::size_t j = 0; j < view.size; ++j) {
      sum += view.data[j] * view.data[j];
    }
  }
  return std::sqrt(sum);
}

// Scales gradients in place so the global L2 norm is at most max_norm;
// returns the pre-clip norm.
inline double clip_gradient_norm(PolicyParameters& gradients, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw ConfigError("gradient clip: max norm must be positive");
  }
  const double norm = gradient_norm(gradients);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    auto views = tensor_views(gradients);
    for (auto& view : views) {
      for (std::size_t j = 0; j < view.size; ++j) view.data[j] *= scale;
    }
  }
  return norm;
}

class AdamW {
 public:
  explicit AdamW(const PolicyConfig& shape, const AdamConfig& config = {})
      : config_(config),
        first_moment_(zeros_like_policy(shape)),
        second_moment_(zeros_like_policy(shape)) {
    if (!(config.learning_rate > 0.0)) {
      throw ConfigError("adam: learning rate must be positive");
    }
    if (!(config.beta1 >= 0.0 && config.beta1 < 1.0)) {
      throw ConfigError("adam: beta1 outside [0, 1)");
    }
    if (!(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
      throw ConfigError("adam: beta2 outside [0, 1)");
    }
    if (!(config.epsilon > 0.0)) {
      throw ConfigError("adam: epsilon must be positive");
    }
    if (config.weight_decay < 0.0) {
      throw ConfigError("adam: weight decay must be non-negative");
    }
  }

  // theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta),
  // with the decay term restricted to tensors marked as decaying.
  void step(PolicyParameters& params, const PolicyParameters& gradients) {
    if (!(params.config == first_moment_.config) ||
        !(gradients.config == first_moment_.config)) {
      throw ConfigError("adam: parameter shape mismatch");
    }
    ++count_;
    const double bias1 =
        1.0 - std::pow(config_.beta1, static_cast<double>(count_));
    const double bias2 =
        1.0 - std::pow(config_.beta2, static_cast<double>(count_));
    auto p = tensor_views(params);
    auto g = tensor_views(const_cast<PolicyParameters&>(gradients));
    auto m = tensor_views(first_moment_);
    auto v = tensor_views(second_moment_);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool decays = p[i].decays;
      for (std::size_t j = 0; j < p[i].size; ++j) {
        const double grad = g[i].data[j];
        double& m_j = m[i].data[j];
        double& v_j = v[i].data[j];
        m_j = config_.beta1 * m_j + (1.0 - config_.beta1) * grad;
        v_j = config_.beta2 * v_j + (1.0 - config_.beta2) * grad * grad;
        const double m_hat = m_j / bias1;
        const double v_hat = v_j / bias2;
        double update = m_hat / (std::sqrt(v_hat) + config_.epsilon);
        if (decays) update += config_.weight_decay * p[i].data[j];
        p[i].data[j] -= config_.learning_rate * update;
      }
    }
  }

  std::int64_t step_count() const { return count_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t count_ = 0;
  PolicyParameters first_moment_;
  PolicyParameters second_moment_;
};

}  // namespace dpp
