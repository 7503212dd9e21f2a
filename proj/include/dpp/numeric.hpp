#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dpp/error.hpp"

namespace dpp {

// Overflow-safe log(sum(exp(x_i))). Empty input yields -inf.
inline double logsumexp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = xs[0];
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf, or a stray +-inf propagates
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

// Max-shifted softmax over raw logits.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgumentError("softmax: empty logits");
  double m = logits[0];
  for (double x : logits) m = std::max(m, x);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// log softmax(logits)[index]
inline double log_softmax_at(std::span<const double> logits, int index) {
  return logits[static_cast<std::size_t>(index)] - logsumexp(logits);
}

// Entropy of softmax(logits), in nats.
inline double softmax_entropy(std::span<const double> logits) {
  const std::vector<double> p = softmax(logits);
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

inline int argmax_lowest(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgumentError("argmax: empty input");
  int best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace dpp
