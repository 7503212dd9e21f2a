#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpp/error.hpp"
#include "dpp/graph.hpp"
#include "dpp/numeric.hpp"
#include "dpp/rng.hpp"
#include "json.hpp"

namespace dpp {

struct PolicyConfig {
  int num_layers = 4;  // message-passing depth == perception radius
  int hidden_dim = 64;
  int input_dim = 4;  // |goals| + 2 attribute entries
  std::optional<int> neighbor_sample_cap;  // unset: pool over all neighbors

  void validate() const {
    if (num_layers < 1) throw ConfigError("policy: num_layers must be >= 1");
    if (hidden_dim < 1) throw ConfigError("policy: hidden_dim must be >= 1");
    if (input_dim < 3) throw ConfigError("policy: input_dim must be >= 3");
    if (neighbor_sample_cap && *neighbor_sample_cap < 1) {
      throw ConfigError("policy: neighbor_sample_cap must be >= 1");
    }
  }

  bool operator==(const PolicyConfig&) const = default;
};

struct LayerParameters {
  Eigen::MatrixXd w_pool;
  Eigen::VectorXd b_pool;
  Eigen::MatrixXd w_self;
  Eigen::MatrixXd w_neigh;
  Eigen::VectorXd b;
};

struct PolicyParameters {
  PolicyConfig config;
  Eigen::MatrixXd w_in;  // hidden x input
  Eigen::VectorXd b_in;
  std::vector<LayerParameters> layers;
  Eigen::VectorXd w_policy;  // per-edge logit head
  double b_policy = 0.0;
  Eigen::VectorXd w_value;  // state-value head
  double b_value = 0.0;
};

// Mutable view over every parameter tensor, in a stable order shared by the
// optimizer, serialization, and gradient checks. `decays` marks weight
// matrices/vectors (biases are exempt from weight decay).
struct TensorView {
  std::string name;
  double* data;
  std::ptrdiff_t size;
  bool decays;
};

inline std::vector<TensorView> tensor_views(PolicyParameters& p) {
  std::vector<TensorView> views;
  views.push_back({"w_in", p.w_in.data(), p.w_in.size(), true});
  views.push_back({"b_in", p.b_in.data(), p.b_in.size(), false});
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    const std::string tag = "layer" + std::to_string(l) + ".";
    views.push_back({tag + "w_pool", layer.w_pool.data(), layer.w_pool.size(), true});
    views.push_back({tag + "b_pool", layer.b_pool.data(), layer.b_pool.size(), false});
    views.push_back({tag + "w_self", layer.w_self.data(), layer.w_self.size(), true});
    views.push_back({tag + "w_neigh", layer.w_neigh.data(), layer.w_neigh.size(), true});
    views.push_back({tag + "b", layer.b.data(), layer.b.size(), false});
  }
  views.push_back({"w_policy", p.w_policy.data(), p.w_policy.size(), true});
  views.push_back({"b_policy", &p.b_policy, 1, false});
  views.push_back({"w_value", p.w_value.data(), p.w_value.size(), true});
  views.push_back({"b_value", &p.b_value, 1, false});
  return views;
}

inline PolicyParameters zeros_like_policy(const PolicyConfig& config) {
  config.validate();
  PolicyParameters p;
  p.config = config;
  const int h = config.hidden_dim;
  p.w_in = Eigen::MatrixXd::Zero(h, config.input_dim);
  p.b_in = Eigen::VectorXd::Zero(h);
  p.layers.resize(static_cast<std::size_t>(config.num_layers));
  for (auto& layer : p.layers) {
    layer.w_pool = Eigen::MatrixXd::Zero(h, h);
    layer.b_pool = Eigen::VectorXd::Zero(h);
    layer.w_self = Eigen::MatrixXd::Zero(h, h);
    layer.w_neigh = Eigen::MatrixXd::Zero(h, h);
    layer.b = Eigen::VectorXd::Zero(h);
  }
  p.w_policy = Eigen::VectorXd::Zero(h);
  p.b_policy = 0.0;
  p.w_value = Eigen::VectorXd::Zero(h);
  p.b_value = 0.0;
  return p;
}

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
inline PolicyParameters init_policy(const PolicyConfig& config, uint64_t seed) {
  PolicyParameters p = zeros_like_policy(config);
  Rng rng(seed);
  const auto fill = [&rng](Eigen::Ref<Eigen::MatrixXd> m, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = rng.uniform(-bound, bound);
      }
    }
  };
  const int h = config.hidden_dim;
  fill(p.w_in, config.input_dim, h);
  for (auto& layer : p.layers) {
    fill(layer.w_pool, h, h);
    fill(layer.w_self, h, h);
    fill(layer.w_neigh, h, h);
  }
  fill(p.w_policy, h, 1);
  fill(p.w_value, h, 1);
  return p;
}

struct PolicyOutput {
  std::vector<double> logits;  // one per incident edge, sorted neighbor order
  double value = 0.0;
};

// Everything backward needs: inputs, per-layer activations, and the winning
// pool contributor per (channel, node); -1 marks an empty pooling set.
struct ForwardTrace {
  Eigen::MatrixXd x;                    // input x n
  std::vector<Eigen::MatrixXd> h;       // num_layers+1 matrices, hidden x n
  std::vector<Eigen::MatrixXd> z;       // relu(w_pool h + b_pool) per layer
  std::vector<Eigen::MatrixXd> p;       // pooled features per layer
  std::vector<Eigen::MatrixXi> winner;  // argmax source per (channel, node)
  int agent_local = -1;
  PolicyOutput output;
};

namespace detail {

// The pooling source set for one node: all neighbors, or a capped subset
// (sampled without replacement when an rng is supplied, lowest ids otherwise).
inline void pooling_sources(const WeightedGraph& g, NodeId v,
                            const std::optional<int>& cap, Rng* rng,
                            std::vector<int>& out) {
  out.clear();
  const auto nb = g.neighbors(v);
  for (const auto& n : nb) out.push_back(n.node);
  if (cap && static_cast<int>(out.size()) > *cap) {
    if (rng != nullptr) {
      rng->shuffle(out);
      out.resize(static_cast<std::size_t>(*cap));
      std::sort(out.begin(), out.end());
    } else {
      out.resize(static_cast<std::size_t>(*cap));
    }
  }
}

}  // namespace detail

// Runs the network on a visibility subgraph. attributes[v] feeds local node v;
// logits come out in the order of the agent node's sorted neighbor list.
inline ForwardTrace policy_forward(
    const PolicyParameters& params, const Subgraph& view,
    std::span<const std::vector<double>> attributes, int agent_local,
    Rng* sample_rng = nullptr) {
  const PolicyConfig& config = params.config;
  config.validate();
  const int n = view.graph.node_count();
  if (agent_local < 0 || agent_local >= n) {
    throw InvalidArgumentError("policy forward: agent node outside subgraph");
  }
  if (static_cast<int>(attributes.size()) != n) {
    throw ConfigError("policy forward: one attribute vector per node required");
  }
  if (view.graph.degree(agent_local) == 0) {
    throw DataError("policy forward: agent node has no incident edges");
  }

  ForwardTrace trace;
  trace.agent_local = agent_local;
  trace.x.resize(config.input_dim, n);
  for (int v = 0; v < n; ++v) {
    if (static_cast<int>(attributes[static_cast<std::size_t>(v)].size()) !=
        config.input_dim) {
      throw ConfigError("policy forward: attribute vector has wrong length");
    }
    for (int i = 0; i < config.input_dim; ++i) {
      trace.x(i, v) = attributes[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
    }
  }

  const int h = config.hidden_dim;
  trace.h.reserve(static_cast<std::size_t>(config.num_layers) + 1);
  trace.h.push_back((params.w_in * trace.x).colwise() + params.b_in);

  std::vector<int> sources;
  for (int l = 0; l < config.num_layers; ++l) {
    const auto& layer = params.layers[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd& prev = trace.h.back();

    Eigen::MatrixXd z =
        ((layer.w_pool * prev).colwise() + layer.b_pool).cwiseMax(0.0);
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(h, n);
    Eigen::MatrixXi winner = Eigen::MatrixXi::Constant(h, n, -1);
    for (int v = 0; v < n; ++v) {
      detail::pooling_sources(view.graph, v, config.neighbor_sample_cap,
                              sample_rng, sources);
      for (int u : sources) {
        for (int c = 0; c < h; ++c) {
          if (winner(c, v) < 0 || z(c, u) > pooled(c, v)) {
            pooled(c, v) = z(c, u);
            winner(c, v) = u;
          }
        }
      }
    }
    trace.h.push_back((((layer.w_self * prev) + (layer.w_neigh * pooled))
                           .colwise() +
                       layer.b)
                          .cwiseMax(0.0));
    trace.z.push_back(std::move(z));
    trace.p.push_back(std::move(pooled));
    trace.winner.push_back(std::move(winner));
  }

  const Eigen::MatrixXd& final_h = trace.h.back();
  trace.output.value =
      params.w_value.dot(final_h.col(agent_local)) + params.b_value;
  const auto nb = view.graph.neighbors(agent_local);
  trace.output.logits.reserve(nb.size());
  for (const auto& neighbor : nb) {
    trace.output.logits.push_back(
        params.w_policy.dot(final_h.col(neighbor.node)) + params.b_policy);
  }
  for (double logit : trace.output.logits) {
    if (!std::isfinite(logit)) throw NumericError("policy forward", "logits");
  }
  if (!std::isfinite(trace.output.value)) {
    throw NumericError("policy forward", "value");
  }
  return trace;
}

// Exact reverse pass. logit_seed[i] = dLoss/dlogits[i] (agent's sorted
// neighbor order), value_seed = dLoss/dvalue. Max-pool routes gradient to the
// recorded winner; relu passes gradient only where activations are positive.
inline PolicyParameters policy_backward(const PolicyParameters& params,
                                        const Subgraph& view,
                                        const ForwardTrace& trace,
                                        std::span<const double> logit_seed,
                                        double value_seed) {
  const PolicyConfig& config = params.config;
  const int n = view.graph.node_count();
  const int h = config.hidden_dim;
  const auto nb = view.graph.neighbors(trace.agent_local);
  if (logit_seed.size() != nb.size()) {
    throw InvalidArgumentError("policy backward: one seed per incident edge");
  }

  PolicyParameters grad = zeros_like_policy(config);
  const Eigen::MatrixXd& final_h = trace.h.back();

  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(h, n);
  dh.col(trace.agent_local) += value_seed * params.w_value;
  grad.w_value += value_seed * final_h.col(trace.agent_local);
  grad.b_value += value_seed;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const int u = nb[i].node;
    dh.col(u) += logit_seed[i] * params.w_policy;
    grad.w_policy += logit_seed[i] * final_h.col(u);
    grad.b_policy += logit_seed[i];
  }

  for (int l = config.num_layers - 1; l >= 0; --l) {
    const auto& layer = params.layers[static_cast<std::size_t>(l)];
    auto& layer_grad = grad.layers[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd& prev = trace.h[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd& out = trace.h[static_cast<std::size_t>(l) + 1];
    const Eigen::MatrixXd& z = trace.z[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd& pooled = trace.p[static_cast<std::size_t>(l)];
    const Eigen::MatrixXi& winner = trace.winner[static_cast<std::size_t>(l)];

    // h^{l+1} = relu(s); out > 0 iff s > 0
    const Eigen::MatrixXd ds =
        dh.cwiseProduct((out.array() > 0.0).cast<double>().matrix());
    layer_grad.w_self += ds * prev.transpose();
    layer_grad.w_neigh += ds * pooled.transpose();
    layer_grad.b += ds.rowwise().sum();

    Eigen::MatrixXd dprev = layer.w_self.transpose() * ds;
    const Eigen::MatrixXd dpool = layer.w_neigh.transpose() * ds;

    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(h, n);
    for (int v = 0; v < n; ++v) {
      for (int c = 0; c < h; ++c) {
        const int src = winner(c, v);
        if (src >= 0) dz(c, src) += dpool(c, v);
      }
    }
    const Eigen::MatrixXd dq =
        dz.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    layer_grad.w_pool += dq * prev.transpose();
    layer_grad.b_pool += dq.rowwise().sum();
    dprev += layer.w_pool.transpose() * dq;

    dh = std::move(dprev);
  }

  grad.w_in += dh * trace.x.transpose();
  grad.b_in += dh.rowwise().sum();

  for (const auto& view_entry : tensor_views(grad)) {
    for (std::ptrdiff_t i = 0; i < view_entry.size; ++i) {
      if (!std::isfinite(view_entry.data[i])) {
        throw NumericError("policy backward", view_entry.name);
      }
    }
  }
  return grad;
}

struct ActionChoice {
  int index = 0;
  double log_prob = 0.0;
};

inline ActionChoice sample_action(const PolicyOutput& output, Rng& rng) {
  const auto probs = softmax(output.logits);
  const int index = static_cast<int>(rng.categorical(probs));
  return {index, log_softmax_at(output.logits, index)};
}

inline ActionChoice greedy_action(const PolicyOutput& output) {
  const int index = static_cast<int>(argmax_lowest(output.logits));
  return {index, log_softmax_at(output.logits, index)};
}

// --- checkpoint format ------------------------------------------------------
// magic | u32 header length | JSON header | row-major float64 arrays.
// The header records the config, per-array shapes, byte offsets into the
// payload, and FNV-1a 64 checksums.

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'D', 'P', 'P', 'C',
                                             'K', 'P', 'T', '1'};

inline uint64_t fnv1a64(const unsigned char* data, std::size_t size) {
  uint64_t hash = 14695981039346656037ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= data[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

}  // namespace detail

inline void save_policy(const PolicyParameters& params,
                        const std::string& path) {
  auto& mutable_params = const_cast<PolicyParameters&>(params);
  const auto views = tensor_views(mutable_params);

  nlohmann::json header;
  header["format_version"] = 1;
  header["config"] = {
      {"num_layers", params.config.num_layers},
      {"hidden_dim", params.config.hidden_dim},
      {"input_dim", params.config.input_dim},
  };
  if (params.config.neighbor_sample_cap) {
    header["config"]["neighbor_sample_cap"] = *params.config.neighbor_sample_cap;
  }
  header["arrays"] = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& view : views) {
    const auto bytes = static_cast<uint64_t>(view.size) * sizeof(double);
    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(
                      reinterpret_cast<const unsigned char*>(view.data),
                      static_cast<std::size_t>(bytes))));
    header["arrays"].push_back({{"name", view.name},
                                {"count", view.size},
                                {"offset", offset},
                                {"fnv1a64", checksum}});
    offset += bytes;
  }
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
  out.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
  const auto header_len = static_cast<uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& view : views) {
    out.write(reinterpret_cast<const char*>(view.data),
              static_cast<std::streamsize>(view.size * sizeof(double)));
  }
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

inline PolicyParameters load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);

  char magic[sizeof detail::kCheckpointMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof magic) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  uint32_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in) throw DataError("checkpoint: truncated header in " + path);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (!in) throw DataError("checkpoint: truncated header in " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: unparseable header: ") + e.what());
  }
  if (header.value("format_version", -1) != 1) {
    throw DataError("checkpoint: unsupported format version");
  }

  PolicyConfig config;
  config.num_layers = header["config"].value("num_layers", 0);
  config.hidden_dim = header["config"].value("hidden_dim", 0);
  config.input_dim = header["config"].value("input_dim", 0);
  if (header["config"].contains("neighbor_sample_cap")) {
    config.neighbor_sample_cap = header["config"]["neighbor_sample_cap"].get<int>();
  }
  PolicyParameters params = zeros_like_policy(config);
  const auto views = tensor_views(params);
  if (!header.contains("arrays") ||
      header["arrays"].size() != views.size()) {
    throw DataError("checkpoint: array manifest does not match config shapes");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& entry = header["arrays"][i];
    if (entry.value("name", "") != views[i].name ||
        entry.value("count", int64_t{-1}) !=
            static_cast<int64_t>(views[i].size)) {
      throw DataError("checkpoint: array " + views[i].name +
                      " missing or has wrong shape");
    }
    in.read(reinterpret_cast<char*>(views[i].data),
            static_cast<std::streamsize>(views[i].size * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated payload in " + path);
    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(
                      reinterpret_cast<const unsigned char*>(views[i].data),
                      static_cast<std::size_t>(views[i].size) * sizeof(double))));
    if (entry.value("fnv1a64", "") != checksum) {
      throw DataError("checkpoint: checksum mismatch for " + views[i].name);
    }
  }
  return params;
}

}  // namespace dpp
