#pragma once

#include <string>
#include <vector>

#include "cldg/diffusion.hpp"
#include "cldg/loss.hpp"
#include "cldg/model.hpp"
#include "cldg/view_sampler.hpp"

namespace cldg {

struct TrainConfig {
  SamplerConfig sampler;
  DiffusionConfig diffusion;
  ContrastMode mode = ContrastMode::Cldg;
  Index epochs = 200;
  Index batch_size = 256;
  double lr = 4e-3;
  double weight_decay = 5e-4;
  double tau = 0.1;
  double w_local_local = 1.0;
  double w_global_global = 1.0;
  double w_local_global = 1.0;
  Index d_hidden = 128;
  Index d_out = 64;
  Index feature_dim = 32;  // degree-bucket width when the graph has no features
  Index node_cap = 50000;  // views above this are neighbor-sampled down
  Index neighbor_fanout = 10;
  Index batch_retries = 20;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
  // Sorted key=value lines; hashed into output headers and embedded in
  // checkpoints so a run's provenance travels with its artifacts.
  std::string canonical_string() const;
};

// Classic first/second-moment optimizer state (beta1 0.9, beta2 0.999,
// eps 1e-8); weight decay is added to the gradient before the moments.
struct AdamState {
  ModelTensors m;
  ModelTensors u;
  std::int64_t step = 0;

  static AdamState init(const ModelConfig& cfg);
};

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               double weight_decay);

struct EpochLog {
  Index epoch = 0;  // 1-based
  double loss = 0.0;
  double step_ms = 0.0;
};

struct TrainStats {
  std::uint64_t diffusion_requests = 0;
  std::uint64_t diffusion_computes = 0;  // cache misses
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  TrainStats stats;
};

TrainResult train(const TemporalGraph& g, const TrainConfig& cfg);

// Base feature matrix for a graph under this config (stored features, or
// degree buckets of width cfg.feature_dim).
Eigen::MatrixXd base_features(const TemporalGraph& g, const TrainConfig& cfg);

}  // namespace cldg
