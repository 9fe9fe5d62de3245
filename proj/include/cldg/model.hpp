#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <string>

#include "cldg/rng.hpp"
#include "cldg/sparse.hpp"

namespace cldg {

enum class Scope { Local, Global };

struct ModelConfig {
  Index d_in = 0;
  Index d_hidden = 128;
  Index d_out = 64;
  double leaky_slope = 0.2;
};

// The 8 trainable tensors: two non-shared two-layer encoders (local contrasts
// the plain graph, global contrasts the diffusion operator) plus one
// projection head per scope. Biases live only in the projection heads.
struct ModelTensors {
  Eigen::MatrixXd local_w1, local_w2;    // d_in x d_h, d_h x d_h
  Eigen::MatrixXd global_w1, global_w2;  // same shapes
  Eigen::MatrixXd proj_local_w, proj_global_w;  // d_h x d_out
  Eigen::MatrixXd proj_local_b, proj_global_b;  // 1 x d_out

  static constexpr int kCount = 8;
  std::array<Eigen::MatrixXd*, kCount> tensors();
  std::array<const Eigen::MatrixXd*, kCount> tensors() const;
  static std::array<const char*, kCount> names();
};

struct ModelParams : ModelTensors {
  ModelConfig config;

  // Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)) per weight matrix,
  // zero biases. Each tensor draws from its own substream so shapes don't
  // shift each other's values.
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

  Index param_count() const;
};

using ParamGrads = ModelTensors;
ParamGrads zero_grads(const ModelConfig& cfg);

// Everything backward needs: inputs after propagation, pre-activations, and
// the projection chain. `prop` must outlive the cache (the trainer owns it).
struct EncodeCache {
  Scope scope = Scope::Local;
  const SparseMatrix* prop = nullptr;
  Eigen::MatrixXd px;        // P X
  Eigen::MatrixXd pre1;      // P X W1
  Eigen::MatrixXd act1;      // leaky(pre1)
  Eigen::MatrixXd pact1;     // P act1
  Eigen::MatrixXd pre2;      // P act1 W2
  Eigen::MatrixXd h;         // leaky(pre2)
  Eigen::MatrixXd proj_pre;  // H Wp + b
  Eigen::MatrixXd proj_act;  // leaky(proj_pre)
  Eigen::VectorXd norms;     // row norms of proj_act
  Eigen::MatrixXd z;         // row-normalized projection
};

// Two propagation layers: H = leaky(P leaky(P X W1) W2).
Eigen::MatrixXd forward(const ModelParams& p, const SparseMatrix& prop,
                        const Eigen::MatrixXd& x, Scope scope, EncodeCache* cache = nullptr);

// Projection head: z = rownorm(leaky(H Wp + b)); all-zero rows stay zero.
Eigen::MatrixXd project(const ModelParams& p, const Eigen::MatrixXd& h, Scope scope,
                        EncodeCache* cache = nullptr);

// forward + project with a full cache.
EncodeCache encode(const ModelParams& p, const SparseMatrix& prop, const Eigen::MatrixXd& x,
                   Scope scope);

// Accumulates exact gradients of all tensors given dLoss/dz.
void backward(const ModelParams& p, const EncodeCache& cache, const Eigen::MatrixXd& dz,
              ParamGrads& grads);

// Checkpoint container (magic CLD1): shapes, weights, and the canonical
// config string of the run that produced it.
void save_checkpoint(const ModelParams& p, const std::string& config_text,
                     const std::filesystem::path& path);
std::pair<ModelParams, std::string> load_checkpoint(const std::filesystem::path& path);

}  // namespace cldg
