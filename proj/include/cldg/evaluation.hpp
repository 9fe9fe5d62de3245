#pragma once

#include <vector>

#include "cldg/model.hpp"
#include "cldg/temporal_graph.hpp"

namespace cldg {

// Feature matrix an inference pass feeds the encoder: the graph's stored
// features (width-checked against the model) or degree buckets of width d_in.
Eigen::MatrixXd inference_features(const TemporalGraph& g, const ModelParams& params);

struct GridEncoding {
  std::vector<GraphView> views;        // the s sequential windows
  std::vector<Eigen::MatrixXd> z;      // local projections per view
};

// Encodes every window of the s-slice sequential grid with the local encoder.
GridEncoding encode_sequential_grid(const TemporalGraph& g, const ModelParams& params,
                                    Index s);

struct EmbeddingResult {
  Eigen::MatrixXd embeddings;       // num_nodes x d_out
  std::vector<std::uint8_t> flags;  // 1 = never active / degenerate mean
};

// Node representation = mean of its per-view projections, re-normalized to
// unit length. Never-active nodes and means that cancel to ~zero stay at the
// zero vector and are flagged.
EmbeddingResult final_embeddings(const TemporalGraph& g, const ModelParams& params, Index s);

struct SplitSpec {
  Index train_parts = 1;
  Index val_parts = 1;
  Index test_parts = 8;
  bool stratified = true;
  std::uint64_t seed = 1;
};

struct Split {
  std::vector<Index> train, val, test;  // node ids, ascending
};

// Partition of the labeled nodes with every subset size within one of its
// exact proportional share; stratified mode additionally lands each class's
// share proportionally and guarantees at least one training node per class.
Split make_split(const std::vector<int>& labels, const SplitSpec& spec);

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Per-class F1 averaged with support weights; a class with zero precision
// and recall contributes 0.
double weighted_f1(const std::vector<int>& pred, const std::vector<int>& truth);

struct ProbeResult {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::vector<Index> test_nodes;
  std::vector<int> test_pred;
  Index best_epoch = 0;
};

// Frozen-embedding softmax probe: full-batch optimizer (lr 1e-2, weight
// decay 1e-4, 300 epochs), parameters checkpointed at the best validation
// accuracy (earliest epoch wins ties), metrics reported on the test split.
// The fit only ever sees train/val labels.
ProbeResult linear_probe(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                         const SplitSpec& spec);

}  // namespace cldg
