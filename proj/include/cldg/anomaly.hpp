#pragma once

#include <vector>

#include "cldg/model.hpp"
#include "cldg/rng.hpp"
#include "cldg/temporal_graph.hpp"

namespace cldg {

struct InjectionConfig {
  Index structural_cliques = 0;
  Index clique_size = 15;
  Index attribute_count = 0;
  Index candidate_k = 50;   // pool size for the farthest-feature search
  int spans = 4;            // timespan slices for attribute overrides
  Index feature_dim = 32;   // materialized bucket width when features absent
  std::uint64_t seed = 1;
};

struct InjectionResult {
  TemporalGraph graph;
  std::vector<std::uint8_t> truth;  // 1 = injected anomaly
};

// Structural anomalies: disjoint random node groups, each fully wired at one
// shared uniform timestamp. Marks members in `truth`; edits g in place.
void inject_structural(TemporalGraph& g, Index cliques, Index clique_size, Rng& rng,
                       std::vector<std::uint8_t>& truth);

// Attribute anomalies: for each target (drawn from still-normal nodes), draw
// `k` candidate nodes, copy the feature row of the Euclidean-farthest one
// (ties -> lowest node id) into one uniform span of the target.
void inject_attribute(TemporalGraph& g, Index count, Index k, int spans, Rng& rng,
                      std::vector<std::uint8_t>& truth);

// Structural then attribute injection on a copy; the result's labels field
// carries the 0/1 truth so it travels inside the container.
InjectionResult inject_anomalies(const TemporalGraph& g, const InjectionConfig& cfg);

// Collapse span overrides to their across-span mean (static fallback).
Eigen::MatrixXd static_fallback_features(const TemporalGraph& g);

struct AnomalyScores {
  std::vector<double> score;        // num_nodes; 0 when under-observed
  std::vector<std::uint8_t> flags;  // 1 = active in fewer than two views
  std::vector<int> views_used;
};

// Mean + population std of cosine distance over all ordered pairs of the
// given per-view embeddings (>= 2 required). Zero-length embeddings count as
// maximally distant.
double pairwise_consistency(const std::vector<Eigen::RowVectorXd>& zs);

// Temporal-consistency discriminator: encode the s sequential windows with
// the local encoder, then score each node by pairwise_consistency of its
// per-view embeddings.
AnomalyScores anomaly_scores(const TemporalGraph& g, const ModelParams& params, Index s,
                             int threads = 1);

// Rank AUC of scores against binary truth; tied scores count 1/2.
double auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& truth);

}  // namespace cldg
