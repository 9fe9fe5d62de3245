#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cldg/sparse.hpp"

namespace cldg {

struct TemporalEdge {
  Index src = 0;
  Index dst = 0;
  double ts = 0.0;
};

// Sparse per-timespan feature overrides layered over the static feature
// matrix: (span, node) -> replacement row. Spans partition the graph's full
// time range into `num_spans` equal slices; a view resolves features through
// the span its center falls in.
class TimespanFeatures {
 public:
  explicit TimespanFeatures(int num_spans) : num_spans_(num_spans) {}

  int num_spans() const { return num_spans_; }
  void set_override(int span, Index node, Eigen::VectorXd row);
  const Eigen::VectorXd* find(int span, Index node) const;
  const std::map<std::pair<int, Index>, Eigen::VectorXd>& overrides() const {
    return overrides_;
  }

 private:
  int num_spans_;
  std::map<std::pair<int, Index>, Eigen::VectorXd> overrides_;
};

struct TemporalGraph {
  Index num_nodes = 0;
  std::vector<TemporalEdge> edges;
  std::optional<Eigen::MatrixXd> features;      // num_nodes x d
  std::optional<std::vector<int>> labels;       // num_nodes, -1 = unlabeled
  std::vector<std::string> node_names;          // original ids; may be empty
  std::optional<TimespanFeatures> span_features;

  double min_ts() const;
  double max_ts() const;
  double timespan() const { return max_ts() - min_ts(); }  // delta-t
  std::vector<Index> degrees() const;  // multiset degree over all edges
  void validate() const;               // invariants -> DataError
};

enum class WindowBounds {
  Closed,    // lo <= ts <= hi
  HalfOpen,  // lo <= ts <  hi
};

struct GraphView {
  double center = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool hi_inclusive = true;
  std::vector<Index> active_nodes;  // sorted global ids
  SparseMatrix local_adj;           // symmetric, unit weights, local indices
  Index num_edges = 0;              // retained temporal edges (multiset count)

  Index local_index(Index global_node) const;  // -1 when not active
};

// Text ingestion: src/dst/ts per line (tab or comma separated), arbitrary
// string node ids mapped to dense indices in first-appearance order.
TemporalGraph ingest_edge_list(const std::filesystem::path& edge_path,
                               const std::optional<std::filesystem::path>& feature_path = {},
                               const std::optional<std::filesystem::path>& label_path = {});

// One-hot degree-bucket features: bucket = min(dim-1, floor(log2(1+deg))).
Eigen::MatrixXd default_features(const TemporalGraph& g, Index dim);

// Window of width timespan/s centered on `center`; center must lie within
// [min+w/2, max-w/2]. Closed bounds are the standalone contract; samplers
// pass HalfOpen so that consecutive windows partition edges.
GraphView induce_view(const TemporalGraph& g, double center, Index s,
                      WindowBounds bounds = WindowBounds::Closed);

// Feature rows for `nodes`, resolving span overrides via the view center.
Eigen::MatrixXd view_feature_rows(const TemporalGraph& g, const Eigen::MatrixXd& base,
                                  const std::vector<Index>& nodes, double center);

// Index of the span containing `center` among `num_spans` equal slices.
int span_of(const TemporalGraph& g, double center, int num_spans);

// Binary graph container (magic TGV1).
void save_graph(const TemporalGraph& g, const std::filesystem::path& path);
TemporalGraph load_graph(const std::filesystem::path& path);

}  // namespace cldg
