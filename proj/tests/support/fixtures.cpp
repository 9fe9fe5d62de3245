#include "support/fixtures.hpp"

#include <algorithm>

#include "cldg/rng.hpp"

namespace cldg::testing {

TemporalGraph graph_from_edges(const std::vector<std::tuple<Index, Index, double>>& edges,
                               Index num_nodes) {
  TemporalGraph g;
  for (const auto& [s, d, ts] : edges) {
    g.edges.push_back({s, d, ts});
    num_nodes = std::max({num_nodes, s + 1, d + 1});
  }
  g.num_nodes = num_nodes;
  return g;
}

TemporalGraph make_sbm(Index nodes, Index edges, double intra_factor, std::uint64_t seed) {
  Rng rng(seed);
  TemporalGraph g;
  g.num_nodes = nodes;
  g.edges.reserve(static_cast<std::size_t>(edges));
  const Index half = nodes / 2;
  const double keep_inter = 1.0 / intra_factor;
  while (static_cast<Index>(g.edges.size()) < edges) {
    auto u = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(nodes)));
    auto v = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(nodes)));
    if (u == v) continue;
    const bool intra = (u < half) == (v < half);
    if (!intra && rng.uniform01() >= keep_inter) continue;
    g.edges.push_back({u, v, rng.uniform(0.0, 100.0)});
  }
  std::vector<int> labels(static_cast<std::size_t>(nodes));
  for (Index i = 0; i < nodes; ++i) labels[static_cast<std::size_t>(i)] = i < half ? 0 : 1;
  g.labels = std::move(labels);
  // Fixed-width features: per-node noise plus a community mean shift that is
  // too weak for a raw-feature probe but amplified by neighborhood averaging,
  // so classification quality hinges on propagation over the graph.
  Rng feat_rng = Rng::derive(seed, {0xfea7});
  const double shift = 0.12;
  Eigen::MatrixXd x(nodes, 32);
  for (Index i = 0; i < nodes; ++i)
    for (Index j = 0; j < 32; ++j)
      x(i, j) = feat_rng.uniform(-1.0, 1.0) + (i < half ? shift : -shift);
  g.features = std::move(x);
  return g;
}

TemporalGraph make_random_graph(Index nodes, Index edges, std::uint64_t seed) {
  Rng rng(seed);
  TemporalGraph g;
  g.num_nodes = nodes;
  for (Index e = 0; e < edges; ++e) {
    auto u = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(nodes)));
    auto v = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(nodes)));
    if (u == v) v = (v + 1) % nodes;
    g.edges.push_back({u, v, rng.uniform(0.0, 10.0)});
  }
  // Anchor the span so every draw has timespan > 0.
  if (!g.edges.empty()) {
    g.edges.front().ts = 0.0;
    g.edges.back().ts = 10.0;
  }
  return g;
}

}  // namespace cldg::testing
