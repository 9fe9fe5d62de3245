#pragma once

#include <tuple>
#include <vector>

#include "cldg/temporal_graph.hpp"

namespace cldg::testing {

// Graph straight from (src, dst, ts) tuples; num_nodes = max endpoint + 1
// unless forced higher.
TemporalGraph graph_from_edges(const std::vector<std::tuple<Index, Index, double>>& edges,
                               Index num_nodes = 0);

// Two-community stochastic block model in time: `edges` node pairs drawn
// uniformly, inter-community pairs kept with probability 1/intra_factor, so
// intra-community pairs are intra_factor times as likely per pair. Uniform
// timestamps on [0, 100], labels = community (node < nodes/2).
TemporalGraph make_sbm(Index nodes, Index edges, double intra_factor, std::uint64_t seed);

// Random multi-edge temporal graph for small-scale oracle checks.
TemporalGraph make_random_graph(Index nodes, Index edges, std::uint64_t seed);

}  // namespace cldg::testing
