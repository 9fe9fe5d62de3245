#include "cldg/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cldg/evaluation.hpp"

namespace cldg {

namespace {
constexpr std::uint64_t kStreamInject = 0x696e6a6563ull;
}

void inject_structural(TemporalGraph& g, Index cliques, Index clique_size, Rng& rng,
                       std::vector<std::uint8_t>& truth) {
  if (cliques < 1) return;
  if (clique_size < 2) throw UsageError("inject: clique size must be >= 2");
  const Index total = cliques * clique_size;
  if (total > g.num_nodes)
    throw UsageError("inject: " + std::to_string(total) +
                     " clique slots exceed node count " + std::to_string(g.num_nodes));
  truth.resize(static_cast<std::size_t>(g.num_nodes), 0);
  const double lo = g.min_ts(), hi = g.max_ts();

  // One global shuffle, consumed in clique-size chunks, keeps the groups
  // disjoint and each group a uniform random subset.
  std::vector<Index> pool(static_cast<std::size_t>(g.num_nodes));
  std::iota(pool.begin(), pool.end(), Index{0});
  rng.partial_shuffle(pool, total);
  for (Index c = 0; c < cliques; ++c) {
    std::vector<Index> members(pool.begin() + c * clique_size,
                               pool.begin() + (c + 1) * clique_size);
    std::sort(members.begin(), members.end());
    const double ts = rng.uniform(lo, hi);  // the whole clique shares one time
    for (std::size_t i = 0; i < members.size(); ++i) {
      truth[static_cast<std::size_t>(members[i])] = 1;
      for (std::size_t j = i + 1; j < members.size(); ++j)
        g.edges.push_back({members[i], members[j], ts});
    }
  }
}

void inject_attribute(TemporalGraph& g, Index count, Index k, int spans, Rng& rng,
                      std::vector<std::uint8_t>& truth) {
  if (count < 1) return;
  if (!g.features) throw DataError("inject: attribute anomalies need a feature matrix");
  if (spans < 1) throw UsageError("inject: spans must be >= 1");
  if (k < 1 || k > g.num_nodes - 1)
    throw UsageError("inject: candidate pool k must be in [1, num_nodes-1]");
  truth.resize(static_cast<std::size_t>(g.num_nodes), 0);

  std::vector<Index> eligible;
  for (Index i = 0; i < g.num_nodes; ++i)
    if (!truth[static_cast<std::size_t>(i)]) eligible.push_back(i);
  if (count > static_cast<Index>(eligible.size()))
    throw UsageError("inject: not enough normal nodes for " + std::to_string(count) +
                     " attribute anomalies");
  auto target_idx = rng.sample_without_replacement(static_cast<Index>(eligible.size()), count);

  if (!g.span_features) g.span_features.emplace(spans);
  if (g.span_features->num_spans() != spans)
    throw DataError("inject: graph already carries a different span partition");
  const Eigen::MatrixXd& x = *g.features;

  for (Index ti : target_idx) {
    const Index target = eligible[static_cast<std::size_t>(ti)];
    // k candidates drawn from all other nodes; index shift skips the target
    // while keeping the draw ascending.
    auto cand = rng.sample_without_replacement(g.num_nodes - 1, k);
    Index best = -1;
    double best_dist = -1.0;
    for (Index c : cand) {
      const Index node = c < target ? c : c + 1;
      const double dist = (x.row(node) - x.row(target)).norm();
      if (dist > best_dist) {  // strict: ascending scan keeps the lowest id on ties
        best_dist = dist;
        best = node;
      }
    }
    const int span = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spans)));
    g.span_features->set_override(span, target, x.row(best).transpose());
    truth[static_cast<std::size_t>(target)] = 1;
  }
}

InjectionResult inject_anomalies(const TemporalGraph& g, const InjectionConfig& cfg) {
  InjectionResult out;
  out.graph = g;
  out.truth.assign(static_cast<std::size_t>(g.num_nodes), 0);
  if (cfg.attribute_count > 0 && !out.graph.features)
    out.graph.features = default_features(out.graph, cfg.feature_dim);
  Rng rng = Rng::derive(cfg.seed, {kStreamInject});
  inject_structural(out.graph, cfg.structural_cliques, cfg.clique_size, rng, out.truth);
  inject_attribute(out.graph, cfg.attribute_count, cfg.candidate_k, cfg.spans, rng, out.truth);
  out.graph.labels = std::vector<int>(out.truth.begin(), out.truth.end());
  out.graph.validate();
  return out;
}

Eigen::MatrixXd static_fallback_features(const TemporalGraph& g) {
  if (!g.features) throw DataError("static fallback: graph has no feature matrix");
  Eigen::MatrixXd x = *g.features;
  if (!g.span_features) return x;
  const double s = g.span_features->num_spans();
  for (const auto& [key, row] : g.span_features->overrides())
    x.row(key.second) += (row.transpose() - g.features->row(key.second)) / s;
  return x;
}

double pairwise_consistency(const std::vector<Eigen::RowVectorXd>& zs) {
  const auto m = static_cast<Index>(zs.size());
  if (m < 2) throw UsageError("pairwise consistency needs at least two embeddings");
  // Mean and population std over all m(m-1) ordered pair distances.
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(m * (m - 1)));
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      if (a == b) continue;
      const double na = zs[static_cast<std::size_t>(a)].norm();
      const double nb = zs[static_cast<std::size_t>(b)].norm();
      double d = 1.0;  // degenerate embeddings count as maximally distant
      if (na > 0.0 && nb > 0.0)
        d = 1.0 - zs[static_cast<std::size_t>(a)].dot(zs[static_cast<std::size_t>(b)]) /
                      (na * nb);
      dists.push_back(d);
    }
  }
  double mean = 0.0;
  for (double d : dists) mean += d;
  mean /= static_cast<double>(dists.size());
  double var = 0.0;
  for (double d : dists) var += (d - mean) * (d - mean);
  var /= static_cast<double>(dists.size());
  return mean + std::sqrt(var);
}

AnomalyScores anomaly_scores(const TemporalGraph& g, const ModelParams& params, Index s,
                             int threads) {
  (void)threads;  // encoding is already batched; kept for interface parity
  GridEncoding grid = encode_sequential_grid(g, params, s);

  AnomalyScores out;
  out.score.assign(static_cast<std::size_t>(g.num_nodes), 0.0);
  out.flags.assign(static_cast<std::size_t>(g.num_nodes), 0);
  out.views_used.assign(static_cast<std::size_t>(g.num_nodes), 0);

  std::vector<std::vector<Eigen::RowVectorXd>> per_node(
      static_cast<std::size_t>(g.num_nodes));
  for (std::size_t v = 0; v < grid.views.size(); ++v) {
    const auto& view = grid.views[v];
    for (std::size_t i = 0; i < view.active_nodes.size(); ++i)
      per_node[static_cast<std::size_t>(view.active_nodes[i])].push_back(
          grid.z[v].row(static_cast<Index>(i)));
  }

  for (Index node = 0; node < g.num_nodes; ++node) {
    const auto& zs = per_node[static_cast<std::size_t>(node)];
    const auto m = static_cast<Index>(zs.size());
    out.views_used[static_cast<std::size_t>(node)] = static_cast<int>(m);
    if (m < 2) {
      out.flags[static_cast<std::size_t>(node)] = 1;  // under-observed: score 0
      continue;
    }
    out.score[static_cast<std::size_t>(node)] = pairwise_consistency(zs);
  }
  return out;
}

double auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& truth) {
  if (scores.size() != truth.size() || scores.empty())
    throw DataError("auc: score/truth size mismatch");
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks across ties, then the rank-sum form of the pair count.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos_ranks = 0.0;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (truth[k]) {
      pos_ranks += rank[k];
      ++pos;
    }
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("auc: need both anomalous and normal nodes");
  return (pos_ranks - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace cldg
