#include "cldg/trainer.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace cldg {

namespace {

// Substream tags so every random decision has its own well-known stream.
constexpr std::uint64_t kStreamSampler = 0x73616d706cull;   // view sampling
constexpr std::uint64_t kStreamBatch = 0x6261746368ull;     // batch subsampling
constexpr std::uint64_t kStreamRestrict = 0x72737472ull;    // node-cap fan-out

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt(Index v) { return std::to_string(v); }

std::string to_string(DiffusionMode m) {
  switch (m) {
    case DiffusionMode::Auto: return "auto";
    case DiffusionMode::Exact: return "exact";
    case DiffusionMode::Approximate: return "approx";
  }
  return "?";
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw UsageError("train: epochs must be >= 0");
  if (batch_size < 1) throw UsageError("train: batch-size must be >= 1");
  if (!(lr > 0.0)) throw UsageError("train: lr must be positive");
  if (weight_decay < 0.0) throw UsageError("train: weight-decay must be >= 0");
  if (!(tau > 0.0)) throw UsageError("train: tau must be positive");
  if (w_local_local < 0.0 || w_global_global < 0.0 || w_local_global < 0.0)
    throw UsageError("train: loss weights must be >= 0");
  if (d_hidden < 1 || d_out < 1) throw UsageError("train: hidden/output dims must be >= 1");
  if (feature_dim < 1) throw UsageError("train: feature-dim must be >= 1");
  if (node_cap < 1) throw UsageError("train: node-cap must be >= 1");
  if (neighbor_fanout < 1) throw UsageError("train: neighbor-fanout must be >= 1");
  if (batch_retries < 0) throw UsageError("train: batch-retries must be >= 0");
  if (threads < 1) throw UsageError("train: threads must be >= 1");
  if (sampler.v < 2) throw UsageError("train: contrast needs at least two views (v >= 2)");
  diffusion.validate();
}

std::string TrainConfig::canonical_string() const {
  std::ostringstream oss;
  oss << "alpha=" << fmt(diffusion.alpha) << "\n"
      << "batch_retries=" << fmt(batch_retries) << "\n"
      << "batch_size=" << fmt(batch_size) << "\n"
      << "contrast=" << cldg::to_string(mode) << "\n"
      << "d_hidden=" << fmt(d_hidden) << "\n"
      << "d_out=" << fmt(d_out) << "\n"
      << "diffusion=" << cldg::to_string(diffusion.kind) << "\n"
      << "diffusion_mode=" << to_string(diffusion.mode) << "\n"
      << "epochs=" << fmt(epochs) << "\n"
      << "exact_cap=" << fmt(diffusion.exact_cap) << "\n"
      << "feature_dim=" << fmt(feature_dim) << "\n"
      << "lr=" << fmt(lr) << "\n"
      << "max_iterations=" << fmt(diffusion.max_iterations) << "\n"
      << "neighbor_fanout=" << fmt(neighbor_fanout) << "\n"
      << "node_cap=" << fmt(node_cap) << "\n"
      << "s=" << fmt(sampler.s) << "\n"
      << "seed=" << seed << "\n"
      << "strategy=" << cldg::to_string(sampler.strategy) << "\n"
      << "t=" << fmt(diffusion.t) << "\n"
      << "tau=" << fmt(tau) << "\n"
      << "taylor_terms=" << fmt(diffusion.taylor_terms) << "\n"
      << "threads=" << threads << "\n"
      << "tol=" << fmt(diffusion.tol) << "\n"
      << "topk=" << fmt(diffusion.topk) << "\n"
      << "v=" << fmt(sampler.v) << "\n"
      << "w_gg=" << fmt(w_global_global) << "\n"
      << "w_lg=" << fmt(w_local_global) << "\n"
      << "w_ll=" << fmt(w_local_local) << "\n"
      << "weight_decay=" << fmt(weight_decay) << "\n";
  return oss.str();
}

AdamState AdamState::init(const ModelConfig& cfg) {
  AdamState s;
  s.m = zero_grads(cfg);
  s.u = zero_grads(cfg);
  s.step = 0;
  return s;
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               double weight_decay) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++state.step;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  auto ps = params.tensors();
  auto gs = grads.tensors();
  auto ms = state.m.tensors();
  auto us = state.u.tensors();
  for (int i = 0; i < ModelTensors::kCount; ++i) {
    Eigen::ArrayXXd g = gs[i]->array() + weight_decay * ps[i]->array();
    ms[i]->array() = kBeta1 * ms[i]->array() + (1.0 - kBeta1) * g;
    us[i]->array() = kBeta2 * us[i]->array() + (1.0 - kBeta2) * g.square();
    ps[i]->array() -=
        lr * (ms[i]->array() / bc1) / ((us[i]->array() / bc2).sqrt() + kEps);
  }
}

Eigen::MatrixXd base_features(const TemporalGraph& g, const TrainConfig& cfg) {
  if (g.features) return *g.features;
  return default_features(g, cfg.feature_dim);
}

namespace {

std::vector<Index> intersect_active(const ViewSet& vs) {
  std::vector<Index> acc = vs.views.front().active_nodes;
  for (std::size_t i = 1; i < vs.views.size() && !acc.empty(); ++i) {
    std::vector<Index> next;
    next.reserve(acc.size());
    std::set_intersection(acc.begin(), acc.end(), vs.views[i].active_nodes.begin(),
                          vs.views[i].active_nodes.end(), std::back_inserter(next));
    acc = std::move(next);
  }
  return acc;
}

// Restrict an oversized view to the batch's sampled 2-hop neighborhood:
// every batch node keeps at most `fanout` sampled neighbors per hop, two
// hops deep. Keeps the encoder's working set bounded on huge windows.
GraphView restrict_view(const GraphView& view, const std::vector<Index>& batch_global,
                        Index fanout, Rng& rng) {
  const auto m = static_cast<Index>(view.active_nodes.size());
  std::vector<char> selected(static_cast<std::size_t>(m), 0);
  std::vector<Index> frontier;
  frontier.reserve(batch_global.size());
  for (Index g : batch_global) {
    Index l = view.local_index(g);
    selected[static_cast<std::size_t>(l)] = 1;
    frontier.push_back(l);
  }
  for (int hop = 0; hop < 2; ++hop) {
    std::vector<Index> next;
    for (Index l : frontier) {
      auto nbrs = view.local_adj.row_cols(l);
      const auto deg = static_cast<Index>(nbrs.size());
      std::vector<Index> picked;
      if (deg <= fanout) {
        picked.assign(nbrs.begin(), nbrs.end());
      } else {
        for (Index idx : rng.sample_without_replacement(deg, fanout))
          picked.push_back(nbrs[static_cast<std::size_t>(idx)]);
      }
      for (Index nb : picked) {
        if (!selected[static_cast<std::size_t>(nb)]) {
          selected[static_cast<std::size_t>(nb)] = 1;
          next.push_back(nb);
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }

  std::vector<Index> keep;  // old local indices, ascending
  for (Index l = 0; l < m; ++l)
    if (selected[static_cast<std::size_t>(l)]) keep.push_back(l);
  std::vector<Index> remap(static_cast<std::size_t>(m), -1);
  for (std::size_t i = 0; i < keep.size(); ++i)
    remap[static_cast<std::size_t>(keep[i])] = static_cast<Index>(i);

  GraphView r;
  r.center = view.center;
  r.lo = view.lo;
  r.hi = view.hi;
  r.hi_inclusive = view.hi_inclusive;
  r.active_nodes.reserve(keep.size());
  for (Index l : keep) r.active_nodes.push_back(view.active_nodes[static_cast<std::size_t>(l)]);
  SparseBuilder b(static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
  Index undirected = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    auto cs = view.local_adj.row_cols(keep[i]);
    auto vs = view.local_adj.row_vals(keep[i]);
    std::vector<std::pair<Index, double>> row;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      Index nl = remap[static_cast<std::size_t>(cs[k])];
      if (nl >= 0) {
        row.emplace_back(nl, vs[k]);
        if (nl >= static_cast<Index>(i)) ++undirected;
      }
    }
    b.set_row(static_cast<Index>(i), row);
  }
  r.local_adj = b.take();
  r.num_edges = undirected;
  return r;
}

struct WindowKey {
  std::uint64_t lo_bits, hi_bits;
  bool hi_inclusive;
  auto operator<=>(const WindowKey&) const = default;
};

}  // namespace

TrainResult train(const TemporalGraph& g, const TrainConfig& cfg) {
  cfg.validate();
  g.validate();
  validate_sampler(cfg.sampler, g);

  const Eigen::MatrixXd base = base_features(g, cfg);
  const ModelConfig mc{base.cols(), cfg.d_hidden, cfg.d_out, 0.2};
  const bool dual = cfg.mode == ContrastMode::CldgPlusPlus;
  const LossConfig lc{cfg.tau, cfg.mode, cfg.w_local_local, cfg.w_global_global,
                      cfg.w_local_global};

  TrainResult out;
  out.params = ModelParams::init(mc, cfg.seed);
  AdamState adam = AdamState::init(mc);
  std::map<WindowKey, SparseMatrix> diffusion_cache;

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    ViewSet vs;
    std::vector<Index> common;
    bool have_batch = false;
    for (Index attempt = 0; attempt <= cfg.batch_retries; ++attempt) {
      Rng rng = Rng::derive(cfg.seed, {kStreamSampler, static_cast<std::uint64_t>(epoch),
                                       static_cast<std::uint64_t>(attempt)});
      vs = sample_views(g, cfg.sampler, rng);
      common = intersect_active(vs);
      if (!common.empty()) {
        have_batch = true;
        break;
      }
    }
    if (!have_batch)
      throw DataError("train: no node is active in all views after " +
                      std::to_string(cfg.batch_retries + 1) + " draws (epoch " +
                      std::to_string(epoch) + "); try fewer views or another strategy");

    std::vector<Index> batch;
    if (static_cast<Index>(common.size()) > cfg.batch_size) {
      Rng rng = Rng::derive(cfg.seed, {kStreamBatch, static_cast<std::uint64_t>(epoch)});
      auto picks = rng.sample_without_replacement(static_cast<Index>(common.size()),
                                                  cfg.batch_size);
      batch.reserve(picks.size());
      for (Index p : picks) batch.push_back(common[static_cast<std::size_t>(p)]);
    } else {
      batch = std::move(common);
    }
    const auto n_batch = static_cast<Index>(batch.size());

    const auto n_views = static_cast<Index>(vs.views.size());
    std::vector<GraphView> views(vs.views.begin(), vs.views.end());
    std::vector<bool> restricted(static_cast<std::size_t>(n_views), false);
    for (Index q = 0; q < n_views; ++q) {
      if (static_cast<Index>(views[static_cast<std::size_t>(q)].active_nodes.size()) >
          cfg.node_cap) {
        Rng rng = Rng::derive(cfg.seed, {kStreamRestrict, static_cast<std::uint64_t>(epoch),
                                         static_cast<std::uint64_t>(q)});
        views[static_cast<std::size_t>(q)] =
            restrict_view(views[static_cast<std::size_t>(q)], batch, cfg.neighbor_fanout, rng);
        restricted[static_cast<std::size_t>(q)] = true;
      }
    }

    std::vector<EncodeCache> caches_l(static_cast<std::size_t>(n_views));
    std::vector<EncodeCache> caches_g(dual ? static_cast<std::size_t>(n_views) : 0);
    std::vector<SparseMatrix> props_l(static_cast<std::size_t>(n_views));
    std::vector<SparseMatrix> props_g(dual ? static_cast<std::size_t>(n_views) : 0);
    std::vector<Eigen::MatrixXd> zl(static_cast<std::size_t>(n_views));
    std::vector<Eigen::MatrixXd> zg(dual ? static_cast<std::size_t>(n_views) : 0);

    for (Index q = 0; q < n_views; ++q) {
      auto& view = views[static_cast<std::size_t>(q)];
      Eigen::MatrixXd x = view_feature_rows(g, base, view.active_nodes, view.center);
      props_l[static_cast<std::size_t>(q)] = sym_normalize(view.local_adj, true);
      caches_l[static_cast<std::size_t>(q)] =
          encode(out.params, props_l[static_cast<std::size_t>(q)], x, Scope::Local);
      if (dual) {
        ++out.stats.diffusion_requests;
        WindowKey key{std::bit_cast<std::uint64_t>(view.lo),
                      std::bit_cast<std::uint64_t>(view.hi), view.hi_inclusive};
        const SparseMatrix* s = nullptr;
        if (!restricted[static_cast<std::size_t>(q)]) {
          auto it = diffusion_cache.find(key);
          if (it == diffusion_cache.end()) {
            ++out.stats.diffusion_computes;
            it = diffusion_cache
                     .emplace(key, compute_diffusion(view.local_adj, cfg.diffusion, cfg.threads))
                     .first;
          }
          s = &it->second;
        } else {
          ++out.stats.diffusion_computes;
          props_g[static_cast<std::size_t>(q)] =
              compute_diffusion(view.local_adj, cfg.diffusion, cfg.threads);
          s = &props_g[static_cast<std::size_t>(q)];
        }
        if (!restricted[static_cast<std::size_t>(q)])
          props_g[static_cast<std::size_t>(q)] = *s;
        caches_g[static_cast<std::size_t>(q)] =
            encode(out.params, props_g[static_cast<std::size_t>(q)], x, Scope::Global);
      }
    }

    // Batch tables: one row per batch node, in batch (ascending id) order.
    for (Index q = 0; q < n_views; ++q) {
      auto& view = views[static_cast<std::size_t>(q)];
      Eigen::MatrixXd tl(n_batch, cfg.d_out);
      Eigen::MatrixXd tg;
      if (dual) tg.resize(n_batch, cfg.d_out);
      for (Index b = 0; b < n_batch; ++b) {
        Index l = view.local_index(batch[static_cast<std::size_t>(b)]);
        tl.row(b) = caches_l[static_cast<std::size_t>(q)].z.row(l);
        if (dual) tg.row(b) = caches_g[static_cast<std::size_t>(q)].z.row(l);
      }
      zl[static_cast<std::size_t>(q)] = std::move(tl);
      if (dual) zg[static_cast<std::size_t>(q)] = std::move(tg);
    }

    CompositeResult loss = composite_loss(zl, zg, lc);

    ParamGrads grads = zero_grads(mc);
    for (Index q = 0; q < n_views; ++q) {
      auto& view = views[static_cast<std::size_t>(q)];
      const auto rows = static_cast<Index>(view.active_nodes.size());
      Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(rows, cfg.d_out);
      for (Index b = 0; b < n_batch; ++b)
        dz.row(view.local_index(batch[static_cast<std::size_t>(b)])) =
            loss.d_local[static_cast<std::size_t>(q)].row(b);
      backward(out.params, caches_l[static_cast<std::size_t>(q)], dz, grads);
      if (dual) {
        dz.setZero();
        for (Index b = 0; b < n_batch; ++b)
          dz.row(view.local_index(batch[static_cast<std::size_t>(b)])) =
              loss.d_global[static_cast<std::size_t>(q)].row(b);
        backward(out.params, caches_g[static_cast<std::size_t>(q)], dz, grads);
      }
    }

    {
      auto gs = grads.tensors();
      auto names = ModelTensors::names();
      for (int i = 0; i < ModelTensors::kCount; ++i) {
        if (!gs[i]->allFinite())
          throw NumericError("train: non-finite gradient in tensor " + std::string(names[i]) +
                             " at epoch " + std::to_string(epoch));
      }
    }

    adam_step(out.params, grads, adam, cfg.lr, cfg.weight_decay);

    const auto t1 = std::chrono::steady_clock::now();
    out.log.push_back(
        {epoch, loss.value,
         std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }
  return out;
}

}  // namespace cldg
