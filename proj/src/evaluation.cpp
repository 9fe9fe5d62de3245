#include "cldg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cldg/diffusion.hpp"
#include "cldg/view_sampler.hpp"

namespace cldg {

Eigen::MatrixXd inference_features(const TemporalGraph& g, const ModelParams& params) {
  if (g.features) {
    if (g.features->cols() != params.config.d_in)
      throw DataError("graph features have width " + std::to_string(g.features->cols()) +
                      " but the model expects " + std::to_string(params.config.d_in));
    return *g.features;
  }
  return default_features(g, params.config.d_in);
}

GridEncoding encode_sequential_grid(const TemporalGraph& g, const ModelParams& params,
                                    Index s) {
  if (s < 1) throw UsageError("inference grid: s must be >= 1");
  g.validate();
  const Eigen::MatrixXd base = inference_features(g, params);
  GridEncoding out;
  auto centers = sequential_grid(g, s);
  out.views.reserve(centers.size());
  out.z.reserve(centers.size());
  for (Index k = 0; k < s; ++k) {
    auto bounds = k == s - 1 ? WindowBounds::Closed : WindowBounds::HalfOpen;
    GraphView view = induce_view(g, centers[static_cast<std::size_t>(k)], s, bounds);
    if (!view.active_nodes.empty()) {
      Eigen::MatrixXd x = view_feature_rows(g, base, view.active_nodes, view.center);
      SparseMatrix prop = sym_normalize(view.local_adj, true);
      EncodeCache cache = encode(params, prop, x, Scope::Local);
      out.z.push_back(std::move(cache.z));
    } else {
      out.z.emplace_back(0, params.config.d_out);
    }
    out.views.push_back(std::move(view));
  }
  return out;
}

EmbeddingResult final_embeddings(const TemporalGraph& g, const ModelParams& params, Index s) {
  GridEncoding grid = encode_sequential_grid(g, params, s);
  EmbeddingResult out;
  out.embeddings = Eigen::MatrixXd::Zero(g.num_nodes, params.config.d_out);
  out.flags.assign(static_cast<std::size_t>(g.num_nodes), 0);
  std::vector<int> counts(static_cast<std::size_t>(g.num_nodes), 0);
  for (std::size_t v = 0; v < grid.views.size(); ++v) {
    const auto& view = grid.views[v];
    for (std::size_t i = 0; i < view.active_nodes.size(); ++i) {
      Index node = view.active_nodes[i];
      out.embeddings.row(node) += grid.z[v].row(static_cast<Index>(i));
      ++counts[static_cast<std::size_t>(node)];
    }
  }
  for (Index node = 0; node < g.num_nodes; ++node) {
    int c = counts[static_cast<std::size_t>(node)];
    if (c == 0) {
      out.flags[static_cast<std::size_t>(node)] = 1;
      continue;
    }
    out.embeddings.row(node) /= static_cast<double>(c);
    double norm = out.embeddings.row(node).norm();
    if (norm < 1e-12) {
      out.embeddings.row(node).setZero();  // cancelled mean: leave at zero
      out.flags[static_cast<std::size_t>(node)] = 1;
    } else {
      out.embeddings.row(node) /= norm;
    }
  }
  return out;
}

namespace {

constexpr std::uint64_t kStreamSplit = 0x73706c6974ull;

// Hamilton (largest remainder) apportionment of `total` over real shares.
// Ties go to the lower index.
std::vector<Index> apportion(const std::vector<double>& shares, Index total) {
  const auto n = shares.size();
  std::vector<Index> alloc(n);
  std::vector<std::pair<double, std::size_t>> rema(n);
  Index used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    alloc[i] = static_cast<Index>(std::floor(shares[i]));
    used += alloc[i];
    rema[i] = {shares[i] - std::floor(shares[i]), i};
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (Index r = 0; r < total - used; ++r) ++alloc[rema[static_cast<std::size_t>(r)].second];
  return alloc;
}

}  // namespace

Split make_split(const std::vector<int>& labels, const SplitSpec& spec) {
  if (spec.train_parts < 1 || spec.val_parts < 1 || spec.test_parts < 1)
    throw UsageError("split: all parts must be >= 1");
  std::vector<Index> labeled;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) labeled.push_back(static_cast<Index>(i));
  const auto n = static_cast<Index>(labeled.size());
  if (n < 3) throw DataError("split: need at least three labeled nodes");

  const double total_parts =
      static_cast<double>(spec.train_parts + spec.val_parts + spec.test_parts);
  const double nn = static_cast<double>(n);
  auto global = apportion({nn * spec.train_parts / total_parts,
                           nn * spec.val_parts / total_parts,
                           nn * spec.test_parts / total_parts},
                          n);
  const Index t_train = global[0], t_val = global[1];

  Rng rng = Rng::derive(spec.seed, {kStreamSplit});
  Split out;

  if (!spec.stratified) {
    std::vector<Index> pool = labeled;
    rng.shuffle(pool);
    out.train.assign(pool.begin(), pool.begin() + t_train);
    out.val.assign(pool.begin() + t_train, pool.begin() + t_train + t_val);
    out.test.assign(pool.begin() + t_train + t_val, pool.end());
  } else {
    std::map<int, std::vector<Index>> by_class;
    for (Index i : labeled) by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
    const auto c = static_cast<Index>(by_class.size());
    if (t_train < c)
      throw DataError("split: train share (" + std::to_string(t_train) +
                      ") cannot cover all " + std::to_string(c) + " classes");
    std::vector<std::vector<Index>> groups;
    groups.reserve(static_cast<std::size_t>(c));
    std::vector<double> shares;
    for (auto& [cls, members] : by_class) {
      rng.shuffle(members);
      shares.push_back(static_cast<double>(members.size()) * t_train / nn);
      groups.push_back(std::move(members));
    }
    auto train_alloc = apportion(shares, t_train);
    // Guarantee one training node per class by pulling from the largest
    // allocation (lowest class index on ties).
    for (std::size_t i = 0; i < groups.size(); ++i) {
      while (train_alloc[i] == 0) {
        std::size_t donor = groups.size();
        for (std::size_t j = 0; j < groups.size(); ++j)
          if (train_alloc[j] > 1 && (donor == groups.size() ||
                                     train_alloc[j] > train_alloc[donor]))
            donor = j;
        if (donor == groups.size())
          throw DataError("split: cannot give every class a training node");
        --train_alloc[donor];
        ++train_alloc[i];
      }
      if (train_alloc[i] > static_cast<Index>(groups[i].size()))
        throw DataError("split: class smaller than its train allocation");
    }
    std::vector<double> val_shares;
    Index remaining = 0;
    for (std::size_t i = 0; i < groups.size(); ++i)
      remaining += static_cast<Index>(groups[i].size()) - train_alloc[i];
    for (std::size_t i = 0; i < groups.size(); ++i)
      val_shares.push_back(
          remaining == 0
              ? 0.0
              : static_cast<double>(static_cast<Index>(groups[i].size()) - train_alloc[i]) *
                    t_val / static_cast<double>(remaining));
    auto val_alloc = apportion(val_shares, t_val);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      Index avail = static_cast<Index>(groups[i].size()) - train_alloc[i];
      if (val_alloc[i] > avail)
        throw DataError("split: class smaller than its val allocation");
      auto& members = groups[i];
      out.train.insert(out.train.end(), members.begin(), members.begin() + train_alloc[i]);
      out.val.insert(out.val.end(), members.begin() + train_alloc[i],
                     members.begin() + train_alloc[i] + val_alloc[i]);
      out.test.insert(out.test.end(), members.begin() + train_alloc[i] + val_alloc[i],
                      members.end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size() || truth.empty())
    throw DataError("accuracy: prediction/truth size mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (pred[i] == truth[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double weighted_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size() || truth.empty())
    throw DataError("weighted_f1: prediction/truth size mismatch");
  std::map<int, std::array<Index, 3>> counts;  // class -> {tp, fp, fn}
  for (int c : truth) counts.try_emplace(c);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++counts[truth[i]][0];
    } else {
      ++counts[truth[i]][2];
      auto it = counts.find(pred[i]);
      if (it != counts.end()) ++it->second[1];
    }
  }
  double f1 = 0.0;
  for (const auto& [cls, c] : counts) {
    const auto [tp, fp, fn] = c;
    const Index support = tp + fn;
    if (support == 0) continue;
    const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = static_cast<double>(tp) / static_cast<double>(support);
    const double class_f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    f1 += class_f1 * static_cast<double>(support) / static_cast<double>(truth.size());
  }
  return f1;
}

namespace {

struct ProbeFit {
  Eigen::MatrixXd w;  // d x C
  Eigen::RowVectorXd b;
  Index best_epoch = 0;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd s = logits.colwise() - logits.rowwise().maxCoeff();
  s = s.array().exp();
  Eigen::VectorXd denom = s.rowwise().sum();
  return s.array().colwise() / denom.array();
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    m.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

// Softmax regression on frozen features. Never touches test data.
ProbeFit train_probe(const Eigen::MatrixXd& x_train, const std::vector<int>& y_train,
                     const Eigen::MatrixXd& x_val, const std::vector<int>& y_val, Index classes,
                     double lr, double weight_decay, Index epochs) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const Index d = x_train.cols();
  const Index n = x_train.rows();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, classes);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(classes);
  Eigen::MatrixXd mw = w, uw = w;
  Eigen::RowVectorXd mb = b, ub = b;
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, classes);
  for (Index i = 0; i < n; ++i) onehot(i, y_train[static_cast<std::size_t>(i)]) = 1.0;

  ProbeFit best{w, b, 0};
  double best_acc = -1.0;
  for (Index epoch = 1; epoch <= epochs; ++epoch) {
    Eigen::MatrixXd probs = softmax_rows((x_train * w).rowwise() + b);
    Eigen::MatrixXd diff = (probs - onehot) / static_cast<double>(n);
    Eigen::MatrixXd gw = x_train.transpose() * diff + weight_decay * w;
    Eigen::RowVectorXd gb = diff.colwise().sum() + weight_decay * b;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(epoch));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(epoch));
    mw = kBeta1 * mw + (1.0 - kBeta1) * gw;
    uw.array() = kBeta2 * uw.array() + (1.0 - kBeta2) * gw.array().square();
    mb = kBeta1 * mb + (1.0 - kBeta1) * gb;
    ub.array() = kBeta2 * ub.array() + (1.0 - kBeta2) * gb.array().square();
    w.array() -= lr * (mw.array() / bc1) / ((uw.array() / bc2).sqrt() + kEps);
    b.array() -= lr * (mb.array() / bc1) / ((ub.array() / bc2).sqrt() + kEps);

    auto val_pred = argmax_rows((x_val * w).rowwise() + b);
    double val_acc = accuracy(val_pred, y_val);
    if (val_acc > best_acc) {  // strict: earlier epoch keeps ties
      best_acc = val_acc;
      best = {w, b, epoch};
    }
  }
  return best;
}

}  // namespace

ProbeResult linear_probe(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                         const SplitSpec& spec) {
  if (embeddings.rows() != static_cast<Index>(labels.size()))
    throw DataError("probe: embedding row count does not match label count");
  Split split = make_split(labels, spec);

  // Compact class ids in sorted label order.
  std::map<int, int> remap;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) remap.emplace(labels[i], 0);
  int next = 0;
  for (auto& [cls, id] : remap) id = next++;
  const auto classes = static_cast<Index>(remap.size());
  if (classes < 2) throw DataError("probe: need at least two classes");

  auto gather = [&](const std::vector<Index>& nodes, Eigen::MatrixXd& x, std::vector<int>& y) {
    x.resize(static_cast<Index>(nodes.size()), embeddings.cols());
    y.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      x.row(static_cast<Index>(i)) = embeddings.row(nodes[i]);
      y[i] = remap.at(labels[static_cast<std::size_t>(nodes[i])]);
    }
  };
  Eigen::MatrixXd x_train, x_val, x_test;
  std::vector<int> y_train, y_val, y_test;
  gather(split.train, x_train, y_train);
  gather(split.val, x_val, y_val);
  gather(split.test, x_test, y_test);

  std::vector<char> seen(static_cast<std::size_t>(classes), 0);
  for (int y : y_train) seen[static_cast<std::size_t>(y)] = 1;
  for (Index c = 0; c < classes; ++c)
    if (!seen[static_cast<std::size_t>(c)])
      throw DataError("probe: class " + std::to_string(c) + " has no training nodes");

  ProbeFit fit = train_probe(x_train, y_train, x_val, y_val, classes,
                             /*lr=*/1e-2, /*weight_decay=*/1e-4, /*epochs=*/300);

  ProbeResult out;
  out.best_epoch = fit.best_epoch;
  out.test_nodes = split.test;
  std::vector<int> compact_pred = argmax_rows((x_test * fit.w).rowwise() + fit.b);
  out.accuracy = accuracy(compact_pred, y_test);
  out.weighted_f1 = weighted_f1(compact_pred, y_test);
  std::vector<int> original(static_cast<std::size_t>(classes));
  for (const auto& [cls, id] : remap) original[static_cast<std::size_t>(id)] = cls;
  out.test_pred.reserve(compact_pred.size());
  for (int p : compact_pred) out.test_pred.push_back(original[static_cast<std::size_t>(p)]);
  return out;
}

}  // namespace cldg
