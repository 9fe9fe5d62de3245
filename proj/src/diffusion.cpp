#include "cldg/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

namespace cldg {

DiffusionKind diffusion_kind_from_string(const std::string& name) {
  if (name == "ppr") return DiffusionKind::Ppr;
  if (name == "heat") return DiffusionKind::Heat;
  throw UsageError("unknown diffusion kind '" + name + "' (expected ppr|heat)");
}

std::string to_string(DiffusionKind k) {
  return k == DiffusionKind::Ppr ? "ppr" : "heat";
}

void DiffusionConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("diffusion: alpha must be in (0, 1)");
  if (!(t > 0.0)) throw UsageError("diffusion: t must be positive");
  if (topk < 1) throw UsageError("diffusion: topk must be >= 1");
  if (!(tol > 0.0)) throw UsageError("diffusion: tol must be positive");
  if (exact_cap < 1) throw UsageError("diffusion: exact-cap must be >= 1");
  if (max_iterations < 1) throw UsageError("diffusion: max-iterations must be >= 1");
  if (taylor_terms < 0) throw UsageError("diffusion: taylor-terms must be >= 0");
}

SparseMatrix sym_normalize(const SparseMatrix& adj, bool add_self_loops) {
  if (adj.rows() != adj.cols()) throw DataError("sym_normalize: matrix must be square");
  if (!adj.is_symmetric()) throw DataError("sym_normalize: matrix must be symmetric");
  SparseMatrix base = add_self_loops ? adj.plus_identity() : adj;
  auto d = base.row_sums();
  std::vector<double> inv_sqrt(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    inv_sqrt[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  return base.scaled(inv_sqrt, inv_sqrt);
}

Eigen::MatrixXd ppr_exact(const SparseMatrix& adj, double alpha, Index cap) {
  const Index n = adj.rows();
  if (n > cap)
    throw UsageError("exact diffusion refused: " + std::to_string(n) + " nodes exceeds cap " +
                     std::to_string(cap) + " (use approximate mode)");
  Eigen::MatrixXd t = sym_normalize(adj, false).to_dense();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * t;
  // m is symmetric positive definite (eigenvalues in [alpha, 2-alpha]).
  return m.llt().solve(alpha * Eigen::MatrixXd::Identity(n, n));
}

namespace {

// k largest entries of a dense row (ties keep the lower column), rescaled so
// the kept entries sum to the full row sum; zeros are dropped.
std::vector<std::pair<Index, double>> topk_row(const Eigen::VectorXd& row, Index k) {
  const Index n = row.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const Index keep = std::min(k, n);
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return row[a] > row[b]; });
  std::vector<std::pair<Index, double>> entries;
  entries.reserve(static_cast<std::size_t>(keep));
  double kept = 0.0;
  for (Index j = 0; j < keep; ++j) {
    Index c = order[static_cast<std::size_t>(j)];
    if (row[c] == 0.0) continue;
    entries.emplace_back(c, row[c]);
    kept += row[c];
  }
  std::sort(entries.begin(), entries.end());
  const double total = row.sum();
  if (kept != 0.0 && kept != total) {
    const double scale = total / kept;
    for (auto& e : entries) e.second *= scale;
  }
  return entries;
}

// Runs fn(row) for every row, split across `threads` workers in contiguous
// blocks. Each row writes only its own output slot, so results are identical
// for any thread count.
template <typename Fn>
void parallel_rows(Index n, int threads, Fn&& fn) {
  const int workers = std::max(1, threads);
  if (workers == 1 || n < 2) {
    for (Index r = 0; r < n; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  const Index block = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Index lo = static_cast<Index>(w) * block;
    const Index hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (Index r = lo; r < hi; ++r) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SparseMatrix ppr_approx(const SparseMatrix& adj, double alpha, double tol, Index topk,
                        Index max_iterations, int threads) {
  const Index n = adj.rows();
  SparseMatrix t = sym_normalize(adj, false);
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n));
  std::vector<std::string> failure(static_cast<std::size_t>(n));
  // The fixed-point map S <- alpha I + (1-alpha) T S decouples by column, and
  // S is symmetric (T is), so row r equals the converged column r.
  parallel_rows(n, threads, [&](Index r) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd next(n);
    x[r] = 1.0;  // S_0 = I
    double change = 0.0;
    Index it = 0;
    for (; it < max_iterations; ++it) {
      next = (1.0 - alpha) * t.multiply(x);
      next[r] += alpha;
      change = (next - x).cwiseAbs().maxCoeff();
      x.swap(next);
      if (change < tol) break;
    }
    if (it == max_iterations) {
      std::ostringstream oss;
      oss << "restart diffusion did not converge in " << max_iterations
          << " iterations (row " << r << ", last change " << change << ", tol " << tol << ")";
      failure[static_cast<std::size_t>(r)] = oss.str();
      return;
    }
    rows[static_cast<std::size_t>(r)] = topk_row(x, topk);
  });
  for (const auto& f : failure)
    if (!f.empty()) throw NumericError(f);
  SparseBuilder b(n, n);
  for (Index r = 0; r < n; ++r) b.set_row(r, rows[static_cast<std::size_t>(r)]);
  return b.take();
}

namespace {

// Column-normalized random walk matrix W = A D^-1; zero-degree columns stay 0.
SparseMatrix walk_matrix(const SparseMatrix& adj) {
  if (adj.rows() != adj.cols()) throw DataError("heat diffusion: matrix must be square");
  if (!adj.is_symmetric()) throw DataError("heat diffusion: matrix must be symmetric");
  auto d = adj.col_sums();
  std::vector<double> inv(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) inv[i] = d[i] > 0.0 ? 1.0 / d[i] : 0.0;
  std::vector<double> ones(d.size(), 1.0);
  return adj.scaled(ones, inv);
}

}  // namespace

double heat_tail_bound(double t, Index terms) {
  // e^-t * t^(K+1) / (K+1)!, evaluated in log space to dodge overflow.
  const double k1 = static_cast<double>(terms) + 1.0;
  return std::exp(-t + k1 * std::log(t) - std::lgamma(k1 + 1.0));
}

Index heat_terms_for_tol(double t, double tol, Index limit) {
  // The single-term remainder bound is only valid once the series terms are
  // decaying (k >= t); below that the left Poisson tail is small even though
  // the remainder is not, so the search must not start there.
  const Index first = std::max(Index{1}, static_cast<Index>(std::ceil(t)));
  for (Index k = first; k <= limit; ++k)
    if (heat_tail_bound(t, k) < tol) return k;
  std::ostringstream oss;
  oss << "heat series: no truncation within " << limit << " terms reaches tol " << tol
      << " at t=" << t;
  throw NumericError(oss.str());
}

Eigen::MatrixXd heat_exact(const SparseMatrix& adj, double t, Index terms) {
  const Index n = adj.rows();
  SparseMatrix w = walk_matrix(adj);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd acc = term;
  for (Index k = 1; k <= terms; ++k) {
    term = (t / static_cast<double>(k)) * w.multiply(term);
    acc += term;
  }
  return std::exp(-t) * acc;
}

SparseMatrix heat_approx(const SparseMatrix& adj, double t, Index terms, Index topk,
                         int threads) {
  const Index n = adj.rows();
  SparseMatrix w = walk_matrix(adj);
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n));
  // Row r of W^k comes from repeated left-multiplication: r_k = r_(k-1) W,
  // which is W^T applied to the running row vector.
  parallel_rows(n, threads, [&](Index r) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y(n);
    x[r] = 1.0;
    Eigen::VectorXd acc = x;
    for (Index k = 1; k <= terms; ++k) {
      w.transpose_apply(x, y);
      x = (t / static_cast<double>(k)) * y;
      acc += x;
    }
    acc *= std::exp(-t);
    rows[static_cast<std::size_t>(r)] = topk_row(acc, topk);
  });
  SparseBuilder b(n, n);
  for (Index r = 0; r < n; ++r) b.set_row(r, rows[static_cast<std::size_t>(r)]);
  return b.take();
}

SparseMatrix compute_diffusion(const SparseMatrix& adj, const DiffusionConfig& cfg,
                               int threads) {
  cfg.validate();
  const Index n = adj.rows();
  const bool exact = cfg.mode == DiffusionMode::Exact ||
                     (cfg.mode == DiffusionMode::Auto && n <= cfg.exact_cap);
  if (exact && n > cfg.exact_cap)
    throw UsageError("exact diffusion refused: " + std::to_string(n) + " nodes exceeds cap " +
                     std::to_string(cfg.exact_cap) + " (use approximate mode)");
  if (cfg.kind == DiffusionKind::Ppr) {
    if (exact) return sparsify_rows_topk(ppr_exact(adj, cfg.alpha, cfg.exact_cap), cfg.topk);
    return ppr_approx(adj, cfg.alpha, cfg.tol, cfg.topk, cfg.max_iterations, threads);
  }
  Index terms = cfg.taylor_terms;
  if (terms == 0) {
    terms = heat_terms_for_tol(cfg.t, cfg.tol);
  } else if (terms < static_cast<Index>(std::ceil(cfg.t)) ||
             heat_tail_bound(cfg.t, terms) >= cfg.tol) {
    std::ostringstream oss;
    oss << "heat series: " << terms << " terms leave remainder " << heat_tail_bound(cfg.t, terms)
        << " >= tol " << cfg.tol << "; need at least " << heat_terms_for_tol(cfg.t, cfg.tol)
        << " terms";
    throw NumericError(oss.str());
  }
  if (exact) return sparsify_rows_topk(heat_exact(adj, cfg.t, terms), cfg.topk);
  return heat_approx(adj, cfg.t, terms, cfg.topk, threads);
}

}  // namespace cldg
