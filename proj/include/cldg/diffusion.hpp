#pragma once

#include <Eigen/Dense>

#include "cldg/sparse.hpp"

namespace cldg {

enum class DiffusionKind { Ppr, Heat };
enum class DiffusionMode { Auto, Exact, Approximate };

DiffusionKind diffusion_kind_from_string(const std::string& name);
std::string to_string(DiffusionKind k);

struct DiffusionConfig {
  DiffusionKind kind = DiffusionKind::Ppr;
  DiffusionMode mode = DiffusionMode::Auto;
  double alpha = 0.15;     // restart probability
  double t = 5.0;          // heat diffusion time
  Index topk = 128;        // per-row truncation of approximate results
  Index taylor_terms = 0;  // 0 = pick from tol via the remainder bound
  double tol = 1e-9;
  Index exact_cap = 5000;  // Auto switches to Approximate above this size
  Index max_iterations = 1000;

  void validate() const;  // UsageError on out-of-range settings
};

// D^-1/2 (A [+ I]) D^-1/2 over a symmetric adjacency; zero-degree rows stay zero.
SparseMatrix sym_normalize(const SparseMatrix& adj, bool add_self_loops);

// Restart diffusion, dense solve: alpha (I - (1-alpha) D^-1/2 A D^-1/2)^-1.
Eigen::MatrixXd ppr_exact(const SparseMatrix& adj, double alpha, Index cap = 5000);

// Restart diffusion by fixed-point iteration S <- alpha I + (1-alpha) T S,
// converged when the max-abs update falls below tol, then per-row top-k
// truncation with row-sum-preserving rescale. Rows are independent, so
// `threads` changes wall time but not a single bit of the result.
SparseMatrix ppr_approx(const SparseMatrix& adj, double alpha, double tol, Index topk,
                        Index max_iterations = 1000, int threads = 1);

// Heat diffusion exp(t A D^-1 - t) via the scaled Taylor series
// e^-t sum_k (t A D^-1)^k / k!.
Eigen::MatrixXd heat_exact(const SparseMatrix& adj, double t, Index terms);

// Row-wise heat series with the same truncation/renormalization as ppr_approx.
SparseMatrix heat_approx(const SparseMatrix& adj, double t, Index terms, Index topk,
                         int threads = 1);

// Remainder of the scaled series after `terms` terms: e^-t t^(terms+1)/(terms+1)!.
double heat_tail_bound(double t, Index terms);

// Smallest K whose tail bound is below tol (NumericError if none <= limit).
Index heat_terms_for_tol(double t, double tol, Index limit = 512);

// Full pipeline used by training: dispatches kind/mode, always returns the
// sparse, truncated operator.
SparseMatrix compute_diffusion(const SparseMatrix& adj, const DiffusionConfig& cfg,
                               int threads = 1);

}  // namespace cldg
