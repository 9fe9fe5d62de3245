#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cldg/common.hpp"

namespace cldg {

struct Triplet {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

// Row-compressed sparse matrix. Column indices are strictly ascending within
// each row, which makes iteration order (and therefore every downstream
// truncation / reduction) deterministic.
class SparseMatrix {
 public:
  SparseMatrix() : SparseMatrix(0, 0) {}
  SparseMatrix(Index rows, Index cols);

  // Duplicates (same row,col) are summed. Out-of-range indices -> DataError.
  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(Index n);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(col_.size()); }

  std::span<const Index> row_cols(Index r) const;
  std::span<const double> row_vals(Index r) const;

  double coeff(Index r, Index c) const;  // 0 when absent

  Eigen::MatrixXd to_dense() const;
  SparseMatrix transpose() const;

  // this * X and this^T * X for dense X.
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd transpose_multiply(const Eigen::MatrixXd& x) const;

  // y = this^T * x for a dense vector (used by row-wise diffusion solves).
  void transpose_apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  // this + diag(1, ..., 1); values on an existing diagonal entry are summed.
  SparseMatrix plus_identity() const;

  bool is_symmetric(double tol = 0.0) const;

  // Scale entry (r, c) by rs[r] * cs[c] (used for D^-1/2 A D^-1/2 etc.).
  SparseMatrix scaled(const std::vector<double>& rs,
                      const std::vector<double>& cs) const;

 private:
  Index rows_, cols_;
  std::vector<Index> row_ptr_;  // size rows_+1
  std::vector<Index> col_;
  std::vector<double> val_;

  friend SparseMatrix sparsify_rows_topk(const Eigen::MatrixXd&, Index);
  friend class SparseBuilder;
};

// Incremental row-major builder: rows must be appended in order.
class SparseBuilder {
 public:
  SparseBuilder(Index rows, Index cols);
  // entries for row r as (col, value) pairs with ascending cols.
  void set_row(Index r, const std::vector<std::pair<Index, double>>& entries);
  SparseMatrix take();

 private:
  SparseMatrix m_;
  Index next_row_ = 0;
};

// Keep the k largest entries per row (ties broken toward the lower column
// index), rescaling survivors so each row sum is preserved.
SparseMatrix sparsify_rows_topk(const Eigen::MatrixXd& dense, Index k);

}  // namespace cldg
