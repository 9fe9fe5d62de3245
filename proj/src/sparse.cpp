#include "cldg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cldg {

SparseMatrix::SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DataError("sparse: negative dimension");
  row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw DataError("sparse: triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_.reserve(triplets.size());
  m.val_.reserve(triplets.size());
  std::size_t i = 0;
  for (Index r = 0; r < rows; ++r) {
    while (i < triplets.size() && triplets[i].row == r) {
      double v = triplets[i].value;
      Index c = triplets[i].col;
      ++i;
      while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
        v += triplets[i].value;  // duplicate: sum
        ++i;
      }
      m.col_.push_back(c);
      m.val_.push_back(v);
    }
    m.row_ptr_[static_cast<std::size_t>(r) + 1] = static_cast<Index>(m.col_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::identity(Index n) {
  SparseMatrix m(n, n);
  m.col_.resize(static_cast<std::size_t>(n));
  m.val_.assign(static_cast<std::size_t>(n), 1.0);
  std::iota(m.col_.begin(), m.col_.end(), Index{0});
  std::iota(m.row_ptr_.begin(), m.row_ptr_.end(), Index{0});
  return m;
}

std::span<const Index> SparseMatrix::row_cols(Index r) const {
  auto lo = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r)]);
  auto hi = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1]);
  return {col_.data() + lo, hi - lo};
}

std::span<const double> SparseMatrix::row_vals(Index r) const {
  auto lo = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r)]);
  auto hi = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1]);
  return {val_.data() + lo, hi - lo};
}

double SparseMatrix::coeff(Index r, Index c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return row_vals(r)[static_cast<std::size_t>(it - cols.begin())];
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) d(r, cs[k]) += vs[k];
  }
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  std::vector<Index> counts(static_cast<std::size_t>(cols_), 0);
  for (Index c : col_) ++counts[static_cast<std::size_t>(c)];
  t.row_ptr_[0] = 0;
  for (Index c = 0; c < cols_; ++c)
    t.row_ptr_[static_cast<std::size_t>(c) + 1] =
        t.row_ptr_[static_cast<std::size_t>(c)] + counts[static_cast<std::size_t>(c)];
  t.col_.resize(col_.size());
  t.val_.resize(val_.size());
  std::vector<Index> cursor(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (Index r = 0; r < rows_; ++r) {
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      auto& pos = cursor[static_cast<std::size_t>(cs[k])];
      t.col_[static_cast<std::size_t>(pos)] = r;
      t.val_[static_cast<std::size_t>(pos)] = vs[k];
      ++pos;
    }
  }
  return t;
}

Eigen::MatrixXd SparseMatrix::multiply(const Eigen::MatrixXd& x) const {
  if (x.rows() != cols_) throw DataError("sparse multiply: dimension mismatch");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows_, x.cols());
  for (Index r = 0; r < rows_; ++r) {
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) y.row(r) += vs[k] * x.row(cs[k]);
  }
  return y;
}

Eigen::MatrixXd SparseMatrix::transpose_multiply(const Eigen::MatrixXd& x) const {
  if (x.rows() != rows_) throw DataError("sparse transpose_multiply: dimension mismatch");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(cols_, x.cols());
  for (Index r = 0; r < rows_; ++r) {
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) y.row(cs[k]) += vs[k] * x.row(r);
  }
  return y;
}

void SparseMatrix::transpose_apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.setZero(cols_);
  for (Index r = 0; r < rows_; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) y[cs[k]] += vs[k] * xr;
  }
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> s(static_cast<std::size_t>(rows_), 0.0);
  for (Index r = 0; r < rows_; ++r)
    for (double v : row_vals(r)) s[static_cast<std::size_t>(r)] += v;
  return s;
}

std::vector<double> SparseMatrix::col_sums() const {
  std::vector<double> s(static_cast<std::size_t>(cols_), 0.0);
  for (Index r = 0; r < rows_; ++r) {
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) s[static_cast<std::size_t>(cs[k])] += vs[k];
  }
  return s;
}

SparseMatrix SparseMatrix::plus_identity() const {
  if (rows_ != cols_) throw DataError("plus_identity: matrix must be square");
  std::vector<Triplet> t;
  t.reserve(val_.size() + static_cast<std::size_t>(rows_));
  for (Index r = 0; r < rows_; ++r) {
    auto cs = row_cols(r);
    auto vs = row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) t.push_back({r, cs[k], vs[k]});
    t.push_back({r, r, 1.0});
  }
  return from_triplets(rows_, cols_, std::move(t));
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  SparseMatrix t = transpose();
  if (t.row_ptr_ != row_ptr_ || t.col_ != col_) return false;
  for (std::size_t k = 0; k < val_.size(); ++k)
    if (std::abs(val_[k] - t.val_[k]) > tol) return false;
  return true;
}

SparseMatrix SparseMatrix::scaled(const std::vector<double>& rs,
                                  const std::vector<double>& cs) const {
  if (rs.size() != static_cast<std::size_t>(rows_) ||
      cs.size() != static_cast<std::size_t>(cols_))
    throw DataError("scaled: scale vector size mismatch");
  SparseMatrix m = *this;
  for (Index r = 0; r < rows_; ++r) {
    auto lo = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r)]);
    auto hi = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1]);
    for (std::size_t k = lo; k < hi; ++k)
      m.val_[k] = val_[k] * rs[static_cast<std::size_t>(r)] *
                  cs[static_cast<std::size_t>(col_[k])];
  }
  return m;
}

SparseBuilder::SparseBuilder(Index rows, Index cols) : m_(rows, cols) {}

void SparseBuilder::set_row(Index r, const std::vector<std::pair<Index, double>>& entries) {
  if (r != next_row_) throw DataError("sparse builder: rows must be appended in order");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].first < 0 || entries[k].first >= m_.cols())
      throw DataError("sparse builder: column out of range");
    if (k > 0 && entries[k].first <= entries[k - 1].first)
      throw DataError("sparse builder: columns must be strictly ascending");
    m_.col_.push_back(entries[k].first);
    m_.val_.push_back(entries[k].second);
  }
  m_.row_ptr_[static_cast<std::size_t>(r) + 1] = static_cast<Index>(m_.col_.size());
  ++next_row_;
}

SparseMatrix SparseBuilder::take() {
  if (next_row_ != m_.rows()) throw DataError("sparse builder: not all rows set");
  return std::move(m_);
}

SparseMatrix sparsify_rows_topk(const Eigen::MatrixXd& dense, Index k) {
  if (k <= 0) throw UsageError("top-k truncation: k must be positive");
  const Index n = dense.rows();
  SparseBuilder b(n, dense.cols());
  std::vector<Index> order(static_cast<std::size_t>(dense.cols()));
  for (Index r = 0; r < n; ++r) {
    std::iota(order.begin(), order.end(), Index{0});
    auto keep = std::min<Index>(k, dense.cols());
    // Stable value-descending order; equal values keep the lower column.
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index bcol) {
      return dense(r, a) > dense(r, bcol);
    });
    std::vector<std::pair<Index, double>> entries;
    entries.reserve(static_cast<std::size_t>(keep));
    double total = dense.row(r).sum();
    double kept = 0.0;
    for (Index j = 0; j < keep; ++j) {
      Index c = order[static_cast<std::size_t>(j)];
      double v = dense(r, c);
      if (v == 0.0) continue;
      entries.emplace_back(c, v);
      kept += v;
    }
    std::sort(entries.begin(), entries.end());
    if (kept != 0.0 && kept != total) {
      double scale = total / kept;
      for (auto& e : entries) e.second *= scale;
    }
    b.set_row(r, entries);
  }
  return b.take();
}

}  // namespace cldg
