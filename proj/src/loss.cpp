#include "cldg/loss.hpp"

#include <cmath>

namespace cldg {

ContrastMode contrast_mode_from_string(const std::string& name) {
  if (name == "cldg") return ContrastMode::Cldg;
  if (name == "cldgpp") return ContrastMode::CldgPlusPlus;
  throw UsageError("unknown contrast mode '" + name + "' (expected cldg|cldgpp)");
}

std::string to_string(ContrastMode m) {
  return m == ContrastMode::Cldg ? "cldg" : "cldgpp";
}

InfoNceResult info_nce(const Eigen::MatrixXd& anchor, const Eigen::MatrixXd& positive,
                       double tau) {
  if (tau <= 0.0) throw UsageError("info_nce: tau must be positive");
  const Index n = anchor.rows();
  if (n == 0) throw DataError("info_nce: empty batch");
  if (positive.rows() != n || positive.cols() != anchor.cols())
    throw DataError("info_nce: anchor/positive shape mismatch");

  Eigen::MatrixXd logits = (anchor * positive.transpose()) / tau;
  // Row-stabilized log-sum-exp.
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.colwise() - row_max;
  Eigen::MatrixXd ex = shifted.array().exp();
  Eigen::VectorXd denom = ex.rowwise().sum();

  double value = 0.0;
  for (Index i = 0; i < n; ++i)
    value += std::log(denom[i]) + row_max[i] - logits(i, i);
  value /= static_cast<double>(n);

  // dL/dlogits = (softmax - I) / n, pushed through logits = A P^T / tau.
  Eigen::MatrixXd g = ex.array().colwise() / denom.array();
  g.diagonal().array() -= 1.0;
  g /= static_cast<double>(n);

  InfoNceResult r;
  r.value = value;
  r.d_anchor = (g * positive) / tau;
  r.d_positive = (g.transpose() * anchor) / tau;
  return r;
}

CompositeResult composite_loss(const std::vector<Eigen::MatrixXd>& z_local,
                               const std::vector<Eigen::MatrixXd>& z_global,
                               const LossConfig& cfg) {
  const auto v = static_cast<Index>(z_local.size());
  if (v < 2) throw UsageError("composite loss: need at least two views");
  const bool dual = cfg.mode == ContrastMode::CldgPlusPlus;
  if (dual && z_global.size() != z_local.size())
    throw DataError("composite loss: global tables missing for diffusion-augmented mode");
  const Index rows = z_local.front().rows();
  const Index cols = z_local.front().cols();
  if (rows == 0) throw DataError("composite loss: empty batch");
  for (const auto& m : z_local)
    if (m.rows() != rows || m.cols() != cols)
      throw DataError("composite loss: inconsistent local table shapes");
  if (dual)
    for (const auto& m : z_global)
      if (m.rows() != rows || m.cols() != cols)
        throw DataError("composite loss: inconsistent global table shapes");

  CompositeResult out;
  out.d_local.assign(z_local.size(), Eigen::MatrixXd::Zero(rows, cols));
  if (dual) out.d_global.assign(z_local.size(), Eigen::MatrixXd::Zero(rows, cols));

  for (Index q = 0; q < v; ++q) {
    for (Index k = 0; k < v; ++k) {
      if (q == k) continue;
      auto ll = info_nce(z_local[q], z_local[k], cfg.tau);
      out.value += cfg.w_local_local * ll.value;
      out.d_local[q] += cfg.w_local_local * ll.d_anchor;
      out.d_local[k] += cfg.w_local_local * ll.d_positive;
      if (!dual) continue;
      auto gg = info_nce(z_global[q], z_global[k], cfg.tau);
      out.value += cfg.w_global_global * gg.value;
      out.d_global[q] += cfg.w_global_global * gg.d_anchor;
      out.d_global[k] += cfg.w_global_global * gg.d_positive;
      auto lg_q = info_nce(z_local[q], z_global[q], cfg.tau);
      auto lg_k = info_nce(z_local[k], z_global[k], cfg.tau);
      out.value += cfg.w_local_global * (lg_q.value + lg_k.value);
      out.d_local[q] += cfg.w_local_global * lg_q.d_anchor;
      out.d_global[q] += cfg.w_local_global * lg_q.d_positive;
      out.d_local[k] += cfg.w_local_global * lg_k.d_anchor;
      out.d_global[k] += cfg.w_local_global * lg_k.d_positive;
    }
  }
  return out;
}

}  // namespace cldg
