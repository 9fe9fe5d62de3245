#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cldg/common.hpp"

namespace cldg {

enum class ContrastMode { Cldg, CldgPlusPlus };

ContrastMode contrast_mode_from_string(const std::string& name);
std::string to_string(ContrastMode m);

struct LossConfig {
  double tau = 0.1;
  ContrastMode mode = ContrastMode::Cldg;
  double w_local_local = 1.0;
  double w_global_global = 1.0;
  double w_local_global = 1.0;
};

struct InfoNceResult {
  double value = 0.0;
  Eigen::MatrixXd d_anchor;
  Eigen::MatrixXd d_positive;
};

// Temperature-scaled contrast between aligned rows: row i of `anchor` treats
// row i of `positive` as its positive and every other row of `positive`
// (plus the positive itself, j = i stays in the denominator) as negatives.
// Value is the mean over rows.
InfoNceResult info_nce(const Eigen::MatrixXd& anchor, const Eigen::MatrixXd& positive,
                       double tau);

struct CompositeResult {
  double value = 0.0;
  std::vector<Eigen::MatrixXd> d_local;   // per view, batch-table gradients
  std::vector<Eigen::MatrixXd> d_global;  // empty in plain-contrast mode
};

// Sum over ordered view pairs (q, k), q != k, of
//   w_ll * nce(zl[q], zl[k]) [+ w_gg * nce(zg[q], zg[k])
//                             + w_lg * (nce(zl[q], zg[q]) + nce(zl[k], zg[k]))],
// the bracketed terms only in the diffusion-augmented mode. The cross-scope
// terms ride inside the pair sum, so each view's own term appears 2(V-1)
// times; that weighting is part of the objective.
CompositeResult composite_loss(const std::vector<Eigen::MatrixXd>& z_local,
                               const std::vector<Eigen::MatrixXd>& z_global,
                               const LossConfig& cfg);

}  // namespace cldg
