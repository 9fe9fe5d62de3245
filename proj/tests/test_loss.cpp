#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cldg/loss.hpp"
#include "cldg/rng.hpp"

using namespace cldg;

namespace {

// Scalar-only reimplementation: per-row -log softmax over raw exponentials,
// no shared matrix code with the implementation under test.
double scalar_nce(const Eigen::MatrixXd& anchor, const Eigen::MatrixXd& positive, double tau) {
  const Eigen::Index n = anchor.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = 0.0, diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double sim = 0.0;
      for (Eigen::Index k = 0; k < anchor.cols(); ++k) sim += anchor(i, k) * positive(j, k);
      denom += std::exp(sim / tau);
      if (j == i) diag = sim / tau;
    }
    total += std::log(denom) - diag;
  }
  return total / static_cast<double>(n);
}

double scalar_composite(const std::vector<Eigen::MatrixXd>& zl,
                        const std::vector<Eigen::MatrixXd>& zg, const LossConfig& cfg) {
  const std::size_t v = zl.size();
  double total = 0.0;
  for (std::size_t q = 0; q < v; ++q) {
    for (std::size_t k = 0; k < v; ++k) {
      if (q == k) continue;
      total += cfg.w_local_local * scalar_nce(zl[q], zl[k], cfg.tau);
      if (cfg.mode == ContrastMode::CldgPlusPlus) {
        total += cfg.w_global_global * scalar_nce(zg[q], zg[k], cfg.tau);
        total += cfg.w_local_global *
                 (scalar_nce(zl[q], zg[q], cfg.tau) + scalar_nce(zl[k], zg[k], cfg.tau));
      }
    }
  }
  return total;
}

Eigen::MatrixXd random_unit_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    m.row(i) /= m.row(i).norm();
  }
  return m;
}

}  // namespace

TEST_CASE("aligned contrast on identity rows has a closed form") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  // logits/tau = [[1/tau, 0], [0, 1/tau]]; per-row loss = log(1 + e^(-1/tau)).
  auto r1 = info_nce(eye, eye, 1.0);
  CHECK(r1.value == doctest::Approx(0.31326168751822286).epsilon(1e-14));
  auto r01 = info_nce(eye, eye, 0.1);
  CHECK(r01.value == doctest::Approx(4.5398899216870535e-05).epsilon(1e-12));
}

TEST_CASE("the aligned pair stays in the denominator") {
  // One row: the only term is j = i, so the loss is exactly zero regardless
  // of the similarity value. A formulation excluding j = i would be -inf/NaN.
  Eigen::MatrixXd a(1, 2), p(1, 2);
  a << 0.6, 0.8;
  p << 0.6, 0.8;
  auto r = info_nce(a, p, 0.1);
  CHECK(r.value == 0.0);
  CHECK(r.d_anchor.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("contrast value matches the scalar oracle") {
  for (Eigen::Index n : {1, 2, 4, 8}) {
    for (double tau : {1.0, 0.1}) {
      auto a = random_unit_rows(n, 6, 100 + static_cast<std::uint64_t>(n));
      auto p = random_unit_rows(n, 6, 200 + static_cast<std::uint64_t>(n));
      auto r = info_nce(a, p, tau);
      CHECK(r.value == doctest::Approx(scalar_nce(a, p, tau)).epsilon(1e-12));
    }
  }
}

TEST_CASE("contrast gradients match finite differences") {
  const Eigen::Index n = 4, d = 3;
  auto a = random_unit_rows(n, d, 31);
  auto p = random_unit_rows(n, d, 32);
  const double tau = 0.2;
  auto r = info_nce(a, p, tau);
  const double h = 1e-6;

  auto fd_check = [&](Eigen::MatrixXd& m, const Eigen::MatrixXd& grad) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double orig = m(i, j);
        m(i, j) = orig + h;
        const double up = scalar_nce(a, p, tau);
        m(i, j) = orig - h;
        const double down = scalar_nce(a, p, tau);
        m(i, j) = orig;
        const double fd = (up - down) / (2.0 * h);
        CHECK(grad(i, j) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  };
  fd_check(a, r.d_anchor);
  fd_check(p, r.d_positive);
}

TEST_CASE("better alignment gives lower loss, sharper at lower temperature") {
  auto pair_loss = [](double align, double tau) {
    Eigen::MatrixXd a(2, 2), p(2, 2);
    a << 1.0, 0.0, 0.0, 1.0;
    const double off = std::sqrt(1.0 - align * align);
    p << align, off, off, align;
    return info_nce(a, p, tau).value;
  };
  CHECK(pair_loss(0.9, 0.5) < pair_loss(0.6, 0.5));
  CHECK(pair_loss(0.6, 0.5) < pair_loss(0.2, 0.5));
  // Smaller tau separates the same two alignment levels more strongly.
  const double gap_sharp = pair_loss(0.2, 0.1) - pair_loss(0.9, 0.1);
  const double gap_soft = pair_loss(0.2, 0.5) - pair_loss(0.9, 0.5);
  CHECK(gap_sharp > gap_soft);
}

TEST_CASE("composite objective matches the scalar oracle") {
  for (std::size_t views : {2u, 3u}) {
    for (Eigen::Index n : {1, 2, 4, 8}) {
      std::vector<Eigen::MatrixXd> zl, zg;
      for (std::size_t v = 0; v < views; ++v) {
        zl.push_back(random_unit_rows(n, 5, 41 + v * 10 + static_cast<std::uint64_t>(n)));
        zg.push_back(random_unit_rows(n, 5, 411 + v * 10 + static_cast<std::uint64_t>(n)));
      }
      LossConfig cfg;
      cfg.tau = 0.1;
      cfg.w_local_local = 1.0;
      cfg.w_global_global = 0.7;
      cfg.w_local_global = 0.4;

      cfg.mode = ContrastMode::Cldg;
      auto plain = composite_loss(zl, {}, cfg);
      CHECK(plain.value == doctest::Approx(scalar_composite(zl, {}, cfg)).epsilon(1e-12));
      CHECK(plain.d_global.empty());

      cfg.mode = ContrastMode::CldgPlusPlus;
      auto dual = composite_loss(zl, zg, cfg);
      CHECK(dual.value == doctest::Approx(scalar_composite(zl, zg, cfg)).epsilon(1e-12));
      CHECK(dual.d_global.size() == views);
    }
  }
}

TEST_CASE("composite gradients match finite differences through the whole sum") {
  const std::size_t views = 3;
  const Eigen::Index n = 3, d = 4;
  std::vector<Eigen::MatrixXd> zl, zg;
  for (std::size_t v = 0; v < views; ++v) {
    zl.push_back(random_unit_rows(n, d, 61 + v));
    zg.push_back(random_unit_rows(n, d, 71 + v));
  }
  LossConfig cfg;
  cfg.tau = 0.3;
  cfg.mode = ContrastMode::CldgPlusPlus;
  cfg.w_global_global = 0.9;
  cfg.w_local_global = 0.5;
  auto r = composite_loss(zl, zg, cfg);

  const double h = 1e-6;
  for (std::size_t v = 0; v < views; ++v) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        auto wiggle = [&](std::vector<Eigen::MatrixXd>& zs, double delta) {
          zs[v](i, j) += delta;
          const double out = scalar_composite(zl, zg, cfg);
          zs[v](i, j) -= delta;
          return out;
        };
        const double fd_l = (wiggle(zl, h) - wiggle(zl, -h)) / (2.0 * h);
        CHECK(r.d_local[v](i, j) == doctest::Approx(fd_l).epsilon(1e-5));
        const double fd_g = (wiggle(zg, h) - wiggle(zg, -h)) / (2.0 * h);
        CHECK(r.d_global[v](i, j) == doctest::Approx(fd_g).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("cross-scope terms repeat once per ordered pair") {
  // With w_ll = w_gg = 0, the composite reduces to w_lg * 2(V-1) * sum_v nce(zl[v], zg[v]).
  const std::size_t views = 3;
  const Eigen::Index n = 4;
  std::vector<Eigen::MatrixXd> zl, zg;
  for (std::size_t v = 0; v < views; ++v) {
    zl.push_back(random_unit_rows(n, 5, 81 + v));
    zg.push_back(random_unit_rows(n, 5, 91 + v));
  }
  LossConfig cfg;
  cfg.mode = ContrastMode::CldgPlusPlus;
  cfg.w_local_local = 0.0;
  cfg.w_global_global = 0.0;
  cfg.w_local_global = 1.0;
  auto r = composite_loss(zl, zg, cfg);
  double own = 0.0;
  for (std::size_t v = 0; v < views; ++v) own += scalar_nce(zl[v], zg[v], cfg.tau);
  CHECK(r.value == doctest::Approx(2.0 * (views - 1) * own).epsilon(1e-12));
}

TEST_CASE("objective input validation") {
  auto z = random_unit_rows(3, 4, 5);
  LossConfig cfg;
  CHECK_THROWS_AS(composite_loss({z}, {}, cfg), UsageError);  // needs >= 2 views
  cfg.mode = ContrastMode::CldgPlusPlus;
  CHECK_THROWS_AS(composite_loss({z, z}, {}, cfg), DataError);  // missing global tables
  Eigen::MatrixXd wrong = random_unit_rows(2, 4, 6);
  CHECK_THROWS_AS(info_nce(z, wrong, 0.1), DataError);
  CHECK_THROWS_AS(info_nce(z, z, 0.0), UsageError);
  CHECK(to_string(contrast_mode_from_string("cldg")) == "cldg");
  CHECK(to_string(contrast_mode_from_string("cldgpp")) == "cldgpp");
  CHECK_THROWS_AS(contrast_mode_from_string("bogus"), UsageError);
}
