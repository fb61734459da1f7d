#include <cmath>

#include "doctest.h"
#include "lvggm/lvmodel.hpp"
#include "test_util.hpp"

using namespace lvggm;

namespace {

LatentVariableModel custom_model(const SymMatrix& k_full, int p, int h) {
  LatentVariableModel m;
  m.p = p;
  m.h = h;
  m.k_full = k_full;
  for (int i = 0; i < p; ++i) m.observed.push_back(i);
  for (int i = 0; i < h; ++i) m.hidden.push_back(p + i);
  m.generator = "custom";
  return m;
}

}  // namespace

TEST_CASE("cycle model construction") {
  auto model = build_cycle_model(36, 2, 0.25, 0.8, -1.0, 7);
  CHECK(model.p == 36);
  CHECK(model.h == 2);
  CHECK(min_eigenvalue(model.k_full) > 0.0);

  auto dec = marginalize(model);
  // Conditional structure: exactly the cycle edges, negative entries.
  for (int i = 0; i < 36; ++i)
    for (int j = i + 1; j < 36; ++j) {
      bool edge = (j == i + 1) || (i == 0 && j == 35);
      if (edge)
        CHECK(dec.s_true(i, j) < -1e-6);
      else
        CHECK(std::abs(dec.s_true(i, j)) < 1e-12);
    }
  auto cx = model_complexity(dec);
  CHECK(cx.rank_l == 2);
  CHECK(cx.deg_max == 3);
  CHECK(cx.deg_min == 3);
  CHECK(cx.inc >= std::sqrt(2.0 / 36.0) - 1e-12);
  CHECK(cx.inc <= 1.0 + 1e-12);
}

TEST_CASE("cycle model without hidden variables") {
  auto model = build_cycle_model(3, 0, 0.25, 0.8, 1.0, 3);
  auto dec = marginalize(model);
  CHECK(inf_norm(dec.l_true.mat()) == 0.0);
  CHECK((dec.k_marg.mat() - dec.s_true.mat()).norm() == 0.0);
  CHECK((dec.k_marg.mat() - model.k_full.mat()).norm() == 0.0);
}

TEST_CASE("single latent variable gives a rank-1 summary") {
  auto model = build_cycle_model(10, 1, 0.2, 0.8, -1.0, 5);
  auto cx = model_complexity(marginalize(model));
  CHECK(cx.rank_l == 1);
  CHECK(cx.sigma_min > 0.0);
}

TEST_CASE("grid model structure") {
  auto m66 = build_grid_model(6, 6, 1, 0.15, 0.8, -1.0, 11);
  CHECK(m66.p == 36);
  CHECK(min_eigenvalue(m66.k_full) > 0.0);
  CHECK(model_complexity(marginalize(m66)).rank_l == 1);

  // 2x2 grid is the 4-cycle.
  auto m22 = build_grid_model(2, 2, 0, 0.1, 0.8, 1.0, 1);
  auto cyc = build_cycle_model(4, 0, 0.1, 0.8, 1.0, 1);
  auto s_grid = marginalize(m22).s_true;
  int grid_edges = 0, cyc_edges = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (std::abs(s_grid(i, j)) > 1e-12) ++grid_edges;
      if (std::abs(marginalize(cyc).s_true(i, j)) > 1e-12) ++cyc_edges;
    }
  CHECK(grid_edges == 4);
  CHECK(cyc_edges == 4);

  // 3x3 grid: the interior node has 4 neighbors, plus the diagonal entry.
  auto m33 = build_grid_model(3, 3, 1, 0.15, 0.8, -1.0, 13);
  auto dec = marginalize(m33);
  int max_row = 0;
  for (int i = 0; i < 9; ++i) {
    int c = 0;
    for (int j = 0; j < 9; ++j)
      if (std::abs(dec.s_true(i, j)) > 1e-8) ++c;
    max_row = std::max(max_row, c);
  }
  auto cx = model_complexity(dec);
  CHECK(cx.deg_max == max_row);
  CHECK(max_row == 5);
}

TEST_CASE("marginalize 2x2 arithmetic") {
  Eigen::MatrixXd k(2, 2);
  k << 2.0, 1.0, 1.0, 2.0;
  auto model = custom_model(SymMatrix(k), 1, 1);
  auto dec = marginalize(model);
  CHECK(dec.l_true(0, 0) == doctest::Approx(0.5));
  CHECK(dec.k_marg(0, 0) == doctest::Approx(1.5));
  CHECK(dec.sigma_marg(0, 0) == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("marginalize agrees with the covariance submatrix route") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    int h = 1 + static_cast<int>(rng() % 3);
    int p = 2 + static_cast<int>(rng() % 7);
    SymMatrix k_full = lvggm::testing::random_spd(p + h, rng);
    auto model = custom_model(k_full, p, h);
    auto dec = marginalize(model);

    SymMatrix sigma_full = psd_inverse(k_full);
    Eigen::MatrixXd sigma_oo = sigma_full.mat().topLeftCorner(p, p);
    double rel = spectral_norm(dec.sigma_marg.mat() - sigma_oo) /
                 spectral_norm(sigma_oo);
    CHECK(rel <= 1e-8);
    // Consistency of the split itself.
    CHECK(inf_norm(dec.k_marg.mat() - (dec.s_true.mat() - dec.l_true.mat())) <=
          1e-10);
    CHECK(min_eigenvalue(dec.l_true) >= -1e-10);
  }
}

TEST_CASE("sample covariance basics") {
  auto model = build_cycle_model(5, 1, 0.2, 0.8, -1.0, 21);
  auto sc1 = sample_covariance(model, 1, 4);
  auto e = sym_eig(sc1.sigma);
  CHECK(e.values(0) > 0.0);
  for (int i = 1; i < 5; ++i)
    CHECK(std::abs(e.values(i)) <= 1e-12 * e.values(0));  // rank 1

  auto sa = sample_covariance(model, 200, 99);
  auto sb = sample_covariance(model, 200, 99);
  CHECK((sa.sigma.mat() - sb.sigma.mat()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(sample_covariance(model, 0, 1), Error);
}

TEST_CASE("sample covariance concentrates at large n") {
  auto model = build_cycle_model(36, 2, 0.25, 0.8, -1.0, 7);
  auto dec = marginalize(model);
  double psi = spectral_norm(dec.sigma_marg.mat());
  auto sc = sample_covariance(model, 1000000, 123);
  CHECK(spectral_norm(sc.sigma.mat() - dec.sigma_marg.mat()) <= 0.02 * psi);
}

TEST_CASE("sample covariance concentration bound holds at stated frequency") {
  // ||Sigma_n - Sigma*||_2 <= sqrt(128 p psi^2 / n) in >= 95% of trials.
  auto model = build_cycle_model(6, 1, 0.2, 0.8, -1.0, 2);
  auto dec = marginalize(model);
  double psi = spectral_norm(dec.sigma_marg.mat());
  int hits = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::int64_t n = (t % 2 == 0) ? 12 : 96;  // both >= 2p
    double delta_n = std::sqrt(128.0 * 6 * psi * psi / double(n));
    auto sc = sample_covariance(model, n, derive_seed(555, t));
    if (spectral_norm(sc.sigma.mat() - dec.sigma_marg.mat()) <= delta_n) ++hits;
  }
  CHECK(hits >= static_cast<int>(0.95 * trials));
}

TEST_CASE("model complexity edge cases") {
  auto cyc = build_cycle_model(8, 0, 0.25, 0.8, 1.0, 17);
  auto cx = model_complexity(marginalize(cyc));
  CHECK(cx.deg_max == 3);
  CHECK(cx.deg_min == 3);
  CHECK(cx.inc == 0.0);
  CHECK(cx.rank_l == 0);

  // Flat rank-1 low-rank part achieves the incoherence lower bound.
  const int p = 9;
  Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(p, p) / p;
  MarginalDecomposition dec;
  dec.s_true = SymMatrix(2.0 * Eigen::MatrixXd::Identity(p, p));
  dec.l_true = SymMatrix(flat);
  dec.k_marg = SymMatrix(dec.s_true.mat() - flat);
  dec.sigma_marg = psd_inverse(dec.k_marg);
  auto fx = model_complexity(dec);
  CHECK(fx.inc == doctest::Approx(std::sqrt(1.0 / p)).epsilon(1e-12));
  CHECK(fx.sigma_min == doctest::Approx(1.0));

  // Coordinate-aligned rank-1 part has incoherence 1.
  Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(p, p);
  e11(0, 0) = 1.0;
  dec.l_true = SymMatrix(e11);
  dec.k_marg = SymMatrix(dec.s_true.mat() - e11);
  dec.sigma_marg = psd_inverse(dec.k_marg);
  CHECK(model_complexity(dec).inc == doctest::Approx(1.0));
}

TEST_CASE("constructed models have full-rank latent summaries") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    int p = 6 + static_cast<int>(rng() % 12);
    int h = 1 + static_cast<int>(rng() % 3);
    auto model = build_cycle_model(p, h, 0.2, 0.8, -1.0, derive_seed(88, t));
    auto cx = model_complexity(marginalize(model));
    CHECK(cx.rank_l == h);
    CHECK(cx.inc >= std::sqrt(double(h) / p) - 1e-12);
    CHECK(cx.inc <= 1.0 + 1e-12);
  }
}
