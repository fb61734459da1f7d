#include <Eigen/Dense>

#include "doctest.h"
#include "lvggm/errors.hpp"
#include "lvggm/matrix_kernel.hpp"
#include "test_util.hpp"

using namespace lvggm;

TEST_CASE("SymMatrix symmetrizes and validates") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 4.0, 3.0;
  SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(3.0));

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SymMatrix{bad}, Error);
  CHECK_THROWS_AS(SymMatrix{Eigen::MatrixXd(0, 0)}, Error);
}

TEST_CASE("sym_eig on diagonal and identity input") {
  SymMatrix d = SymMatrix::diagonal(Eigen::Vector2d(2.0, 1.0));
  auto e = sym_eig(d);
  CHECK(e.values(0) == doctest::Approx(2.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK((e.vectors.cwiseAbs() - Eigen::MatrixXd::Identity(2, 2)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto ei = sym_eig(SymMatrix::identity(3));
  for (int i = 0; i < 3; ++i) CHECK(ei.values(i) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig spectral reconstruction over random matrices") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    int p = 2 + static_cast<int>(rng() % 39);
    SymMatrix a(lvggm::testing::random_sym(p, rng, 2.0));
    auto e = sym_eig(a);
    Eigen::MatrixXd rec =
        e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    double ref = std::max(spectral_norm(a.mat()), 1e-300);
    CHECK(spectral_norm(rec - a.mat()) <= 1e-9 * ref);
    CHECK(spectral_norm(e.vectors.transpose() * e.vectors -
                        Eigen::MatrixXd::Identity(p, p)) <= 1e-10);
    // descending order
    for (int i = 0; i + 1 < p; ++i) CHECK(e.values(i) >= e.values(i + 1));
  }
}

TEST_CASE("psd_inverse basics") {
  auto inv_id = psd_inverse(SymMatrix::identity(4));
  CHECK((inv_id.mat() - Eigen::MatrixXd::Identity(4, 4)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto inv_d = psd_inverse(SymMatrix::diagonal(Eigen::Vector2d(2.0, 4.0)));
  CHECK(inv_d(0, 0) == doctest::Approx(0.5));
  CHECK(inv_d(1, 1) == doctest::Approx(0.25));

  std::mt19937_64 rng(7);
  SymMatrix a = lvggm::testing::random_spd(6, rng);
  SymMatrix inv = psd_inverse(a);
  CHECK(spectral_norm(a.mat() * inv.mat() - Eigen::MatrixXd::Identity(6, 6)) <=
        1e-9);

  CHECK_THROWS_AS(psd_inverse(SymMatrix::diagonal(Eigen::Vector2d(1.0, 0.0))),
                  Error);
  SymMatrix indef = SymMatrix::diagonal(Eigen::Vector2d(1.0, -1.0));
  CHECK_THROWS_AS(psd_inverse(indef), Error);
}

TEST_CASE("psd_inverse roundtrip") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int p = 2 + static_cast<int>(rng() % 12);
    SymMatrix a = lvggm::testing::random_spd(p, rng);
    SymMatrix back = psd_inverse(psd_inverse(a));
    CHECK(spectral_norm(back.mat() - a.mat()) <=
          1e-8 * spectral_norm(a.mat()));
  }
}

TEST_CASE("mvn_sample determinism and edge cases") {
  auto x0 = mvn_sample(SymMatrix::identity(2), 0, 42);
  CHECK(x0.rows() == 0);
  CHECK(x0.cols() == 2);

  auto xa = mvn_sample(SymMatrix::identity(3), 64, 42);
  auto xb = mvn_sample(SymMatrix::identity(3), 64, 42);
  CHECK((xa - xb).cwiseAbs().maxCoeff() == 0.0);  // bit-identical

  auto xc = mvn_sample(SymMatrix::identity(3), 64, 43);
  CHECK((xa - xc).cwiseAbs().maxCoeff() > 0.0);

  SymMatrix indef = SymMatrix::diagonal(Eigen::Vector2d(1.0, -0.5));
  CHECK_THROWS_AS(mvn_sample(indef, 4, 1), Error);
}

TEST_CASE("mvn_sample matches its covariance at large n") {
  const std::int64_t n = 100000;
  auto x = mvn_sample(SymMatrix::identity(3), n, 2024);
  Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n);
  CHECK(spectral_norm(cov - Eigen::MatrixXd::Identity(3, 3)) <= 0.05);

  auto y = mvn_sample(SymMatrix::diagonal(Eigen::Vector2d(4.0, 1.0)), n, 9);
  Eigen::MatrixXd cov2 = y.transpose() * y / static_cast<double>(n);
  CHECK(cov2(0, 0) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(cov2(1, 1) == doctest::Approx(1.0).epsilon(0.05));
}
