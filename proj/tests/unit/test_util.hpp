#pragma once

#include <Eigen/Dense>
#include <random>

#include "lvggm/matrix_kernel.hpp"

namespace lvggm::testing {

inline Eigen::MatrixXd random_sym(int p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = scale * n01(rng);
  return 0.5 * (m + m.transpose());
}

inline SymMatrix random_spd(int p, std::mt19937_64& rng, double min_eig = 0.5) {
  Eigen::MatrixXd g = random_sym(p, rng);
  Eigen::MatrixXd m = g * g.transpose() / p + min_eig * Eigen::MatrixXd::Identity(p, p);
  return SymMatrix(m);
}

// Random p x r matrix with orthonormal columns (thin QR of a Gaussian draw).
inline Eigen::MatrixXd random_orthonormal(int p, int r, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd g(p, r);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j) g(i, j) = n01(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(p, r);
}

}  // namespace lvggm::testing
