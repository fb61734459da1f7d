#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "lvggm/errors.hpp"

namespace lvggm {

/// Dense symmetric matrix. Enforces exact symmetry on construction by
/// averaging with the transpose; rejects non-finite entries.
class SymMatrix {
 public:
  explicit SymMatrix(Eigen::MatrixXd m);

  static SymMatrix identity(int dim);
  static SymMatrix zero(int dim);
  static SymMatrix diagonal(const Eigen::VectorXd& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, matching order
};

/// Full spectral decomposition, eigenvalues sorted descending.
EigenDecomposition sym_eig(const SymMatrix& a);

/// Inverse of a positive definite matrix via its spectral decomposition.
/// eps <= 0 selects the default threshold 1e-12 * ||a||_2.
SymMatrix psd_inverse(const SymMatrix& a, double eps = -1.0);

/// n zero-mean Gaussian draws (rows) with the given covariance, through the
/// spectral square root. Deterministic per seed.
Eigen::MatrixXd mvn_sample(const SymMatrix& covariance, std::int64_t n,
                           std::uint64_t seed);

double spectral_norm(const Eigen::MatrixXd& m);
double inf_norm(const Eigen::MatrixXd& m);  // largest entry magnitude
double nuclear_norm(const SymMatrix& m);    // sum of |eigenvalues|
double min_eigenvalue(const SymMatrix& m);

/// Spectral square root V sqrt(max(diag,0)) V^T; accepts roundoff-level
/// negative eigenvalues, rejects genuinely indefinite input.
Eigen::MatrixXd spectral_sqrt(const SymMatrix& a);

// splitmix64, used to derive independent per-trial seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix64(mix64(master ^ mix64(a)) ^ mix64(b));
}

}  // namespace lvggm
