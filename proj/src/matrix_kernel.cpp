#include "lvggm/matrix_kernel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace lvggm {

SymMatrix::SymMatrix(Eigen::MatrixXd m) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw_invalid("SymMatrix: need a square matrix of dimension >= 1");
  if (!m.allFinite()) throw_invalid("SymMatrix: non-finite entries");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int dim) {
  return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SymMatrix SymMatrix::zero(int dim) {
  return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& d) {
  return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

EigenDecomposition sym_eig(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat());
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::Internal, "sym_eig: eigensolver failed");
  const int p = a.dim();
  EigenDecomposition d;
  d.values = es.eigenvalues().reverse();
  d.vectors.resize(p, p);
  for (int k = 0; k < p; ++k) d.vectors.col(k) = es.eigenvectors().col(p - 1 - k);
  return d;
}

SymMatrix psd_inverse(const SymMatrix& a, double eps) {
  EigenDecomposition d = sym_eig(a);
  const double nrm = std::max(std::abs(d.values(0)),
                              std::abs(d.values(a.dim() - 1)));
  if (eps <= 0.0) eps = 1e-12 * nrm;
  const double lmin = d.values(a.dim() - 1);
  if (lmin <= eps)
    throw_not_pd("psd_inverse: smallest eigenvalue " + std::to_string(lmin) +
                 " below threshold " + std::to_string(eps));
  Eigen::VectorXd inv = d.values.cwiseInverse();
  return SymMatrix(d.vectors * inv.asDiagonal() * d.vectors.transpose());
}

Eigen::MatrixXd spectral_sqrt(const SymMatrix& a) {
  EigenDecomposition d = sym_eig(a);
  const double nrm = std::max(std::abs(d.values(0)),
                              std::abs(d.values(a.dim() - 1)));
  const double tol = 1e-10 * std::max(nrm, 1.0);
  Eigen::VectorXd s(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    if (d.values(i) < -tol)
      throw_not_pd("spectral_sqrt: negative eigenvalue " +
                   std::to_string(d.values(i)));
    s(i) = std::sqrt(std::max(d.values(i), 0.0));
  }
  return d.vectors * s.asDiagonal() * d.vectors.transpose();
}

Eigen::MatrixXd mvn_sample(const SymMatrix& covariance, std::int64_t n,
                           std::uint64_t seed) {
  if (n < 0) throw_invalid("mvn_sample: negative sample count");
  const int p = covariance.dim();
  Eigen::MatrixXd root = spectral_sqrt(covariance);
  Eigen::MatrixXd x(n, p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd z(p);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = n01(rng);
    x.row(i) = (root * z).transpose();
  }
  return x;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == m.cols() && m.isApprox(m.transpose(), 1e-14)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return m.jacobiSvd().singularValues()(0);
}

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double nuclear_norm(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double min_eigenvalue(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace lvggm
