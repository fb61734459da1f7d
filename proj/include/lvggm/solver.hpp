#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvggm/lvmodel.hpp"
#include "lvggm/matrix_kernel.hpp"

namespace lvggm {

/// Parameters of the penalized maximum-likelihood fit
///   min tr((S-L) Sigma_n) - logdet(S-L) + lambda (gamma ||S||_1 + tr L)
///   s.t. S - L > 0, L >= 0.
/// support_tol and rank_tol are relative: the sign pattern is read at
/// support_tol * max|S_ij| and the rank of L at rank_tol * ||L||_2.
struct SolverConfig {
  double lambda = 0.1;
  double gamma = 1.0;
  double rho_admm = 1.0;
  int max_iters = 4000;
  double tol_primal = 1e-7;
  double tol_dual = 1e-7;
  double support_tol = 1e-4;
  double rank_tol = 1e-4;

  void validate() const;
};

struct DecompositionEstimate {
  SymMatrix s{Eigen::MatrixXd::Identity(1, 1)};
  SymMatrix l{Eigen::MatrixXd::Zero(1, 1)};
  double objective = 0.0;
  int iters = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  // config echo for downstream pattern/rank reads
  double lambda = 0.0;
  double gamma = 0.0;
  double support_tol = 1e-4;
  double rank_tol = 1e-4;
};

struct KktResidual {
  double stationarity_s = 0.0;
  double stationarity_l = 0.0;
  double feasibility = 0.0;
};

struct SweepPoint {
  double gamma = 0.0;
  int rank = 0;
  std::vector<signed char> pattern;  // upper-triangle signs of S
  bool converged = false;
  double objective = 0.0;
  int iters = 0;
};

struct StabilityReport {
  std::vector<SweepPoint> points;
  // maximal contiguous runs [first, last] with identical (pattern, rank)
  std::vector<std::pair<int, int>> runs;
  int recommended_index = -1;
  double recommended_gamma = 0.0;
};

/// Entrywise sign(m) max(|m| - t, 0); proximal map of t ||.||_1.
SymMatrix soft_threshold(const SymMatrix& m, double t);

/// Eigenvalue shrink d -> max(d - t, 0); proximal map of
/// t (tr + PSD indicator).
SymMatrix psd_trace_prox(const SymMatrix& m, double t);

/// argmin_R tr(R Sigma_n) - logdet R + (1/2t) ||R - Z||_F^2, via the spectral
/// solve of Z - t Sigma_n; always positive definite.
SymMatrix logdet_prox(const SymMatrix& z, const SymMatrix& sigma_n, double t);

/// Consensus ADMM over (R, S, L) with R = S - L. Scaled residuals:
///   primal = ||R - (S-L)||_F / max(1, ||R||_F, ||S-L||_F)
///   dual   = rho ||(S-L)_k+1 - (S-L)_k||_F / max(1, rho ||U||_F)
/// with factor-2 residual balancing of rho when the ratio exceeds 10.
DecompositionEstimate fit(const SampleCovariance& cov,
                          const SolverConfig& config);

/// As fit, warm-started from a previous estimate.
DecompositionEstimate fit(const SampleCovariance& cov,
                          const SolverConfig& config,
                          const DecompositionEstimate& warm);

/// Subgradient-condition residuals at (S, L) given the sample covariance:
/// with G = Sigma_n - (S-L)^-1, -G/(lambda gamma) must lie in the l1
/// subdifferential at S and G/lambda in the trace-plus-cone subdifferential
/// at L.
KktResidual kkt_residual(const DecompositionEstimate& est,
                         const SampleCovariance& cov, double lambda,
                         double gamma);

/// lambda = scale * (1 / xi_hint) * sqrt(p / n).
double lambda_schedule(int p, std::int64_t n, double xi_hint = 1.0,
                       double scale = 1.0);

/// Fits along an ascending gamma grid with warm starts, groups grid points
/// into runs of identical (sign pattern, rank(L)), and recommends the
/// midpoint of the longest run.
StabilityReport gamma_sweep(const SampleCovariance& cov, double lambda,
                            const std::vector<double>& gamma_grid,
                            const SolverConfig& config);

/// Absolute thresholds used for pattern/rank reads of an estimate.
double support_threshold(const DecompositionEstimate& est);
double rank_threshold(const DecompositionEstimate& est);

int estimate_rank(const DecompositionEstimate& est);
std::vector<signed char> sign_pattern(const SymMatrix& s, double threshold);

/// Edge list (i < j, |S_ij| above the support threshold) as CSV text with
/// header i,j,sign,value.
std::string edges_csv(const DecompositionEstimate& est);

}  // namespace lvggm
