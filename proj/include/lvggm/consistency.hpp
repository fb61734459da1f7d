#pragma once

#include "lvggm/lvmodel.hpp"
#include "lvggm/matrix_kernel.hpp"
#include "lvggm/solver.hpp"

namespace lvggm {

/// Judgement of an estimate against the generating model: sign pattern of S,
/// rank of L, realizability (S - L > 0, L >= 0), and the error metrics.
/// Thresholds used for the sign/rank reads are echoed for auditability.
struct ConsistencyVerdict {
  bool sign_pattern_match = false;
  bool rank_match = false;
  bool realizable = false;
  bool algebraically_consistent = false;
  double g_gamma_error = 0.0;
  double covariance_error_spectral = 0.0;
  double kl_vs_truth = 0.0;
  double support_tol = 0.0;  // absolute threshold applied to S
  double rank_tol = 0.0;     // absolute threshold applied to eigenvalues of L
};

/// Sign comparison happens on thresholded matrices (sign(0) = 0); the
/// support_tol/rank_tol arguments are relative, as in SolverConfig.
ConsistencyVerdict algebraic_consistency(const DecompositionEstimate& est,
                                         const MarginalDecomposition& truth,
                                         double support_tol, double rank_tol,
                                         double gamma);

/// g_gamma(S - S*, L - L*) = max(||dS||_inf / gamma, ||dL||_2).
double parametric_error(const DecompositionEstimate& est,
                        const MarginalDecomposition& truth, double gamma);

/// KL(N(0, sigma_a) || N(0, sigma_b)).
double kl_gaussian(const SymMatrix& sigma_a, const SymMatrix& sigma_b);

/// ||(S - L)^-1 - Sigma*_O||_2.
double covariance_error(const DecompositionEstimate& est,
                        const MarginalDecomposition& truth);

}  // namespace lvggm
