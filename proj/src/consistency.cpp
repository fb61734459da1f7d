#include "lvggm/consistency.hpp"

#include <cmath>

namespace lvggm {

ConsistencyVerdict algebraic_consistency(const DecompositionEstimate& est,
                                         const MarginalDecomposition& truth,
                                         double support_tol, double rank_tol,
                                         double gamma) {
  if (est.s.dim() != truth.s_true.dim())
    throw_invalid("algebraic_consistency: dimension mismatch");
  ConsistencyVerdict v;
  v.support_tol = support_tol * inf_norm(est.s.mat());
  v.rank_tol = rank_tol * spectral_norm(est.l.mat());

  auto est_pat = sign_pattern(est.s, v.support_tol);
  auto true_pat = sign_pattern(truth.s_true, 1e-8);
  v.sign_pattern_match = est_pat == true_pat;

  int est_rank = 0;
  if (v.rank_tol > 0.0) {
    auto el = sym_eig(est.l);
    for (int i = 0; i < est.l.dim(); ++i)
      if (el.values(i) > v.rank_tol) ++est_rank;
  }
  auto tl = sym_eig(truth.l_true);
  int true_rank = 0;
  double tmax = std::max(tl.values.cwiseAbs().maxCoeff(), 0.0);
  for (int i = 0; i < truth.l_true.dim(); ++i)
    if (tl.values(i) > std::max(1e-10 * tmax, 1e-14)) ++true_rank;
  v.rank_match = est_rank == true_rank;

  const bool k_pd =
      min_eigenvalue(SymMatrix(est.s.mat() - est.l.mat())) > 0.0;
  v.realizable = k_pd && min_eigenvalue(est.l) >= -v.rank_tol - 1e-12;
  v.algebraically_consistent =
      v.sign_pattern_match && v.rank_match && v.realizable;

  v.g_gamma_error = parametric_error(est, truth, gamma);
  if (k_pd) {
    v.covariance_error_spectral = covariance_error(est, truth);
    SymMatrix sigma_fit = psd_inverse(SymMatrix(est.s.mat() - est.l.mat()));
    v.kl_vs_truth = kl_gaussian(sigma_fit, truth.sigma_marg);
  } else {
    // not a realizable concentration matrix, the fit metrics are undefined
    v.covariance_error_spectral = std::numeric_limits<double>::infinity();
    v.kl_vs_truth = std::numeric_limits<double>::infinity();
  }
  return v;
}

double parametric_error(const DecompositionEstimate& est,
                        const MarginalDecomposition& truth, double gamma) {
  if (gamma <= 0.0) throw_invalid("parametric_error: gamma must be positive");
  double ds = inf_norm(est.s.mat() - truth.s_true.mat());
  double dl = spectral_norm(est.l.mat() - truth.l_true.mat());
  return std::max(ds / gamma, dl);
}

double kl_gaussian(const SymMatrix& sigma_a, const SymMatrix& sigma_b) {
  if (sigma_a.dim() != sigma_b.dim())
    throw_invalid("kl_gaussian: dimension mismatch");
  const int p = sigma_a.dim();
  auto ea = sym_eig(sigma_a);
  auto eb = sym_eig(sigma_b);
  if (ea.values(p - 1) <= 0.0 || eb.values(p - 1) <= 0.0)
    throw_not_pd("kl_gaussian: inputs must be positive definite");
  SymMatrix b_inv = psd_inverse(sigma_b);
  double tr = (b_inv.mat().array() * sigma_a.mat().array()).sum();
  double logdet_a = ea.values.array().log().sum();
  double logdet_b = eb.values.array().log().sum();
  return 0.5 * (tr - p + logdet_b - logdet_a);
}

double covariance_error(const DecompositionEstimate& est,
                        const MarginalDecomposition& truth) {
  SymMatrix sigma_fit = psd_inverse(SymMatrix(est.s.mat() - est.l.mat()));
  return spectral_norm(sigma_fit.mat() - truth.sigma_marg.mat());
}

}  // namespace lvggm
