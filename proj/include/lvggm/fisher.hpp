#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "lvggm/geometry.hpp"
#include "lvggm/matrix_kernel.hpp"

namespace lvggm {

/// Fisher information at the marginal concentration matrix: the operator
/// N -> Sigma N Sigma with Sigma = Sigma*_O positive definite. Never
/// materialized as a p^2 x p^2 matrix outside of small cross-validation
/// tests.
struct FisherOperator {
  SymMatrix sigma;

  explicit FisherOperator(SymMatrix s) : sigma(std::move(s)) {
    if (min_eigenvalue(sigma) <= 0.0)
      throw_not_pd("FisherOperator: sigma must be positive definite");
  }
};

SymMatrix fisher_apply(const FisherOperator& op, const SymMatrix& n);

struct OmegaGains {
  double alpha = 0.0;        // exact min infinity-norm gain on Omega
  double delta = 0.0;        // exact max cross gain Omega -> Omega-perp
  double beta = 0.0;         // ascent lower-bound estimate of the sup
  double beta_upper = 0.0;   // certified upper bound psi^2
};

struct TGains {
  double alpha = 0.0;  // upper bound on the infimum over nearby T'
  double delta = 0.0;  // lower bound on the supremum
  double beta = 0.0;   // lower bound on the supremum
  int samples = 0;
};

struct FisherDiagnostics {
  double alpha_omega = 0.0, delta_omega = 0.0, beta_omega = 0.0;
  bool alpha_omega_exact = true, delta_omega_exact = true;
  double beta_omega_upper = 0.0;
  double alpha_t = 0.0, delta_t = 0.0, beta_t = 0.0;  // Monte-Carlo estimates
  int t_samples = 0;
  double alpha = 0.0, delta = 0.0, beta = 0.0;
  double psi = 0.0;
  double mu_used = 0.0, xi_used = 0.0;
  bool mu_exact = false;
  std::optional<double> nu;
  bool assumption_holds = false;          // delta/alpha <= 1 - 2 nu solvable
  bool product_condition_holds = false;   // mu xi <= (1/6)(nu a / (b(2-nu)))^2
  std::optional<std::pair<double, double>> gamma_range;
};

/// Restricted operator of P_Omega I* P_Omega over the mask cells, either in
/// the entry-value basis (rows/columns indexed by upper-triangle cells) or in
/// the orthonormal symmetric basis (E_ii, (E_ij + E_ji)/sqrt(2)). The two
/// differ by the diagonal conversion W = diag(1 or 1/sqrt(2)).
Eigen::MatrixXd omega_restricted_matrix(const FisherOperator& op,
                                        const SupportSpace& omega,
                                        bool orthonormal_basis);

/// Exact alpha/delta (entrywise infinity-norm gains) plus an ascent estimate
/// of beta. Throws Unidentifiable when the restricted operator is singular.
OmegaGains omega_gains(const FisherOperator& op, const SupportSpace& omega);

/// Worst-case spectral/infinity gains over tangent spaces T' with
/// rho(T', T) <= xi_upper / 2, sampled by perturbing the basis until the
/// twisting constraint binds. nearby_samples = 1 evaluates the nominal T
/// only.
TGains t_gains(const FisherOperator& op, const RankTangentSpace& t_space,
               double xi_upper, int nearby_samples, std::uint64_t seed);

FisherDiagnostics diagnostics(const FisherOperator& op,
                              const SupportSpace& omega,
                              const RankTangentSpace& t_space,
                              const MuValue& mu, const XiBracket& xi,
                              int nearby_samples = 16,
                              std::uint64_t seed = 0x5eedULL);

/// Second-order Taylor remainder of the matrix inverse:
/// (K + Delta)^-1 - K^-1 + K^-1 Delta K^-1.
SymMatrix taylor_remainder(const SymMatrix& k, const SymMatrix& delta);

/// Empirical check of the two restricted-gain conclusions: samples (S, L) in
/// Omega x T' with ||S||_inf = gamma, ||L||_2 = 1 and records
/// g_gamma(P_Y A^+ I* A P_Y(S,L)) and the cross term on Y-perp.
struct RestrictedGainSamples {
  double min_on_gain = 0.0;    // min observed g_gamma on Y
  double max_cross_ratio = 0.0;  // max observed cross / on-gain ratio
  int trials = 0;
};

RestrictedGainSamples restricted_gain_samples(const FisherOperator& op,
                                              const SupportSpace& omega,
                                              const RankTangentSpace& t_prime,
                                              double gamma, int trials,
                                              std::uint64_t seed);

}  // namespace lvggm
