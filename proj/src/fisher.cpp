#include "lvggm/fisher.hpp"

#include <algorithm>
#include <cmath>

namespace lvggm {

namespace {

// Top eigenpair by magnitude.
std::pair<double, Eigen::VectorXd> top_eigpair(const Eigen::MatrixXd& y) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y);
  const int p = static_cast<int>(y.rows());
  if (std::abs(es.eigenvalues()(0)) > std::abs(es.eigenvalues()(p - 1)))
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
  return {es.eigenvalues()(p - 1), es.eigenvectors().col(p - 1)};
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Coefficient of [Sigma H_ij Sigma]_ab for the symmetric cell seed H_ij
// (E_ii on the diagonal, E_ij + E_ji off it).
double cell_coef(const Eigen::MatrixXd& s, int a, int b, int i, int j) {
  if (i == j) return s(a, i) * s(i, b);
  return s(a, i) * s(j, b) + s(a, j) * s(i, b);
}

// sin(theta_max)-style exact value of the Frobenius-operator twisting
// between equal-rank tangent spaces, used to steer the T' sampler. The
// reported rho() stays matrix-free power iteration; the two agree and are
// cross-checked in tests.
double twist_closed_form(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(u1.transpose() * u2);
  double c = svd.singularValues().minCoeff();
  c = std::clamp(c, 0.0, 1.0);
  return std::sqrt(std::max(0.0, 1.0 - c * c * c * c));
}

}  // namespace

SymMatrix fisher_apply(const FisherOperator& op, const SymMatrix& n) {
  if (op.sigma.dim() != n.dim()) throw_invalid("fisher_apply: dimension mismatch");
  return SymMatrix(op.sigma.mat() * n.mat() * op.sigma.mat());
}

Eigen::MatrixXd omega_restricted_matrix(const FisherOperator& op,
                                        const SupportSpace& omega,
                                        bool orthonormal_basis) {
  if (op.sigma.dim() != omega.dim())
    throw_invalid("omega_restricted_matrix: dimension mismatch");
  const auto& cells = omega.cells();
  const int m = static_cast<int>(cells.size());
  const Eigen::MatrixXd& s = op.sigma.mat();
  Eigen::MatrixXd g(m, m);
  for (int col = 0; col < m; ++col) {
    auto [i, j] = cells[col];
    for (int row = 0; row < m; ++row) {
      auto [a, b] = cells[row];
      g(row, col) = cell_coef(s, a, b, i, j);
    }
  }
  if (!orthonormal_basis) return g;
  // Entry basis -> orthonormal basis: F = W^-1 G W with
  // W = diag(1 on diagonal cells, 1/sqrt(2) on off-diagonal cells).
  Eigen::VectorXd w(m);
  for (int c = 0; c < m; ++c)
    w(c) = (cells[c].first == cells[c].second) ? 1.0 : 1.0 / std::sqrt(2.0);
  return w.cwiseInverse().asDiagonal() * g * w.asDiagonal();
}

OmegaGains omega_gains(const FisherOperator& op, const SupportSpace& omega) {
  const auto& cells = omega.cells();
  const int m = static_cast<int>(cells.size());
  if (m == 0)
    throw Error(ErrorCode::Unidentifiable,
                "omega_gains: empty support, restricted operator undefined");
  const int p = omega.dim();
  const Eigen::MatrixXd& s = op.sigma.mat();

  OmegaGains out;
  Eigen::MatrixXd g = omega_restricted_matrix(op, omega, false);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible())
    throw Error(ErrorCode::Unidentifiable,
                "omega_gains: restricted Fisher operator singular on Omega");
  Eigen::MatrixXd ginv = lu.inverse();
  out.alpha = 1.0 / ginv.cwiseAbs().rowwise().sum().maxCoeff();

  // Cross operator rows over complement cells: max absolute row sum.
  double delta = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      if (omega.contains(a, b)) continue;
      double row = 0.0;
      for (int c = 0; c < m; ++c)
        row += std::abs(cell_coef(s, a, b, cells[c].first, cells[c].second));
      delta = std::max(delta, row);
    }
  out.delta = delta;

  // beta: projected subgradient ascent of ||Sigma M Sigma||_2 over the unit
  // spectral ball of Omega; certified upper bound psi^2.
  const double psi = spectral_norm(s);
  out.beta_upper = psi * psi;
  std::mt19937_64 rng(0xbe7a);
  double best = 0.0;
  for (int restart = 0; restart < 8; ++restart) {
    SymMatrix m0 = random_support_element(omega, rng);
    double nrm = spectral_norm(m0.mat());
    if (nrm < 1e-14) continue;
    Eigen::MatrixXd x = m0.mat() / nrm;
    double step = 0.5;
    for (int it = 0; it < 40; ++it) {
      Eigen::MatrixXd y = s * x * s;
      best = std::max(best, spectral_norm(y));
      auto [lam, u] = top_eigpair(y);
      Eigen::MatrixXd grad =
          (lam >= 0 ? 1.0 : -1.0) * (s * (u * u.transpose()) * s);
      Eigen::MatrixXd next =
          project_support(omega, SymMatrix(x + step * grad)).mat();
      double nn = spectral_norm(next);
      if (nn < 1e-14) break;
      next /= nn;
      if (spectral_norm(s * next * s) <= best) step *= 0.7;
      x = next;
    }
    best = std::max(best, spectral_norm(s * x * s));
  }
  out.beta = std::min(best, out.beta_upper);
  return out;
}

namespace {

struct TPrimeGains {
  double alpha, delta, beta;
};

TPrimeGains gains_at(const FisherOperator& op, const RankTangentSpace& t,
                     std::uint64_t seed) {
  const Eigen::MatrixXd& s = op.sigma.mat();
  const int p = t.dim();
  auto basis = symmetric_basis(t);
  const int m = static_cast<int>(basis.size());
  std::mt19937_64 rng(seed);

  auto from_coeffs = [&](const Eigen::VectorXd& c) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < m; ++k) x += c(k) * basis[k];
    return x;
  };

  // Dense restricted operator in the orthonormal tangent basis. Its extreme
  // eigenvectors seed the spectral-norm searches.
  Eigen::MatrixXd fmat(m, m);
  std::vector<Eigen::MatrixXd> images(m);
  for (int k = 0; k < m; ++k) images[k] = s * basis[k] * s;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      fmat(k, l) = (basis[k].array() * images[l].array()).sum();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fes(sym(fmat));

  auto pt = [&](const Eigen::MatrixXd& x) {
    return project_tangent(t, SymMatrix(x)).mat();
  };
  auto pt_perp = [&](const Eigen::MatrixXd& x) {
    return project_tangent(t, SymMatrix(x), true).mat();
  };

  // alpha: minimize ||P_T I* P_T (M)||_2 over M in T, ||M||_2 = 1.
  double alpha = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 6; ++restart) {
    Eigen::MatrixXd x;
    if (restart == 0) {
      x = from_coeffs(fes.eigenvectors().col(0));  // smallest F-gain direction
    } else {
      x = random_tangent_element(t, rng).mat();
    }
    double nrm = spectral_norm(x);
    if (nrm < 1e-14) continue;
    x /= nrm;
    double step = 0.4;
    for (int it = 0; it < 50; ++it) {
      Eigen::MatrixXd y = pt(s * x * s);
      double val = spectral_norm(y);
      alpha = std::min(alpha, val);
      auto [lam, u] = top_eigpair(y);
      Eigen::MatrixXd grad = pt(s * pt((lam >= 0 ? 1.0 : -1.0) *
                                       (u * u.transpose())) * s);
      Eigen::MatrixXd next = pt(x - step * grad);
      double nn = spectral_norm(next);
      if (nn < 1e-14) break;
      next /= nn;
      if (spectral_norm(pt(s * next * s)) >= val) step *= 0.7;
      x = next;
    }
    alpha = std::min(alpha, spectral_norm(pt(s * x * s)));
  }

  // delta: maximize ||P_T-perp I* (M)||_2 over M in T, ||M||_2 = 1.
  double delta = 0.0;
  for (int restart = 0; restart < 6; ++restart) {
    Eigen::MatrixXd x;
    if (restart == 0)
      x = from_coeffs(fes.eigenvectors().col(m - 1));
    else
      x = random_tangent_element(t, rng).mat();
    double nrm = spectral_norm(x);
    if (nrm < 1e-14) continue;
    x /= nrm;
    double step = 0.4;
    for (int it = 0; it < 50; ++it) {
      Eigen::MatrixXd y = pt_perp(s * x * s);
      double val = spectral_norm(y);
      delta = std::max(delta, val);
      auto [lam, u] = top_eigpair(y);
      Eigen::MatrixXd grad =
          pt(s * pt_perp((lam >= 0 ? 1.0 : -1.0) * (u * u.transpose())) * s);
      Eigen::MatrixXd next = pt(x + step * grad);
      double nn = spectral_norm(next);
      if (nn < 1e-14) break;
      next /= nn;
      if (spectral_norm(pt_perp(s * next * s)) <= val) step *= 0.7;
      x = next;
    }
    delta = std::max(delta, spectral_norm(pt_perp(s * x * s)));
  }

  // beta: maximize ||I*(M)||_inf over M in T, ||M||_inf = 1.
  double beta = 0.0;
  for (int restart = 0; restart < 6; ++restart) {
    Eigen::MatrixXd x = restart == 0 ? from_coeffs(fes.eigenvectors().col(m - 1))
                                     : random_tangent_element(t, rng).mat();
    double nrm = inf_norm(x);
    if (nrm < 1e-14) continue;
    x /= nrm;
    double step = 0.4;
    for (int it = 0; it < 50; ++it) {
      Eigen::MatrixXd y = s * x * s;
      beta = std::max(beta, inf_norm(y));
      int ai = 0, aj = 0;
      double v = 0.0;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          if (std::abs(y(i, j)) > v) {
            v = std::abs(y(i, j));
            ai = i;
            aj = j;
          }
      Eigen::MatrixXd grad = (y(ai, aj) >= 0 ? 1.0 : -1.0) *
                             sym(s.col(ai) * s.row(aj));
      Eigen::MatrixXd next = pt(x + step * grad);
      double nn = inf_norm(next);
      if (nn < 1e-14) break;
      next /= nn;
      if (inf_norm(s * next * s) <= beta) step *= 0.7;
      x = next;
    }
    beta = std::max(beta, inf_norm(s * x * s));
  }

  return {alpha, delta, beta};
}

}  // namespace

TGains t_gains(const FisherOperator& op, const RankTangentSpace& t_space,
               double xi_upper, int nearby_samples, std::uint64_t seed) {
  if (nearby_samples < 1) throw_invalid("t_gains: need nearby_samples >= 1");
  if (t_space.rank() == 0)
    throw_invalid("t_gains: zero-rank tangent space has no gains");
  const int p = t_space.dim();
  const int r = t_space.rank();
  TGains out;
  out.samples = nearby_samples;

  TPrimeGains nominal = gains_at(op, t_space, derive_seed(seed, 0));
  out.alpha = nominal.alpha;
  out.delta = nominal.delta;
  out.beta = nominal.beta;

  const double target = std::min(xi_upper / 2.0, 0.95);
  std::mt19937_64 rng(derive_seed(seed, 0x7713));
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int sample = 1; sample < nearby_samples; ++sample) {
    Eigen::MatrixXd dir(p, r);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < r; ++j) dir(i, j) = n01(rng);
    // Scale the perturbation until rho(T', T) binds at the target.
    double lo = 0.0, hi = 1.0;
    auto space_at = [&](double tt) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(t_space.basis() + tt * dir);
      return RankTangentSpace(
          p, qr.householderQ() * Eigen::MatrixXd::Identity(p, r));
    };
    for (int grow = 0; grow < 30; ++grow) {
      if (twist_closed_form(t_space.basis(), space_at(hi).basis()) >= target)
        break;
      hi *= 2.0;
    }
    for (int bis = 0; bis < 40; ++bis) {
      double mid = 0.5 * (lo + hi);
      double tw = twist_closed_form(t_space.basis(), space_at(mid).basis());
      if (tw < target)
        lo = mid;
      else
        hi = mid;
    }
    RankTangentSpace t_prime = space_at(lo);
    TPrimeGains g = gains_at(op, t_prime, derive_seed(seed, sample));
    out.alpha = std::min(out.alpha, g.alpha);
    out.delta = std::max(out.delta, g.delta);
    out.beta = std::max(out.beta, g.beta);
  }
  return out;
}

FisherDiagnostics diagnostics(const FisherOperator& op,
                              const SupportSpace& omega,
                              const RankTangentSpace& t_space,
                              const MuValue& mu, const XiBracket& xi,
                              int nearby_samples, std::uint64_t seed) {
  FisherDiagnostics d;
  OmegaGains og = omega_gains(op, omega);
  d.alpha_omega = og.alpha;
  d.delta_omega = og.delta;
  d.beta_omega = og.beta;
  d.beta_omega_upper = og.beta_upper;

  if (t_space.rank() > 0) {
    TGains tg = t_gains(op, t_space, xi.upper, nearby_samples, seed);
    d.alpha_t = tg.alpha;
    d.delta_t = tg.delta;
    d.beta_t = tg.beta;
    d.t_samples = tg.samples;
    d.alpha = std::min(og.alpha, tg.alpha);
    d.delta = std::max(og.delta, tg.delta);
    d.beta = std::max(og.beta, tg.beta);
  } else {
    // No latent part: the T-side quantities are vacuous.
    d.alpha = og.alpha;
    d.delta = og.delta;
    d.beta = og.beta;
  }

  d.psi = spectral_norm(op.sigma.mat());
  d.mu_used = mu.exact ? mu.value : static_cast<double>(mu.deg_max);
  d.mu_exact = mu.exact;
  d.xi_used = xi.upper;

  if (d.alpha > 0.0 && d.delta / d.alpha < 1.0) {
    double nu = 0.5 * (1.0 - d.delta / d.alpha);
    nu = std::min(nu, 0.5);
    d.nu = nu;
    d.assumption_holds = true;
    const double ratio = nu * d.alpha / (d.beta * (2.0 - nu));
    d.product_condition_holds =
        d.mu_used * d.xi_used <= (1.0 / 6.0) * ratio * ratio;
    if (d.product_condition_holds && d.xi_used > 0.0 && d.mu_used > 0.0) {
      double low = 3.0 * d.beta * (2.0 - nu) * d.xi_used / (nu * d.alpha);
      double high = nu * d.alpha / (2.0 * d.beta * (2.0 - nu) * d.mu_used);
      if (low <= high) d.gamma_range = std::make_pair(low, high);
    }
  }
  return d;
}

SymMatrix taylor_remainder(const SymMatrix& k, const SymMatrix& delta) {
  if (k.dim() != delta.dim()) throw_invalid("taylor_remainder: dimension mismatch");
  SymMatrix k_inv = psd_inverse(k);
  SymMatrix kd_inv = psd_inverse(SymMatrix(k.mat() + delta.mat()));
  return SymMatrix(kd_inv.mat() - k_inv.mat() +
                   k_inv.mat() * delta.mat() * k_inv.mat());
}

RestrictedGainSamples restricted_gain_samples(const FisherOperator& op,
                                              const SupportSpace& omega,
                                              const RankTangentSpace& t_prime,
                                              double gamma, int trials,
                                              std::uint64_t seed) {
  if (gamma <= 0.0) throw_invalid("restricted_gain_samples: gamma must be positive");
  RestrictedGainSamples out;
  out.trials = trials;
  out.min_on_gain = std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd& s = op.sigma.mat();
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t, 0x935));
    SymMatrix sm = random_support_element(omega, rng);
    sm = SymMatrix(sm.mat() * (gamma / inf_norm(sm.mat())));
    SymMatrix lm = random_tangent_element(t_prime, rng);
    double nrm = spectral_norm(lm.mat());
    if (nrm < 1e-14) continue;
    lm = SymMatrix(lm.mat() / nrm);

    Eigen::MatrixXd image = s * (sm.mat() + lm.mat()) * s;
    SymMatrix img(image);
    double on_gain =
        std::max(inf_norm(project_support(omega, img).mat()) / gamma,
                 spectral_norm(project_tangent(t_prime, img).mat()));
    Eigen::MatrixXd off_s = image - project_support(omega, img).mat();
    double cross = std::max(inf_norm(off_s) / gamma,
                            spectral_norm(project_tangent(t_prime, img, true).mat()));
    out.min_on_gain = std::min(out.min_on_gain, on_gain);
    if (on_gain > 0.0)
      out.max_cross_ratio = std::max(out.max_cross_ratio, cross / on_gain);
  }
  return out;
}

}  // namespace lvggm
