#include "lvggm/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace lvggm {

namespace {

// Symmetric cell seed: E_ii for a diagonal cell, E_ij + E_ji otherwise.
Eigen::MatrixXd cell_matrix(int p, int i, int j) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(p, p);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

}  // namespace

SupportSpace::SupportSpace(int p, std::vector<std::uint8_t> mask)
    : p_(p), mask_(std::move(mask)) {
  if (p < 1 || static_cast<int>(mask_.size()) != p * p)
    throw_invalid("SupportSpace: mask size must be p*p");
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j)
      if (mask_[i * p + j] != mask_[j * p + i])
        throw_invalid("SupportSpace: mask must be symmetric");
  deg_min_ = p + 1;
  for (int i = 0; i < p; ++i) {
    int count = 0;
    for (int j = 0; j < p; ++j) {
      if (mask_[i * p + j]) {
        ++count;
        if (j >= i) cells_.emplace_back(i, j);
      }
    }
    deg_max_ = std::max(deg_max_, count);
    deg_min_ = std::min(deg_min_, count);
  }
}

SupportSpace SupportSpace::from_matrix(const SymMatrix& m, double tol) {
  const int p = m.dim();
  std::vector<std::uint8_t> mask(p * p, 0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      mask[i * p + j] = std::abs(m(i, j)) > tol ? 1 : 0;
  return SupportSpace(p, std::move(mask));
}

SupportSpace SupportSpace::full(int p) {
  return SupportSpace(p, std::vector<std::uint8_t>(p * p, 1));
}

SupportSpace SupportSpace::diagonal(int p) {
  std::vector<std::uint8_t> mask(p * p, 0);
  for (int i = 0; i < p; ++i) mask[i * p + i] = 1;
  return SupportSpace(p, std::move(mask));
}

RankTangentSpace::RankTangentSpace(int p, Eigen::MatrixXd u)
    : p_(p), u_(std::move(u)) {
  if (p < 1) throw_invalid("RankTangentSpace: dimension must be >= 1");
  if (u_.size() > 0 && u_.rows() != p)
    throw_invalid("RankTangentSpace: basis row count mismatch");
  if (u_.cols() > 0) {
    Eigen::MatrixXd gram = u_.transpose() * u_;
    if ((gram - Eigen::MatrixXd::Identity(u_.cols(), u_.cols()))
            .cwiseAbs()
            .maxCoeff() > 1e-10)
      throw_invalid("RankTangentSpace: basis must be orthonormal");
  }
  if (u_.cols() == 0) u_.resize(p, 0);
}

RankTangentSpace RankTangentSpace::from_anchor(const SymMatrix& anchor,
                                               int rank, double tol) {
  auto e = sym_eig(anchor);
  const int p = anchor.dim();
  const double scale = e.values.cwiseAbs().maxCoeff();
  // Order columns by |eigenvalue| so the leading ones span the column space.
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(e.values(a)) > std::abs(e.values(b));
  });
  int r = rank;
  if (r < 0) {
    r = 0;
    for (int i = 0; i < p; ++i)
      if (std::abs(e.values(i)) > tol * std::max(scale, 1e-300)) ++r;
  }
  if (r > p) throw_invalid("RankTangentSpace: rank exceeds dimension");
  Eigen::MatrixXd u(p, r);
  for (int k = 0; k < r; ++k) u.col(k) = e.vectors.col(idx[k]);
  // Re-orthonormalize to wash out eigensolver roundoff.
  if (r > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    u = qr.householderQ() * Eigen::MatrixXd::Identity(p, r);
  }
  return RankTangentSpace(p, std::move(u));
}

SymMatrix project_support(const SupportSpace& space, const SymMatrix& n) {
  if (space.dim() != n.dim())
    throw_invalid("project_support: dimension mismatch");
  const int p = n.dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (space.contains(i, j)) out(i, j) = n(i, j);
  return SymMatrix(out);
}

SymMatrix project_tangent(const RankTangentSpace& space, const SymMatrix& n,
                          bool orthogonal) {
  if (space.dim() != n.dim())
    throw_invalid("project_tangent: dimension mismatch");
  const int p = n.dim();
  if (space.rank() == 0) return orthogonal ? n : SymMatrix::zero(p);
  const Eigen::MatrixXd& u = space.basis();
  Eigen::MatrixXd un = u * (u.transpose() * n.mat());  // P_U N
  if (orthogonal) {
    // (I - P_U) N (I - P_U)
    Eigen::MatrixXd rem = n.mat() - un;
    return SymMatrix(rem - (rem * u) * u.transpose());
  }
  return SymMatrix(un + un.transpose() - (un * u) * u.transpose());
}

double incoherence(const RankTangentSpace& space) {
  if (space.rank() < 1) throw_invalid("incoherence: rank must be >= 1");
  return space.basis().rowwise().norm().maxCoeff();
}

XiBracket xi_bracket(const RankTangentSpace& space, int refine_iters,
                     std::uint64_t seed) {
  XiBracket out;
  if (space.rank() == 0) return out;
  out.inc = incoherence(space);
  out.upper = 2.0 * out.inc;

  const int p = space.dim();
  double best = 0.0;
  Eigen::MatrixXd best_start;

  // Cell candidates P_T(E_ij). The incoherence-achieving diagonal cell gives
  // a witness with ||N||_inf >= inc, which pins the lower end of the bracket.
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      SymMatrix cand = project_tangent(space, SymMatrix(cell_matrix(p, i, j)));
      double nrm = spectral_norm(cand.mat());
      if (nrm < 1e-14) continue;
      double val = inf_norm(cand.mat()) / nrm;
      if (val > best) {
        best = val;
        best_start = cand.mat() / nrm;
      }
    }

  // Projected-gradient ascent restarts refine the witness.
  std::mt19937_64 rng(seed);
  const int iters = 60;
  for (int restart = 0; restart < refine_iters; ++restart) {
    Eigen::MatrixXd x;
    if (restart == 0 && best_start.size() > 0) {
      x = best_start;
    } else {
      x = random_tangent_element(space, rng).mat();
      double nrm = spectral_norm(x);
      if (nrm < 1e-14) continue;
      x /= nrm;
    }
    double step = 0.5;
    for (int it = 0; it < iters; ++it) {
      int ai = 0, aj = 0;
      double v = 0.0;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          if (std::abs(x(i, j)) > v) {
            v = std::abs(x(i, j));
            ai = i;
            aj = j;
          }
      best = std::max(best, v);
      Eigen::MatrixXd grad =
          (x(ai, aj) >= 0 ? 1.0 : -1.0) * cell_matrix(p, ai, aj);
      Eigen::MatrixXd next =
          x + step * project_tangent(space, SymMatrix(grad)).mat();
      double nrm = spectral_norm(next);
      if (nrm < 1e-14) break;
      next /= nrm;
      if (inf_norm(next) <= v) step *= 0.7;
      x = next;
    }
    best = std::max(best, inf_norm(x));
  }

  out.ascent_lower = best;
  out.lower = std::max(out.inc, best);
  return out;
}

MuValue mu_value(const SupportSpace& space, int exact_limit,
                 std::uint64_t seed, int sample_count) {
  MuValue out;
  out.deg_min = space.deg_min();
  out.deg_max = space.deg_max();
  const auto& cells = space.cells();
  const int k = static_cast<int>(cells.size());
  const int p = space.dim();
  if (k == 0) {
    out.exact = true;
    return out;
  }

  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(p, p);
  auto assign = [&](int c, double s) {
    auto [i, j] = cells[c];
    n(i, j) = s;
    n(j, i) = s;
  };
  auto norm2 = [&]() {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(n,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  };

  if (k <= exact_limit) {
    // Maximum of a convex function over the infinity-ball: attained at a +-1
    // sign vertex. N and -N share a norm, so the first sign is pinned.
    double best = 0.0;
    const std::uint64_t count = 1ULL << (k - 1);
    for (std::uint64_t v = 0; v < count; ++v) {
      assign(0, 1.0);
      for (int c = 1; c < k; ++c) assign(c, (v >> (c - 1)) & 1 ? -1.0 : 1.0);
      best = std::max(best, norm2());
    }
    out.value = best;
    out.exact = true;
    return out;
  }

  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    for (int c = 0; c < k; ++c) assign(c, (rng() & 1) ? 1.0 : -1.0);
    best = std::max(best, norm2());
  }
  out.value = std::max(best, static_cast<double>(out.deg_min));
  out.exact = false;
  return out;
}

RhoEstimate rho(const RankTangentSpace& a, const RankTangentSpace& b,
                int power_iters, std::uint64_t seed) {
  if (a.dim() != b.dim()) throw_invalid("rho: dimension mismatch");
  if (a.rank() != b.rank())
    throw_invalid(
        "rho: rank mismatch, twisting is defined for equal-dimension tangent "
        "spaces");
  const int p = a.dim();
  const int cap = power_iters > 0 ? power_iters : 10 * p * p;
  const double tol = 1e-8;
  const int restarts = 5;

  // Forced evaluation: the subtraction must not outlive the temporaries.
  auto apply_d = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    SymMatrix xs(x);
    return project_tangent(a, xs).mat() - project_tangent(b, xs).mat();
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  RhoEstimate out;
  out.residual = std::numeric_limits<double>::infinity();
  int total_iters = 0;
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd g(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) g(i, j) = n01(rng);
    Eigen::MatrixXd x = 0.5 * (g + g.transpose());
    x /= x.norm();
    double lam2 = 0.0, resid = std::numeric_limits<double>::infinity();
    while (total_iters < cap) {
      ++total_iters;
      Eigen::MatrixXd y = apply_d(apply_d(x));
      lam2 = (x.array() * y.array()).sum();
      resid = (y - lam2 * x).norm();
      if (resid <= tol) break;
      double ynrm = y.norm();
      if (ynrm < 1e-300) {  // zero operator on this start
        lam2 = 0.0;
        resid = 0.0;
        break;
      }
      x = y / ynrm;
    }
    double val = std::sqrt(std::max(lam2, 0.0));
    if (val > out.value || (val == out.value && resid < out.residual)) {
      out.value = val;
      out.residual = resid;
    }
  }
  out.iterations = total_iters;
  return out;
}

std::pair<double, double> gamma_norms(const SymMatrix& s, const SymMatrix& l,
                                      double gamma) {
  if (gamma <= 0.0) throw_invalid("gamma_norms: gamma must be positive");
  double f = gamma * s.mat().cwiseAbs().sum() + nuclear_norm(l);
  double g = std::max(inf_norm(s.mat()) / gamma, spectral_norm(l.mat()));
  return {f, g};
}

double chi_value(double mu, double xi, double gamma) {
  if (gamma <= 0.0) throw_invalid("chi_value: gamma must be positive");
  if (mu < 0.0 || xi < 0.0) throw_invalid("chi_value: negative input");
  return std::max(xi / gamma, 2.0 * mu * gamma);
}

AdditionGainReport addition_gain_check(const SupportSpace& omega,
                                       const RankTangentSpace& t_space,
                                       double gamma, int trials,
                                       std::uint64_t seed) {
  if (gamma <= 0.0)
    throw_invalid("addition_gain_check: gamma must be positive");
  if (omega.dim() != t_space.dim())
    throw_invalid("addition_gain_check: dimension mismatch");
  AdditionGainReport rep;
  MuValue mu = mu_value(omega, 22, seed);
  rep.mu_exact = mu.exact;
  rep.mu_used = mu.exact ? mu.value : static_cast<double>(mu.deg_max);
  rep.xi_used =
      t_space.rank() > 0 ? 2.0 * incoherence(t_space) : 0.0;  // certified upper
  rep.chi = chi_value(rep.mu_used, rep.xi_used, gamma);
  rep.certificate_valid = rep.chi < 1.0;
  rep.trials = trials;

  const bool have_s = !omega.cells().empty();
  const bool have_l = t_space.rank() > 0;
  if (!have_s && !have_l)
    throw_invalid("addition_gain_check: both spaces are trivial");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t, 0xadd));
    SymMatrix s = SymMatrix::zero(omega.dim());
    SymMatrix l = SymMatrix::zero(omega.dim());
    if (have_s) {
      s = random_support_element(omega, rng);
      s = SymMatrix(s.mat() * (gamma / inf_norm(s.mat())));
    }
    if (have_l) {
      l = random_tangent_element(t_space, rng);
      double nrm = spectral_norm(l.mat());
      if (nrm < 1e-14) continue;
      l = SymMatrix(l.mat() / nrm);
    }
    SymMatrix first(s.mat() + project_support(omega, l).mat());
    SymMatrix second(project_tangent(t_space, s).mat() + l.mat());
    double g =
        std::max(inf_norm(first.mat()) / gamma, spectral_norm(second.mat()));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  rep.min_value = lo;
  rep.max_value = hi;
  const double slack = 1e-8;
  rep.all_inside =
      (lo >= 1.0 - rep.chi - slack) && (hi <= 1.0 + rep.chi + slack);
  return rep;
}

GeometryReport geometry_report(const SupportSpace& omega,
                               const RankTangentSpace& t_space, double gamma,
                               int refine_iters, int mu_exact_limit,
                               std::uint64_t seed) {
  GeometryReport rep;
  rep.gamma = gamma;
  XiBracket xi = xi_bracket(t_space, refine_iters, seed);
  rep.xi_lower = xi.lower;
  rep.xi_upper = xi.upper;
  rep.ascent_lower = xi.ascent_lower;
  rep.inc_value = xi.inc;
  MuValue mu = mu_value(omega, mu_exact_limit, seed);
  rep.mu_value = mu.value;
  rep.mu_exact = mu.exact;
  double mu_cert = mu.exact ? mu.value : static_cast<double>(mu.deg_max);
  rep.chi_value = chi_value(mu_cert, xi.upper, gamma);
  return rep;
}

std::vector<Eigen::MatrixXd> symmetric_basis(const RankTangentSpace& space) {
  const int p = space.dim();
  const int r = space.rank();
  std::vector<Eigen::MatrixXd> basis;
  if (r == 0) return basis;
  const Eigen::MatrixXd& u = space.basis();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd w = q.rightCols(p - r);  // orthonormal complement
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < r; ++k)
    for (int l = k; l < r; ++l) {
      Eigen::MatrixXd b = u.col(k) * u.col(l).transpose();
      if (k == l)
        basis.push_back(b);
      else
        basis.push_back((b + b.transpose()) * inv_sqrt2);
    }
  for (int k = 0; k < r; ++k)
    for (int m = 0; m < p - r; ++m) {
      Eigen::MatrixXd b = u.col(k) * w.col(m).transpose();
      basis.push_back((b + b.transpose()) * inv_sqrt2);
    }
  return basis;
}

SymMatrix random_support_element(const SupportSpace& space,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const int p = space.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [i, j] : space.cells()) {
    double v = n01(rng);
    m(i, j) = v;
    m(j, i) = v;
  }
  return SymMatrix(m);
}

SymMatrix random_tangent_element(const RankTangentSpace& space,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const int p = space.dim();
  Eigen::MatrixXd g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = n01(rng);
  return project_tangent(space, SymMatrix(0.5 * (g + g.transpose())));
}

}  // namespace lvggm
