#include "lvggm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lvggm {

void SolverConfig::validate() const {
  if (lambda <= 0.0) throw_invalid("SolverConfig: lambda must be positive");
  if (gamma <= 0.0) throw_invalid("SolverConfig: gamma must be positive");
  if (rho_admm <= 0.0) throw_invalid("SolverConfig: rho_admm must be positive");
  if (max_iters < 1) throw_invalid("SolverConfig: max_iters must be >= 1");
  if (tol_primal <= 0.0 || tol_dual <= 0.0 || support_tol <= 0.0 ||
      rank_tol <= 0.0)
    throw_invalid("SolverConfig: tolerances must be positive");
}

SymMatrix soft_threshold(const SymMatrix& m, double t) {
  if (t < 0.0) throw_invalid("soft_threshold: negative threshold");
  const int p = m.dim();
  Eigen::MatrixXd out(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double v = m(i, j);
      out(i, j) = (v > t) ? v - t : (v < -t ? v + t : 0.0);
    }
  return SymMatrix(out);
}

SymMatrix psd_trace_prox(const SymMatrix& m, double t) {
  if (t < 0.0) throw_invalid("psd_trace_prox: negative threshold");
  auto e = sym_eig(m);
  Eigen::VectorXd d = (e.values.array() - t).max(0.0);
  return SymMatrix(e.vectors * d.asDiagonal() * e.vectors.transpose());
}

SymMatrix logdet_prox(const SymMatrix& z, const SymMatrix& sigma_n, double t) {
  if (t <= 0.0) throw_invalid("logdet_prox: step must be positive");
  if (z.dim() != sigma_n.dim()) throw_invalid("logdet_prox: dimension mismatch");
  auto e = sym_eig(SymMatrix(z.mat() - t * sigma_n.mat()));
  Eigen::VectorXd d(z.dim());
  for (int i = 0; i < z.dim(); ++i) {
    // positive root of r^2 - d r - t = 0, cancellation-free on both signs
    double di = e.values(i);
    double root = std::sqrt(di * di + 4.0 * t);
    d(i) = di >= 0.0 ? 0.5 * (di + root) : 2.0 * t / (root - di);
  }
  return SymMatrix(e.vectors * d.asDiagonal() * e.vectors.transpose());
}

namespace {

double objective_value(const SymMatrix& s, const SymMatrix& l,
                       const SymMatrix& sigma, double lambda, double gamma) {
  Eigen::MatrixXd k = s.mat() - l.mat();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    return std::numeric_limits<double>::infinity();
  double logdet = es.eigenvalues().array().log().sum();
  double fit = (k.array() * sigma.mat().array()).sum() - logdet;
  double penalty =
      lambda * (gamma * s.mat().cwiseAbs().sum() + l.mat().trace());
  return fit + penalty;
}

DecompositionEstimate run_admm(const SampleCovariance& cov,
                               const SolverConfig& config,
                               const SymMatrix* warm_s,
                               const SymMatrix* warm_l) {
  config.validate();
  const int p = cov.p;
  if (min_eigenvalue(cov.sigma) < -1e-8 * std::max(1.0, inf_norm(cov.sigma.mat())))
    throw_not_pd("fit: sample covariance is not positive semidefinite");

  const Eigen::MatrixXd& sig = cov.sigma.mat();
  Eigen::MatrixXd s, l;
  if (warm_s != nullptr && warm_l != nullptr) {
    s = warm_s->mat();
    l = warm_l->mat();
  } else {
    Eigen::VectorXd d = (sig.diagonal().array() + 1e-8).inverse();
    s = Eigen::MatrixXd(d.asDiagonal());
    l = Eigen::MatrixXd::Zero(p, p);
  }
  Eigen::MatrixXd r = s - l;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(p, p);  // scaled dual
  double rho = config.rho_admm;

  double prim_rel = std::numeric_limits<double>::infinity();
  double dual_rel = prim_rel;
  bool converged = false;
  int iter = 0;
  for (; iter < config.max_iters; ++iter) {
    Eigen::MatrixXd sl_old = s - l;
    r = logdet_prox(SymMatrix(s - l - u), cov.sigma, 1.0 / rho).mat();
    s = soft_threshold(SymMatrix(r + l + u), config.lambda * config.gamma / rho)
            .mat();
    l = psd_trace_prox(SymMatrix(s - r - u), config.lambda / rho).mat();
    Eigen::MatrixXd prim = r - s + l;
    u += prim;

    double sl_norm = (s - l).norm();
    prim_rel = prim.norm() / std::max({1.0, r.norm(), sl_norm});
    dual_rel = rho * (s - l - sl_old).norm() / std::max(1.0, rho * u.norm());
    if (prim_rel <= config.tol_primal && dual_rel <= config.tol_dual) {
      converged = true;
      ++iter;
      break;
    }
    if ((iter + 1) % 10 == 0) {
      if (prim_rel > 10.0 * dual_rel && rho < 1e6) {
        rho *= 2.0;
        u *= 0.5;
      } else if (dual_rel > 10.0 * prim_rel && rho > 1e-4) {
        rho *= 0.5;
        u *= 2.0;
      }
    }
  }

  DecompositionEstimate est;
  est.s = SymMatrix(s);
  est.l = SymMatrix(l);
  est.iters = iter;
  est.primal_residual = prim_rel;
  est.dual_residual = dual_rel;
  est.converged = converged;
  est.lambda = config.lambda;
  est.gamma = config.gamma;
  est.support_tol = config.support_tol;
  est.rank_tol = config.rank_tol;
  est.objective =
      objective_value(est.s, est.l, cov.sigma, config.lambda, config.gamma);
  return est;
}

}  // namespace

DecompositionEstimate fit(const SampleCovariance& cov,
                          const SolverConfig& config) {
  return run_admm(cov, config, nullptr, nullptr);
}

DecompositionEstimate fit(const SampleCovariance& cov,
                          const SolverConfig& config,
                          const DecompositionEstimate& warm) {
  return run_admm(cov, config, &warm.s, &warm.l);
}

double support_threshold(const DecompositionEstimate& est) {
  return est.support_tol * inf_norm(est.s.mat());
}

double rank_threshold(const DecompositionEstimate& est) {
  return est.rank_tol * spectral_norm(est.l.mat());
}

int estimate_rank(const DecompositionEstimate& est) {
  double thr = rank_threshold(est);
  if (thr <= 0.0) return 0;
  auto e = sym_eig(est.l);
  int r = 0;
  for (int i = 0; i < est.l.dim(); ++i)
    if (e.values(i) > thr) ++r;
  return r;
}

std::vector<signed char> sign_pattern(const SymMatrix& s, double threshold) {
  const int p = s.dim();
  std::vector<signed char> out;
  out.reserve(p * (p + 1) / 2);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      double v = s(i, j);
      out.push_back(v > threshold ? 1 : (v < -threshold ? -1 : 0));
    }
  return out;
}

KktResidual kkt_residual(const DecompositionEstimate& est,
                         const SampleCovariance& cov, double lambda,
                         double gamma) {
  if (lambda <= 0.0 || gamma <= 0.0)
    throw_invalid("kkt_residual: lambda and gamma must be positive");
  const int p = est.s.dim();
  SymMatrix k(est.s.mat() - est.l.mat());
  SymMatrix k_inv = psd_inverse(k);  // throws on singular S - L
  Eigen::MatrixXd g = cov.sigma.mat() - k_inv.mat();

  KktResidual out;
  // l1 part: -G/(lambda gamma) against sign(S) on the support, the unit
  // infinity-ball off it.
  Eigen::MatrixXd a = -g / (lambda * gamma);
  double thr = support_threshold(est);
  double stat_s = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (std::abs(est.s(i, j)) > thr) {
        double sign = est.s(i, j) > 0 ? 1.0 : -1.0;
        stat_s = std::max(stat_s, std::abs(a(i, j) - sign));
      } else {
        stat_s = std::max(stat_s, std::abs(a(i, j)) - 1.0);
      }
    }
  out.stationarity_s = std::max(stat_s, 0.0);

  // trace + cone part: G/lambda equals U U^T on the column space of L and
  // is bounded by the identity on the complement.
  Eigen::MatrixXd b = g / lambda;
  double rthr = rank_threshold(est);
  auto el = sym_eig(est.l);
  int r = 0;
  for (int i = 0; i < p; ++i)
    if (rthr > 0.0 && el.values(i) > rthr) ++r;
  double stat_l = 0.0;
  if (r > 0) {
    Eigen::MatrixXd u = el.vectors.leftCols(r);
    Eigen::MatrixXd pu = u * u.transpose();
    Eigen::MatrixXd bt = pu * b + b * pu - pu * b * pu;
    stat_l = spectral_norm(bt - pu);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(p, p) - pu;
    Eigen::MatrixXd off = q * b * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(off,
                                                      Eigen::EigenvaluesOnly);
    stat_l = std::max(stat_l, es.eigenvalues().maxCoeff() - 1.0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b,
                                                      Eigen::EigenvaluesOnly);
    stat_l = std::max(es.eigenvalues().maxCoeff() - 1.0, 0.0);
  }
  out.stationarity_l = std::max(stat_l, 0.0);

  out.feasibility = std::max(
      {0.0, -min_eigenvalue(k), -min_eigenvalue(est.l)});
  return out;
}

double lambda_schedule(int p, std::int64_t n, double xi_hint, double scale) {
  if (p < 1 || n < 1) throw_invalid("lambda_schedule: need p >= 1 and n >= 1");
  if (xi_hint <= 0.0 || xi_hint > 1.0)
    throw_invalid("lambda_schedule: xi_hint must be in (0, 1]");
  if (scale <= 0.0) throw_invalid("lambda_schedule: scale must be positive");
  return scale * (1.0 / xi_hint) *
         std::sqrt(static_cast<double>(p) / static_cast<double>(n));
}

StabilityReport gamma_sweep(const SampleCovariance& cov, double lambda,
                            const std::vector<double>& gamma_grid,
                            const SolverConfig& config) {
  if (gamma_grid.empty()) throw_invalid("gamma_sweep: empty grid");
  for (std::size_t i = 1; i < gamma_grid.size(); ++i)
    if (gamma_grid[i] <= gamma_grid[i - 1])
      throw_invalid("gamma_sweep: grid must be strictly ascending");

  StabilityReport rep;
  DecompositionEstimate prev;
  bool have_prev = false;
  for (double gamma : gamma_grid) {
    SolverConfig c = config;
    c.lambda = lambda;
    c.gamma = gamma;
    DecompositionEstimate est = have_prev ? fit(cov, c, prev) : fit(cov, c);
    SweepPoint pt;
    pt.gamma = gamma;
    pt.rank = estimate_rank(est);
    pt.pattern = sign_pattern(est.s, support_threshold(est));
    pt.converged = est.converged;
    pt.objective = est.objective;
    pt.iters = est.iters;
    rep.points.push_back(std::move(pt));
    prev = est;
    have_prev = true;
  }

  const int n = static_cast<int>(rep.points.size());
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    bool same = i < n && rep.points[i].rank == rep.points[start].rank &&
                rep.points[i].pattern == rep.points[start].pattern;
    if (!same) {
      rep.runs.emplace_back(start, i - 1);
      start = i;
    }
  }
  int best = 0;
  for (std::size_t k = 1; k < rep.runs.size(); ++k) {
    auto len = [&](std::size_t q) {
      return rep.runs[q].second - rep.runs[q].first;
    };
    if (len(k) > len(best)) best = static_cast<int>(k);
  }
  rep.recommended_index = (rep.runs[best].first + rep.runs[best].second) / 2;
  rep.recommended_gamma = rep.points[rep.recommended_index].gamma;
  return rep;
}

std::string edges_csv(const DecompositionEstimate& est) {
  std::ostringstream os;
  os << "i,j,sign,value\n";
  double thr = support_threshold(est);
  const int p = est.s.dim();
  char buf[64];
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      double v = est.s(i, j);
      if (std::abs(v) <= thr) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << i << ',' << j << ',' << (v > 0 ? 1 : -1) << ',' << buf << '\n';
    }
  return os.str();
}

}  // namespace lvggm
