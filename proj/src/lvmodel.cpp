#include "lvggm/lvmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace lvggm {

namespace {

using Edge = std::pair<int, int>;

// Draw `count` distinct indices from 0..p-1 (partial Fisher-Yates).
std::vector<int> draw_subset(int p, int count, std::mt19937_64& rng) {
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, p - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

LatentVariableModel build_from_edges(int p, const std::vector<Edge>& edges,
                                     int h, double edge_pc, double latent_frac,
                                     double latent_scale, std::uint64_t seed,
                                     std::string generator,
                                     std::map<std::string, double> params) {
  if (std::abs(edge_pc) <= 0.0 || std::abs(edge_pc) >= 1.0)
    throw_invalid("model builder: edge_pc must satisfy 0 < |edge_pc| < 1");
  if (h > 0 && (latent_frac <= 0.0 || latent_frac > 1.0))
    throw_invalid("model builder: latent_frac must be in (0, 1]");
  if (h < 0) throw_invalid("model builder: negative hidden count");

  const int d = p + h;
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(d, d);
  // Partial correlation convention: K_ij = -edge_pc * sqrt(K_ii K_jj); the
  // working diagonal is 1, so edges carry -edge_pc.
  for (const auto& [i, j] : edges) {
    k(i, j) = -edge_pc;
    k(j, i) = -edge_pc;
  }

  double resolved_scale = latent_scale;
  if (h > 0) {
    const int fanout = std::clamp(
        static_cast<int>(std::lround(latent_frac * p)), 1, p);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(p, h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    // Redraw on (measure-zero) rank-deficient cross blocks.
    for (int attempt = 0; attempt < 16; ++attempt) {
      cross.setZero();
      for (int k_hidden = 0; k_hidden < h; ++k_hidden) {
        for (int i : draw_subset(p, fanout, rng)) cross(i, k_hidden) = coef(rng);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
      if (svd.singularValues()(h - 1) >
          1e-10 * std::max(svd.singularValues()(0), 1.0))
        break;
    }
    if (latent_scale <= 0.0) {
      // Auto: aim for ||L||_2 = ||S||_2 / 2 with K_H = I, L = s^2 C C^T.
      const double s_nrm = spectral_norm(k.topLeftCorner(p, p));
      const double l_nrm = spectral_norm(cross * cross.transpose());
      resolved_scale = std::sqrt(s_nrm / (2.0 * l_nrm));
    }
    k.block(0, p, p, h) = resolved_scale * cross;
    k.block(p, 0, h, p) = resolved_scale * cross.transpose();
  }

  // PD repair: diagonal loading, tau doubling from 0 until min eigenvalue
  // clears 0.1, then rescale the diagonal back to 1.
  double tau = 0.0;
  const double tau_cap = 1e6;
  while (true) {
    Eigen::MatrixXd trial = k + tau * Eigen::MatrixXd::Identity(d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(trial,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() >= 0.1) {
      k = trial;
      break;
    }
    tau = (tau == 0.0) ? 1.0 / 1024.0 : 2.0 * tau;
    if (tau > tau_cap)
      throw Error(ErrorCode::ModelConstruction,
                  "model builder: positive definiteness unattainable within "
                  "loading cap");
  }
  Eigen::VectorXd dinv = k.diagonal().cwiseSqrt().cwiseInverse();
  k = dinv.asDiagonal() * k * dinv.asDiagonal();

  LatentVariableModel model;
  model.p = p;
  model.h = h;
  model.k_full = SymMatrix(k);
  model.observed.resize(p);
  std::iota(model.observed.begin(), model.observed.end(), 0);
  model.hidden.resize(h);
  std::iota(model.hidden.begin(), model.hidden.end(), p);
  model.seed = seed;
  model.generator = std::move(generator);
  params["latent_scale_resolved"] = (h > 0) ? resolved_scale : 0.0;
  params["diag_loading"] = tau;
  model.params = std::move(params);
  return model;
}

}  // namespace

LatentVariableModel build_cycle_model(int p, int h, double edge_pc,
                                      double latent_frac, double latent_scale,
                                      std::uint64_t seed) {
  if (p < 3) throw_invalid("build_cycle_model: need p >= 3");
  std::vector<Edge> edges;
  for (int i = 0; i < p; ++i) edges.emplace_back(i, (i + 1) % p);
  return build_from_edges(p, edges, h, edge_pc, latent_frac, latent_scale,
                          seed, "cycle",
                          {{"p", static_cast<double>(p)},
                           {"h", static_cast<double>(h)},
                           {"edge_pc", edge_pc},
                           {"latent_frac", latent_frac},
                           {"latent_scale", latent_scale}});
}

LatentVariableModel build_grid_model(int rows, int cols, int h, double edge_pc,
                                     double latent_frac, double latent_scale,
                                     std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rows * cols < 4)
    throw_invalid("build_grid_model: need rows*cols >= 4");
  const int p = rows * cols;
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
    }
  return build_from_edges(p, edges, h, edge_pc, latent_frac, latent_scale,
                          seed, "grid",
                          {{"rows", static_cast<double>(rows)},
                           {"cols", static_cast<double>(cols)},
                           {"h", static_cast<double>(h)},
                           {"edge_pc", edge_pc},
                           {"latent_frac", latent_frac},
                           {"latent_scale", latent_scale}});
}

MarginalDecomposition marginalize(const LatentVariableModel& model) {
  const int p = model.p;
  const int h = model.h;
  const Eigen::MatrixXd& k = model.k_full.mat();
  MarginalDecomposition out;
  out.s_true = SymMatrix(k.topLeftCorner(p, p));
  if (h == 0) {
    out.l_true = SymMatrix::zero(p);
    out.k_marg = out.s_true;
  } else {
    SymMatrix k_h(k.bottomRightCorner(h, h));
    SymMatrix k_h_inv = psd_inverse(k_h);  // throws NotPositiveDefinite
    Eigen::MatrixXd cross = k.topRightCorner(p, h);
    out.l_true = SymMatrix(cross * k_h_inv.mat() * cross.transpose());
    out.k_marg = SymMatrix(out.s_true.mat() - out.l_true.mat());
  }
  out.sigma_marg = psd_inverse(out.k_marg);
  return out;
}

SampleCovariance sample_covariance(const LatentVariableModel& model,
                                   std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw_invalid("sample_covariance: need n >= 1");
  const int p = model.p;
  Eigen::MatrixXd root = spectral_sqrt(marginalize(model).sigma_marg);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd z(p), x(p);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = n01(rng);
    x = root * z;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  Eigen::MatrixXd sigma =
      Eigen::MatrixXd(acc.selfadjointView<Eigen::Lower>()) /
      static_cast<double>(n);
  return SampleCovariance{p, n, SymMatrix(sigma)};
}

ModelComplexity model_complexity(const MarginalDecomposition& decomp,
                                 double support_tol) {
  const Eigen::MatrixXd& s = decomp.s_true.mat();
  const int p = decomp.s_true.dim();
  ModelComplexity out;
  out.deg_max = 0;
  out.deg_min = p + 1;
  out.theta_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p; ++i) {
    int count = 0;
    for (int j = 0; j < p; ++j) {
      if (std::abs(s(i, j)) > support_tol) {
        ++count;
        out.theta_min = std::min(out.theta_min, std::abs(s(i, j)));
      }
    }
    out.deg_max = std::max(out.deg_max, count);
    out.deg_min = std::min(out.deg_min, count);
  }
  if (!std::isfinite(out.theta_min)) out.theta_min = 0.0;

  auto el = sym_eig(decomp.l_true);
  const double lmax = std::max(el.values.cwiseAbs().maxCoeff(), 0.0);
  const double rank_eps = std::max(1e-10 * lmax, 1e-14);
  int rank = 0;
  double sigma_min = 0.0;
  for (int i = 0; i < p; ++i) {
    if (el.values(i) > rank_eps) {
      ++rank;
      sigma_min = el.values(i);  // descending, so last accepted is smallest
    }
  }
  out.rank_l = rank;
  out.sigma_min = sigma_min;
  if (rank > 0) {
    Eigen::MatrixXd u = el.vectors.leftCols(rank);
    out.inc = u.rowwise().norm().maxCoeff();
  } else {
    out.inc = 0.0;  // undefined for a zero low-rank part, reported as 0
  }
  out.psi = spectral_norm(decomp.sigma_marg.mat());
  return out;
}

}  // namespace lvggm
