#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lvggm/matrix_kernel.hpp"

namespace lvggm {

/// Ground-truth latent-variable Gaussian model: joint concentration matrix
/// over p observed + h hidden variables. Observed variables occupy indices
/// 0..p-1, hidden ones p..p+h-1.
struct LatentVariableModel {
  int p = 0;
  int h = 0;
  SymMatrix k_full{Eigen::MatrixXd::Identity(1, 1)};
  std::vector<int> observed;
  std::vector<int> hidden;
  std::uint64_t seed = 0;
  std::string generator;                  // "cycle", "grid" or "custom"
  std::map<std::string, double> params;   // generator parameters, resolved
};

/// Schur-complement split of the marginal concentration of the observed
/// block: k_marg = s_true - l_true, sigma_marg = k_marg^-1.
struct MarginalDecomposition {
  SymMatrix s_true{Eigen::MatrixXd::Identity(1, 1)};
  SymMatrix l_true{Eigen::MatrixXd::Identity(1, 1)};
  SymMatrix k_marg{Eigen::MatrixXd::Identity(1, 1)};
  SymMatrix sigma_marg{Eigen::MatrixXd::Identity(1, 1)};
};

struct SampleCovariance {
  int p = 0;
  std::int64_t n = 0;
  SymMatrix sigma{Eigen::MatrixXd::Identity(1, 1)};
};

/// Complexity summary of a ground-truth decomposition: per-row nonzero counts
/// of s_true (diagonal included), incoherence and smallest nonzero singular
/// value of l_true, smallest nonzero entry of s_true, psi = ||sigma_marg||_2.
struct ModelComplexity {
  int deg_max = 0;
  int deg_min = 0;
  double inc = 0.0;
  double sigma_min = 0.0;
  double theta_min = 0.0;
  double psi = 0.0;
  int rank_l = 0;
};

/// Cycle conditional graph among the observed variables, h hidden variables
/// each wired to a random latent_frac fraction of the observed ones.
/// latent_scale <= 0 requests auto-calibration (||L|| ~ ||S||_2 / 2).
LatentVariableModel build_cycle_model(int p, int h, double edge_pc,
                                      double latent_frac, double latent_scale,
                                      std::uint64_t seed);

/// Nearest-neighbor grid conditional graph, otherwise as build_cycle_model.
LatentVariableModel build_grid_model(int rows, int cols, int h, double edge_pc,
                                     double latent_frac, double latent_scale,
                                     std::uint64_t seed);

MarginalDecomposition marginalize(const LatentVariableModel& model);

/// n draws from N(0, sigma_marg) accumulated into (1/n) sum x x^T.
SampleCovariance sample_covariance(const LatentVariableModel& model,
                                   std::int64_t n, std::uint64_t seed);

ModelComplexity model_complexity(const MarginalDecomposition& decomp,
                                 double support_tol = 1e-8);

}  // namespace lvggm
