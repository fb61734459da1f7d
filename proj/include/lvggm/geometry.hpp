#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lvggm/matrix_kernel.hpp"

namespace lvggm {

/// Tangent space to the sparse-matrix variety: symmetric matrices supported
/// inside a fixed symmetric mask.
class SupportSpace {
 public:
  SupportSpace(int p, std::vector<std::uint8_t> mask);

  static SupportSpace from_matrix(const SymMatrix& m, double tol);
  static SupportSpace full(int p);
  static SupportSpace diagonal(int p);

  int dim() const { return p_; }
  bool contains(int i, int j) const { return mask_[i * p_ + j] != 0; }
  /// Upper-triangle cells (i <= j) inside the mask; one per free entry.
  const std::vector<std::pair<int, int>>& cells() const { return cells_; }
  int deg_max() const { return deg_max_; }
  int deg_min() const { return deg_min_; }

 private:
  int p_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::pair<int, int>> cells_;
  int deg_max_ = 0;
  int deg_min_ = 0;
};

/// Tangent space to the rank variety at a symmetric anchor, represented by an
/// orthonormal basis of the anchor's column space. r = 0 is the zero space.
class RankTangentSpace {
 public:
  RankTangentSpace(int p, Eigen::MatrixXd u);

  /// Column space of a symmetric anchor; rank < 0 infers it from the
  /// spectrum (|eigenvalue| > tol * ||anchor||_2).
  static RankTangentSpace from_anchor(const SymMatrix& anchor, int rank = -1,
                                      double tol = 1e-10);

  int dim() const { return p_; }
  int rank() const { return static_cast<int>(u_.cols()); }
  const Eigen::MatrixXd& basis() const { return u_; }

 private:
  int p_;
  Eigen::MatrixXd u_;
};

struct XiBracket {
  double lower = 0.0;        // max(inc, ascent_lower)
  double upper = 0.0;        // 2 * inc
  double inc = 0.0;          // exact incoherence
  double ascent_lower = 0.0; // best feasible witness found
};

struct MuValue {
  double value = 0.0;
  bool exact = false;
  int deg_min = 0;  // certified lower bound
  int deg_max = 0;  // certified upper bound
};

struct RhoEstimate {
  double value = 0.0;     // converged lower bound on ||P_T1 - P_T2||
  double residual = 0.0;  // power-iteration residual (squared operator)
  int iterations = 0;
};

struct AdditionGainReport {
  double chi = 0.0;
  double mu_used = 0.0;
  double xi_used = 0.0;
  bool mu_exact = false;
  double min_value = 0.0;
  double max_value = 0.0;
  int trials = 0;
  bool all_inside = false;       // every sample in [1 - chi, 1 + chi]
  bool certificate_valid = false;  // chi < 1
};

struct GeometryReport {
  double xi_lower = 0.0;
  double xi_upper = 0.0;
  double ascent_lower = 0.0;
  double inc_value = 0.0;
  double mu_value = 0.0;
  bool mu_exact = false;
  double chi_value = 0.0;  // from certified mu upper bound and xi_upper
  std::optional<double> rho_value;
  double gamma = 0.0;
};

SymMatrix project_support(const SupportSpace& space, const SymMatrix& n);

/// P_T(N) = P_U N + N P_U - P_U N P_U; with orthogonal set,
/// (I - P_U) N (I - P_U).
SymMatrix project_tangent(const RankTangentSpace& space, const SymMatrix& n,
                          bool orthogonal = false);

/// Exact incoherence max_i ||P_U e_i||. Requires rank >= 1.
double incoherence(const RankTangentSpace& space);

/// Bracket for xi(T) = max { ||N||_inf : N in T, ||N||_2 <= 1 }. The lower
/// end combines the exact incoherence, the cell-candidate family
/// P_T(E_ij)/||P_T(E_ij)||_2, and projected-gradient ascent restarts.
XiBracket xi_bracket(const RankTangentSpace& space, int refine_iters = 16,
                     std::uint64_t seed = 0x5eedULL);

/// mu(Omega) = max { ||N||_2 : N in Omega, ||N||_inf <= 1 }. Exact by sign
/// vertex enumeration when the free-entry count is within exact_limit,
/// otherwise a sampled lower bound (never below deg_min), flagged
/// approximate.
MuValue mu_value(const SupportSpace& space, int exact_limit = 22,
                 std::uint64_t seed = 0x5eedULL, int sample_count = 4096);

/// Power-iteration estimate of ||P_T1 - P_T2|| on symmetric matrices,
/// matrix-free. Converged value is a lower bound on the spectral-norm
/// twisting. power_iters < 0 selects the cap 10 p^2.
RhoEstimate rho(const RankTangentSpace& a, const RankTangentSpace& b,
                int power_iters = -1, std::uint64_t seed = 0x5eedULL);

/// (f, g) = (gamma ||S||_1 + ||L||_*, max(||S||_inf / gamma, ||L||_2)).
std::pair<double, double> gamma_norms(const SymMatrix& s, const SymMatrix& l,
                                      double gamma);

double chi_value(double mu, double xi, double gamma);

/// Samples (S, L) in Omega x T with ||S||_inf = gamma, ||L||_2 = 1 and
/// checks g_gamma(P_Y A^+ A P_Y(S,L)) against [1 - chi, 1 + chi].
AdditionGainReport addition_gain_check(const SupportSpace& omega,
                                       const RankTangentSpace& t_space,
                                       double gamma, int trials,
                                       std::uint64_t seed = 0x5eedULL);

GeometryReport geometry_report(const SupportSpace& omega,
                               const RankTangentSpace& t_space, double gamma,
                               int refine_iters = 16, int mu_exact_limit = 22,
                               std::uint64_t seed = 0x5eedULL);

/// Orthonormal basis (trace inner product) of the symmetric tangent space.
std::vector<Eigen::MatrixXd> symmetric_basis(const RankTangentSpace& space);

SymMatrix random_support_element(const SupportSpace& space,
                                 std::mt19937_64& rng);
SymMatrix random_tangent_element(const RankTangentSpace& space,
                                 std::mt19937_64& rng);

}  // namespace lvggm
