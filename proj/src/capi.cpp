#include "lvggm.h"

#include <cstring>
#include <string>

#include "lvggm/consistency.hpp"
#include "lvggm/fisher.hpp"
#include "lvggm/geometry.hpp"
#include "lvggm/harness.hpp"
#include "lvggm/json_io.hpp"
#include "lvggm/lvmodel.hpp"
#include "lvggm/solver.hpp"

struct lvggm_model {
  lvggm::LatentVariableModel value;
};

struct lvggm_cov {
  lvggm::SampleCovariance value;
};

struct lvggm_estimate {
  lvggm::DecompositionEstimate value;
};

namespace {

thread_local std::string g_last_error;

lvggm_status map_code(lvggm::ErrorCode code) {
  using lvggm::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
      return LVGGM_ERR_ARGUMENT;
    case ErrorCode::DataError:
      return LVGGM_ERR_DATA;
    case ErrorCode::NotPositiveDefinite:
      return LVGGM_ERR_NOT_PD;
    case ErrorCode::ModelConstruction:
      return LVGGM_ERR_CONSTRUCTION;
    case ErrorCode::Unidentifiable:
      return LVGGM_ERR_UNIDENTIFIABLE;
    case ErrorCode::Io:
      return LVGGM_ERR_IO;
    case ErrorCode::Internal:
      return LVGGM_ERR_INTERNAL;
  }
  return LVGGM_ERR_INTERNAL;
}

template <typename Fn>
lvggm_status guarded(Fn&& fn) {
  try {
    fn();
    return LVGGM_OK;
  } catch (const lvggm::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LVGGM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LVGGM_ERR_INTERNAL;
  }
}

lvggm::SolverConfig to_config(const lvggm_solver_options* options) {
  lvggm::SolverConfig c;
  if (options != nullptr) {
    c.lambda = options->lambda;
    c.gamma = options->gamma;
    c.rho_admm = options->rho_admm;
    c.max_iters = options->max_iters;
    c.tol_primal = options->tol_primal;
    c.tol_dual = options->tol_dual;
    c.support_tol = options->support_tol;
    c.rank_tol = options->rank_tol;
  }
  return c;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lvggm_status require(bool cond, const char* message) {
  if (cond) return LVGGM_OK;
  g_last_error = message;
  return LVGGM_ERR_ARGUMENT;
}

nlohmann::json diagnose_json(const lvggm::MarginalDecomposition& dec,
                             double gamma, int nearby_samples,
                             std::uint64_t seed) {
  using namespace lvggm;
  SupportSpace omega = SupportSpace::from_matrix(dec.s_true, 1e-8);
  RankTangentSpace t_space = RankTangentSpace::from_anchor(dec.l_true);
  XiBracket xi = xi_bracket(t_space, 16, seed);
  MuValue mu = mu_value(omega, 22, seed);
  double mu_cert = mu.exact ? mu.value : static_cast<double>(mu.deg_max);
  if (gamma <= 0.0) {
    gamma = (xi.upper > 0.0 && mu_cert > 0.0)
                ? std::sqrt(xi.upper / (2.0 * mu_cert))
                : 1.0;
  }
  GeometryReport geo = geometry_report(omega, t_space, gamma, 16, 22, seed);

  nlohmann::json j;
  j["schema"] = 1;
  j["kind"] = "lvggm.diagnostics";
  j["gamma"] = gamma;
  j["geometry"] = geometry_report_to_json(geo);
  FisherOperator op(dec.sigma_marg);
  if (t_space.rank() > 0 || !omega.cells().empty()) {
    FisherDiagnostics d =
        diagnostics(op, omega, t_space, mu, xi, nearby_samples, seed);
    j["fisher"] = diagnostics_to_json(d);
  }
  return j;
}

}  // namespace

extern "C" {

const char* lvggm_status_name(lvggm_status status) {
  switch (status) {
    case LVGGM_OK:
      return "ok";
    case LVGGM_ERR_ARGUMENT:
      return "invalid argument";
    case LVGGM_ERR_DATA:
      return "data error";
    case LVGGM_ERR_NOT_PD:
      return "not positive definite";
    case LVGGM_ERR_CONSTRUCTION:
      return "model construction failed";
    case LVGGM_ERR_UNIDENTIFIABLE:
      return "unidentifiable";
    case LVGGM_ERR_IO:
      return "io error";
    case LVGGM_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown";
}

const char* lvggm_last_error(void) { return g_last_error.c_str(); }

const char* lvggm_version(void) { return "0.1.0"; }

void lvggm_string_free(char* s) { delete[] s; }

void lvggm_buffer_free(double* buffer) { delete[] buffer; }

lvggm_status lvggm_model_cycle(int p, int h, double edge_pc,
                               double latent_frac, double latent_scale,
                               uint64_t seed, lvggm_model** out) {
  if (auto st = require(out != nullptr, "null output pointer")) return st;
  return guarded([&] {
    *out = new lvggm_model{
        lvggm::build_cycle_model(p, h, edge_pc, latent_frac, latent_scale,
                                 seed)};
  });
}

lvggm_status lvggm_model_grid(int rows, int cols, int h, double edge_pc,
                              double latent_frac, double latent_scale,
                              uint64_t seed, lvggm_model** out) {
  if (auto st = require(out != nullptr, "null output pointer")) return st;
  return guarded([&] {
    *out = new lvggm_model{lvggm::build_grid_model(
        rows, cols, h, edge_pc, latent_frac, latent_scale, seed)};
  });
}

lvggm_status lvggm_model_from_json(const char* json, lvggm_model** out) {
  if (auto st = require(json != nullptr && out != nullptr, "null argument"))
    return st;
  return guarded([&] {
    auto parsed = nlohmann::json::parse(json, nullptr, false);
    if (parsed.is_discarded())
      throw lvggm::Error(lvggm::ErrorCode::DataError, "malformed JSON");
    *out = new lvggm_model{lvggm::model_from_json(parsed)};
  });
}

lvggm_status lvggm_model_to_json(const lvggm_model* model, char** json_out) {
  if (auto st = require(model != nullptr && json_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    *json_out = dup_string(lvggm::model_to_json(model->value).dump(2));
  });
}

int lvggm_model_observed_dim(const lvggm_model* model) {
  return model ? model->value.p : 0;
}

int lvggm_model_hidden_dim(const lvggm_model* model) {
  return model ? model->value.h : 0;
}

void lvggm_model_free(lvggm_model* model) { delete model; }

lvggm_status lvggm_cov_from_model(const lvggm_model* model, int64_t n,
                                  uint64_t seed, lvggm_cov** out) {
  if (auto st = require(model != nullptr && out != nullptr, "null argument"))
    return st;
  return guarded([&] {
    *out = new lvggm_cov{lvggm::sample_covariance(model->value, n, seed)};
  });
}

lvggm_status lvggm_cov_from_csv(const char* path, const char* mode,
                                int64_t n_override, char** warnings_out,
                                lvggm_cov** out) {
  if (auto st = require(path != nullptr && mode != nullptr && out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    lvggm::IngestResult r = lvggm::ingest_csv(path, mode, n_override);
    if (warnings_out != nullptr) {
      std::string joined;
      for (const auto& w : r.warnings) {
        joined += w;
        joined += '\n';
      }
      *warnings_out = dup_string(joined);
    }
    *out = new lvggm_cov{std::move(r.cov)};
  });
}

lvggm_status lvggm_cov_from_dense(int p, int64_t n, const double* row_major,
                                  lvggm_cov** out) {
  if (auto st = require(row_major != nullptr && out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) m(i, j) = row_major[i * p + j];
    if (n < 1)
      throw lvggm::Error(lvggm::ErrorCode::InvalidArgument,
                         "sample count must be >= 1");
    *out = new lvggm_cov{lvggm::SampleCovariance{p, n, lvggm::SymMatrix(m)}};
  });
}

int lvggm_cov_dim(const lvggm_cov* cov) { return cov ? cov->value.p : 0; }

int64_t lvggm_cov_samples(const lvggm_cov* cov) {
  return cov ? cov->value.n : 0;
}

lvggm_status lvggm_cov_entries(const lvggm_cov* cov, double* out) {
  if (auto st = require(cov != nullptr && out != nullptr, "null argument"))
    return st;
  const int p = cov->value.p;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out[i * p + j] = cov->value.sigma(i, j);
  return LVGGM_OK;
}

lvggm_status lvggm_cov_to_csv(const lvggm_cov* cov, char** csv_out) {
  if (auto st = require(cov != nullptr && csv_out != nullptr, "null argument"))
    return st;
  return guarded(
      [&] { *csv_out = dup_string(lvggm::covariance_csv(cov->value)); });
}

void lvggm_cov_free(lvggm_cov* cov) { delete cov; }

void lvggm_solver_options_init(lvggm_solver_options* options) {
  if (options == nullptr) return;
  lvggm::SolverConfig d;
  options->lambda = d.lambda;
  options->gamma = d.gamma;
  options->rho_admm = d.rho_admm;
  options->max_iters = d.max_iters;
  options->tol_primal = d.tol_primal;
  options->tol_dual = d.tol_dual;
  options->support_tol = d.support_tol;
  options->rank_tol = d.rank_tol;
}

double lvggm_lambda_schedule(int p, int64_t n, double xi_hint, double scale) {
  try {
    return lvggm::lambda_schedule(p, n, xi_hint, scale);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return -1.0;
  }
}

lvggm_status lvggm_fit(const lvggm_cov* cov,
                       const lvggm_solver_options* options,
                       lvggm_estimate** out) {
  if (auto st = require(cov != nullptr && out != nullptr, "null argument"))
    return st;
  return guarded([&] {
    *out = new lvggm_estimate{lvggm::fit(cov->value, to_config(options))};
  });
}

int lvggm_estimate_dim(const lvggm_estimate* est) {
  return est ? est->value.s.dim() : 0;
}

int lvggm_estimate_rank(const lvggm_estimate* est) {
  return est ? lvggm::estimate_rank(est->value) : 0;
}

int lvggm_estimate_converged(const lvggm_estimate* est) {
  return est && est->value.converged ? 1 : 0;
}

lvggm_status lvggm_estimate_matrices(const lvggm_estimate* est, double* s_out,
                                     double* l_out) {
  if (auto st = require(est != nullptr, "null estimate")) return st;
  const int p = est->value.s.dim();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (s_out != nullptr) s_out[i * p + j] = est->value.s(i, j);
      if (l_out != nullptr) l_out[i * p + j] = est->value.l(i, j);
    }
  return LVGGM_OK;
}

lvggm_status lvggm_estimate_to_json(const lvggm_estimate* est,
                                    char** json_out) {
  if (auto st = require(est != nullptr && json_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    *json_out = dup_string(lvggm::estimate_to_json(est->value).dump(2));
  });
}

lvggm_status lvggm_estimate_edges_csv(const lvggm_estimate* est,
                                      char** csv_out) {
  if (auto st = require(est != nullptr && csv_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] { *csv_out = dup_string(lvggm::edges_csv(est->value)); });
}

lvggm_status lvggm_estimate_kkt(const lvggm_estimate* est,
                                const lvggm_cov* cov, double* stationarity_s,
                                double* stationarity_l, double* feasibility) {
  if (auto st = require(est != nullptr && cov != nullptr, "null argument"))
    return st;
  return guarded([&] {
    lvggm::KktResidual k = lvggm::kkt_residual(
        est->value, cov->value, est->value.lambda, est->value.gamma);
    if (stationarity_s != nullptr) *stationarity_s = k.stationarity_s;
    if (stationarity_l != nullptr) *stationarity_l = k.stationarity_l;
    if (feasibility != nullptr) *feasibility = k.feasibility;
  });
}

void lvggm_estimate_free(lvggm_estimate* est) { delete est; }

lvggm_status lvggm_sweep(const lvggm_cov* cov,
                         const lvggm_solver_options* options,
                         const double* gammas, int n_gammas,
                         char** report_json, char** curve_csv) {
  if (auto st = require(cov != nullptr && gammas != nullptr && n_gammas > 0,
                        "null or empty gamma grid"))
    return st;
  return guarded([&] {
    lvggm::SolverConfig c = to_config(options);
    std::vector<double> grid(gammas, gammas + n_gammas);
    lvggm::StabilityReport rep =
        lvggm::gamma_sweep(cov->value, c.lambda, grid, c);
    if (report_json != nullptr)
      *report_json =
          dup_string(lvggm::stability_report_to_json(rep).dump(2));
    if (curve_csv != nullptr) *curve_csv = dup_string(lvggm::sweep_csv(rep));
  });
}

lvggm_status lvggm_diagnose_model(const lvggm_model* model, double gamma,
                                  int nearby_samples, uint64_t seed,
                                  char** json_out) {
  if (auto st = require(model != nullptr && json_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    lvggm::MarginalDecomposition dec = lvggm::marginalize(model->value);
    *json_out = dup_string(
        diagnose_json(dec, gamma, std::max(nearby_samples, 1), seed).dump(2));
  });
}

lvggm_status lvggm_diagnose_pair(int p, const double* s_row_major,
                                 const double* l_row_major, double gamma,
                                 int nearby_samples, uint64_t seed,
                                 char** json_out) {
  if (auto st = require(s_row_major != nullptr && l_row_major != nullptr &&
                            json_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    Eigen::MatrixXd s(p, p), l(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        s(i, j) = s_row_major[i * p + j];
        l(i, j) = l_row_major[i * p + j];
      }
    lvggm::MarginalDecomposition dec;
    dec.s_true = lvggm::SymMatrix(s);
    dec.l_true = lvggm::SymMatrix(l);
    dec.k_marg = lvggm::SymMatrix(s - l);
    dec.sigma_marg = lvggm::psd_inverse(dec.k_marg);
    *json_out = dup_string(
        diagnose_json(dec, gamma, std::max(nearby_samples, 1), seed).dump(2));
  });
}

lvggm_status lvggm_verdict(const lvggm_estimate* est, const lvggm_model* model,
                           char** json_out) {
  if (auto st = require(est != nullptr && model != nullptr &&
                            json_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    lvggm::MarginalDecomposition truth = lvggm::marginalize(model->value);
    lvggm::ConsistencyVerdict v = lvggm::algebraic_consistency(
        est->value, truth, est->value.support_tol, est->value.rank_tol,
        est->value.gamma > 0 ? est->value.gamma : 1.0);
    *json_out = dup_string(lvggm::verdict_to_json(v).dump(2));
  });
}

lvggm_status lvggm_dense_from_csv(const char* path, int* p_out,
                                  double** data_out) {
  if (auto st = require(path != nullptr && p_out != nullptr &&
                            data_out != nullptr,
                        "null argument"))
    return st;
  return guarded([&] {
    lvggm::SymMatrix m =
        lvggm::dense_matrix_from_csv_text(lvggm::read_file(path));
    const int p = m.dim();
    double* buf = new double[static_cast<std::size_t>(p) * p];
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) buf[i * p + j] = m(i, j);
    *p_out = p;
    *data_out = buf;
  });
}

lvggm_status lvggm_experiment_run(const char* config_json, char** curve_csv,
                                  char** summary_json) {
  if (auto st = require(config_json != nullptr, "null config")) return st;
  return guarded([&] {
    auto parsed = nlohmann::json::parse(config_json, nullptr, false);
    if (parsed.is_discarded())
      throw lvggm::Error(lvggm::ErrorCode::DataError,
                         "malformed experiment config JSON");
    lvggm::ExperimentConfig config =
        lvggm::experiment_config_from_json(parsed);
    lvggm::ConsistencyCurve curve =
        lvggm::run_consistency_experiment(config);
    if (curve_csv != nullptr)
      *curve_csv = dup_string(lvggm::curve_csv(curve));
    if (summary_json != nullptr)
      *summary_json = dup_string(
          lvggm::experiment_summary_json(config, curve).dump(2));
  });
}

}  // extern "C"
