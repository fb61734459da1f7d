/*
 * lvggm - latent-variable Gaussian graphical model selection.
 *
 * C interface to the lvggm core: construction of synthetic latent-variable
 * models, sample-covariance ingestion, the l1 + trace regularized
 * maximum-likelihood solver, identifiability diagnostics, and the
 * consistency experiment harness.
 *
 * Conventions:
 *  - Every fallible call returns an lvggm_status; LVGGM_OK is 0. On failure
 *    lvggm_last_error() returns a thread-local description of the problem.
 *  - Objects are opaque handles released with the matching *_free function.
 *  - Strings returned through char** outputs are heap-allocated; release
 *    them with lvggm_string_free.
 *  - Dense matrices cross the boundary as row-major double arrays.
 *  - The environment variable LVGGM_THREADS caps harness worker threads.
 */

#ifndef LVGGM_H
#define LVGGM_H

#include <stdint.h>

#if defined(_WIN32)
#define LVGGM_API __declspec(dllexport)
#else
#define LVGGM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lvggm_status {
  LVGGM_OK = 0,
  LVGGM_ERR_ARGUMENT = 1,       /* invalid argument or precondition */
  LVGGM_ERR_DATA = 2,           /* malformed input data (CSV/JSON) */
  LVGGM_ERR_NOT_PD = 3,         /* matrix not positive (semi)definite */
  LVGGM_ERR_CONSTRUCTION = 4,   /* model construction failed */
  LVGGM_ERR_UNIDENTIFIABLE = 5, /* restricted Fisher operator singular */
  LVGGM_ERR_IO = 6,             /* file read/write failure */
  LVGGM_ERR_INTERNAL = 7
} lvggm_status;

LVGGM_API const char* lvggm_status_name(lvggm_status status);

/* Thread-local message describing the most recent failure in this thread. */
LVGGM_API const char* lvggm_last_error(void);

LVGGM_API const char* lvggm_version(void);

LVGGM_API void lvggm_string_free(char* s);

typedef struct lvggm_model lvggm_model;
typedef struct lvggm_cov lvggm_cov;
typedef struct lvggm_estimate lvggm_estimate;

/* ------------------------------------------------------------------ */
/* Ground-truth models                                                  */

/* Cycle conditional graph on p observed variables with edge partial
 * correlation edge_pc; h hidden variables each wired to a random
 * latent_frac fraction of the observed ones. latent_scale <= 0 requests
 * automatic calibration of the latent coefficient scale. */
LVGGM_API lvggm_status lvggm_model_cycle(int p, int h, double edge_pc,
                                         double latent_frac,
                                         double latent_scale, uint64_t seed,
                                         lvggm_model** out);

LVGGM_API lvggm_status lvggm_model_grid(int rows, int cols, int h,
                                        double edge_pc, double latent_frac,
                                        double latent_scale, uint64_t seed,
                                        lvggm_model** out);

LVGGM_API lvggm_status lvggm_model_from_json(const char* json,
                                             lvggm_model** out);
LVGGM_API lvggm_status lvggm_model_to_json(const lvggm_model* model,
                                           char** json_out);
LVGGM_API int lvggm_model_observed_dim(const lvggm_model* model);
LVGGM_API int lvggm_model_hidden_dim(const lvggm_model* model);
LVGGM_API void lvggm_model_free(lvggm_model* model);

/* ------------------------------------------------------------------ */
/* Sample covariances                                                   */

LVGGM_API lvggm_status lvggm_cov_from_model(const lvggm_model* model,
                                            int64_t n, uint64_t seed,
                                            lvggm_cov** out);

/* mode is "samples" (rows are observations; columns are centered) or
 * "covariance" (square symmetric; n_override gives the sample count).
 * warnings_out may be NULL; otherwise it receives a newline-separated list
 * (empty string when clean). */
LVGGM_API lvggm_status lvggm_cov_from_csv(const char* path, const char* mode,
                                          int64_t n_override,
                                          char** warnings_out,
                                          lvggm_cov** out);

LVGGM_API lvggm_status lvggm_cov_from_dense(int p, int64_t n,
                                            const double* row_major,
                                            lvggm_cov** out);

LVGGM_API int lvggm_cov_dim(const lvggm_cov* cov);
LVGGM_API int64_t lvggm_cov_samples(const lvggm_cov* cov);
/* Copies the p*p matrix into caller-provided storage. */
LVGGM_API lvggm_status lvggm_cov_entries(const lvggm_cov* cov, double* out);
LVGGM_API lvggm_status lvggm_cov_to_csv(const lvggm_cov* cov, char** csv_out);
LVGGM_API void lvggm_cov_free(lvggm_cov* cov);

/* ------------------------------------------------------------------ */
/* Solver                                                               */

typedef struct lvggm_solver_options {
  double lambda;      /* > 0 */
  double gamma;       /* > 0 */
  double rho_admm;    /* ADMM penalty, default 1.0 */
  int max_iters;      /* default 4000 */
  double tol_primal;  /* scaled primal residual tolerance */
  double tol_dual;    /* scaled dual residual tolerance */
  double support_tol; /* relative sign-pattern threshold, default 1e-4 */
  double rank_tol;    /* relative rank threshold, default 1e-4 */
} lvggm_solver_options;

LVGGM_API void lvggm_solver_options_init(lvggm_solver_options* options);

/* lambda = scale * (1 / xi_hint) * sqrt(p / n). */
LVGGM_API double lvggm_lambda_schedule(int p, int64_t n, double xi_hint,
                                       double scale);

LVGGM_API lvggm_status lvggm_fit(const lvggm_cov* cov,
                                 const lvggm_solver_options* options,
                                 lvggm_estimate** out);

LVGGM_API int lvggm_estimate_dim(const lvggm_estimate* est);
LVGGM_API int lvggm_estimate_rank(const lvggm_estimate* est);
LVGGM_API int lvggm_estimate_converged(const lvggm_estimate* est);
LVGGM_API lvggm_status lvggm_estimate_matrices(const lvggm_estimate* est,
                                               double* s_out, double* l_out);
LVGGM_API lvggm_status lvggm_estimate_to_json(const lvggm_estimate* est,
                                              char** json_out);
LVGGM_API lvggm_status lvggm_estimate_edges_csv(const lvggm_estimate* est,
                                                char** csv_out);
/* KKT residuals of the estimate against a sample covariance. */
LVGGM_API lvggm_status lvggm_estimate_kkt(const lvggm_estimate* est,
                                          const lvggm_cov* cov,
                                          double* stationarity_s,
                                          double* stationarity_l,
                                          double* feasibility);
LVGGM_API void lvggm_estimate_free(lvggm_estimate* est);

/* Fits along an ascending gamma grid with warm starts. Outputs the
 * stability report JSON and a per-gamma curve CSV. */
LVGGM_API lvggm_status lvggm_sweep(const lvggm_cov* cov,
                                   const lvggm_solver_options* options,
                                   const double* gammas, int n_gammas,
                                   char** report_json, char** curve_csv);

/* ------------------------------------------------------------------ */
/* Diagnostics and verdicts                                             */

/* Geometry report + Fisher diagnostics of a ground-truth model, as one JSON
 * document. gamma <= 0 selects the chi-optimal sqrt(xi_upper / (2 mu)).
 * nearby_samples controls the tangent-space sampling (>= 1). */
LVGGM_API lvggm_status lvggm_diagnose_model(const lvggm_model* model,
                                            double gamma, int nearby_samples,
                                            uint64_t seed, char** json_out);

/* Same report for an explicit (S, L) pair given as row-major p x p arrays;
 * the Fisher information is evaluated at (S - L)^-1. */
LVGGM_API lvggm_status lvggm_diagnose_pair(int p, const double* s_row_major,
                                           const double* l_row_major,
                                           double gamma, int nearby_samples,
                                           uint64_t seed, char** json_out);

/* Algebraic-consistency verdict of an estimate against a ground-truth
 * model (JSON). */
LVGGM_API lvggm_status lvggm_verdict(const lvggm_estimate* est,
                                     const lvggm_model* model,
                                     char** json_out);

/* Square symmetric matrix CSV -> row-major array; release the buffer with
 * lvggm_buffer_free. */
LVGGM_API lvggm_status lvggm_dense_from_csv(const char* path, int* p_out,
                                            double** data_out);
LVGGM_API void lvggm_buffer_free(double* buffer);

/* ------------------------------------------------------------------ */
/* Experiments                                                          */

/* Runs a consistency experiment described by a JSON config document and
 * returns the curve CSV and the summary JSON. */
LVGGM_API lvggm_status lvggm_experiment_run(const char* config_json,
                                            char** curve_csv,
                                            char** summary_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LVGGM_H */
