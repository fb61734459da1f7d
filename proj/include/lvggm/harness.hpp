#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lvggm/consistency.hpp"
#include "lvggm/lvmodel.hpp"
#include "lvggm/solver.hpp"

namespace lvggm {

struct LambdaRule {
  double scale = 1.0;
  double xi_hint = 1.0;
};

/// One consistency experiment: a fixed generator model, fresh samples per
/// trial, lambda from the schedule, fixed gamma (or a per-trial stability
/// sweep when gamma_grid is nonempty).
struct ExperimentConfig {
  int schema = 1;
  std::string model_type = "cycle";  // "cycle" or "grid"
  int p = 0;
  int h = 0;
  int rows = 0;
  int cols = 0;
  double edge_pc = 0.25;
  double latent_frac = 0.8;
  double latent_scale = -1.0;  // <= 0: auto calibration
  std::uint64_t model_seed = 0;

  std::vector<std::int64_t> n_grid;
  int trials_per_n = 50;
  SolverConfig solver;  // lambda/gamma filled per point
  LambdaRule lambda_rule;
  double gamma = 0.3;
  std::vector<double> gamma_grid;  // nonempty: stability-sweep mode
  std::uint64_t master_seed = 0;

  std::string curve_csv_path;     // optional output hints for the CLI
  std::string summary_json_path;

  void validate() const;
};

struct CurveRow {
  std::int64_t n = 0;
  double p_success = 0.0;
  double ci_halfwidth = 0.0;  // normal-approximation binomial half-width
  double mean_gerr = 0.0;
  double mean_coverr = 0.0;
  int trials = 0;
  int nonconverged = 0;
};

struct ConsistencyCurve {
  std::vector<CurveRow> rows;
};

/// Deterministic given the config: per-trial seeds are derived by counter
/// from the master seed, and aggregation is by trial index regardless of the
/// worker schedule. Solver non-convergence counts as failure and is tallied.
ConsistencyCurve run_consistency_experiment(const ExperimentConfig& config);

LatentVariableModel build_experiment_model(const ExperimentConfig& config);

struct IngestResult {
  SampleCovariance cov;
  std::vector<std::string> warnings;
};

/// Strict CSV reader (comma separator, '.' decimal point, mandatory header
/// row). mode "samples": rows are observations, columns variables; columns
/// are centered before forming (1/n) sum x x^T. mode "covariance": square
/// symmetric matrix; the sample count must be supplied.
IngestResult ingest_csv(const std::string& path, const std::string& mode,
                        std::int64_t n_override = -1);
IngestResult ingest_csv_text(const std::string& text, const std::string& mode,
                             std::int64_t n_override = -1);

/// Square numeric CSV (header row mandatory), symmetric within 1e-8.
SymMatrix dense_matrix_from_csv_text(const std::string& text);

std::string covariance_csv(const SampleCovariance& cov);
std::string curve_csv(const ConsistencyCurve& curve);
std::string sweep_csv(const StabilityReport& report);

/// Runs fn(0..count-1) on a pool capped by the LVGGM_THREADS environment
/// variable (default: hardware concurrency).
void parallel_for(int count, const std::function<void(int)>& fn);
int worker_count();

std::string read_file(const std::string& path);

}  // namespace lvggm
