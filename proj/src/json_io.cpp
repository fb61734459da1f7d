#include "lvggm/json_io.hpp"

#include <chrono>
#include <ctime>

namespace lvggm {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
    throw_data("matrix_from_json: expected " + std::to_string(rows * cols) +
               " entries");
  Eigen::MatrixXd m(rows, cols);
  int k = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j[k++].get<double>();
  return m;
}

json model_to_json(const LatentVariableModel& model) {
  json j;
  j["schema"] = 1;
  j["kind"] = "lvggm.model";
  j["p"] = model.p;
  j["h"] = model.h;
  j["observed"] = model.observed;
  j["hidden"] = model.hidden;
  j["k_full"] = matrix_to_json(model.k_full.mat());
  j["seed"] = model.seed;
  j["generator"] = model.generator;
  j["params"] = model.params;
  return j;
}

LatentVariableModel model_from_json(const json& j) {
  try {
    LatentVariableModel m;
    m.p = j.at("p").get<int>();
    m.h = j.at("h").get<int>();
    if (m.p < 1 || m.h < 0) throw_data("model json: bad dimensions");
    m.observed = j.at("observed").get<std::vector<int>>();
    m.hidden = j.at("hidden").get<std::vector<int>>();
    const int d = m.p + m.h;
    m.k_full = SymMatrix(matrix_from_json(j.at("k_full"), d, d));
    m.seed = j.value("seed", 0ULL);
    m.generator = j.value("generator", std::string("custom"));
    if (j.contains("params"))
      m.params = j.at("params").get<std::map<std::string, double>>();
    if (min_eigenvalue(m.k_full) <= 0.0)
      throw_not_pd("model json: k_full is not positive definite");
    return m;
  } catch (const json::exception& e) {
    throw_data(std::string("model json: ") + e.what());
  }
}

json estimate_to_json(const DecompositionEstimate& est) {
  json j;
  j["schema"] = 1;
  j["kind"] = "lvggm.estimate";
  j["p"] = est.s.dim();
  j["s"] = matrix_to_json(est.s.mat());
  j["l"] = matrix_to_json(est.l.mat());
  j["objective"] = est.objective;
  j["iters"] = est.iters;
  j["primal_residual"] = est.primal_residual;
  j["dual_residual"] = est.dual_residual;
  j["converged"] = est.converged;
  j["lambda"] = est.lambda;
  j["gamma"] = est.gamma;
  j["support_tol"] = est.support_tol;
  j["rank_tol"] = est.rank_tol;
  j["rank"] = estimate_rank(est);
  return j;
}

DecompositionEstimate estimate_from_json(const json& j) {
  try {
    DecompositionEstimate est;
    int p = j.at("p").get<int>();
    est.s = SymMatrix(matrix_from_json(j.at("s"), p, p));
    est.l = SymMatrix(matrix_from_json(j.at("l"), p, p));
    est.objective = j.value("objective", 0.0);
    est.iters = j.value("iters", 0);
    est.primal_residual = j.value("primal_residual", 0.0);
    est.dual_residual = j.value("dual_residual", 0.0);
    est.converged = j.value("converged", false);
    est.lambda = j.value("lambda", 0.0);
    est.gamma = j.value("gamma", 0.0);
    est.support_tol = j.value("support_tol", 1e-4);
    est.rank_tol = j.value("rank_tol", 1e-4);
    return est;
  } catch (const json::exception& e) {
    throw_data(std::string("estimate json: ") + e.what());
  }
}

json geometry_report_to_json(const GeometryReport& rep) {
  json j;
  j["xi"] = {{"lower", rep.xi_lower},
             {"upper", rep.xi_upper},
             {"ascent_lower", rep.ascent_lower},
             {"exact", false}};
  j["inc"] = {{"value", rep.inc_value}, {"exact", true}};
  j["mu"] = {{"value", rep.mu_value}, {"exact", rep.mu_exact}};
  j["chi"] = {{"value", rep.chi_value}, {"exact", false},
              {"note", "from certified mu upper bound and xi upper bound"}};
  if (rep.rho_value) j["rho"] = {{"value", *rep.rho_value}, {"exact", false}};
  j["gamma"] = rep.gamma;
  return j;
}

json diagnostics_to_json(const FisherDiagnostics& d) {
  json j;
  j["alpha_omega"] = {{"value", d.alpha_omega}, {"exact", d.alpha_omega_exact}};
  j["delta_omega"] = {{"value", d.delta_omega}, {"exact", d.delta_omega_exact}};
  j["beta_omega"] = {{"value", d.beta_omega},
                     {"exact", false},
                     {"upper_bound", d.beta_omega_upper}};
  j["alpha_t"] = {{"value", d.alpha_t},
                  {"exact", false},
                  {"side", "upper bound of the infimum"}};
  j["delta_t"] = {{"value", d.delta_t},
                  {"exact", false},
                  {"side", "lower bound of the supremum"}};
  j["beta_t"] = {{"value", d.beta_t},
                 {"exact", false},
                 {"side", "lower bound of the supremum"}};
  j["t_samples"] = d.t_samples;
  j["alpha"] = d.alpha;
  j["delta"] = d.delta;
  j["beta"] = d.beta;
  j["psi"] = d.psi;
  j["mu_used"] = d.mu_used;
  j["mu_exact"] = d.mu_exact;
  j["xi_used"] = d.xi_used;
  j["assumption_holds"] = d.assumption_holds;
  j["product_condition_holds"] = d.product_condition_holds;
  if (d.nu) j["nu"] = *d.nu;
  if (d.gamma_range) {
    j["gamma_range"] = {{"low", d.gamma_range->first},
                        {"high", d.gamma_range->second}};
  } else {
    j["gamma_range"] = nullptr;
  }
  return j;
}

json verdict_to_json(const ConsistencyVerdict& v) {
  json j;
  j["sign_pattern_match"] = v.sign_pattern_match;
  j["rank_match"] = v.rank_match;
  j["realizable"] = v.realizable;
  j["algebraically_consistent"] = v.algebraically_consistent;
  j["g_gamma_error"] = v.g_gamma_error;
  j["covariance_error_spectral"] = v.covariance_error_spectral;
  j["kl_vs_truth"] = v.kl_vs_truth;
  j["support_tol_abs"] = v.support_tol;
  j["rank_tol_abs"] = v.rank_tol;
  return j;
}

json stability_report_to_json(const StabilityReport& rep) {
  json pts = json::array();
  for (const auto& pt : rep.points) {
    std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a of the sign bytes
    for (signed char s : pt.pattern) {
      hash ^= static_cast<std::uint8_t>(s);
      hash *= 1099511628211ULL;
    }
    int nnz = 0;
    for (signed char s : pt.pattern)
      if (s != 0) ++nnz;
    pts.push_back({{"gamma", pt.gamma},
                   {"rank", pt.rank},
                   {"pattern_hash", hash},
                   {"pattern_nnz", nnz},
                   {"converged", pt.converged},
                   {"objective", pt.objective},
                   {"iters", pt.iters}});
  }
  json runs = json::array();
  for (const auto& [a, b] : rep.runs) runs.push_back({{"first", a}, {"last", b}});
  return {{"schema", 1},
          {"kind", "lvggm.sweep"},
          {"points", pts},
          {"runs", runs},
          {"recommended_index", rep.recommended_index},
          {"recommended_gamma", rep.recommended_gamma}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    ExperimentConfig c;
    if (j.value("schema", 1) != 1)
      throw_data("experiment config: unsupported schema version");
    const json& m = j.at("model");
    c.model_type = m.at("type").get<std::string>();
    c.p = m.value("p", 0);
    c.h = m.value("h", 0);
    c.rows = m.value("rows", 0);
    c.cols = m.value("cols", 0);
    c.edge_pc = m.value("edge_pc", 0.25);
    c.latent_frac = m.value("latent_frac", 0.8);
    c.latent_scale = m.value("latent_scale", -1.0);
    c.model_seed = m.value("seed", 0ULL);

    c.n_grid = j.at("n_grid").get<std::vector<std::int64_t>>();
    c.trials_per_n = j.value("trials_per_n", 50);
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      c.solver.rho_admm = s.value("rho_admm", c.solver.rho_admm);
      c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
      c.solver.tol_primal = s.value("tol_primal", c.solver.tol_primal);
      c.solver.tol_dual = s.value("tol_dual", c.solver.tol_dual);
      c.solver.support_tol = s.value("support_tol", c.solver.support_tol);
      c.solver.rank_tol = s.value("rank_tol", c.solver.rank_tol);
    }
    if (j.contains("lambda")) {
      c.lambda_rule.scale = j.at("lambda").value("scale", 1.0);
      c.lambda_rule.xi_hint = j.at("lambda").value("xi_hint", 1.0);
    }
    const json& g = j.at("gamma");
    if (g.is_number()) {
      c.gamma = g.get<double>();
    } else if (g.is_object() && g.contains("grid")) {
      c.gamma_grid = g.at("grid").get<std::vector<double>>();
    } else {
      throw_data("experiment config: gamma must be a number or {grid: [...]}");
    }
    c.master_seed = j.value("seed", 0ULL);
    if (j.contains("output")) {
      c.curve_csv_path = j.at("output").value("curve_csv", std::string());
      c.summary_json_path =
          j.at("output").value("summary_json", std::string());
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw_data(std::string("experiment config: ") + e.what());
  }
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json model = {{"type", c.model_type},     {"p", c.p},
                {"h", c.h},                 {"rows", c.rows},
                {"cols", c.cols},           {"edge_pc", c.edge_pc},
                {"latent_frac", c.latent_frac},
                {"latent_scale", c.latent_scale},
                {"seed", c.model_seed}};
  json j = {{"schema", 1},
            {"model", model},
            {"n_grid", c.n_grid},
            {"trials_per_n", c.trials_per_n},
            {"solver",
             {{"rho_admm", c.solver.rho_admm},
              {"max_iters", c.solver.max_iters},
              {"tol_primal", c.solver.tol_primal},
              {"tol_dual", c.solver.tol_dual},
              {"support_tol", c.solver.support_tol},
              {"rank_tol", c.solver.rank_tol}}},
            {"lambda",
             {{"scale", c.lambda_rule.scale},
              {"xi_hint", c.lambda_rule.xi_hint}}},
            {"seed", c.master_seed}};
  if (c.gamma_grid.empty())
    j["gamma"] = c.gamma;
  else
    j["gamma"] = {{"grid", c.gamma_grid}};
  return j;
}

json experiment_summary_json(const ExperimentConfig& config,
                             const ConsistencyCurve& curve,
                             bool include_timestamp) {
  json rows = json::array();
  for (const auto& r : curve.rows)
    rows.push_back({{"n", r.n},
                    {"p_success", r.p_success},
                    {"ci_halfwidth", r.ci_halfwidth},
                    {"mean_gerr", r.mean_gerr},
                    {"mean_coverr", r.mean_coverr},
                    {"trials", r.trials},
                    {"nonconverged", r.nonconverged}});
  json j = {{"schema", 1},
            {"kind", "lvggm.experiment"},
            {"config", experiment_config_to_json(config)},
            {"curve", rows}};
  if (include_timestamp) {
    std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
    j["timestamp"] = buf;
  }
  return j;
}

}  // namespace lvggm
