// lvggm command-line tool. Talks to the lvggm shared library exclusively
// through its C interface.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lvggm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConvergence = 3;

struct StringOut {
  char* value = nullptr;
  ~StringOut() { lvggm_string_free(value); }
  std::string str() const { return value ? value : ""; }
};

int fail(lvggm_status st, const std::string& context) {
  std::cerr << "error: " << context << ": " << lvggm_status_name(st) << " ("
            << lvggm_last_error() << ")\n";
  return kExitData;
}

bool write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

std::string read_text(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return "";
  }
  std::ostringstream os;
  os << in.rdbuf();
  ok = true;
  return os.str();
}

struct CovArgs {
  std::string input;
  std::string mode = "samples";
  std::int64_t n = -1;
};

void add_cov_flags(CLI::App* cmd, CovArgs& args) {
  cmd->add_option("--input", args.input, "input CSV file")->required();
  cmd->add_option("--mode", args.mode, "samples | covariance")
      ->check(CLI::IsMember({"samples", "covariance"}));
  cmd->add_option("--n", args.n,
                  "sample count (required with --mode covariance)");
}

lvggm_status load_cov(const CovArgs& args, lvggm_cov** out) {
  StringOut warnings;
  lvggm_status st = lvggm_cov_from_csv(args.input.c_str(), args.mode.c_str(),
                                       args.n, &warnings.value, out);
  if (st == LVGGM_OK && warnings.value != nullptr && warnings.value[0] != 0)
    std::cerr << "warning:\n" << warnings.value;
  return st;
}

struct SolverArgs {
  double lambda = -1.0;
  double lambda_scale = 1.0;
  double xi_hint = 1.0;
  double gamma = 0.3;
  double rho_admm = 1.0;
  int max_iters = 4000;
  double tol = 1e-7;
  double support_tol = 1e-4;
  double rank_tol = 1e-4;
};

void add_solver_flags(CLI::App* cmd, SolverArgs& args) {
  cmd->add_option("--lambda", args.lambda,
                  "regularization parameter (overrides the schedule)");
  cmd->add_option("--lambda-scale", args.lambda_scale,
                  "schedule scale: lambda = scale/xi_hint * sqrt(p/n)");
  cmd->add_option("--xi-hint", args.xi_hint, "schedule xi hint in (0,1]");
  cmd->add_option("--gamma", args.gamma, "sparsity/rank tradeoff");
  cmd->add_option("--rho-admm", args.rho_admm, "ADMM penalty parameter");
  cmd->add_option("--max-iters", args.max_iters, "ADMM iteration cap");
  cmd->add_option("--tol", args.tol, "primal/dual residual tolerance");
  cmd->add_option("--support-tol", args.support_tol,
                  "relative sign-pattern threshold");
  cmd->add_option("--rank-tol", args.rank_tol, "relative rank threshold");
}

lvggm_solver_options make_options(const SolverArgs& args, int p,
                                  std::int64_t n) {
  lvggm_solver_options opt;
  lvggm_solver_options_init(&opt);
  opt.lambda = args.lambda > 0.0
                   ? args.lambda
                   : lvggm_lambda_schedule(p, n, args.xi_hint,
                                           args.lambda_scale);
  opt.gamma = args.gamma;
  opt.rho_admm = args.rho_admm;
  opt.max_iters = args.max_iters;
  opt.tol_primal = args.tol;
  opt.tol_dual = args.tol;
  opt.support_tol = args.support_tol;
  opt.rank_tol = args.rank_tol;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent-variable Gaussian graphical model selection"};
  app.set_version_flag("--version", lvggm_version());
  app.require_subcommand(1);

  // ---- make-model ----
  auto* mk = app.add_subcommand("make-model",
                                "generate a synthetic ground-truth model");
  std::string mk_type = "cycle", mk_out = "model.json";
  int mk_p = 36, mk_h = 2, mk_rows = 6, mk_cols = 6;
  double mk_pc = 0.25, mk_frac = 0.8, mk_scale = -1.0;
  std::uint64_t mk_seed = 7;
  mk->add_option("--type", mk_type, "cycle | grid")
      ->check(CLI::IsMember({"cycle", "grid"}));
  mk->add_option("--p", mk_p, "observed variables (cycle)");
  mk->add_option("--rows", mk_rows, "grid rows");
  mk->add_option("--cols", mk_cols, "grid cols");
  mk->add_option("--hidden", mk_h, "hidden variables");
  mk->add_option("--edge-pc", mk_pc, "edge partial correlation");
  mk->add_option("--latent-frac", mk_frac, "latent fan-out fraction");
  mk->add_option("--latent-scale", mk_scale,
                 "latent coefficient scale (<= 0: auto)");
  mk->add_option("--seed", mk_seed, "generator seed");
  mk->add_option("--out", mk_out, "output model JSON path");

  // ---- fit ----
  auto* ft = app.add_subcommand("fit", "fit a sparse + low-rank model");
  CovArgs ft_cov;
  SolverArgs ft_solver;
  std::string ft_truth, ft_prefix = "fit";
  add_cov_flags(ft, ft_cov);
  add_solver_flags(ft, ft_solver);
  ft->add_option("--truth", ft_truth,
                 "ground-truth model JSON for a consistency verdict");
  ft->add_option("--out-prefix", ft_prefix,
                 "output prefix (.estimate.json, .edges.csv, .verdict.json)");

  // ---- sweep ----
  auto* sw = app.add_subcommand("sweep", "gamma stability sweep");
  CovArgs sw_cov;
  SolverArgs sw_solver;
  std::vector<double> sw_grid;
  std::string sw_prefix = "sweep";
  add_cov_flags(sw, sw_cov);
  add_solver_flags(sw, sw_solver);
  sw->add_option("--gamma-grid", sw_grid,
                 "ascending gamma grid (comma separated)")
      ->delimiter(',')
      ->required();
  sw->add_option("--out-prefix", sw_prefix,
                 "output prefix (.sweep.json, .sweep.csv)");

  // ---- diagnose ----
  auto* dg = app.add_subcommand(
      "diagnose", "geometry + Fisher identifiability diagnostics");
  std::string dg_model, dg_s, dg_l, dg_out = "diagnostics.json";
  double dg_gamma = -1.0;
  int dg_samples = 16;
  std::uint64_t dg_seed = 1;
  dg->add_option("--model", dg_model, "ground-truth model JSON");
  dg->add_option("--s-matrix", dg_s, "sparse part CSV (with --l-matrix)");
  dg->add_option("--l-matrix", dg_l, "low-rank part CSV (with --s-matrix)");
  dg->add_option("--gamma", dg_gamma, "tradeoff (<= 0: chi-optimal)");
  dg->add_option("--nearby-samples", dg_samples,
                 "tangent spaces sampled near the nominal one");
  dg->add_option("--seed", dg_seed, "sampling seed");
  dg->add_option("--out", dg_out, "output JSON path");

  // ---- experiment ----
  auto* ex = app.add_subcommand("experiment",
                                "consistency curve over an n grid");
  std::string ex_config, ex_csv, ex_json;
  ex->add_option("--config", ex_config, "experiment config JSON")->required();
  ex->add_option("--out-csv", ex_csv, "curve CSV path (overrides config)");
  ex->add_option("--out-json", ex_json, "summary JSON path (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (mk->parsed()) {
    lvggm_model* model = nullptr;
    lvggm_status st =
        mk_type == "cycle"
            ? lvggm_model_cycle(mk_p, mk_h, mk_pc, mk_frac, mk_scale, mk_seed,
                                &model)
            : lvggm_model_grid(mk_rows, mk_cols, mk_h, mk_pc, mk_frac,
                               mk_scale, mk_seed, &model);
    if (st != LVGGM_OK) return fail(st, "make-model");
    StringOut json;
    st = lvggm_model_to_json(model, &json.value);
    lvggm_model_free(model);
    if (st != LVGGM_OK) return fail(st, "serialize model");
    if (!write_text(mk_out, json.str())) return kExitData;
    std::cout << "wrote " << mk_out << "\n";
    return kExitOk;
  }

  if (ft->parsed()) {
    lvggm_cov* cov = nullptr;
    lvggm_status st = load_cov(ft_cov, &cov);
    if (st != LVGGM_OK) return fail(st, "load covariance");
    lvggm_solver_options opt =
        make_options(ft_solver, lvggm_cov_dim(cov), lvggm_cov_samples(cov));
    lvggm_estimate* est = nullptr;
    st = lvggm_fit(cov, &opt, &est);
    if (st != LVGGM_OK) {
      lvggm_cov_free(cov);
      return fail(st, "fit");
    }
    StringOut est_json, edges;
    if ((st = lvggm_estimate_to_json(est, &est_json.value)) != LVGGM_OK ||
        (st = lvggm_estimate_edges_csv(est, &edges.value)) != LVGGM_OK) {
      lvggm_estimate_free(est);
      lvggm_cov_free(cov);
      return fail(st, "serialize estimate");
    }
    bool ok = write_text(ft_prefix + ".estimate.json", est_json.str()) &&
              write_text(ft_prefix + ".edges.csv", edges.str());
    if (ok && !ft_truth.empty()) {
      bool read_ok = true;
      std::string truth_json = read_text(ft_truth, read_ok);
      lvggm_model* model = nullptr;
      if (!read_ok) {
        std::cerr << "error: cannot read " << ft_truth << "\n";
        ok = false;
      } else if ((st = lvggm_model_from_json(truth_json.c_str(), &model)) !=
                 LVGGM_OK) {
        lvggm_estimate_free(est);
        lvggm_cov_free(cov);
        return fail(st, "parse truth model");
      } else {
        StringOut verdict;
        st = lvggm_verdict(est, model, &verdict.value);
        lvggm_model_free(model);
        if (st != LVGGM_OK) {
          lvggm_estimate_free(est);
          lvggm_cov_free(cov);
          return fail(st, "verdict");
        }
        ok = ok && write_text(ft_prefix + ".verdict.json", verdict.str());
      }
    }
    bool converged = lvggm_estimate_converged(est) != 0;
    if (!converged)
      std::cerr << "warning: solver did not converge within the iteration "
                   "cap\n";
    lvggm_estimate_free(est);
    lvggm_cov_free(cov);
    if (!ok) return kExitData;
    return converged ? kExitOk : kExitNoConvergence;
  }

  if (sw->parsed()) {
    lvggm_cov* cov = nullptr;
    lvggm_status st = load_cov(sw_cov, &cov);
    if (st != LVGGM_OK) return fail(st, "load covariance");
    lvggm_solver_options opt =
        make_options(sw_solver, lvggm_cov_dim(cov), lvggm_cov_samples(cov));
    StringOut report, curve;
    st = lvggm_sweep(cov, &opt, sw_grid.data(),
                     static_cast<int>(sw_grid.size()), &report.value,
                     &curve.value);
    lvggm_cov_free(cov);
    if (st != LVGGM_OK) return fail(st, "sweep");
    if (!write_text(sw_prefix + ".sweep.json", report.str()) ||
        !write_text(sw_prefix + ".sweep.csv", curve.str()))
      return kExitData;
    std::cout << "wrote " << sw_prefix << ".sweep.json and " << sw_prefix
              << ".sweep.csv\n";
    return kExitOk;
  }

  if (dg->parsed()) {
    StringOut json;
    lvggm_status st = LVGGM_OK;
    if (!dg_model.empty()) {
      bool read_ok = true;
      std::string text = read_text(dg_model, read_ok);
      if (!read_ok) {
        std::cerr << "error: cannot read " << dg_model << "\n";
        return kExitData;
      }
      lvggm_model* model = nullptr;
      if ((st = lvggm_model_from_json(text.c_str(), &model)) != LVGGM_OK)
        return fail(st, "parse model");
      st = lvggm_diagnose_model(model, dg_gamma, dg_samples, dg_seed,
                                &json.value);
      lvggm_model_free(model);
    } else if (!dg_s.empty() && !dg_l.empty()) {
      int ps = 0, pl = 0;
      double* sdata = nullptr;
      double* ldata = nullptr;
      if ((st = lvggm_dense_from_csv(dg_s.c_str(), &ps, &sdata)) != LVGGM_OK)
        return fail(st, "read --s-matrix");
      if ((st = lvggm_dense_from_csv(dg_l.c_str(), &pl, &ldata)) != LVGGM_OK) {
        lvggm_buffer_free(sdata);
        return fail(st, "read --l-matrix");
      }
      if (ps != pl) {
        lvggm_buffer_free(sdata);
        lvggm_buffer_free(ldata);
        std::cerr << "error: S and L dimensions differ\n";
        return kExitData;
      }
      st = lvggm_diagnose_pair(ps, sdata, ldata, dg_gamma, dg_samples,
                               dg_seed, &json.value);
      lvggm_buffer_free(sdata);
      lvggm_buffer_free(ldata);
    } else {
      std::cerr << "error: diagnose needs --model or both --s-matrix and "
                   "--l-matrix\n";
      return kExitUsage;
    }
    if (st != LVGGM_OK) return fail(st, "diagnose");
    if (!write_text(dg_out, json.str())) return kExitData;
    std::cout << "wrote " << dg_out << "\n";
    return kExitOk;
  }

  if (ex->parsed()) {
    bool read_ok = true;
    std::string config = read_text(ex_config, read_ok);
    if (!read_ok) {
      std::cerr << "error: cannot read " << ex_config << "\n";
      return kExitData;
    }
    StringOut curve, summary;
    lvggm_status st =
        lvggm_experiment_run(config.c_str(), &curve.value, &summary.value);
    if (st != LVGGM_OK) return fail(st, "experiment");
    // output paths: flags first, then config hints, then defaults
    std::string csv_path = ex_csv, json_path = ex_json;
    if (csv_path.empty() || json_path.empty()) {
      auto parsed = nlohmann::json::parse(config, nullptr, false);
      if (parsed.is_object() && parsed.contains("output")) {
        if (csv_path.empty())
          csv_path = parsed["output"].value("curve_csv", "");
        if (json_path.empty())
          json_path = parsed["output"].value("summary_json", "");
      }
    }
    if (csv_path.empty()) csv_path = "experiment.curve.csv";
    if (json_path.empty()) json_path = "experiment.summary.json";
    if (!write_text(csv_path, curve.str()) ||
        !write_text(json_path, summary.str()))
      return kExitData;
    std::cout << "wrote " << csv_path << " and " << json_path << "\n";
    return kExitOk;
  }

  return kExitUsage;
}
