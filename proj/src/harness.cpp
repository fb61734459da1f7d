#include "lvggm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace lvggm {

void ExperimentConfig::validate() const {
  if (model_type != "cycle" && model_type != "grid")
    throw_invalid("ExperimentConfig: model_type must be cycle or grid");
  if (n_grid.empty()) throw_invalid("ExperimentConfig: empty n grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw_invalid("ExperimentConfig: n must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw_invalid("ExperimentConfig: n grid must be ascending");
  }
  if (trials_per_n < 1) throw_invalid("ExperimentConfig: trials_per_n >= 1");
  if (gamma_grid.empty() && gamma <= 0.0)
    throw_invalid("ExperimentConfig: gamma must be positive");
}

LatentVariableModel build_experiment_model(const ExperimentConfig& config) {
  if (config.model_type == "cycle")
    return build_cycle_model(config.p, config.h, config.edge_pc,
                             config.latent_frac, config.latent_scale,
                             config.model_seed);
  return build_grid_model(config.rows, config.cols, config.h, config.edge_pc,
                          config.latent_frac, config.latent_scale,
                          config.model_seed);
}

int worker_count() {
  if (const char* env = std::getenv("LVGGM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

ConsistencyCurve run_consistency_experiment(const ExperimentConfig& config) {
  config.validate();
  LatentVariableModel model = build_experiment_model(config);
  MarginalDecomposition truth = marginalize(model);

  ConsistencyCurve curve;
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const std::int64_t n = config.n_grid[ni];
    const int trials = config.trials_per_n;
    std::vector<int> success(trials, 0), conv(trials, 0);
    std::vector<double> gerr(trials, 0.0), coverr(trials, 0.0);

    parallel_for(trials, [&](int t) {
      std::uint64_t seed = derive_seed(config.master_seed, ni, t);
      SampleCovariance cov = sample_covariance(model, n, seed);
      SolverConfig sc = config.solver;
      sc.lambda = lambda_schedule(model.p, n, config.lambda_rule.xi_hint,
                                  config.lambda_rule.scale);
      double gamma = config.gamma;
      if (!config.gamma_grid.empty()) {
        StabilityReport rep =
            gamma_sweep(cov, sc.lambda, config.gamma_grid, sc);
        gamma = rep.recommended_gamma;
      }
      sc.gamma = gamma;
      DecompositionEstimate est = fit(cov, sc);
      ConsistencyVerdict v = algebraic_consistency(
          est, truth, sc.support_tol, sc.rank_tol, gamma);
      conv[t] = est.converged ? 1 : 0;
      success[t] = (est.converged && v.algebraically_consistent) ? 1 : 0;
      gerr[t] = v.g_gamma_error;
      coverr[t] = v.covariance_error_spectral;
    });

    CurveRow row;
    row.n = n;
    row.trials = trials;
    int ok = 0, nc = 0;
    double sg = 0.0, sc2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      ok += success[t];
      nc += 1 - conv[t];
      sg += gerr[t];
      sc2 += coverr[t];
    }
    row.p_success = static_cast<double>(ok) / trials;
    row.nonconverged = nc;
    row.mean_gerr = sg / trials;
    row.mean_coverr = sc2 / trials;
    row.ci_halfwidth =
        1.96 * std::sqrt(row.p_success * (1.0 - row.p_success) / trials);
    curve.rows.push_back(row);
  }
  return curve;
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::string cur;
  std::vector<std::string> row;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    char ch = i < text.size() ? text[i] : '\n';
    if (ch == ',') {
      row.push_back(cur);
      cur.clear();
    } else if (ch == '\n') {
      if (!cur.empty() || !row.empty()) {
        row.push_back(cur);
        cur.clear();
        rows.push_back(row);
        row.clear();
      }
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  return rows;
}

double parse_number(const std::string& cell, std::size_t row,
                    std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw_data("CSV: non-numeric cell at row " + std::to_string(row + 1) +
               ", column " + std::to_string(col + 1));
  return value;
}

Eigen::MatrixXd numeric_table(const std::string& text) {
  auto rows = parse_csv(text);
  if (rows.size() < 2)
    throw_data("CSV: need a header row and at least one data row");
  const std::size_t cols = rows[0].size();
  Eigen::MatrixXd table(rows.size() - 1, cols);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw_data("CSV: ragged row " + std::to_string(r + 1) + " has " +
                 std::to_string(rows[r].size()) + " cells, expected " +
                 std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      table(r - 1, c) = parse_number(rows[r][c], r, c);
  }
  return table;
}

}  // namespace

SymMatrix dense_matrix_from_csv_text(const std::string& text) {
  Eigen::MatrixXd table = numeric_table(text);
  if (table.rows() != table.cols())
    throw_data("CSV: expected a square matrix, got " +
               std::to_string(table.rows()) + "x" +
               std::to_string(table.cols()));
  double asym = (table - table.transpose().eval()).cwiseAbs().maxCoeff();
  if (asym > 1e-8)
    throw_data("CSV: matrix asymmetric by " + std::to_string(asym) +
               " (tolerance 1e-8)");
  return SymMatrix(table);
}

IngestResult ingest_csv_text(const std::string& text, const std::string& mode,
                             std::int64_t n_override) {
  IngestResult out;
  if (mode == "covariance") {
    SymMatrix sigma = dense_matrix_from_csv_text(text);
    if (n_override < 1)
      throw_data("covariance mode requires the sample count n");
    out.cov = SampleCovariance{sigma.dim(), n_override, sigma};
    return out;
  }
  if (mode != "samples") throw_invalid("ingest mode must be samples or covariance");

  Eigen::MatrixXd x = numeric_table(text);
  const std::int64_t n = x.rows();
  const int p = static_cast<int>(x.cols());
  if (n < 1) throw_data("samples mode: no data rows");
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  for (int c = 0; c < p; ++c) {
    if (centered.col(c).cwiseAbs().maxCoeff() == 0.0)
      out.warnings.push_back("column " + std::to_string(c + 1) +
                             " has zero variance");
  }
  Eigen::MatrixXd sigma =
      centered.transpose() * centered / static_cast<double>(n);
  out.cov = SampleCovariance{p, n, SymMatrix(sigma)};
  return out;
}

IngestResult ingest_csv(const std::string& path, const std::string& mode,
                        std::int64_t n_override) {
  return ingest_csv_text(read_file(path), mode, n_override);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string covariance_csv(const SampleCovariance& cov) {
  std::ostringstream os;
  for (int j = 0; j < cov.p; ++j) os << (j ? "," : "") << 'v' << j;
  os << '\n';
  for (int i = 0; i < cov.p; ++i) {
    for (int j = 0; j < cov.p; ++j) os << (j ? "," : "") << fmt(cov.sigma(i, j));
    os << '\n';
  }
  return os.str();
}

std::string curve_csv(const ConsistencyCurve& curve) {
  std::ostringstream os;
  os << "n,p_success,ci_halfwidth,mean_gerr,mean_coverr\n";
  for (const auto& r : curve.rows)
    os << r.n << ',' << fmt(r.p_success) << ',' << fmt(r.ci_halfwidth) << ','
       << fmt(r.mean_gerr) << ',' << fmt(r.mean_coverr) << '\n';
  return os.str();
}

std::string sweep_csv(const StabilityReport& report) {
  std::ostringstream os;
  os << "gamma,rank,edges,converged,objective,iters\n";
  for (const auto& pt : report.points) {
    // pattern covers the upper triangle including the diagonal
    auto pdim = static_cast<std::size_t>(
        std::lround((std::sqrt(8.0 * pt.pattern.size() + 1.0) - 1.0) / 2.0));
    int edges = 0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < pdim; ++i)
      for (std::size_t j = i; j < pdim; ++j, ++idx)
        if (i != j && pt.pattern[idx] != 0) ++edges;
    os << fmt(pt.gamma) << ',' << pt.rank << ',' << edges << ','
       << (pt.converged ? 1 : 0) << ',' << fmt(pt.objective) << ','
       << pt.iters << '\n';
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}


}  // namespace lvggm
