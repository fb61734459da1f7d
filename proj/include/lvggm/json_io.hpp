#pragma once

#include <json.hpp>

#include "lvggm/consistency.hpp"
#include "lvggm/fisher.hpp"
#include "lvggm/geometry.hpp"
#include "lvggm/harness.hpp"
#include "lvggm/lvmodel.hpp"
#include "lvggm/solver.hpp"

namespace lvggm {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);  // row-major flat
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols);

nlohmann::json model_to_json(const LatentVariableModel& model);
LatentVariableModel model_from_json(const nlohmann::json& j);

nlohmann::json estimate_to_json(const DecompositionEstimate& est);
DecompositionEstimate estimate_from_json(const nlohmann::json& j);

nlohmann::json geometry_report_to_json(const GeometryReport& rep);
nlohmann::json diagnostics_to_json(const FisherDiagnostics& d);
nlohmann::json verdict_to_json(const ConsistencyVerdict& v);
nlohmann::json stability_report_to_json(const StabilityReport& rep);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// Summary document for an experiment run; the timestamp field is the one
/// part excluded from byte-identity comparisons.
nlohmann::json experiment_summary_json(const ExperimentConfig& config,
                                       const ConsistencyCurve& curve,
                                       bool include_timestamp = true);

}  // namespace lvggm
