#pragma once

// JSON model and scenario documents.
//
// Model:
//   {
//     "system":        {"A": [[...]], "B": [[...]], "d": [...]},        d optional (zero)
//     "cost":          {"Q": [[...]], "R": [[...]], "P": [[...]],
//                       "x_star": [...], "x_ref": [...], "T": 1.0,
//                       "stage_offset": 0.0},                            Q and T required
//     "constraints":   {"G_x": [[...]], "G_u": [[...]], "g0": [...]},   optional (none)
//     "basis":         {"N": 5},
//     "initial_state": [...]
//   }
// Matrices are arrays of rows. Omitted R, P default to zero, x_star to
// zero, x_ref to x_star.

#include <json.hpp>

#include "flatpoly/pipeline.hpp"
#include "flatpoly/pmsm.hpp"

namespace flatpoly {

using ModelConfig = TrajectoryProblem;

/// Throws ConfigError on missing fields or inconsistent shapes.
ModelConfig parse_model(const nlohmann::json& doc);
nlohmann::json model_to_json(const ModelConfig& model);

/// Every field optional; omitted fields keep the Scenario defaults.
pmsm::Scenario parse_scenario(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const pmsm::Scenario& scenario);

Matrix matrix_from_json(const nlohmann::json& j, const char* name);
Vector vector_from_json(const nlohmann::json& j, const char* name);
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const Vector& v);

}  // namespace flatpoly
