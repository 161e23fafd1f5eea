#pragma once

#include "procnet/model.hpp"

#include <nlohmann/json.hpp>

namespace procnet {

/// Milliseconds to whole steps, rounding half up.
Step ms_to_steps(double ms, int period_ms);

/// Scalars expand to value * I(n); nested arrays are read row by row.
Matrix matrix_from_json(const nlohmann::json& j, int n);
nlohmann::json matrix_to_json(const Matrix& m);

/// Reads the `system`, `classes`, `episode`, `fusion` and `power` blocks.
/// Structural problems throw std::invalid_argument; semantic checks are left
/// to validate_scenario so callers can report every issue at once.
Scenario scenario_from_json(const nlohmann::json& j);

/// Canonical form: explicit matrices, delays in milliseconds.
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace procnet
