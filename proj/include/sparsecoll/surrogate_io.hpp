#pragma once

#include <string>

#include <json.hpp>

#include "sparsecoll/sparse_grid.hpp"

namespace sparsecoll {

/// JSON document holding everything needed to evaluate the surrogate again:
/// per-dimension rule family and distribution, the index set, and per block
/// the node indices, model values and surpluses.
nlohmann::json surrogate_to_json(const SparseSurrogate& surrogate);

/// Inverse of surrogate_to_json. Rules are rebuilt from their distributions;
/// throws InvalidArgument if the stored node indices do not match them.
SparseSurrogate surrogate_from_json(const nlohmann::json& doc);

void save_surrogate(const SparseSurrogate& surrogate, const std::string& path);
SparseSurrogate load_surrogate(const std::string& path);

nlohmann::json distribution_to_json(const BoundedDistribution& dist);
BoundedDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace sparsecoll
