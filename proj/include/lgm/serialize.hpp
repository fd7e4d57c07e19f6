#pragma once

#include <string>

#include "json.hpp"
#include "lgm/inference.hpp"
#include "lgm/qmod.hpp"
#include "lgm/standardize.hpp"
#include "lgm/study.hpp"

namespace lgm {

using Json = nlohmann::json;

Json to_json(const CovariateDist& dist);
CovariateDist covariate_from_json(const Json& j);

/// Schema: {"family", "K", "kind", "dist": {"type", "params"},
///          "adjacency"?: row-major matrix, "interval"?: [lo, hi], "order"?: penalty}
Json to_json(const EffectSpec& e);
EffectSpec effect_from_json(const Json& j);

Json to_json(const StandardizedEffect& se);

Json to_json(const QModResult& r);

Json to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const Json& j);

Json to_json(const FitSummary& s);

Json matrix_to_json(const Matrix& m);  // row-major nested arrays

/// Adjacency helpers: row-major matrix in JSON, or a CSV edge list with
/// 1-based "i,j" rows (an optional third weight column is accepted).
Matrix adjacency_from_edge_csv(const std::string& text, int n_nodes);

}  // namespace lgm
