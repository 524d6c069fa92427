#pragma once

#include <json.hpp>

#include "inplay/estimate.hpp"
#include "inplay/linreg.hpp"
#include "inplay/panel.hpp"
#include "inplay/report.hpp"
#include "inplay/simulate.hpp"

namespace inplay {

using Json = nlohmann::ordered_json;

Json to_json(const RegressionFit& fit);
Json to_json(const FitResult& fit);
Json to_json(const FilterCounts& counts);
Json to_json(const SimConfig& config);
Json to_json(const SimTruth& truth);

/// Inverse of to_json for fit records; throws DataError on malformed input.
RegressionFit regression_from_json(const Json& j);
FitResult fit_result_from_json(const Json& j);

/// Accepts either fit record type (distinguished by its "kind" field).
ModelSummary model_summary_from_json(const Json& j);

}  // namespace inplay
