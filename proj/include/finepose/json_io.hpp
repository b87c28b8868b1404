#pragma once

#include <json.hpp>

#include "finepose/camera.hpp"
#include "finepose/refiner.hpp"

namespace finepose {

/// Reads a RefinerConfig. Field names mirror the struct; `epsilon` is either
/// an array of seven values or an object keyed by pose field name. Missing
/// fields keep the values of `base`.
RefinerConfig refiner_config_from_json(const nlohmann::json& j, const RefinerConfig& base);
nlohmann::json refiner_config_to_json(const RefinerConfig& config);

nlohmann::json refine_result_to_json(const RefineResult& result);

/// Trajectory sidecar written next to refined records.
nlohmann::json trajectory_to_json(const RefineResult& result);

}  // namespace finepose
