#include "finepose/json_io.hpp"

#include "finepose/error.hpp"
#include "finepose/records.hpp"

namespace finepose {

using nlohmann::json;

RefinerConfig refiner_config_from_json(const json& j, const RefinerConfig& base) {
    if (!j.is_object()) throw ParseError("refiner config must be a JSON object", 0);
    RefinerConfig cfg = base;
    try {
        if (j.contains("epsilon")) {
            const json& eps = j["epsilon"];
            if (eps.is_array()) {
                if (eps.size() != kPoseDims) throw ParseError("epsilon needs 7 entries", 0);
                for (std::size_t i = 0; i < kPoseDims; ++i) cfg.epsilon[i] = eps[i].get<double>();
            } else if (eps.is_object()) {
                for (const auto& [key, value] : eps.items()) {
                    cfg.epsilon[static_cast<std::size_t>(param_from_name(key))] = value.get<double>();
                }
            } else {
                throw ParseError("epsilon must be an array or an object", 0);
            }
        }
        cfg.alpha0 = j.value("alpha0", cfg.alpha0);
        cfg.alpha_threshold = j.value("alpha_threshold", cfg.alpha_threshold);
        cfg.max_sweeps = j.value("max_sweeps", cfg.max_sweeps);
    } catch (const json::exception& e) {
        throw ParseError(std::string("refiner config: ") + e.what(), 0);
    } catch (const InvalidParameterError& e) {
        throw ParseError(std::string("refiner config: ") + e.what(), 0);
    }
    cfg.validate();
    return cfg;
}

json refiner_config_to_json(const RefinerConfig& config) {
    return {{"epsilon", config.epsilon},
            {"alpha0", config.alpha0},
            {"alpha_threshold", config.alpha_threshold},
            {"max_sweeps", config.max_sweeps}};
}

json trajectory_to_json(const RefineResult& result) {
    json traj = json::array();
    for (const auto& t : result.trajectory) traj.push_back({{"sweep", t.sweep}, {"iou", t.iou}, {"alpha", t.alpha}});
    return traj;
}

json refine_result_to_json(const RefineResult& result) {
    return {{"pose", pose_to_json(result.pose)},
            {"iou_initial", result.iou_initial},
            {"iou_final", result.iou_final},
            {"sweeps", result.sweeps},
            {"converged", result.converged},
            {"candidate_evaluations", result.candidate_evaluations},
            {"trajectory", trajectory_to_json(result)}};
}

}  // namespace finepose
