#include "finepose/refiner.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "finepose/error.hpp"
#include "finepose/rasterizer.hpp"
#include "finepose/segmentation.hpp"

namespace finepose {

void RefinerConfig::validate() const {
    for (std::size_t i = 0; i < kPoseDims; ++i) {
        if (!(epsilon[i] > 0.0) || !std::isfinite(epsilon[i])) {
            throw InvalidParameterError(std::string("epsilon for ") + param_name(static_cast<PoseParam>(i)) +
                                        " must be positive");
        }
    }
    if (!(alpha_threshold > 0.0 && alpha_threshold < alpha0) || !std::isfinite(alpha0)) {
        throw InvalidParameterError("need 0 < alpha_threshold < alpha0");
    }
    if (max_sweeps < 1) throw InvalidParameterError("max_sweeps must be >= 1");
}

RefinerConfig RefinerConfig::defaults_for(const PoseParams& initial) {
    RefinerConfig cfg;
    cfg.epsilon[static_cast<int>(PoseParam::Depth)] = 0.02 * initial.depth;
    cfg.epsilon[static_cast<int>(PoseParam::Focal)] = 0.02 * initial.focal;
    return cfg;
}

double objective(const TriangleMesh& mesh, const PoseParams& pose, const BinaryMask& reference) {
    return iou(render_silhouette(mesh, pose, reference.width(), reference.height()), reference);
}

namespace {

struct Scored {
    double iou = -std::numeric_limits<double>::infinity();
    bool rendered_nonempty = false;
};

}  // namespace

RefineResult refine(const TriangleMesh& mesh, const PoseParams& initial, const BinaryMask& reference,
                    const RefinerConfig& config) {
    config.validate();
    validate(initial);
    if (mask_area(reference) == 0) throw NoReferenceError("segmentation reference is empty");

    const int w = reference.width();
    const int h = reference.height();
    auto score = [&](const PoseParams& p) {
        Scored s;
        if (!is_valid(p)) return s;
        const BinaryMask m = render_silhouette(mesh, p, w, h);
        s.rendered_nonempty = mask_area(m) > 0;
        s.iou = iou(m, reference);
        return s;
    };

    RefineResult result;
    PoseParams p = normalize_pose(initial);
    const Scored start = score(p);
    double current = start.iou;
    bool seen_nonempty = start.rendered_nonempty;
    result.iou_initial = current;
    result.trajectory.push_back({0, current, 0.0});

    double alpha = config.alpha0;
    while (result.sweeps < config.max_sweeps) {
        const double iou_last = current;
        for (std::size_t i = 0; i < kPoseDims; ++i) {
            const auto param = static_cast<PoseParam>(i);
            const double step = alpha * config.epsilon[i];
            PoseParams plus = p;
            plus[param] += step;
            PoseParams minus = p;
            minus[param] -= step;
            const Scored sp = score(plus);
            const Scored sm = score(minus);
            result.candidate_evaluations += 2;
            seen_nonempty = seen_nonempty || sp.rendered_nonempty || sm.rendered_nonempty;

            if (sp.iou > current && sp.iou >= sm.iou) {
                p = normalize_pose(plus);
                current = sp.iou;
            } else if (sm.iou > current) {
                p = normalize_pose(minus);
                current = sm.iou;
            }
        }
        ++result.sweeps;
        if (result.sweeps == 1 && !seen_nonempty) {
            throw DegenerateInitializationError(
                "mesh renders empty at the initial pose and at every first-sweep candidate");
        }
        result.trajectory.push_back({result.sweeps, current, alpha});
        result.last_alpha = alpha;
        if (current == iou_last) {
            alpha /= 2.0;
            if (alpha <= config.alpha_threshold) {
                result.converged = true;
                break;
            }
        }
    }

    result.pose = p;
    result.iou_final = current;
    return result;
}

}  // namespace finepose
