#include "finepose/segmentation.hpp"

#include <fstream>

#include <json.hpp>

#include "finepose/error.hpp"
#include "finepose/image_io.hpp"

namespace finepose {

void ReferenceSet::validate() const {
    const BinaryMask* first = semantic_mask ? &*semantic_mask : nullptr;
    for (const auto& inst : instance_masks) {
        if (!(inst.confidence >= 0.0 && inst.confidence <= 1.0)) {
            throw InvalidParameterError("instance confidence must lie in [0, 1]");
        }
        if (!first) first = &inst.mask;
        if (!first->same_shape(inst.mask)) {
            throw DimensionMismatchError("reference masks differ in size");
        }
    }
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) {
        throw DimensionMismatchError("IoU of " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                     " and " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                                     " masks");
    }
    const auto pa = a.bits();
    const auto pb = b.bits();
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        inter += pa[i] & pb[i];
        uni += pa[i] | pb[i];
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

const BinaryMask& select_reference(const ReferenceSet& refs, const BinaryMask& initial_render,
                                   double instance_threshold) {
    if (refs.empty()) throw NoReferenceError("reference set is empty");
    refs.validate();

    const BinaryMask* best = nullptr;
    double best_iou = -1.0;
    std::size_t best_area = 0;
    for (const auto& inst : refs.instance_masks) {
        const std::size_t area = mask_area(inst.mask);
        if (area == 0) continue;
        const double v = iou(inst.mask, initial_render);
        if (v > best_iou || (v == best_iou && area > best_area)) {
            best = &inst.mask;
            best_iou = v;
            best_area = area;
        }
    }
    if (best && best_iou >= instance_threshold) return *best;
    if (refs.semantic_mask && mask_area(*refs.semantic_mask) > 0) {
        if (!refs.semantic_mask->same_shape(initial_render)) {
            throw DimensionMismatchError("semantic mask and initial render differ in size");
        }
        return *refs.semantic_mask;
    }
    if (best) return *best;
    throw NoReferenceError("every reference mask is empty");
}

ReferenceSet load_reference_set(const std::filesystem::path& sidecar) {
    std::ifstream in(sidecar);
    if (!in) throw IoError("cannot open reference sidecar '" + sidecar.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(sidecar.string() + ": " + e.what(), 0);
    }
    const auto dir = sidecar.parent_path();
    auto resolve = [&](const std::string& name) {
        const std::filesystem::path p(name);
        return p.is_absolute() ? p : dir / p;
    };

    ReferenceSet refs;
    try {
        if (doc.contains("semantic") && !doc["semantic"].is_null()) {
            refs.semantic_mask = read_mask_png(resolve(doc["semantic"].get<std::string>()));
        }
        for (const auto& item : doc.value("instances", nlohmann::json::array())) {
            refs.instance_masks.push_back(
                {read_mask_png(resolve(item.at("file").get<std::string>())), item.value("confidence", 1.0)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(sidecar.string() + ": " + e.what(), 0);
    }
    refs.validate();
    return refs;
}

}  // namespace finepose
