#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "finepose/mask.hpp"

namespace finepose {

/// Instance masks below this IoU against the initial render are presumed to
/// belong to another object.
inline constexpr double kInstanceIouThreshold = 0.25;

struct InstanceMask {
    BinaryMask mask;
    double confidence = 1.0;  // in [0, 1]
};

/// Candidate segmentation references for one image. All masks share one size.
struct ReferenceSet {
    std::optional<BinaryMask> semantic_mask;
    std::vector<InstanceMask> instance_masks;

    bool empty() const { return !semantic_mask && instance_masks.empty(); }
    /// Throws DimensionMismatchError when masks differ in size or a
    /// confidence leaves [0, 1].
    void validate() const;
};

/// |A n B| / |A u B|, 0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

/// Picks s*: the instance mask overlapping `initial_render` best when that
/// IoU reaches kInstanceIouThreshold, else the semantic mask, else the best
/// instance. Ties go to the larger mask, then to the earlier one. Empty
/// masks are never returned; NoReferenceError when no nonempty mask exists.
const BinaryMask& select_reference(const ReferenceSet& refs, const BinaryMask& initial_render,
                                   double instance_threshold = kInstanceIouThreshold);

/// Loads the instance sidecar:
///   {"semantic": "sem.png",                       (optional)
///    "instances": [{"file": "a.png", "confidence": 0.93}, ...]}
/// Relative file names resolve against the sidecar's directory.
ReferenceSet load_reference_set(const std::filesystem::path& sidecar);

}  // namespace finepose
