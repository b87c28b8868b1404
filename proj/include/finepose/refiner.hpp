#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "finepose/camera.hpp"
#include "finepose/mask.hpp"
#include "finepose/mesh.hpp"

namespace finepose {

/// Step schedule of the local search. The move along parameter i is
/// alpha * epsilon[i]; alpha starts at alpha0 and halves after every sweep
/// that fails to improve the objective.
struct RefinerConfig {
    /// Units per parameter, in PoseParam order (deg, deg, deg, world, px, px, px).
    std::array<double, kPoseDims> epsilon{1.0, 1.0, 1.0, 0.02, 10.0, 2.0, 2.0};
    double alpha0 = 4.0;
    double alpha_threshold = 0.125;
    int max_sweeps = 50;

    /// Throws InvalidParameterError on a violated invariant.
    void validate() const;

    /// Defaults with depth/focal units set to 2% of the initial values.
    static RefinerConfig defaults_for(const PoseParams& initial);
};

struct TrajectoryPoint {
    int sweep = 0;  // 0 is the initial pose
    double iou = 0.0;
    double alpha = 0.0;  // step scale used during this sweep
};

struct RefineResult {
    PoseParams pose;
    double iou_initial = 0.0;
    double iou_final = 0.0;
    int sweeps = 0;
    std::vector<TrajectoryPoint> trajectory;
    bool converged = false;
    /// Candidate poses considered, rejected ones included; 14 per sweep.
    std::size_t candidate_evaluations = 0;
    /// Step scale of the last completed sweep.
    double last_alpha = 0.0;
};

/// J(p) = IoU(S(p, M), s*), rendering at the reference's size.
double objective(const TriangleMesh& mesh, const PoseParams& pose, const BinaryMask& reference);

/// Iterative local greedy search maximizing objective() from `initial`.
///
/// Each sweep visits the parameters in PoseParam order; for parameter i the
/// candidates p +/- alpha * epsilon[i] are scored and p moves to the best of
/// {p, p+, p-} (ties keep p, then prefer p+). Candidates with depth <= 0,
/// focal <= 0 or |elevation| > 90 score -inf. A sweep that ends with the same
/// IoU it started with halves alpha; the search converges once
/// alpha <= alpha_threshold and gives up unconverged after max_sweeps.
///
/// Throws NoReferenceError for an empty reference and
/// DegenerateInitializationError when nothing renders at the initial pose or
/// any first-sweep candidate.
RefineResult refine(const TriangleMesh& mesh, const PoseParams& initial, const BinaryMask& reference,
                    const RefinerConfig& config);

}  // namespace finepose
