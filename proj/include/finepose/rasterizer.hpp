#pragma once

#include "finepose/camera.hpp"
#include "finepose/mask.hpp"
#include "finepose/mesh.hpp"

namespace finepose {

/// Camera-space depth below which geometry is clipped away.
inline constexpr double kNearPlane = 1e-4;

/// Binary silhouette S(p, M) of `mesh` seen under `pose`.
///
/// Pixel (x, y) is sampled at its center (x + 0.5, y + 0.5). A center on a
/// triangle edge belongs to the triangle only for top or left edges, so two
/// triangles sharing an edge never both claim (or both miss) a center on it.
/// Both windings are filled, there is no depth test, and zero-area triangles
/// contribute nothing. Triangles crossing z_c = kNearPlane are clipped in
/// camera space before projection.
BinaryMask render_silhouette(const TriangleMesh& mesh, const PoseParams& pose, int width, int height);

/// Fills one screen-space triangle into `mask` (OR), using the same sampling
/// and fill rule as render_silhouette().
void fill_triangle(BinaryMask& mask, const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace finepose
