#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "finepose/camera.hpp"

namespace finepose {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle soup. Every index is below vertices.size().
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;

    bool empty() const { return vertices.empty(); }
};

/// Parses the `v` and `f` records of a Wavefront OBJ stream. Polygons are
/// fan-triangulated from their first corner, negative indices are resolved
/// relative to the vertices read so far and `/vt/vn` sub-indices are dropped.
/// Every other record type is skipped.
TriangleMesh load_obj(std::istream& in);
TriangleMesh load_obj_file(const std::filesystem::path& path);

void save_obj(std::ostream& out, const TriangleMesh& mesh);
void save_obj_file(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Componentwise (min, max). Throws EmptyMeshError for a mesh without vertices.
std::pair<Vec3, Vec3> bounding_box(const TriangleMesh& mesh);

/// Longest bounding-box edge.
double extent(const TriangleMesh& mesh);

/// Centers the bounding box at the origin and scales the longest edge to 1.
TriangleMesh normalize(const TriangleMesh& mesh);

/// Procedural sedan-like test object (body, cabin, four wheels), about 1k
/// triangles, normalized. Roof points towards -y so that it renders upright
/// under the default camera (image rows grow downwards).
TriangleMesh make_car_mesh();

}  // namespace finepose
