#pragma once

// Test-only helpers: brute-force oracles and seeded generators.

#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "finepose/camera.hpp"
#include "finepose/mask.hpp"
#include "finepose/mesh.hpp"

namespace finepose::testing {

/// Pixel-center point-in-triangle, independent of the production rasterizer:
/// a center on an edge is inside when nudging it by (+d, +d^2) moves it inside.
inline bool oracle_inside(double px, double py, const Vec2& a, const Vec2& b, const Vec2& c) {
    auto cross = [](const Vec2& o, const Vec2& q, double x, double y) {
        return (q.x() - o.x()) * (y - o.y()) - (q.y() - o.y()) * (x - o.x());
    };
    const double area = cross(a, b, c.x(), c.y());
    if (area == 0.0) return false;
    const double s = area > 0.0 ? 1.0 : -1.0;
    const std::array<std::pair<const Vec2*, const Vec2*>, 3> edges{{{&a, &b}, {&b, &c}, {&c, &a}}};
    for (const auto& [o, q] : edges) {
        const double val = s * cross(*o, *q, px, py);
        if (val > 0.0) continue;
        if (val < 0.0) return false;
        const double gx = -s * (q->y() - o->y());
        const double gy = s * (q->x() - o->x());
        if (gx > 0.0 || (gx == 0.0 && gy > 0.0)) continue;
        return false;
    }
    return true;
}

/// Union of oracle_inside over every pixel of the frame.
inline BinaryMask oracle_raster(const std::vector<std::array<Vec2, 3>>& tris, int w, int h) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (const auto& t : tris) {
                if (oracle_inside(x + 0.5, y + 0.5, t[0], t[1], t[2])) {
                    m.set(x, y);
                    break;
                }
            }
        }
    }
    return m;
}

/// Projects every triangle with the plain pinhole formula (no clipping) and
/// rasterizes with the oracle. Only valid when the mesh is in front of the camera.
inline BinaryMask oracle_render(const TriangleMesh& mesh, const PoseParams& pose, int w, int h) {
    const auto proj = project_points(pose, mesh.vertices);
    std::vector<std::array<Vec2, 3>> tris;
    for (const auto& t : mesh.triangles) tris.push_back({proj[t[0]].pixel, proj[t[1]].pixel, proj[t[2]].pixel});
    return oracle_raster(tris, w, h);
}

inline PoseParams random_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    PoseParams p;
    p.azimuth_deg = 360.0 * u01(rng);
    p.elevation_deg = -90.0 + 180.0 * u01(rng);
    p.inplane_deg = -180.0 + 360.0 * u01(rng);
    p.depth = 0.1 + 20.0 * u01(rng);
    p.focal = 10.0 + 2000.0 * u01(rng);
    p.principal_u = -500.0 + 2000.0 * u01(rng);
    p.principal_v = -500.0 + 2000.0 * u01(rng);
    return p;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("finepose-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path data_dir() { return FINEPOSE_DATA_DIR; }

}  // namespace finepose::testing
