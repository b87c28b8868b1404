#include "finepose/rasterizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "finepose/error.hpp"

namespace finepose {

namespace {

struct Edge {
    double ax, ay, dx, dy;
    bool inclusive;

    // Positive on the interior side once the triangle is counter-clockwise
    // in the (x right, y down) frame.
    double eval(double px, double py) const { return dx * (py - ay) - dy * (px - ax); }

    bool accepts(double px, double py) const {
        const double e = eval(px, py);
        return e > 0.0 || (e == 0.0 && inclusive);
    }
};

Edge make_edge(const Vec2& a, const Vec2& b) {
    Edge e{a.x(), a.y(), b.x() - a.x(), b.y() - a.y(), false};
    // left edge: interior towards +x; top edge: horizontal with interior towards +y
    e.inclusive = e.dy < 0.0 || (e.dy == 0.0 && e.dx > 0.0);
    return e;
}

// Sutherland-Hodgman against z >= near, result appended to `out`.
void clip_near(const std::array<Vec3, 3>& tri, std::vector<Vec3>& out) {
    out.clear();
    for (int i = 0; i < 3; ++i) {
        const Vec3& cur = tri[i];
        const Vec3& nxt = tri[(i + 1) % 3];
        const bool cur_in = cur.z() >= kNearPlane;
        const bool nxt_in = nxt.z() >= kNearPlane;
        if (cur_in) out.push_back(cur);
        if (cur_in != nxt_in) {
            const double t = (kNearPlane - cur.z()) / (nxt.z() - cur.z());
            Vec3 p = cur + t * (nxt - cur);
            p.z() = kNearPlane;
            out.push_back(p);
        }
    }
}

Vec2 project_camera(const PoseParams& pose, const Vec3& c) {
    return {pose.focal * c.x() / c.z() + pose.principal_u, pose.focal * c.y() / c.z() + pose.principal_v};
}

}  // namespace

void fill_triangle(BinaryMask& mask, const Vec2& a, const Vec2& b, const Vec2& c) {
    if (!a.allFinite() || !b.allFinite() || !c.allFinite()) return;
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (area == 0.0) return;
    // orient so that every edge function is positive inside
    const Vec2& b2 = area > 0.0 ? b : c;
    const Vec2& c2 = area > 0.0 ? c : b;
    const std::array<Edge, 3> edges{make_edge(a, b2), make_edge(b2, c2), make_edge(c2, a)};

    const double min_x = std::min({a.x(), b.x(), c.x()});
    const double max_x = std::max({a.x(), b.x(), c.x()});
    const double min_y = std::min({a.y(), b.y(), c.y()});
    const double max_y = std::max({a.y(), b.y(), c.y()});
    const double w = mask.width();
    const double h = mask.height();
    if (max_x < 0.0 || max_y < 0.0 || min_x > w || min_y > h) return;
    const int x0 = static_cast<int>(std::max(0.0, std::ceil(min_x - 0.5)));
    const int x1 = static_cast<int>(std::min(w - 1.0, std::floor(max_x - 0.5)));
    const int y0 = static_cast<int>(std::max(0.0, std::ceil(min_y - 0.5)));
    const int y1 = static_cast<int>(std::min(h - 1.0, std::floor(max_y - 0.5)));

    auto bits = mask.bits();
    const auto stride = static_cast<std::size_t>(mask.width());
    for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        std::uint8_t* row = bits.data() + static_cast<std::size_t>(y) * stride;
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5;
            if (edges[0].accepts(px, py) && edges[1].accepts(px, py) && edges[2].accepts(px, py)) {
                row[x] = 1;
            }
        }
    }
}

BinaryMask render_silhouette(const TriangleMesh& mesh, const PoseParams& pose, int width, int height) {
    BinaryMask mask(width, height);
    if (mesh.triangles.empty()) return mask;
    validate(pose);

    const RotationMatrix r = rotation_of(pose);
    const Vec3 t(0.0, 0.0, pose.depth);
    std::vector<Vec3> cam(mesh.vertices.size());
    std::vector<Vec2> pix(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        cam[i] = r * mesh.vertices[i] + t;
        if (cam[i].z() >= kNearPlane) pix[i] = project_camera(pose, cam[i]);
    }

    std::vector<Vec3> clipped;
    clipped.reserve(4);
    for (const Triangle& tri : mesh.triangles) {
        const Vec3& c0 = cam[tri[0]];
        const Vec3& c1 = cam[tri[1]];
        const Vec3& c2 = cam[tri[2]];
        const int in_front = (c0.z() >= kNearPlane) + (c1.z() >= kNearPlane) + (c2.z() >= kNearPlane);
        if (in_front == 3) {
            fill_triangle(mask, pix[tri[0]], pix[tri[1]], pix[tri[2]]);
        } else if (in_front > 0) {
            clip_near({c0, c1, c2}, clipped);
            const Vec2 p0 = project_camera(pose, clipped[0]);
            for (std::size_t k = 1; k + 1 < clipped.size(); ++k) {
                fill_triangle(mask, p0, project_camera(pose, clipped[k]),
                              project_camera(pose, clipped[k + 1]));
            }
        }
    }
    return mask;
}

}  // namespace finepose
