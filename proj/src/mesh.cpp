#include "finepose/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "finepose/error.hpp"

namespace finepose {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_coord(std::string_view tok, int line_no) {
    double value = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("non-numeric coordinate '" + std::string(tok) + "'", line_no);
    }
    return value;
}

std::uint32_t parse_index(std::string_view tok, std::size_t vertex_count, int line_no) {
    const std::string_view head = tok.substr(0, tok.find('/'));
    long long idx = 0;
    const auto* end = head.data() + head.size();
    auto [ptr, ec] = std::from_chars(head.data(), end, idx);
    if (head.empty() || ec != std::errc() || ptr != end || idx == 0) {
        throw ParseError("malformed face index '" + std::string(tok) + "'", line_no);
    }
    const long long n = static_cast<long long>(vertex_count);
    const long long resolved = idx > 0 ? idx - 1 : n + idx;
    if (resolved < 0 || resolved >= n) {
        throw ParseError("face index " + std::to_string(idx) + " out of range (" +
                             std::to_string(n) + " vertices)",
                         line_no);
    }
    return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriangleMesh load_obj(std::istream& in) {
    TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    std::vector<std::uint32_t> poly;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const auto toks = split_ws(std::string_view(line).substr(0, hash));
        if (toks.empty()) continue;
        if (toks[0] == "v") {
            // v x y z [w] and the common "v x y z r g b" colour extension
            if (toks.size() < 4) throw ParseError("vertex needs three coordinates", line_no);
            mesh.vertices.emplace_back(parse_coord(toks[1], line_no), parse_coord(toks[2], line_no),
                                       parse_coord(toks[3], line_no));
        } else if (toks[0] == "f") {
            if (toks.size() < 4) throw ParseError("face needs at least three vertices", line_no);
            poly.clear();
            for (std::size_t i = 1; i < toks.size(); ++i) {
                poly.push_back(parse_index(toks[i], mesh.vertices.size(), line_no));
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
            }
        }
    }
    return mesh;
}

TriangleMesh load_obj_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh '" + path.string() + "'");
    try {
        return load_obj(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void save_obj(std::ostream& out, const TriangleMesh& mesh) {
    out << std::setprecision(17);
    for (const Vec3& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const Triangle& t : mesh.triangles) {
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
}

void save_obj_file(const std::filesystem::path& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh '" + path.string() + "'");
    save_obj(out, mesh);
}

std::pair<Vec3, Vec3> bounding_box(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw EmptyMeshError("bounding box of an empty mesh");
    Vec3 lo = mesh.vertices.front();
    Vec3 hi = lo;
    for (const Vec3& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return {lo, hi};
}

double extent(const TriangleMesh& mesh) {
    const auto [lo, hi] = bounding_box(mesh);
    return (hi - lo).maxCoeff();
}

TriangleMesh normalize(const TriangleMesh& mesh) {
    const auto [lo, hi] = bounding_box(mesh);
    const Vec3 center = 0.5 * (lo + hi);
    const double longest = (hi - lo).maxCoeff();
    const double scale = longest > 0.0 ? 1.0 / longest : 1.0;
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = (v - center) * scale;
    return out;
}

namespace {

// Appends a closed loft: `rings` cross-sections along x, each a polygon in the
// (y, z) plane, with caps at both ends.
void add_loft(TriangleMesh& mesh, const std::vector<double>& xs,
              const std::vector<std::vector<std::pair<double, double>>>& rings) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    const auto per_ring = static_cast<std::uint32_t>(rings.front().size());
    for (std::size_t r = 0; r < rings.size(); ++r) {
        for (const auto& [y, z] : rings[r]) mesh.vertices.emplace_back(xs[r], y, z);
    }
    for (std::uint32_t r = 0; r + 1 < rings.size(); ++r) {
        for (std::uint32_t k = 0; k < per_ring; ++k) {
            const std::uint32_t a = base + r * per_ring + k;
            const std::uint32_t b = base + r * per_ring + (k + 1) % per_ring;
            const std::uint32_t c = a + per_ring;
            const std::uint32_t d = b + per_ring;
            mesh.triangles.push_back({a, b, d});
            mesh.triangles.push_back({a, d, c});
        }
    }
    const auto last = base + static_cast<std::uint32_t>(rings.size() - 1) * per_ring;
    for (std::uint32_t k = 1; k + 1 < per_ring; ++k) {
        mesh.triangles.push_back({base, base + k + 1, base + k});
        mesh.triangles.push_back({last, last + k, last + k + 1});
    }
}

// Rounded rectangle outline in (y, z), `n` samples.
std::vector<std::pair<double, double>> rounded_section(double half_h, double half_w, double y0,
                                                       int n) {
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        const double c = std::cos(t);
        const double s = std::sin(t);
        // superellipse, exponent 4
        const double y = half_h * std::copysign(std::sqrt(std::abs(c)), c);
        const double z = half_w * std::copysign(std::sqrt(std::abs(s)), s);
        out.emplace_back(y0 + y, z);
    }
    return out;
}

}  // namespace

TriangleMesh make_car_mesh() {
    TriangleMesh mesh;
    constexpr int kSection = 24;

    // Body: length 4.6 along x, height profile tapering at the nose and tail.
    {
        std::vector<double> xs;
        std::vector<std::vector<std::pair<double, double>>> rings;
        constexpr int kRings = 12;
        for (int i = 0; i < kRings; ++i) {
            const double x = -2.3 + 4.6 * i / (kRings - 1);
            const double t = std::abs(x) / 2.3;
            const double taper = 1.0 - 0.55 * std::pow(t, 4.0);
            // nose (x > 0) sits lower than the tail
            const double half_h = 0.33 * taper * (x > 0 ? 1.0 - 0.25 * t : 1.0);
            xs.push_back(x);
            rings.push_back(rounded_section(half_h, 0.9 * (1.0 - 0.15 * std::pow(t, 6.0)),
                                            -0.55 - half_h, kSection));
        }
        add_loft(mesh, xs, rings);
    }
    // Cabin: shorter, narrower, offset towards the tail.
    {
        std::vector<double> xs;
        std::vector<std::vector<std::pair<double, double>>> rings;
        constexpr int kRings = 8;
        for (int i = 0; i < kRings; ++i) {
            const double s = static_cast<double>(i) / (kRings - 1);
            const double x = -1.35 + 2.3 * s;
            const double bump = std::sin(std::numbers::pi * s);
            const double half_h = 0.05 + 0.22 * std::sqrt(bump);
            xs.push_back(x);
            rings.push_back(rounded_section(half_h, 0.72, -1.15 - half_h + 0.05, kSection));
        }
        add_loft(mesh, xs, rings);
    }
    // Wheels: cylinders along z.
    for (const double wx : {-1.45, 1.4}) {
        for (const double wz : {-0.82, 0.82}) {
            const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
            constexpr int kSeg = 20;
            constexpr double kRadius = 0.36;
            const double half_w = 0.12;
            for (int side = 0; side < 2; ++side) {
                const double z = wz + (side == 0 ? -half_w : half_w);
                mesh.vertices.emplace_back(wx, -0.36, z);
                for (int k = 0; k < kSeg; ++k) {
                    const double t = 2.0 * std::numbers::pi * k / kSeg;
                    mesh.vertices.emplace_back(wx + kRadius * std::cos(t), -0.36 + kRadius * std::sin(t),
                                               z);
                }
            }
            const std::uint32_t c0 = base;
            const std::uint32_t c1 = base + kSeg + 1;
            for (std::uint32_t k = 0; k < kSeg; ++k) {
                const std::uint32_t a0 = c0 + 1 + k;
                const std::uint32_t b0 = c0 + 1 + (k + 1) % kSeg;
                const std::uint32_t a1 = c1 + 1 + k;
                const std::uint32_t b1 = c1 + 1 + (k + 1) % kSeg;
                mesh.triangles.push_back({c0, b0, a0});
                mesh.triangles.push_back({c1, a1, b1});
                mesh.triangles.push_back({a0, b0, b1});
                mesh.triangles.push_back({a0, b1, a1});
            }
        }
    }
    return normalize(mesh);
}

}  // namespace finepose
