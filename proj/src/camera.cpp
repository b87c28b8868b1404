#include "finepose/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "finepose/error.hpp"

namespace finepose {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double* field(PoseParams& pose, PoseParam p) {
    switch (p) {
        case PoseParam::Azimuth: return &pose.azimuth_deg;
        case PoseParam::Elevation: return &pose.elevation_deg;
        case PoseParam::Inplane: return &pose.inplane_deg;
        case PoseParam::Depth: return &pose.depth;
        case PoseParam::Focal: return &pose.focal;
        case PoseParam::PrincipalU: return &pose.principal_u;
        case PoseParam::PrincipalV: return &pose.principal_v;
    }
    throw InvalidParameterError("unknown pose parameter index");
}

// Exact for multiples of 90 degrees so that full turns give the identity.
void sincos_deg(double deg, double& s, double& c) {
    const double r = std::fmod(deg, 360.0);
    const double q = r / 90.0;
    if (q == std::floor(q)) {
        switch ((static_cast<int>(q) % 4 + 4) % 4) {
            case 0: s = 0.0; c = 1.0; return;
            case 1: s = 1.0; c = 0.0; return;
            case 2: s = 0.0; c = -1.0; return;
            default: s = -1.0; c = 0.0; return;
        }
    }
    s = std::sin(r * kDegToRad);
    c = std::cos(r * kDegToRad);
}

}  // namespace

double& PoseParams::operator[](PoseParam p) { return *field(*this, p); }

double PoseParams::operator[](PoseParam p) const {
    return *field(const_cast<PoseParams&>(*this), p);
}

std::array<double, kPoseDims> PoseParams::to_array() const {
    return {azimuth_deg, elevation_deg, inplane_deg, depth, focal, principal_u, principal_v};
}

PoseParams PoseParams::from_array(const std::array<double, kPoseDims>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

Eigen::Matrix3d Intrinsics::matrix() const {
    Eigen::Matrix3d k;
    k << focal, 0.0, principal_u,
         0.0, focal, principal_v,
         0.0, 0.0, 1.0;
    return k;
}

const char* param_name(PoseParam p) {
    switch (p) {
        case PoseParam::Azimuth: return "azimuth_deg";
        case PoseParam::Elevation: return "elevation_deg";
        case PoseParam::Inplane: return "inplane_deg";
        case PoseParam::Depth: return "depth";
        case PoseParam::Focal: return "focal";
        case PoseParam::PrincipalU: return "principal_u";
        case PoseParam::PrincipalV: return "principal_v";
    }
    return "?";
}

PoseParam param_from_name(const std::string& name) {
    static const std::pair<const char*, PoseParam> aliases[] = {
        {"a", PoseParam::Azimuth},      {"azimuth", PoseParam::Azimuth},
        {"e", PoseParam::Elevation},    {"elevation", PoseParam::Elevation},
        {"theta", PoseParam::Inplane},  {"inplane", PoseParam::Inplane},
        {"d", PoseParam::Depth},        {"f", PoseParam::Focal},
        {"u", PoseParam::PrincipalU},   {"v", PoseParam::PrincipalV},
    };
    for (int i = 0; i < static_cast<int>(kPoseDims); ++i) {
        const auto p = static_cast<PoseParam>(i);
        if (name == param_name(p)) return p;
    }
    for (const auto& [alias, p] : aliases) {
        if (name == alias) return p;
    }
    throw InvalidParameterError("unknown pose parameter '" + name + "'");
}

double wrap_azimuth(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    // fmod of a tiny negative value can round up to exactly 360
    if (r >= 360.0) r = 0.0;
    return r;
}

double wrap_inplane(double deg) {
    // in-range values pass through untouched so normalization is idempotent
    if (deg >= -180.0 && deg < 180.0) return deg;
    double r = wrap_azimuth(deg + 180.0) - 180.0;
    if (r >= 180.0) r -= 360.0;
    return r;
}

bool is_valid(const PoseParams& pose) {
    for (double v : pose.to_array()) {
        if (!std::isfinite(v)) return false;
    }
    return pose.depth > 0.0 && pose.focal > 0.0 && std::abs(pose.elevation_deg) <= 90.0;
}

void validate(const PoseParams& pose) {
    for (int i = 0; i < static_cast<int>(kPoseDims); ++i) {
        const auto p = static_cast<PoseParam>(i);
        if (!std::isfinite(pose[p])) {
            throw InvalidParameterError(std::string(param_name(p)) + " must be finite");
        }
    }
    if (pose.depth <= 0.0) throw InvalidParameterError("depth must be > 0");
    if (pose.focal <= 0.0) throw InvalidParameterError("focal must be > 0");
    if (std::abs(pose.elevation_deg) > 90.0) {
        throw InvalidParameterError("elevation_deg must lie in [-90, 90]");
    }
}

PoseParams normalize_pose(const PoseParams& pose) {
    PoseParams out = pose;
    out.azimuth_deg = wrap_azimuth(pose.azimuth_deg);
    out.elevation_deg = std::clamp(pose.elevation_deg, -90.0, 90.0);
    out.inplane_deg = wrap_inplane(pose.inplane_deg);
    return out;
}

RotationMatrix rotation_from_angles(double azimuth_deg, double elevation_deg, double inplane_deg) {
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg) || !std::isfinite(inplane_deg)) {
        throw InvalidParameterError("rotation angles must be finite");
    }
    double sa, ca, se, ce, st, ct;
    sincos_deg(azimuth_deg, sa, ca);
    sincos_deg(elevation_deg, se, ce);
    sincos_deg(inplane_deg, st, ct);

    RotationMatrix yaw;
    yaw << ca, 0.0, sa,
           0.0, 1.0, 0.0,
           -sa, 0.0, ca;
    RotationMatrix pitch;
    pitch << 1.0, 0.0, 0.0,
             0.0, ce, -se,
             0.0, se, ce;
    RotationMatrix roll;
    roll << ct, -st, 0.0,
            st, ct, 0.0,
            0.0, 0.0, 1.0;
    return roll * pitch * yaw;
}

RotationMatrix rotation_of(const PoseParams& pose) {
    return rotation_from_angles(pose.azimuth_deg, pose.elevation_deg, pose.inplane_deg);
}

Intrinsics intrinsics_of(const PoseParams& pose) {
    return {pose.focal, pose.principal_u, pose.principal_v};
}

ProjectionMatrix projection_matrix(const PoseParams& pose) {
    Eigen::Matrix<double, 3, 4> rt;
    rt.leftCols<3>() = rotation_of(pose);
    rt.col(3) = Vec3(0.0, 0.0, pose.depth);
    return intrinsics_of(pose).matrix() * rt;
}

Vec3 to_camera(const PoseParams& pose, const Vec3& world_point) {
    return rotation_of(pose) * world_point + Vec3(0.0, 0.0, pose.depth);
}

namespace {

ProjectedPoint project_with(const RotationMatrix& r, const PoseParams& pose, const Vec3& x) {
    const Vec3 c = r * x + Vec3(0.0, 0.0, pose.depth);
    ProjectedPoint out;
    out.camera_z = c.z();
    if (c.z() <= 0.0) {
        out.behind = true;
        out.pixel = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    out.pixel = Vec2(pose.focal * c.x() / c.z() + pose.principal_u,
                     pose.focal * c.y() / c.z() + pose.principal_v);
    return out;
}

}  // namespace

Vec2 project_point(const PoseParams& pose, const Vec3& world_point) {
    const ProjectedPoint p = project_with(rotation_of(pose), pose, world_point);
    if (p.behind) {
        std::ostringstream msg;
        msg << "point projects behind the camera (z_c = " << p.camera_z << ")";
        throw BehindCameraError(msg.str());
    }
    return p.pixel;
}

std::vector<ProjectedPoint> project_points(const PoseParams& pose, std::span<const Vec3> points) {
    const RotationMatrix r = rotation_of(pose);
    std::vector<ProjectedPoint> out;
    out.reserve(points.size());
    for (const Vec3& x : points) out.push_back(project_with(r, pose, x));
    return out;
}

}  // namespace finepose
