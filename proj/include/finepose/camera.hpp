#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace finepose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using RotationMatrix = Eigen::Matrix3d;
using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

/// Number of continuous pose/camera parameters.
inline constexpr std::size_t kPoseDims = 7;

/// Parameter order used everywhere a pose is treated as a vector.
enum class PoseParam : int {
    Azimuth = 0,
    Elevation,
    Inplane,
    Depth,
    Focal,
    PrincipalU,
    PrincipalV,
};

/// Full-perspective object pose: three rotation angles, the model depth and
/// the intrinsics (f, u, v). Angles are in degrees.
struct PoseParams {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double inplane_deg = 0.0;
    double depth = 1.0;
    double focal = 1.0;
    double principal_u = 0.0;
    double principal_v = 0.0;

    double& operator[](PoseParam p);
    double operator[](PoseParam p) const;

    std::array<double, kPoseDims> to_array() const;
    static PoseParams from_array(const std::array<double, kPoseDims>& values);

    bool operator==(const PoseParams&) const = default;
};

struct Intrinsics {
    double focal = 1.0;
    double principal_u = 0.0;
    double principal_v = 0.0;

    Eigen::Matrix3d matrix() const;
};

const char* param_name(PoseParam p);
/// Accepts the long JSON field names ("azimuth_deg") and the short forms (a, e, theta, d, f, u, v).
PoseParam param_from_name(const std::string& name);

/// Wraps an angle into [0, 360).
double wrap_azimuth(double deg);
/// Wraps an angle into [-180, 180).
double wrap_inplane(double deg);

/// True when depth > 0, focal > 0, every field finite and |elevation| <= 90.
/// Angles outside their canonical ranges are accepted; see normalize_pose().
bool is_valid(const PoseParams& pose);
/// Throws InvalidParameterError describing the first violated invariant.
void validate(const PoseParams& pose);
/// Wraps azimuth and in-plane angles and clamps elevation to [-90, 90].
PoseParams normalize_pose(const PoseParams& pose);

/// R = R_roll(inplane, camera z) * R_pitch(elevation, x) * R_yaw(azimuth, y).
RotationMatrix rotation_from_angles(double azimuth_deg, double elevation_deg, double inplane_deg);
RotationMatrix rotation_of(const PoseParams& pose);
Intrinsics intrinsics_of(const PoseParams& pose);
/// K [R | (0, 0, d)].
ProjectionMatrix projection_matrix(const PoseParams& pose);

/// World point to camera frame: R X + (0, 0, d).
Vec3 to_camera(const PoseParams& pose, const Vec3& world_point);

/// Pinhole projection. Throws BehindCameraError when the camera-space z <= 0.
Vec2 project_point(const PoseParams& pose, const Vec3& world_point);

struct ProjectedPoint {
    Vec2 pixel;
    double camera_z = 0.0;
    /// camera_z <= 0; pixel is then meaningless.
    bool behind = false;
};

std::vector<ProjectedPoint> project_points(const PoseParams& pose, std::span<const Vec3> points);

}  // namespace finepose
