#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "finepose/camera.hpp"
#include "finepose/error.hpp"
#include "support.hpp"

using namespace finepose;

namespace {

PoseParams reference_pose() {
    PoseParams p;
    p.depth = 5.0;
    p.focal = 500.0;
    p.principal_u = 320.0;
    p.principal_v = 240.0;
    return p;
}

}  // namespace

TEST_CASE("zero angles and full turns give the identity") {
    CHECK(rotation_from_angles(0, 0, 0).isApprox(RotationMatrix::Identity(), 0.0));
    CHECK((rotation_from_angles(360, 0, 0) - RotationMatrix::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((rotation_from_angles(0, 360, -360) - RotationMatrix::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rotation_from_angles(90, 30, 45) matches hand-composed elementary rotations") {
    // tests/oracles/compute_oracles.py
    RotationMatrix expected;
    expected << -0.3535533905932736, -0.6123724356957945, 0.7071067811865476,
                 0.3535533905932738, 0.6123724356957946, 0.7071067811865475,
                -0.8660254037844387, 0.49999999999999994, 5.3028761936245346e-17;
    CHECK((rotation_from_angles(90, 30, 45) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-finite angles are rejected") {
    CHECK_THROWS_AS(rotation_from_angles(NAN, 0, 0), InvalidParameterError);
    CHECK_THROWS_AS(rotation_from_angles(0, INFINITY, 0), InvalidParameterError);
}

TEST_CASE("project_point pinhole examples") {
    const PoseParams p = reference_pose();
    const Vec2 origin = project_point(p, Vec3::Zero());
    CHECK(origin.x() == 320.0);
    CHECK(origin.y() == 240.0);
    const Vec2 x1 = project_point(p, Vec3(1, 0, 0));
    CHECK(x1.x() == doctest::Approx(420.0).epsilon(1e-12));
    CHECK(x1.y() == doctest::Approx(240.0).epsilon(1e-12));

    PoseParams turned = p;
    turned.azimuth_deg = 90.0;
    const Vec2 z1 = project_point(turned, Vec3(0, 0, 1));
    CHECK(z1.x() == doctest::Approx(420.0).epsilon(1e-12));
    CHECK(z1.y() == doctest::Approx(240.0).epsilon(1e-12));
}

TEST_CASE("points behind the camera raise and are flagged in batch form") {
    const PoseParams p = reference_pose();
    CHECK_THROWS_AS(project_point(p, Vec3(0, 0, -5)), BehindCameraError);
    CHECK_THROWS_AS(project_point(p, Vec3(0, 0, -6)), BehindCameraError);
    const std::vector<Vec3> pts{Vec3(0, 0, -6), Vec3::Zero()};
    const auto out = project_points(p, pts);
    REQUIRE(out.size() == 2);
    CHECK(out[0].behind);
    CHECK(out[0].camera_z == doctest::Approx(-1.0));
    CHECK_FALSE(out[1].behind);
}

TEST_CASE("project_points batch examples") {
    const PoseParams p = reference_pose();
    CHECK(project_points(p, std::vector<Vec3>{}).empty());

    const auto single = project_points(p, std::vector<Vec3>{Vec3::Zero()});
    REQUIRE(single.size() == 1);
    CHECK(single[0].pixel == Vec2(320.0, 240.0));
    CHECK(single[0].camera_z == 5.0);

    // bounding-box corners of [-1,2]x[-0.5,0.5]x[-1.5,1.5] under a = 90
    PoseParams turned = p;
    turned.azimuth_deg = 90.0;
    std::vector<Vec3> corners;
    for (double x : {-1.0, 2.0})
        for (double y : {-0.5, 0.5})
            for (double z : {-1.5, 1.5}) corners.emplace_back(x, y, z);
    const double expected[8][3] = {
        {195.0, 198.33333333333334, 6.0}, {445.0, 198.33333333333334, 6.0},
        {195.0, 281.6666666666667, 6.0},  {445.0, 281.6666666666667, 6.0},
        {70.0, 156.66666666666669, 3.0},  {570.0, 156.66666666666669, 3.0},
        {70.0, 323.3333333333333, 3.0},   {570.0, 323.3333333333333, 3.0},
    };
    const auto out = project_points(turned, corners);
    REQUIRE(out.size() == 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(out[i].pixel.x() == doctest::Approx(expected[i][0]).epsilon(1e-12));
        CHECK(out[i].pixel.y() == doctest::Approx(expected[i][1]).epsilon(1e-12));
        CHECK(out[i].camera_z == doctest::Approx(expected[i][2]).epsilon(1e-12));
        CHECK_FALSE(out[i].behind);
    }
}

TEST_CASE("projection matrix equals K[R|T] and agrees with project_point") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        PoseParams p = testing::random_pose(rng);
        const ProjectionMatrix P = projection_matrix(p);
        const Vec3 X(0.3, -0.2, 0.1);
        const Eigen::Vector3d h = P * X.homogeneous();
        if (h.z() <= 0) continue;
        const Vec2 direct = project_point(p, X);
        CHECK((h.hnormalized() - direct).norm() < 1e-6 * (1.0 + direct.norm()));
    }
}

TEST_CASE("camera properties over seeded poses") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> ang(-720.0, 720.0);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const PoseParams p = testing::random_pose(rng);

        // rotation group about the yaw axis
        const double a = ang(rng);
        const double b = ang(rng);
        const RotationMatrix lhs = rotation_from_angles(a, 0, 0) * rotation_from_angles(b, 0, 0);
        const RotationMatrix rhs = rotation_from_angles(wrap_azimuth(a + b), 0, 0);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);

        const Vec3 X(coord(rng), coord(rng), coord(rng));
        if (to_camera(p, X).z() <= 1e-3) continue;
        const Vec2 base = project_point(p, X);

        // doubling focal doubles the offset from (u, v)
        PoseParams p2 = p;
        p2.focal *= 2.0;
        const Vec2 doubled = project_point(p2, X);
        const Vec2 c(p.principal_u, p.principal_v);
        CHECK(((doubled - c) - 2.0 * (base - c)).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + (base - c).norm()));

        // scaling depth and the point together leaves the projection unchanged
        PoseParams p3 = p;
        p3.depth *= 3.0;
        const Vec2 scaled = project_point(p3, 3.0 * X);
        CHECK((scaled - base).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + base.norm()));
    }
}

TEST_CASE("normalizing an in-range pose is exact") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        PoseParams p = testing::random_pose(rng);
        CHECK(normalize_pose(p) == p);
        CHECK(normalize_pose(normalize_pose(p)) == normalize_pose(p));
    }
}

TEST_CASE("angle normalization and validation") {
    CHECK(wrap_azimuth(-10.0) == 350.0);
    CHECK(wrap_azimuth(720.0) == 0.0);
    CHECK(wrap_azimuth(-1e-18) == 0.0);
    CHECK(wrap_inplane(180.0) == -180.0);
    CHECK(wrap_inplane(190.0) == doctest::Approx(-170.0));
    CHECK(wrap_inplane(-190.0) == doctest::Approx(170.0));

    PoseParams p = reference_pose();
    p.elevation_deg = 120.0;
    p.azimuth_deg = -30.0;
    const PoseParams n = normalize_pose(p);
    CHECK(n.elevation_deg == 90.0);
    CHECK(n.azimuth_deg == 330.0);

    CHECK(is_valid(reference_pose()));
    PoseParams bad = reference_pose();
    bad.depth = -1.0;
    CHECK_FALSE(is_valid(bad));
    CHECK_THROWS_AS(validate(bad), InvalidParameterError);
    bad = reference_pose();
    bad.focal = 0.0;
    CHECK_THROWS_AS(validate(bad), InvalidParameterError);
    bad = reference_pose();
    bad.principal_u = NAN;
    CHECK_THROWS_AS(validate(bad), InvalidParameterError);
}

TEST_CASE("parameter names round-trip") {
    for (int i = 0; i < 7; ++i) {
        const auto p = static_cast<PoseParam>(i);
        CHECK(param_from_name(param_name(p)) == p);
    }
    CHECK(param_from_name("theta") == PoseParam::Inplane);
    CHECK_THROWS_AS(param_from_name("zoom"), InvalidParameterError);
}
