// SPDX-License-Identifier: Apache-2.0
#include "sleepose/pose.hpp"
#include "sleepose/rotations.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace sleepose;
using sleepose::testing::random_quat;
using sleepose::testing::random_unit;
using sleepose::testing::to_eigen;

namespace {

TEST(UnitQuaternion, NormalizesAndRejectsZero) {
    const UnitQuaternion q(2, 0, 0, 0);
    EXPECT_DOUBLE_EQ(q.w(), 1.0);
    EXPECT_THROW(UnitQuaternion(0, 0, 0, 0), std::invalid_argument);
    EXPECT_THROW(UnitQuaternion(std::nan(""), 0, 0, 0), std::invalid_argument);
}

TEST(UnitQuaternion, ProductMatchesEigen) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_quat(rng), b = random_quat(rng);
        const Eigen::Quaterniond e = to_eigen(a) * to_eigen(b);
        const auto p = a * b;
        EXPECT_NEAR(p.w(), e.w(), 1e-12);
        EXPECT_NEAR(p.x(), e.x(), 1e-12);
        EXPECT_NEAR(p.y(), e.y(), 1e-12);
        EXPECT_NEAR(p.z(), e.z(), 1e-12);
    }
}

TEST(UnitQuaternion, MatrixMatchesEigenAndRoundTrips) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const auto q = random_quat(rng);
        const Mat3 r = q.to_matrix();
        EXPECT_LT((r - to_eigen(q).toRotationMatrix()).norm(), 1e-12);
        const auto back = UnitQuaternion::from_matrix(r);
        EXPECT_LT(sleepose::testing::rotation_gap(back, to_eigen(q)), 1e-12);
        EXPECT_GE(back.w(), 0.0);
        const Vec3 v = random_unit(rng);
        EXPECT_LT((q.rotate(v) - to_eigen(q) * v).norm(), 1e-12);
    }
}

TEST(UnitQuaternion, FromMatrixHandlesHalfTurns) {
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 u = Vec3::Zero();
        u(axis) = 1;
        const Mat3 r = Eigen::AngleAxisd(kPi, u).toRotationMatrix();
        const auto q = UnitQuaternion::from_matrix(r);
        EXPECT_NEAR(q.w(), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(q.vec()(axis)), 1.0, 1e-12);
    }
}

TEST(AxisAngle, MatchesEigenAngleAxis) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto q = random_quat(rng);
        const Eigen::AngleAxisd e(to_eigen(q.canonical()));
        const auto aa = quat_to_axis_angle(q);
        EXPECT_NEAR(aa.angle, e.angle(), 1e-9);
        EXPECT_LT((aa.axis - e.axis()).norm(), 1e-9);
        EXPECT_LE(aa.angle, kPi);
        const auto back = axis_angle_to_quat(aa);
        EXPECT_LT(sleepose::testing::rotation_gap(back, to_eigen(q)), 1e-12);
    }
}

TEST(AxisAngle, IdentityIsZeroAngle) {
    const auto aa = quat_to_axis_angle(UnitQuaternion::identity());
    EXPECT_EQ(aa.angle, 0.0);
    EXPECT_DOUBLE_EQ(aa.axis.norm(), 1.0);
}

TEST(AxisAngle, SphericalRoundTrip) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        const AxisAngleCartesian c{random_unit(rng), 0.3 + 2.5 * (i % 7) / 7.0};
        const auto s = cartesian_to_spherical_axis(c);
        EXPECT_GE(s.polar, 0.0);
        EXPECT_LE(s.polar, 180.0);
        EXPECT_GE(s.azimuth, 0.0);
        EXPECT_LT(s.azimuth, 360.0);
        // Independent oracle: the polar angle is the angle to +z.
        EXPECT_NEAR(s.polar, std::acos(c.axis.z()) * 180.0 / kPi, 1e-9);
        const auto back = spherical_to_cartesian_axis(s);
        EXPECT_LT((back.axis - c.axis).norm(), 1e-12);
        EXPECT_NEAR(back.angle, c.angle, 1e-12);
    }
}

TEST(AxisAngle, SphericalPoles) {
    const auto up = cartesian_to_spherical_axis({Vec3::UnitZ(), 1.0});
    EXPECT_EQ(up.polar, 0.0);
    EXPECT_EQ(up.azimuth, 0.0);
    const auto down = cartesian_to_spherical_axis({-Vec3::UnitZ(), 1.0});
    EXPECT_EQ(down.polar, 180.0);
    EXPECT_EQ(down.azimuth, 0.0);
    const auto y = cartesian_to_spherical_axis({Vec3::UnitY(), 1.0});
    EXPECT_NEAR(y.polar, 90.0, 1e-12);
    EXPECT_NEAR(y.azimuth, 90.0, 1e-12);
}

TEST(Euler, MatchesEigenComposition) {
    const std::array<double, 3> ang{30, -45, 60};
    const auto rx = [](double d) { return Eigen::AngleAxisd(d * kPi / 180, Vec3::UnitX()).toRotationMatrix(); };
    const auto ry = [](double d) { return Eigen::AngleAxisd(d * kPi / 180, Vec3::UnitY()).toRotationMatrix(); };
    const auto rz = [](double d) { return Eigen::AngleAxisd(d * kPi / 180, Vec3::UnitZ()).toRotationMatrix(); };
    EXPECT_LT((euler_to_rotation(ang, EulerOrder::ZYX) - rz(30) * ry(-45) * rx(60)).norm(), 1e-12);
    EXPECT_LT((euler_to_rotation(ang, EulerOrder::XYZ) - rx(30) * ry(-45) * rz(60)).norm(), 1e-12);
    EXPECT_LT((euler_to_rotation(ang, EulerOrder::YXZ) - ry(30) * rx(-45) * rz(60)).norm(), 1e-12);
}

TEST(Euler, RoundTripAllOrders) {
    std::mt19937_64 rng(5);
    for (auto order : {EulerOrder::XYZ, EulerOrder::XZY, EulerOrder::YXZ, EulerOrder::YZX, EulerOrder::ZXY, EulerOrder::ZYX}) {
        EXPECT_EQ(parse_euler_order(to_string(order)), order);
        for (int i = 0; i < 50; ++i) {
            const Mat3 r = random_quat(rng).to_matrix();
            const auto e = rotation_to_euler(r, order);
            EXPECT_LT((euler_to_rotation(e, order) - r).norm(), 1e-9);
        }
    }
}

TEST(Relative, ChildTimesRelativeIsParent) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_quat(rng), c = random_quat(rng);
        const auto rel = relative_quat(p, c);
        const Eigen::Quaterniond oracle = to_eigen(c).conjugate() * to_eigen(p);
        EXPECT_LT(sleepose::testing::rotation_gap(rel, oracle), 1e-12);
        EXPECT_GE(rel.w(), 0.0);
    }
}

TEST(AngularOffset, MatchesEigenAngularDistance) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_quat(rng), b = random_quat(rng);
        EXPECT_NEAR(angular_offset(a, b), to_eigen(a).angularDistance(to_eigen(b)), 1e-9);
        EXPECT_NEAR(angular_offset(a, -b), angular_offset(a, b), 1e-12);
    }
    const auto q = UnitQuaternion::from_axis_angle(Vec3::UnitX(), 1e-7);
    EXPECT_NEAR(angular_offset(UnitQuaternion::identity(), q), 1e-7, 1e-15);
}

TEST(Interpolation, SlerpMatchesEigen) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_quat(rng), b = random_quat(rng);
        for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) {
            const auto s = slerp(a, b, t);
            EXPECT_LT(sleepose::testing::rotation_gap(s, to_eigen(a).slerp(t, to_eigen(b))), 1e-10);
        }
    }
}

TEST(Interpolation, NlerpEndpointsAndShortArc) {
    const auto a = UnitQuaternion::identity();
    const auto b = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), 1.0);
    EXPECT_NEAR(angular_offset(nlerp(a, b, 0.0), a), 0.0, 1e-12);
    EXPECT_NEAR(angular_offset(nlerp(a, -b, 1.0), b), 0.0, 1e-7);
    EXPECT_NEAR(angular_offset(nlerp(a, -b, 0.5), a), 0.5, 1e-12);
}

TEST(LogExp, InverseOfEachOther) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        const auto q = random_quat(rng);
        EXPECT_LT(sleepose::testing::rotation_gap(quat_exp(quat_log(q)), to_eigen(q)), 1e-12);
    }
    EXPECT_EQ(quat_log(UnitQuaternion::identity()).norm(), 0.0);
}

TEST(PoseVector, FeaturesRoundTrip) {
    std::mt19937_64 rng(10);
    std::array<UnitQuaternion, kJointCount> q;
    for (auto& x : q) x = random_quat(rng);
    const PoseVector p(q);
    const FeatureVector f = pose_to_features(p);
    EXPECT_TRUE(valid_features(f));
    const PoseVector back = features_to_pose(f);
    for (std::size_t j = 0; j < kJointCount; ++j) EXPECT_LT(angular_offset(back[j], p[j]), 1e-9);
    FeatureVector bad = f;
    bad(0) *= 2;
    EXPECT_FALSE(valid_features(bad));
}

}  // namespace
