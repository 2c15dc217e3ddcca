// SPDX-License-Identifier: Apache-2.0
#include "sleepose/madgwick.hpp"
#include "sleepose/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace sleepose;

namespace {

// Objective 1/2 |f|^2 evaluated independently from rotated references.
double objective(const Eigen::Vector4d& qv, const Vec3& a, const Vec3& m, double bx, double bz) {
    const Eigen::Quaterniond q(qv(0), qv(1), qv(2), qv(3));
    const Mat3 rt = q.toRotationMatrix().transpose();  // no normalization, like the analytic form
    const Vec3 fg = rt * Vec3::UnitZ() - a;
    const Vec3 fb = rt * Vec3(bx, 0, bz) - m;
    return 0.5 * (fg.squaredNorm() + fb.squaredNorm());
}

TEST(Madgwick, GradientMatchesFiniteDifference) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 50; ++i) {
        const auto q = sleepose::testing::random_quat(rng);
        const Vec3 a = sleepose::testing::random_unit(rng), m = sleepose::testing::random_unit(rng);
        const Vec3 h = q.rotate(m);
        const double bx = std::hypot(h.x(), h.y()), bz = h.z();
        const Eigen::Vector4d g = madgwick_gradient(q, a, m);
        const Eigen::Vector4d qv(q.w(), q.x(), q.y(), q.z());
        for (int k = 0; k < 4; ++k) {
            Eigen::Vector4d d = Eigen::Vector4d::Zero();
            d(k) = 1e-6;
            const double fd = (objective(qv + d, a, m, bx, bz) - objective(qv - d, a, m, bx, bz)) / 2e-6;
            EXPECT_NEAR(g(k), fd, 1e-6);
        }
    }
}

TEST(Madgwick, NoiselessFixedPointDoesNotDrift) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 20; ++i) {
        const auto q = sleepose::testing::random_quat(rng).canonical();
        const Mat3 rt = q.to_matrix().transpose();
        ImuSample s;
        s.accel = rt * -earth_gravity();
        s.mag = rt * earth_magnetic_field();
        FilterState st{q, 0.1};
        for (int k = 0; k < 300; ++k) {
            const auto next = madgwick_update(st, s, 1.0 / 30.0);
            EXPECT_LT(angular_offset(next.q, st.q), 1e-6);
            st = next;
        }
        EXPECT_LT(angular_offset(st.q, q), 1e-6);
    }
}

TEST(Madgwick, ConvergesFromIdentityToStaticTilt) {
    const UnitQuaternion truth = UnitQuaternion::from_axis_angle(Vec3(1, 1, 0), deg2rad(30));
    const auto traj = uniform_trajectory(0, 30.0, 301, [&](double) { return truth; });
    Rng rng(5);
    const auto samples = synthesize_imu_stream(traj, 30.0, ImuNoiseModel::realistic(), rng);
    const auto est = estimate_stream_orientation(samples, 0.1, UnitQuaternion::identity(), 30.0);
    EXPECT_LT(rad2deg(angular_offset(est.back().q, truth)), 2.0);
}

TEST(Madgwick, TracksConstantRotation) {
    const Vec3 w(0.2, -0.1, 0.3);
    const auto traj = uniform_trajectory(0, 100.0, 1001, [&](double t) { return quat_exp(w * t); });
    Rng rng(6);
    const auto samples = synthesize_imu_stream(traj, 100.0, ImuNoiseModel{}, rng);
    const auto est = estimate_stream_orientation(samples, 0.1, traj.front().q, 100.0);
    for (std::size_t k = 0; k < est.size(); k += 100) EXPECT_LT(rad2deg(angular_offset(est[k].q, traj[k].q)), 1.0);
}

TEST(Madgwick, ZeroAccelFallsBackToGyro) {
    ImuSample s;
    s.gyro = Vec3(0, 0, 1.0);
    s.mag = Vec3::UnitX();
    FilterDiagnostics d;
    const auto next = madgwick_update({UnitQuaternion::identity(), 0.1}, s, 0.01, &d);
    EXPECT_EQ(d.gyro_only_steps, 1u);
    EXPECT_EQ(d.updates, 1u);
    // Pure integration: q = normalize(1, 0, 0, dt/2).
    EXPECT_NEAR(next.q.z() / next.q.w(), 0.005, 1e-12);
}

TEST(Madgwick, RejectsBadTiming) {
    ImuSample s;
    EXPECT_THROW(madgwick_update({}, s, 0.0, nullptr), std::invalid_argument);
    std::vector<ImuSample> v(2);
    v[0].timestamp_us = 10;
    v[1].timestamp_us = 10;
    EXPECT_THROW(estimate_stream_orientation(v, 0.1, {}, 30.0), std::invalid_argument);
    EXPECT_THROW(estimate_stream_orientation({}, 0.1, {}, 30.0), std::invalid_argument);
}

}  // namespace
