// SPDX-License-Identifier: Apache-2.0
#include "sleepose/metrics.hpp"
#include "sleepose/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace sleepose;

namespace {

TEST(Postures, TwelveNamedWithinRanges) {
    const auto set = canonical_postures(42);
    ASSERT_EQ(set.size(), 12u);
    EXPECT_EQ(set.dictionary.names.size(), 12u);
    const auto& r = anatomical_ranges();
    for (std::size_t k = 0; k < set.size(); ++k) {
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const auto [z, x] = set.joint_angles[k][j];
            EXPECT_GE(z, r[j].z_lo);
            EXPECT_LE(z, r[j].z_hi);
            EXPECT_GE(x, r[j].x_lo);
            EXPECT_LE(x, r[j].x_hi);
            // Shot equals Rz * Rx built independently.
            const Eigen::Quaterniond e = Eigen::AngleAxisd(deg2rad(z), Vec3::UnitZ()) * Eigen::AngleAxisd(deg2rad(x), Vec3::UnitX());
            EXPECT_LT(sleepose::testing::rotation_gap(set.dictionary.shots[k][j], e), 1e-12);
        }
    }
}

TEST(Postures, LastPairIsANearOverlap) {
    const auto set = canonical_postures(42);
    double worst = -10;
    for (Eigen::Index a = 0; a < 12; ++a) {
        for (Eigen::Index b = 0; b < 12; ++b) {
            if (a == b) continue;
            const double lam = lambda_similarity(pose_to_features(set.dictionary.shots[static_cast<std::size_t>(a)]),
                                                 pose_to_features(set.dictionary.shots[static_cast<std::size_t>(b)])).lambda;
            EXPECT_NEAR(set.lambda(a, b), lam, 1e-12);
            worst = std::max(worst, lam);
        }
    }
    EXPECT_GE(worst, 6.0);
    EXPECT_LE(worst, 7.0);
}

TEST(Postures, DeterministicAndSeedSensitive) {
    const auto a = canonical_postures(7), b = canonical_postures(7), c = canonical_postures(8);
    EXPECT_EQ(posture_manifest_json(a).dump(), posture_manifest_json(b).dump());
    EXPECT_NE(posture_manifest_json(a).dump(), posture_manifest_json(c).dump());
    const auto back = posture_set_from_json(posture_manifest_json(a));
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t j = 0; j < kJointCount; ++j) {
            EXPECT_LT(angular_offset(back.dictionary.shots[k][j], a.dictionary.shots[k][j]), 1e-12);
        }
    }
}

TEST(ImuSynth, StaticReadingsAreEarthReferences) {
    const UnitQuaternion q = UnitQuaternion::from_axis_angle(Vec3(0, 1, 0), deg2rad(90));
    const auto traj = uniform_trajectory(0, 30.0, 5, [&](double) { return q; });
    Rng rng(1);
    const auto s = synthesize_imu_stream(traj, 30.0, {}, rng);
    // Earth references rotated into the sensor frame.
    const Mat3 rt = sleepose::testing::to_eigen(q).toRotationMatrix().transpose();
    for (const auto& x : s) {
        EXPECT_LT((x.accel - rt * Vec3(0, 0, 9.81)).norm(), 1e-12);
        EXPECT_LT((x.mag - rt * Vec3(0.5, 0, -std::sqrt(3.0) / 2)).norm(), 1e-12);
        EXPECT_LT(x.gyro.norm(), 1e-12);
    }
    EXPECT_EQ(s[1].timestamp_us, 33'333);
}

TEST(ImuSynth, GyroMatchesConstantBodyRate) {
    const Vec3 w(0.3, -0.2, 0.5);
    const auto traj = uniform_trajectory(0, 50.0, 20, [&](double t) { return quat_exp(w * t); });
    Rng rng(1);
    const auto s = synthesize_imu_stream(traj, 50.0, {}, rng);
    for (const auto& x : s) EXPECT_LT((x.gyro - w).norm(), 1e-9);
    auto bad = traj;
    bad[3].timestamp_us += 500;
    EXPECT_THROW(synthesize_imu_stream(bad, 50.0, {}, rng), std::invalid_argument);
    EXPECT_THROW((ImuNoiseModel{-1, 0, 0, Vec3::Zero()}.validate()), std::invalid_argument);
}

TEST(Session, TruthFollowsTargetAfterTransition) {
    const auto set = canonical_postures(42);
    SessionOptions o;
    o.relative_jitter_deg = 0.0;
    const auto s = synthesize_session(set.dictionary.shots[0], 1, o, 5);
    for (std::size_t j = 0; j < kJointCount; ++j) {
        EXPECT_LT(angular_offset(s.truth[j].back().q, set.dictionary.shots[0][j]), 1e-12);
        EXPECT_LT(angular_offset(s.truth[j].front().q, UnitQuaternion::identity()), 1e-12);
        EXPECT_EQ(s.imu.modules[j].parent.size(), 601u);
    }
    o.perturb_phi_sq = 800;
    o.perturb_theta_sq = 100;
    const auto p = synthesize_session(set.dictionary.shots[0], 1, o, 5);
    EXPECT_GT(angular_offset(p.target[0], set.dictionary.shots[0][0]), 1e-6);
    o.transition_s = 30;
    EXPECT_THROW(synthesize_session(set.dictionary.shots[0], 1, o, 5), std::invalid_argument);
}

TEST(Session, NoiselessReadingsHaveReferenceNorms) {
    const auto set = canonical_postures(42);
    SessionOptions o;
    o.noise = {};
    o.duration_s = 3;
    o.transition_s = 1;
    const auto s = synthesize_session(set.dictionary.shots[1], 2, o, 5);
    const auto& m = s.imu.modules[0];
    EXPECT_EQ(m.parent.size(), m.child.size());
    EXPECT_NEAR(m.parent[0].accel.norm(), 9.81, 1e-9);
    EXPECT_NEAR(m.child.back().mag.norm(), 1.0, 1e-9);
}

}  // namespace
