// SPDX-License-Identifier: Apache-2.0
#include "sleepose/augmentation.hpp"
#include "sleepose/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace sleepose;

namespace {

struct Stats {
    double mean = 0, std = 0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size() - 1));
    return s;
}

// Equatorial axis, mid-range angle: far from every wrap or clamp at the
// tested variances.
PoseVector central_pose() {
    std::array<UnitQuaternion, kJointCount> q;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const double az = deg2rad(60.0 + 70.0 * static_cast<double>(j));
        q[j] = UnitQuaternion::from_axis_angle(Vec3(std::cos(az), std::sin(az), 0.0), deg2rad(90.0));
    }
    return PoseVector(q);
}

TEST(Augment, SphericalStatisticsTrackSigma) {
    const PoseVector shot = central_pose();
    for (auto [phi_sq, theta_sq] : {std::pair{20.0, 20.0}, std::pair{200.0, 100.0}, std::pair{400.0, 300.0}}) {
        AugmentSettings s{phi_sq, theta_sq, 10'000, 17};
        Rng rng = make_rng(17, 1);
        const FeatureMatrix rows = augment_posture(shot, s, rng, false);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const auto ref = cartesian_to_spherical_axis(shot.axis_angle(j));
            std::vector<double> polar, az, ang;
            for (Eigen::Index r = 0; r < rows.rows(); ++r) {
                const Vec3 u = rows.row(r).segment<3>(static_cast<Eigen::Index>(4 * j)).transpose();
                // Independent spherical decomposition of the stored axis.
                polar.push_back(std::acos(u.z()) * 180.0 / kPi);
                double a = std::atan2(u.y(), u.x()) * 180.0 / kPi - ref.azimuth;
                a = std::remainder(a, 360.0);
                az.push_back(a);
                ang.push_back(rows(r, static_cast<Eigen::Index>(4 * j + 3)) * 180.0 / kPi);
            }
            const double sp = std::sqrt(phi_sq), st = std::sqrt(theta_sq);
            const Stats p = stats(polar), a = stats(az), t = stats(ang);
            const double se_p = 3 * sp / 100.0, se_t = 3 * st / 100.0;  // 3 standard errors at N = 1e4
            EXPECT_NEAR(p.mean, ref.polar, se_p);
            EXPECT_NEAR(a.mean, 0.0, se_p);
            EXPECT_NEAR(t.mean, ref.angle, se_t);
            EXPECT_NEAR(p.std / sp, 1.0, 0.03);
            EXPECT_NEAR(a.std / sp, 1.0, 0.03);
            EXPECT_NEAR(t.std / st, 1.0, 0.03);
        }
    }
}

TEST(Augment, AxesStayUnitNorm) {
    const auto set = canonical_postures(9);
    AugmentSettings s{1000, 500, 10'000, 4};
    Rng rng = make_rng(4, 2);
    const FeatureMatrix rows = augment_posture(set.dictionary.shots[0], s, rng);
    double worst = 0;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index j = 0; j < 4; ++j) worst = std::max(worst, std::abs(rows.row(r).segment<3>(4 * j).norm() - 1.0));
        for (Eigen::Index j = 0; j < 4; ++j) {
            EXPECT_GE(rows(r, 4 * j + 3), 0.0);
            EXPECT_LE(rows(r, 4 * j + 3), kPi);
        }
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(Augment, ZeroVarianceIsExactIdentity) {
    const auto set = canonical_postures(9);
    for (const auto& shot : set.dictionary.shots) {
        AugmentSettings s{0, 0, 20, 1};
        Rng rng = make_rng(1, 0);
        const FeatureMatrix rows = augment_posture(shot, s, rng, false);
        const FeatureVector f = pose_to_features(shot);
        for (Eigen::Index r = 0; r < rows.rows(); ++r) EXPECT_TRUE((rows.row(r).transpose().array() == f.array()).all());
    }
}

TEST(Augment, KeepShotPutsShotFirst) {
    const auto set = canonical_postures(9);
    AugmentSettings s{800, 100, 5, 1};
    Rng rng = make_rng(1, 0);
    const FeatureMatrix rows = augment_posture(set.dictionary.shots[2], s, rng, true);
    EXPECT_TRUE((rows.row(0).transpose().array() == pose_to_features(set.dictionary.shots[2]).array()).all());
    EXPECT_FALSE((rows.row(1).transpose().array() == pose_to_features(set.dictionary.shots[2]).array()).all());
}

TEST(Augment, WrapReflectsPolesAndClampsAngle) {
    const auto w = wrap_spherical({-10.0, 30.0, 200.0});
    EXPECT_DOUBLE_EQ(w.polar, 10.0);
    EXPECT_DOUBLE_EQ(w.azimuth, 210.0);
    EXPECT_DOUBLE_EQ(w.angle, 180.0);
    const auto n = wrap_spherical({190.0, 350.0, -5.0});
    EXPECT_DOUBLE_EQ(n.polar, 170.0);
    EXPECT_DOUBLE_EQ(n.azimuth, 170.0);
    EXPECT_DOUBLE_EQ(n.angle, 0.0);
    // Reflection keeps the same point on the sphere.
    const auto a = spherical_to_cartesian_axis({-10.0, 30.0, 1.0}).axis;
    const auto b = spherical_to_cartesian_axis(w).axis;
    EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(Augment, DictionaryIsDeterministicAndSized) {
    const auto set = canonical_postures(42);
    AugmentSettings s{20, 20, 500, 8};
    const auto a = build_training_dictionary(set.dictionary, s, streams::kTrainAugment, true, 1);
    const auto b = build_training_dictionary(set.dictionary, s, streams::kTrainAugment, true, 4);
    EXPECT_EQ(a.data.size(), 6000u);
    EXPECT_TRUE((a.data.X.array() == b.data.X.array()).all());
    EXPECT_EQ(a.data.labels, b.data.labels);
    const auto t = build_training_dictionary(set.dictionary, {20, 20, 125, 8}, streams::kTestAugment, false);
    EXPECT_EQ(t.data.size(), 1500u);
    EXPECT_FALSE((t.data.X.row(0).array() == a.data.X.row(0).array()).all());
    EXPECT_THROW(build_training_dictionary({}, s), std::invalid_argument);
    EXPECT_THROW(build_training_dictionary(set.dictionary, {-1, 20, 5, 0}), std::invalid_argument);
}

TEST(Augment, NaiveQuaternionNoiseDoesNotTrackAngleSigma) {
    // Angle spread of the spherical method follows sigma_theta; the naive
    // component-noise method's does not.
    const PoseVector shot = central_pose();
    const double ref = 90.0;
    auto spread_spherical = [&](double theta_sq) {
        AugmentSettings s{20, theta_sq, 4000, 3};
        Rng rng = make_rng(3, 0);
        const FeatureMatrix rows = augment_posture(shot, s, rng, false);
        std::vector<double> v;
        for (Eigen::Index r = 0; r < rows.rows(); ++r) v.push_back(rows(r, 3) * 180.0 / kPi - ref);
        return stats(v).std;
    };
    auto spread_naive = [&](double var) {
        Rng rng = make_rng(3, 1);
        std::vector<double> v;
        for (int i = 0; i < 4000; ++i) v.push_back(rad2deg(quat_to_axis_angle(augment_quaternion_naive(shot[0], var, rng)).angle) - ref);
        return stats(v).std;
    };
    for (double theta_sq : {20.0, 100.0, 400.0}) {
        EXPECT_NEAR(spread_spherical(theta_sq) / std::sqrt(theta_sq), 1.0, 0.05);
        // Same variance handed to the naive method, read as deg^2 of angle.
        const double naive = spread_naive(deg2rad(std::sqrt(theta_sq)) * deg2rad(std::sqrt(theta_sq)));
        EXPECT_GT(std::abs(naive / std::sqrt(theta_sq) - 1.0), 0.2);
    }
}

}  // namespace
