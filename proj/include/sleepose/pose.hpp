// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sleepose/rotations.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sleepose {

inline constexpr std::size_t kJointCount = 4;
inline constexpr std::size_t kFeatureDim = 16;

/// The four extremity joints, in the canonical order of the pose vector.
enum class Joint : std::size_t { RightWrist = 0, LeftWrist = 1, RightAnkle = 2, LeftAnkle = 3 };

inline constexpr std::array<std::string_view, kJointCount> kJointCodes{"RW", "LW", "RA", "LA"};
inline constexpr std::array<std::string_view, kJointCount> kJointNames{"right_wrist", "left_wrist", "right_ankle",
                                                                       "left_ankle"};

inline std::size_t joint_index_from_code(std::string_view code) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
        if (kJointCodes[j] == code) return j;
    }
    throw std::invalid_argument("unknown joint code '" + std::string(code) + "'");
}

using FeatureVector = Eigen::Matrix<double, kFeatureDim, 1>;

/// Four canonicalized segment-to-segment orientations, one per extremity joint.
class PoseVector {
public:
    PoseVector() = default;
    explicit PoseVector(const std::array<UnitQuaternion, kJointCount>& joints) {
        for (std::size_t j = 0; j < kJointCount; ++j) joints_[j] = joints[j].canonical();
    }

    const UnitQuaternion& operator[](std::size_t j) const { return joints_.at(j); }
    const UnitQuaternion& operator[](Joint j) const { return joints_[static_cast<std::size_t>(j)]; }
    const std::array<UnitQuaternion, kJointCount>& joints() const { return joints_; }

    AxisAngleCartesian axis_angle(std::size_t j) const { return quat_to_axis_angle(joints_.at(j)); }

    friend bool operator==(const PoseVector&, const PoseVector&) = default;

private:
    std::array<UnitQuaternion, kJointCount> joints_{};
};

/// Per joint [axis_x, axis_y, axis_z, angle_rad], concatenated in joint order.
inline FeatureVector pose_to_features(const PoseVector& p) {
    FeatureVector x;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const AxisAngleCartesian aa = p.axis_angle(j);
        x.segment<3>(4 * j) = aa.axis;
        x(4 * j + 3) = aa.angle;
    }
    return x;
}

inline AxisAngleCartesian feature_joint(const FeatureVector& x, std::size_t j) {
    return {x.segment<3>(4 * j), x(4 * j + 3)};
}

inline PoseVector features_to_pose(const FeatureVector& x) {
    std::array<UnitQuaternion, kJointCount> q{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        AxisAngleCartesian aa = feature_joint(x, j);
        const double n = aa.axis.norm();
        if (!(n > 0.0)) throw std::invalid_argument("features_to_pose: zero axis");
        aa.axis /= n;
        q[j] = axis_angle_to_quat(aa);
    }
    return PoseVector(q);
}

/// Axes unit-norm within `tol` and every angle inside [0, pi].
inline bool valid_features(const FeatureVector& x, double tol = 1e-9) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
        if (!x.segment<4>(4 * j).allFinite()) return false;
        if (std::abs(x.segment<3>(4 * j).norm() - 1.0) > tol) return false;
        const double th = x(4 * j + 3);
        if (th < 0.0 || th > kPi + tol) return false;
    }
    return true;
}

}  // namespace sleepose
