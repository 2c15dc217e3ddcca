// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sleepose/rotations.hpp"

#include <Eigen/Geometry>

#include <random>

namespace sleepose::testing {

inline Eigen::Quaterniond to_eigen(const UnitQuaternion& q) { return {q.w(), q.x(), q.y(), q.z()}; }

/// Uniform random rotation (Shoemake), drawn without the library under test.
inline UnitQuaternion random_quat(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double u1 = u(rng), u2 = 2 * kPi * u(rng), u3 = 2 * kPi * u(rng);
    const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    return {a * std::sin(u2), a * std::cos(u2), b * std::sin(u3), b * std::cos(u3)};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

/// Same rotation regardless of quaternion sign.
inline double rotation_gap(const UnitQuaternion& a, const Eigen::Quaterniond& b) {
    const double d = std::abs(a.w() * b.w() + a.x() * b.x() + a.y() * b.y() + a.z() * b.z());
    return 1.0 - std::min(1.0, d);
}

}  // namespace sleepose::testing
