// SPDX-License-Identifier: Apache-2.0
//
// Madgwick gradient-descent MARG attitude filter.
//
// The estimate q rotates sensor-frame vectors into the Earth frame
// (v_E = q v_S q*). Earth references: gravity along +z as sensed by the
// accelerometer at rest, magnetic field in the x-z plane.
#pragma once

#include "sleepose/rotations.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

/// One raw MARG reading. Gyro in rad/s; accel and mag in any consistent
/// units (both are normalized before use).
struct ImuSample {
    std::int64_t timestamp_us = 0;
    Vec3 gyro = Vec3::Zero();
    Vec3 accel = Vec3::Zero();
    Vec3 mag = Vec3::Zero();
};

struct FilterState {
    UnitQuaternion q;
    double beta = 0.1;
};

struct FilterDiagnostics {
    std::size_t updates = 0;
    std::size_t gyro_only_steps = 0;  ///< steps with a zero accel or mag reading
};

namespace detail {

// Rounding-level gradients carry no direction; normalizing them would kick an
// exact estimate off its fixed point.
inline constexpr double kGradientFloor = 1e-12;

}  // namespace detail

/// Gradient of the stacked gravity and magnetic objective at q, for the
/// normalized readings a, m.
inline Eigen::Vector4d madgwick_gradient(const UnitQuaternion& q, const Vec3& a, const Vec3& m) {
    const double q0 = q.w(), q1 = q.x(), q2 = q.y(), q3 = q.z();

    // Field direction in the Earth frame, collapsed onto the x-z plane.
    const Vec3 h = q.rotate(m);
    const double bx = std::hypot(h.x(), h.y());
    const double bz = h.z();

    Eigen::Matrix<double, 6, 1> f;
    f << 2.0 * (q1 * q3 - q0 * q2) - a.x(),
        2.0 * (q0 * q1 + q2 * q3) - a.y(),
        2.0 * (0.5 - q1 * q1 - q2 * q2) - a.z(),
        2.0 * bx * (0.5 - q2 * q2 - q3 * q3) + 2.0 * bz * (q1 * q3 - q0 * q2) - m.x(),
        2.0 * bx * (q1 * q2 - q0 * q3) + 2.0 * bz * (q0 * q1 + q2 * q3) - m.y(),
        2.0 * bx * (q0 * q2 + q1 * q3) + 2.0 * bz * (0.5 - q1 * q1 - q2 * q2) - m.z();

    Eigen::Matrix<double, 6, 4> j;
    j << -2.0 * q2, 2.0 * q3, -2.0 * q0, 2.0 * q1,
        2.0 * q1, 2.0 * q0, 2.0 * q3, 2.0 * q2,
        0.0, -4.0 * q1, -4.0 * q2, 0.0,
        -2.0 * bz * q2, 2.0 * bz * q3, -4.0 * bx * q2 - 2.0 * bz * q0, -4.0 * bx * q3 + 2.0 * bz * q1,
        -2.0 * bx * q3 + 2.0 * bz * q1, 2.0 * bx * q2 + 2.0 * bz * q0, 2.0 * bx * q1 + 2.0 * bz * q3,
        -2.0 * bx * q0 + 2.0 * bz * q2,
        2.0 * bx * q2, 2.0 * bx * q3 - 4.0 * bz * q1, 2.0 * bx * q0 - 4.0 * bz * q2, 2.0 * bx * q1;
    return j.transpose() * f;
}

/// One filter step: gyro integration corrected by a normalized gradient step
/// of size beta toward the gravity and field observations.
inline FilterState madgwick_update(const FilterState& state, const ImuSample& s, double dt,
                                   FilterDiagnostics* diag = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("madgwick_update: dt must be positive");
    const UnitQuaternion& q = state.q;
    const Eigen::Vector4d qv(q.w(), q.x(), q.y(), q.z());

    // q_dot = 1/2 q (x) (0, w)
    const Vec3& w = s.gyro;
    Eigen::Vector4d qdot;
    qdot << 0.5 * (-q.x() * w.x() - q.y() * w.y() - q.z() * w.z()),
        0.5 * (q.w() * w.x() + q.y() * w.z() - q.z() * w.y()),
        0.5 * (q.w() * w.y() - q.x() * w.z() + q.z() * w.x()),
        0.5 * (q.w() * w.z() + q.x() * w.y() - q.y() * w.x());

    const double an = s.accel.norm(), mn = s.mag.norm();
    if (an > 0.0 && mn > 0.0 && std::isfinite(an) && std::isfinite(mn)) {
        const Eigen::Vector4d g = madgwick_gradient(q, s.accel / an, s.mag / mn);
        const double gn = g.norm();
        if (gn > detail::kGradientFloor) qdot -= state.beta * g / gn;
    } else if (diag) {
        ++diag->gyro_only_steps;
    }
    if (diag) ++diag->updates;

    const Eigen::Vector4d next = qv + qdot * dt;
    return {UnitQuaternion(next(0), next(1), next(2), next(3)), state.beta};
}

struct TimedQuat {
    std::int64_t timestamp_us = 0;
    UnitQuaternion q;
};

/// Folds the filter over a stream. The first sample uses the nominal period;
/// later ones use timestamp differences.
inline std::vector<TimedQuat> estimate_stream_orientation(const std::vector<ImuSample>& samples, double beta,
                                                          const UnitQuaternion& q0, double nominal_rate_hz = 30.0,
                                                          FilterDiagnostics* diag = nullptr) {
    if (samples.empty()) throw std::invalid_argument("estimate_stream_orientation: empty stream");
    if (!(nominal_rate_hz > 0.0)) throw std::invalid_argument("nominal rate must be positive");
    std::vector<TimedQuat> out;
    out.reserve(samples.size());
    FilterState st{q0, beta};
    for (std::size_t k = 0; k < samples.size(); ++k) {
        double dt = 1.0 / nominal_rate_hz;
        if (k > 0) {
            const std::int64_t d = samples[k].timestamp_us - samples[k - 1].timestamp_us;
            if (d <= 0) {
                throw std::invalid_argument("non-monotonic timestamps at sample " + std::to_string(k));
            }
            dt = static_cast<double>(d) * 1e-6;
        }
        st = madgwick_update(st, samples[k], dt, diag);
        out.push_back({samples[k].timestamp_us, st.q});
    }
    return out;
}

}  // namespace sleepose
