// SPDX-License-Identifier: Apache-2.0
//
// Rotation algebra: unit quaternions, Cartesian and spherical axis-angle
// forms, Euler composition, rigid transforms and the angular-offset metric.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sleepose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// Below this angle (radians) an axis-angle axis is undefined and the
/// conventional axis (0,0,1) is reported.
inline constexpr double kDegenerateAngle = 1e-8;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Unit quaternion (w, x, y, z), Hamilton convention.
///
/// Every construction path normalizes, so a live value always has unit norm.
/// The hemisphere is canonicalized to w >= 0 by `canonical()`; products are
/// left as computed so that chains of products stay continuous.
class UnitQuaternion {
public:
    constexpr UnitQuaternion() = default;

    /// Normalizes the given components. Throws on a zero or non-finite input.
    UnitQuaternion(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw std::invalid_argument("UnitQuaternion: zero or non-finite components");
        }
        w_ /= n;
        x_ /= n;
        y_ /= n;
        z_ /= n;
    }

    static UnitQuaternion identity() { return {}; }

    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad) {
        const Vec3 u = axis.normalized();
        const double s = std::sin(angle_rad / 2.0);
        return {std::cos(angle_rad / 2.0), u.x() * s, u.y() * s, u.z() * s};
    }

    /// Shepperd's method; robust for every rotation matrix.
    static UnitQuaternion from_matrix(const Mat3& r) {
        const double tr = r.trace();
        double w, x, y, z;
        if (tr > r(0, 0) && tr > r(1, 1) && tr > r(2, 2)) {
            const double s = 2.0 * std::sqrt(1.0 + tr);
            w = 0.25 * s;
            x = (r(2, 1) - r(1, 2)) / s;
            y = (r(0, 2) - r(2, 0)) / s;
            z = (r(1, 0) - r(0, 1)) / s;
        } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
            const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
            w = (r(2, 1) - r(1, 2)) / s;
            x = 0.25 * s;
            y = (r(0, 1) + r(1, 0)) / s;
            z = (r(0, 2) + r(2, 0)) / s;
        } else if (r(1, 1) > r(2, 2)) {
            const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
            w = (r(0, 2) - r(2, 0)) / s;
            x = (r(0, 1) + r(1, 0)) / s;
            y = 0.25 * s;
            z = (r(1, 2) + r(2, 1)) / s;
        } else {
            const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
            w = (r(1, 0) - r(0, 1)) / s;
            x = (r(0, 2) + r(2, 0)) / s;
            y = (r(1, 2) + r(2, 1)) / s;
            z = 0.25 * s;
        }
        return UnitQuaternion(w, x, y, z).canonical();
    }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    Vec3 vec() const { return {x_, y_, z_}; }
    std::array<double, 4> coeffs() const { return {w_, x_, y_, z_}; }

    double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

    UnitQuaternion conjugate() const { return raw(w_, -x_, -y_, -z_); }

    /// Same rotation with w >= 0. Ties at w == 0 are broken on the first
    /// non-zero vector component so the representative is unique.
    UnitQuaternion canonical() const {
        bool flip = w_ < 0.0;
        if (w_ == 0.0) {
            if (x_ != 0.0) {
                flip = x_ < 0.0;
            } else if (y_ != 0.0) {
                flip = y_ < 0.0;
            } else {
                flip = z_ < 0.0;
            }
        }
        return flip ? raw(-w_, -x_, -y_, -z_) : *this;
    }

    UnitQuaternion operator-() const { return raw(-w_, -x_, -y_, -z_); }

    double dot(const UnitQuaternion& o) const { return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }

    /// Active rotation of a vector: q v q*.
    Vec3 rotate(const Vec3& v) const { return to_matrix() * v; }

    Mat3 to_matrix() const {
        const double ww = w_ * w_, xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
        const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
        const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
        Mat3 r;
        r << ww + xx - yy - zz, 2 * (xy - wz), 2 * (xz + wy),
             2 * (xy + wz), ww - xx + yy - zz, 2 * (yz - wx),
             2 * (xz - wy), 2 * (yz + wx), ww - xx - yy + zz;
        return r;
    }

    friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

private:
    // Trusted construction from components already known to be unit-norm.
    static UnitQuaternion raw(double w, double x, double y, double z) {
        UnitQuaternion q;
        q.w_ = w;
        q.x_ = x;
        q.y_ = y;
        q.z_ = z;
        return q;
    }

    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

/// Hamilton product, renormalized.
inline UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
    return {a.w() * b.w() - a.x() * b.x() - a.y() * b.y() - a.z() * b.z(),
            a.w() * b.x() + a.x() * b.w() + a.y() * b.z() - a.z() * b.y(),
            a.w() * b.y() - a.x() * b.z() + a.y() * b.w() + a.z() * b.x(),
            a.w() * b.z() + a.x() * b.y() - a.y() * b.x() + a.z() * b.w()};
}

inline UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) { return quat_multiply(a, b); }

inline UnitQuaternion quat_conjugate(const UnitQuaternion& q) { return q.conjugate(); }

/// Axis-angle with a unit axis and angle in [0, pi] radians.
struct AxisAngleCartesian {
    Vec3 axis = Vec3::UnitZ();
    double angle = 0.0;
};

/// Axis given by polar/azimuth angles; all three angles in degrees.
struct AxisAngleSpherical {
    double polar = 0.0;    ///< [0, 180]
    double azimuth = 0.0;  ///< [0, 360)
    double angle = 0.0;    ///< [0, 180]
};

inline AxisAngleCartesian quat_to_axis_angle(const UnitQuaternion& q) {
    const UnitQuaternion c = q.canonical();
    const double w = std::clamp(c.w(), -1.0, 1.0);
    const double vn = c.vec().norm();
    // atan2 keeps precision near both ends of the range, unlike acos(w).
    const double angle = 2.0 * std::atan2(vn, w);
    if (angle < kDegenerateAngle || vn == 0.0) {
        return {};
    }
    return {c.vec() / vn, angle};
}

inline UnitQuaternion axis_angle_to_quat(const AxisAngleCartesian& aa) {
    if (aa.angle == 0.0) {
        return UnitQuaternion::identity();
    }
    return UnitQuaternion::from_axis_angle(aa.axis, aa.angle).canonical();
}

inline double wrap_degrees_360(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r -= 360.0;
    return r;
}

inline AxisAngleSpherical cartesian_to_spherical_axis(const AxisAngleCartesian& aa) {
    const Vec3 u = aa.axis.normalized();
    const double polar = rad2deg(std::acos(std::clamp(u.z(), -1.0, 1.0)));
    double azimuth = 0.0;
    if (std::hypot(u.x(), u.y()) > 0.0 && polar != 0.0 && polar != 180.0) {
        azimuth = wrap_degrees_360(rad2deg(std::atan2(u.y(), u.x())));
    }
    return {polar, azimuth, rad2deg(aa.angle)};
}

inline AxisAngleCartesian spherical_to_cartesian_axis(const AxisAngleSpherical& s) {
    const double p = deg2rad(s.polar);
    const double a = deg2rad(s.azimuth);
    const Vec3 axis(std::sin(p) * std::cos(a), std::sin(p) * std::sin(a), std::cos(p));
    return {axis.normalized(), deg2rad(s.angle)};
}

/// Order in which elementary rotations are composed, named left to right:
/// `ZYX` means R = Rz * Ry * Rx, which is the intrinsic z-then-y-then-x
/// sequence used by BVH channel lists.
enum class EulerOrder { XYZ, XZY, YXZ, YZX, ZXY, ZYX };

inline EulerOrder parse_euler_order(std::string_view tag) {
    if (tag == "XYZ") return EulerOrder::XYZ;
    if (tag == "XZY") return EulerOrder::XZY;
    if (tag == "YXZ") return EulerOrder::YXZ;
    if (tag == "YZX") return EulerOrder::YZX;
    if (tag == "ZXY") return EulerOrder::ZXY;
    if (tag == "ZYX") return EulerOrder::ZYX;
    throw std::invalid_argument("unknown Euler order tag '" + std::string(tag) + "'");
}

inline std::string_view to_string(EulerOrder order) {
    switch (order) {
        case EulerOrder::XYZ: return "XYZ";
        case EulerOrder::XZY: return "XZY";
        case EulerOrder::YXZ: return "YXZ";
        case EulerOrder::YZX: return "YZX";
        case EulerOrder::ZXY: return "ZXY";
        case EulerOrder::ZYX: return "ZYX";
    }
    return "?";
}

/// Axis indices (0=x, 1=y, 2=z) of an order, left to right.
inline std::array<int, 3> euler_axes(EulerOrder order) {
    switch (order) {
        case EulerOrder::XYZ: return {0, 1, 2};
        case EulerOrder::XZY: return {0, 2, 1};
        case EulerOrder::YXZ: return {1, 0, 2};
        case EulerOrder::YZX: return {1, 2, 0};
        case EulerOrder::ZXY: return {2, 0, 1};
        case EulerOrder::ZYX: return {2, 1, 0};
    }
    return {0, 1, 2};
}

inline Mat3 elementary_rotation(int axis, double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    Mat3 r = Mat3::Identity();
    switch (axis) {
        case 0: r << 1, 0, 0, 0, c, -s, 0, s, c; break;
        case 1: r << c, 0, s, 0, 1, 0, -s, 0, c; break;
        case 2: r << c, -s, 0, s, c, 0, 0, 0, 1; break;
        default: throw std::invalid_argument("elementary_rotation: axis must be 0, 1 or 2");
    }
    return r;
}

/// Composes three elementary rotations. `angles_deg[k]` is the angle about
/// the k-th axis of `order` (not about x, y, z).
inline Mat3 euler_to_rotation(const std::array<double, 3>& angles_deg, EulerOrder order) {
    const auto ax = euler_axes(order);
    return elementary_rotation(ax[0], deg2rad(angles_deg[0])) *
           elementary_rotation(ax[1], deg2rad(angles_deg[1])) *
           elementary_rotation(ax[2], deg2rad(angles_deg[2]));
}

/// Inverse of `euler_to_rotation` for Tait-Bryan orders. The middle angle is
/// returned in [-90, 90] degrees.
inline std::array<double, 3> rotation_to_euler(const Mat3& r, EulerOrder order) {
    const auto ax = euler_axes(order);
    const int i = ax[0], j = ax[1], k = ax[2];
    // Even permutations of (x, y, z) have sign +1.
    const double sign = ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
    const double sb = std::clamp(sign * r(i, k), -1.0, 1.0);
    const double b = std::asin(sb);
    double a, c;
    if (std::abs(sb) < 1.0 - 1e-12) {
        a = std::atan2(-sign * r(j, k), r(k, k));
        c = std::atan2(-sign * r(i, j), r(i, i));
    } else {
        // Gimbal lock: fold everything into the first angle.
        c = 0.0;
        a = std::atan2(sign * r(k, j), r(j, j));
    }
    return {rad2deg(a), rad2deg(b), rad2deg(c)};
}

/// Rotation of a child frame relative to a parent, with translation in model
/// units. Composition `a * b` applies b first (maps b's frame into a's).
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    RigidTransform inverse() const {
        const Mat3 rt = rotation.transpose();
        return {rt, -rt * translation};
    }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
        return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
    }
};

/// Relative orientation between two sensors expressed against one Earth frame:
/// conj(child) * parent. `child * relative_quat(parent, child) == parent`.
inline UnitQuaternion relative_quat(const UnitQuaternion& q_parent, const UnitQuaternion& q_child) {
    return quat_multiply(q_child.conjugate(), q_parent).canonical();
}

/// Geodesic distance on SO(3), in radians within [0, pi].
inline double angular_offset(const UnitQuaternion& a, const UnitQuaternion& b) {
    const double w = std::abs(a.dot(b));  // scalar part of a* (x) b
    const double vn = quat_multiply(a.conjugate(), b).vec().norm();
    // Equivalent to 2*acos(|w|) but accurate for nearly-equal rotations.
    return 2.0 * std::atan2(vn, std::clamp(w, 0.0, 1.0));
}

/// Shortest-path spherical interpolation; t in [0, 1].
inline UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double t) {
    double d = a.dot(b);
    const double sgn = d < 0.0 ? -1.0 : 1.0;
    d = std::abs(d);
    if (d > 1.0 - 1e-12) {
        return {a.w() + t * (sgn * b.w() - a.w()), a.x() + t * (sgn * b.x() - a.x()),
                a.y() + t * (sgn * b.y() - a.y()), a.z() + t * (sgn * b.z() - a.z())};
    }
    const double omega = std::acos(std::clamp(d, -1.0, 1.0));
    const double s = std::sin(omega);
    const double wa = std::sin((1.0 - t) * omega) / s;
    const double wb = sgn * std::sin(t * omega) / s;
    return {wa * a.w() + wb * b.w(), wa * a.x() + wb * b.x(), wa * a.y() + wb * b.y(), wa * a.z() + wb * b.z()};
}

/// Component-wise linear interpolation on the shortest arc, renormalized.
inline UnitQuaternion nlerp(const UnitQuaternion& a, const UnitQuaternion& b, double t) {
    const double sgn = a.dot(b) < 0.0 ? -1.0 : 1.0;
    return {(1.0 - t) * a.w() + t * sgn * b.w(), (1.0 - t) * a.x() + t * sgn * b.x(),
            (1.0 - t) * a.y() + t * sgn * b.y(), (1.0 - t) * a.z() + t * sgn * b.z()};
}

/// Rotation vector (axis * angle) of q, angle in [0, pi].
inline Vec3 quat_log(const UnitQuaternion& q) {
    const AxisAngleCartesian aa = quat_to_axis_angle(q);
    return aa.axis * aa.angle;
}

inline UnitQuaternion quat_exp(const Vec3& rotvec) {
    const double angle = rotvec.norm();
    if (angle == 0.0) return UnitQuaternion::identity();
    return UnitQuaternion::from_axis_angle(rotvec / angle, angle);
}

}  // namespace sleepose
