// SPDX-License-Identifier: Apache-2.0
//
// In-silico generator: seeded canonical postures, BVH sleep sequences built
// on a minimal four-limb skeleton, and MARG streams synthesized from known
// orientation trajectories.
#pragma once

#include "sleepose/augmentation.hpp"
#include "sleepose/bvh.hpp"
#include "sleepose/fusion.hpp"
#include "sleepose/kinematics.hpp"
#include "sleepose/metrics.hpp"
#include "sleepose/pose.hpp"
#include "sleepose/random.hpp"
#include "sleepose/rotations.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

// ---------------------------------------------------------------------------
// Earth references

/// Gravitational acceleration in the Earth frame (z up), m/s^2.
inline Vec3 earth_gravity() { return {0.0, 0.0, -9.81}; }

/// Unit magnetic field with 60 degree dip, north along x.
inline Vec3 earth_magnetic_field() {
    const double dip = deg2rad(60.0);
    return {std::cos(dip), 0.0, -std::sin(dip)};
}

// ---------------------------------------------------------------------------
// Canonical postures

/// Anatomical ranges in degrees for the two rotations of each joint:
/// first about z (wrist flexion/extension, ankle plantar/dorsi-flexion),
/// then about x (wrist deviation, ankle inversion/eversion).
struct JointRange {
    double z_lo, z_hi, x_lo, x_hi;
};

inline const std::array<JointRange, kJointCount>& anatomical_ranges() {
    static const std::array<JointRange, kJointCount> r{{
        {-70.0, 80.0, -25.0, 30.0},  // right wrist
        {-70.0, 80.0, -25.0, 30.0},  // left wrist
        {-45.0, 20.0, -20.0, 30.0},  // right ankle
        {-45.0, 20.0, -20.0, 30.0},  // left ankle
    }};
    return r;
}

inline UnitQuaternion joint_rotation(double z_deg, double x_deg) {
    return UnitQuaternion::from_axis_angle(Vec3::UnitZ(), deg2rad(z_deg)) *
           UnitQuaternion::from_axis_angle(Vec3::UnitX(), deg2rad(x_deg));
}

struct CanonicalPostureSet {
    PostureDictionary dictionary;
    std::vector<std::array<std::array<double, 2>, kJointCount>> joint_angles;  ///< (z, x) degrees per joint
    std::uint64_t seed = 0;
    Eigen::MatrixXd lambda;  ///< pairwise similarity of the shots

    std::size_t size() const { return dictionary.classes(); }
};

inline const std::vector<std::string>& canonical_posture_names() {
    static const std::vector<std::string> names{
        "supine_arms_side", "supine_arms_up",   "prone_arms_up",     "prone_arms_side",
        "left_foetal",      "right_foetal",     "left_log",          "right_log",
        "left_yearner",     "right_yearner",    "starfish",          "soldier_crossed_ankles"};
    return names;
}

struct PostureGeneratorOptions {
    std::size_t classes = 12;
    std::size_t pool = 4000;         ///< random candidates drawn per set
    double min_joint_angle_deg = 15;  ///< keep every joint away from the degenerate axis
};

namespace detail {

inline FeatureVector angles_to_features(const std::array<std::array<double, 2>, kJointCount>& a) {
    std::array<UnitQuaternion, kJointCount> q;
    for (std::size_t j = 0; j < kJointCount; ++j) q[j] = joint_rotation(a[j][0], a[j][1]);
    return pose_to_features(PoseVector(q));
}

}  // namespace detail

/// Seeded postures inside the anatomical ranges. Candidates are drawn
/// uniformly; the set is grown by farthest-point selection under the
/// dissimilarity 8 - Lambda, except the last posture, which is the candidate
/// farthest from the others among those within Lambda in [6, 7] of an already
/// chosen one (a deliberate near-overlap).
inline CanonicalPostureSet canonical_postures(std::uint64_t seed, const PostureGeneratorOptions& opt = {}) {
    if (opt.classes < 2) throw std::invalid_argument("canonical_postures: need at least two classes");
    Rng rng = make_rng(seed, streams::kPostures);
    const auto& ranges = anatomical_ranges();
    using Angles = std::array<std::array<double, 2>, kJointCount>;
    std::vector<Angles> cand;
    std::vector<FeatureVector> feat;
    cand.reserve(opt.pool);
    while (cand.size() < opt.pool) {
        Angles a{};
        bool ok = true;
        for (std::size_t j = 0; j < kJointCount; ++j) {
            std::uniform_real_distribution<double> uz(ranges[j].z_lo, ranges[j].z_hi), ux(ranges[j].x_lo, ranges[j].x_hi);
            a[j] = {uz(rng), ux(rng)};
            ok = ok && rad2deg(quat_to_axis_angle(joint_rotation(a[j][0], a[j][1])).angle) >= opt.min_joint_angle_deg;
        }
        if (!ok) continue;
        cand.push_back(a);
        feat.push_back(detail::angles_to_features(a));
    }

    std::vector<std::size_t> chosen{0};
    std::vector<double> nearest(cand.size(), std::numeric_limits<double>::infinity());
    std::vector<double> best_lambda(cand.size(), -std::numeric_limits<double>::infinity());
    auto absorb = [&](std::size_t c) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            const double l = lambda_similarity(feat[i], feat[c]).lambda;
            nearest[i] = std::min(nearest[i], 8.0 - l);
            best_lambda[i] = std::max(best_lambda[i], l);
        }
    };
    absorb(0);
    while (chosen.size() + 1 < opt.classes) {
        const auto it = std::max_element(nearest.begin(), nearest.end());
        const auto c = static_cast<std::size_t>(it - nearest.begin());
        chosen.push_back(c);
        absorb(c);
    }
    std::size_t last = cand.size();
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (best_lambda[i] < 6.0 || best_lambda[i] > 7.0 || nearest[i] <= 0.0) continue;
        if (last == cand.size() || nearest[i] > nearest[last]) last = i;
    }
    if (last == cand.size()) throw std::runtime_error("canonical_postures: no near-overlap candidate; enlarge the pool");
    chosen.push_back(last);

    CanonicalPostureSet set;
    set.seed = seed;
    const auto& names = canonical_posture_names();
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        const Angles& a = cand[chosen[k]];
        std::array<UnitQuaternion, kJointCount> q;
        for (std::size_t j = 0; j < kJointCount; ++j) q[j] = joint_rotation(a[j][0], a[j][1]);
        set.dictionary.shots.push_back(PoseVector(q));
        set.dictionary.names.push_back(k < names.size() ? names[k] : "posture_" + std::to_string(k + 1));
        set.joint_angles.push_back(a);
    }
    const auto n = static_cast<Eigen::Index>(set.size());
    set.lambda.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            set.lambda(a, b) = lambda_similarity(pose_to_features(set.dictionary.shots[static_cast<std::size_t>(a)]),
                                                 pose_to_features(set.dictionary.shots[static_cast<std::size_t>(b)]))
                                   .lambda;
        }
    }
    return set;
}

inline nlohmann::json posture_manifest_json(const CanonicalPostureSet& set) {
    nlohmann::json postures = nlohmann::json::array();
    for (std::size_t k = 0; k < set.size(); ++k) {
        nlohmann::json joints = nlohmann::json::array();
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const UnitQuaternion& q = set.dictionary.shots[k][j];
            joints.push_back({{"joint", kJointCodes[j]},
                              {"z_deg", set.joint_angles[k][j][0]},
                              {"x_deg", set.joint_angles[k][j][1]},
                              {"quaternion", {q.w(), q.x(), q.y(), q.z()}}});
        }
        postures.push_back({{"label", k + 1}, {"name", set.dictionary.names[k]}, {"joints", joints}});
    }
    std::vector<std::vector<double>> lam;
    for (Eigen::Index a = 0; a < set.lambda.rows(); ++a) {
        lam.emplace_back();
        for (Eigen::Index b = 0; b < set.lambda.cols(); ++b) lam.back().push_back(set.lambda(a, b));
    }
    return {{"seed", set.seed}, {"postures", postures}, {"pairwise_lambda", lam}};
}

inline CanonicalPostureSet posture_set_from_json(const nlohmann::json& j) {
    CanonicalPostureSet set;
    set.seed = j.value("seed", std::uint64_t{0});
    for (const auto& p : j.at("postures")) {
        std::array<UnitQuaternion, kJointCount> q;
        std::array<std::array<double, 2>, kJointCount> ang{};
        const auto& joints = p.at("joints");
        if (joints.size() != kJointCount) throw std::runtime_error("posture manifest: expected four joints");
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const auto c = joints[j].at("quaternion").get<std::vector<double>>();
            if (c.size() != 4) throw std::runtime_error("posture manifest: quaternion needs four components");
            q[j] = UnitQuaternion(c[0], c[1], c[2], c[3]);
            ang[j] = {joints[j].value("z_deg", 0.0), joints[j].value("x_deg", 0.0)};
        }
        set.dictionary.shots.push_back(PoseVector(q));
        set.dictionary.names.push_back(p.value("name", "posture_" + std::to_string(set.size())));
        set.joint_angles.push_back(ang);
    }
    const auto n = static_cast<Eigen::Index>(set.size());
    set.lambda.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            set.lambda(a, b) = lambda_similarity(pose_to_features(set.dictionary.shots[static_cast<std::size_t>(a)]),
                                                 pose_to_features(set.dictionary.shots[static_cast<std::size_t>(b)]))
                                   .lambda;
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// Motion sequence

/// Hips root with six channels; spine; two arm chains (Arm, ForeArm, Hand)
/// and two leg chains (UpLeg, Leg, Foot). Rotation channels are Z, Y, X.
inline SkeletonAnimation minimal_skeleton() {
    const std::vector<Channel> rot{Channel::Zrotation, Channel::Yrotation, Channel::Xrotation};
    SkeletonAnimation a;
    auto add = [&](const std::string& name, int parent, Vec3 offset, std::vector<Channel> ch, bool end = false) {
        BvhJoint j;
        j.name = name;
        j.parent = parent;
        j.offset = offset;
        j.channels = std::move(ch);
        j.end_site = end;
        a.joints.push_back(j);
        return static_cast<int>(a.joints.size()) - 1;
    };
    const int hips = add("Hips", -1, Vec3::Zero(),
                         {Channel::Xposition, Channel::Yposition, Channel::Zposition, Channel::Zrotation,
                          Channel::Yrotation, Channel::Xrotation});
    const int spine = add("Spine", hips, {0, 10, 0}, rot);
    for (const char* side : {"Right", "Left"}) {
        const double s = std::string(side) == "Right" ? -1.0 : 1.0;
        const int arm = add(std::string(side) + "Arm", spine, {s * 18, 30, 0}, rot);
        const int fore = add(std::string(side) + "ForeArm", arm, {s * 28, 0, 0}, rot);
        const int hand = add(std::string(side) + "Hand", fore, {s * 25, 0, 0}, rot);
        add(std::string(side) + "Hand_End", hand, {s * 18, 0, 0}, {}, true);
    }
    for (const char* side : {"Right", "Left"}) {
        const double s = std::string(side) == "Right" ? -1.0 : 1.0;
        const int up = add(std::string(side) + "UpLeg", hips, {s * 10, 0, 0}, rot);
        const int leg = add(std::string(side) + "Leg", up, {0, -45, 0}, rot);
        const int foot = add(std::string(side) + "Foot", leg, {0, -42, 0}, rot);
        add(std::string(side) + "Foot_End", foot, {0, -6, 14}, {}, true);
    }
    std::size_t c = 0;
    for (auto& j : a.joints) {
        j.first_channel = c;
        c += j.channels.size();
    }
    a.frame_time = 1.0 / 30.0;
    a.frames.resize(0, static_cast<Eigen::Index>(c));
    return a;
}

namespace detail {

// Full body configuration of one posture: root translation plus one rotation
// per rotating joint.
struct BodyConfig {
    Vec3 root_position = Vec3::Zero();
    std::vector<UnitQuaternion> rotations;
};

inline BodyConfig posture_body(const SkeletonAnimation& skel, const CanonicalPostureSet& set, std::size_t k) {
    Rng rng = make_rng(set.seed, streams::kPostures + 0x100 + k);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BodyConfig b;
    b.root_position = {20.0 * u(rng), 5.0 * u(rng), 20.0 * u(rng)};
    const JointSet js = JointSet::default_rig();
    for (std::size_t i = 0; i < skel.joints.size(); ++i) {
        const auto& j = skel.joints[i];
        UnitQuaternion q;
        if (!j.end_site) {
            const double amp = j.parent < 0 ? 180.0 : 40.0;
            q = UnitQuaternion::from_axis_angle(Vec3(u(rng), u(rng), u(rng)).normalized(), deg2rad(amp * std::abs(u(rng))));
        }
        for (std::size_t p = 0; p < kJointCount; ++p) {
            if (j.name == js.pairs[p].child) q = set.dictionary.shots[k][p];
        }
        b.rotations.push_back(q);
    }
    return b;
}

inline void write_frame(SkeletonAnimation& anim, Eigen::Index f, const BodyConfig& b) {
    for (std::size_t i = 0; i < anim.joints.size(); ++i) {
        const auto& j = anim.joints[i];
        if (j.channels.empty()) continue;
        const auto e = rotation_to_euler(b.rotations[i].to_matrix(), EulerOrder::ZYX);
        std::size_t r = 0;
        for (std::size_t c = 0; c < j.channels.size(); ++c) {
            const auto col = static_cast<Eigen::Index>(j.first_channel + c);
            if (is_rotation(j.channels[c])) {
                anim.frames(f, col) = e[r++];
            } else {
                anim.frames(f, col) = b.root_position(channel_axis(j.channels[c]));
            }
        }
    }
}

}  // namespace detail

inline std::size_t motion_frame_count(std::size_t postures, std::size_t hold, std::size_t transition) {
    return postures == 0 ? 0 : postures * hold + (postures - 1) * transition;
}

/// Holds each posture for `hold` frames with `transition` interpolated frames
/// in between (slerp per joint, linear root translation).
inline SkeletonAnimation generate_motion_sequence(const CanonicalPostureSet& set, std::size_t hold,
                                                  std::size_t transition, double frame_time = 1.0 / 30.0) {
    if (hold < 1 || transition < 1) throw std::invalid_argument("hold and transition must be >= 1 frame");
    if (set.size() == 0) throw std::invalid_argument("generate_motion_sequence: empty posture set");
    SkeletonAnimation anim = minimal_skeleton();
    anim.frame_time = frame_time;
    anim.frames.resize(static_cast<Eigen::Index>(motion_frame_count(set.size(), hold, transition)), anim.frames.cols());
    std::vector<detail::BodyConfig> bodies;
    for (std::size_t k = 0; k < set.size(); ++k) bodies.push_back(detail::posture_body(anim, set, k));
    Eigen::Index f = 0;
    for (std::size_t k = 0; k < set.size(); ++k) {
        for (std::size_t h = 0; h < hold; ++h) detail::write_frame(anim, f++, bodies[k]);
        if (k + 1 == set.size()) break;
        for (std::size_t t = 1; t <= transition; ++t) {
            const double u = static_cast<double>(t) / static_cast<double>(transition + 1);
            detail::BodyConfig b;
            b.root_position = (1.0 - u) * bodies[k].root_position + u * bodies[k + 1].root_position;
            for (std::size_t i = 0; i < bodies[k].rotations.size(); ++i) {
                b.rotations.push_back(slerp(bodies[k].rotations[i], bodies[k + 1].rotations[i], u));
            }
            detail::write_frame(anim, f++, b);
        }
    }
    return anim;
}

/// Frame index at the middle of posture k's hold block.
inline std::size_t hold_midpoint(std::size_t k, std::size_t hold, std::size_t transition) {
    return k * (hold + transition) + hold / 2;
}

/// One shot per posture, characterized from the hold midpoints of a sequence.
inline PostureDictionary dictionary_from_motion(const SkeletonAnimation& anim, std::size_t postures,
                                                std::size_t hold, std::size_t transition,
                                                const JointSet& joints = JointSet::default_rig()) {
    if (static_cast<std::size_t>(anim.frames.rows()) != motion_frame_count(postures, hold, transition)) {
        throw std::invalid_argument("motion sequence length does not match the hold/transition schedule");
    }
    PostureDictionary d;
    for (std::size_t k = 0; k < postures; ++k) {
        d.shots.push_back(characterize_pose_virtual(anim, hold_midpoint(k, hold, transition), joints));
        d.names.push_back("posture_" + std::to_string(k + 1));
    }
    return d;
}

// ---------------------------------------------------------------------------
// IMU synthesis

struct ImuNoiseModel {
    double gyro_std = 0.0;   ///< rad/s
    double accel_std = 0.0;  ///< m/s^2
    double mag_std = 0.0;    ///< fraction of the unit field
    Vec3 gyro_bias = Vec3::Zero();

    static ImuNoiseModel realistic() { return {0.005, 0.05, 0.01, Vec3::Zero()}; }

    void validate() const {
        if (!(gyro_std >= 0) || !(accel_std >= 0) || !(mag_std >= 0)) {
            throw std::invalid_argument("IMU noise levels must be non-negative");
        }
    }
};

/// Sensor readings along an orientation trajectory sampled uniformly at
/// `rate_hz`. Body rates come from central differences of the quaternion log
/// (one-sided at the ends); accel and mag are the Earth references seen in the
/// sensor frame.
inline std::vector<ImuSample> synthesize_imu_stream(const std::vector<TimedQuat>& traj, double rate_hz,
                                                    const ImuNoiseModel& noise, Rng& rng) {
    if (!(rate_hz > 0.0)) throw std::invalid_argument("synthesize_imu_stream: rate must be positive");
    noise.validate();
    if (traj.empty()) throw std::invalid_argument("synthesize_imu_stream: empty trajectory");
    const double period_us = 1e6 / rate_hz;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double d = static_cast<double>(traj[k].timestamp_us - traj[k - 1].timestamp_us);
        if (std::abs(d - period_us) > 1.0) throw std::invalid_argument("synthesize_imu_stream: non-uniform trajectory");
    }
    const double dt = 1.0 / rate_hz;
    std::normal_distribution<double> n01(0.0, 1.0);
    auto jitter = [&](double s) { return Vec3(s * n01(rng), s * n01(rng), s * n01(rng)); };
    const Vec3 up = -earth_gravity();
    const Vec3 field = earth_magnetic_field();
    std::vector<ImuSample> out(traj.size());
    const std::size_t n = traj.size();
    for (std::size_t k = 0; k < n; ++k) {
        Vec3 w = Vec3::Zero();
        if (n > 1) {
            const std::size_t a = k == 0 ? 0 : k - 1;
            const std::size_t b = k + 1 == n ? n - 1 : k + 1;
            w = quat_log(traj[a].q.conjugate() * traj[b].q) / (static_cast<double>(b - a) * dt);
        }
        const Mat3 rt = traj[k].q.to_matrix().transpose();
        ImuSample& s = out[k];
        s.timestamp_us = traj[k].timestamp_us;
        s.gyro = w + noise.gyro_bias + jitter(noise.gyro_std);
        s.accel = rt * up + jitter(noise.accel_std);
        s.mag = rt * field + jitter(noise.mag_std);
    }
    return out;
}

inline SensorModuleStream synthesize_imu_streams(const std::vector<TimedQuat>& parent, const std::vector<TimedQuat>& child,
                                                 double rate_hz, const ImuNoiseModel& noise, std::uint64_t seed,
                                                 std::size_t joint = 0) {
    SensorModuleStream m;
    m.joint = joint;
    Rng rp = make_rng(seed, streams::kImuNoise + 2 * joint);
    Rng rc = make_rng(seed, streams::kImuNoise + 2 * joint + 1);
    m.parent = synthesize_imu_stream(parent, rate_hz, noise, rp);
    m.child = synthesize_imu_stream(child, rate_hz, noise, rc);
    return m;
}

inline std::vector<TimedQuat> uniform_trajectory(std::int64_t t0_us, double rate_hz, std::size_t count,
                                                 const std::function<UnitQuaternion(double)>& q_of_t) {
    std::vector<TimedQuat> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / rate_hz;
        out.push_back({t0_us + static_cast<std::int64_t>(std::llround(t * 1e6)), q_of_t(t)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Wearable sessions

struct SessionOptions {
    double rate_hz = 30.0;
    double duration_s = 20.0;
    double transition_s = 2.0;           ///< neutral pose to target posture
    double base_tilt_deg = 15.0;         ///< max initial parent misalignment from the Earth frame
    double sway_deg = 2.0;               ///< slow breathing-like sway amplitude of the parent segments
    double sway_hz = 0.25;
    double relative_jitter_deg = 0.5;    ///< slow wobble of each joint around the target
    /// One draw of spherical noise applied to the target at session start,
    /// emulating how a posture is re-adopted differently each time.
    double perturb_phi_sq = 0.0;
    double perturb_theta_sq = 0.0;
    ImuNoiseModel noise = ImuNoiseModel::realistic();
};

struct SynthSession {
    int label = 0;
    PoseVector target;                                         ///< relative orientations held after the transition
    ImuSession imu;
    std::array<std::vector<TimedQuat>, kJointCount> truth;     ///< ground-truth relative orientations
};

/// A session in which every module's child segment moves from the neutral
/// pose (aligned with its parent) into `posture` and holds it. The relative
/// orientation conj(child) * parent follows the schedule exactly.
inline SynthSession synthesize_session(const PoseVector& posture, int label, const SessionOptions& opt,
                                       std::uint64_t seed) {
    if (!(opt.duration_s > 0) || !(opt.transition_s >= 0) || opt.transition_s >= opt.duration_s) {
        throw std::invalid_argument("session duration must exceed the transition");
    }
    Rng rng = make_rng(seed, streams::kSessions);
    SynthSession s;
    s.label = label;
    s.target = posture;
    if (opt.perturb_phi_sq > 0 || opt.perturb_theta_sq > 0) {
        AugmentSettings a;
        a.sigma_phi_sq = opt.perturb_phi_sq;
        a.sigma_theta_sq = opt.perturb_theta_sq;
        s.target = features_to_pose(augment_pose_once(posture, a, rng));
    }
    const auto count = static_cast<std::size_t>(std::floor(opt.duration_s * opt.rate_hz)) + 1;
    std::uniform_real_distribution<double> u(-1.0, 1.0), u01(0.0, 1.0);
    auto rand_axis = [&] { return Vec3(u(rng), u(rng), u(rng)).normalized(); };

    for (std::size_t j = 0; j < kJointCount; ++j) {
        const UnitQuaternion base = UnitQuaternion::from_axis_angle(rand_axis(), deg2rad(opt.base_tilt_deg * u01(rng)));
        const Vec3 sway_axis = rand_axis(), wobble_axis = rand_axis();
        const double phase = 2.0 * kPi * u01(rng), wobble_phase = 2.0 * kPi * u01(rng);
        const UnitQuaternion chi = s.target[j];
        auto rel_at = [&](double t) {
            const double x = opt.transition_s > 0 ? std::clamp(t / opt.transition_s, 0.0, 1.0) : 1.0;
            const double ease = x * x * (3.0 - 2.0 * x);
            const UnitQuaternion wobble = UnitQuaternion::from_axis_angle(
                wobble_axis, deg2rad(opt.relative_jitter_deg) * std::sin(2.0 * kPi * 0.1 * t + wobble_phase) * ease);
            return slerp(UnitQuaternion::identity(), chi, ease) * wobble;
        };
        auto parent_at = [&](double t) {
            return base * UnitQuaternion::from_axis_angle(
                              sway_axis, deg2rad(opt.sway_deg) * std::sin(2.0 * kPi * opt.sway_hz * t + phase));
        };
        const auto parent = uniform_trajectory(0, opt.rate_hz, count, parent_at);
        const auto child = uniform_trajectory(0, opt.rate_hz, count, [&](double t) {
            return parent_at(t) * rel_at(t).conjugate();
        });
        s.imu.modules[j] = synthesize_imu_streams(parent, child, opt.rate_hz, opt.noise, derive_seed(seed, j), j);
        s.truth[j] = uniform_trajectory(0, opt.rate_hz, count, [&](double t) { return rel_at(t).canonical(); });
    }
    return s;
}

}  // namespace sleepose
