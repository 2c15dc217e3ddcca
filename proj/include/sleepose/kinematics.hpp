// SPDX-License-Identifier: Apache-2.0
//
// Forward kinematics over a parsed BVH skeleton and extraction of the
// four-joint pose vector.
#pragma once

#include "sleepose/bvh.hpp"
#include "sleepose/pose.hpp"
#include "sleepose/rotations.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

/// Transform of a joint relative to its parent for one frame: translation is
/// the OFFSET plus any position channels, rotation is the product of the
/// rotation channels in declared order.
inline RigidTransform local_transform(const SkeletonAnimation& anim, std::size_t joint, std::size_t frame) {
    const BvhJoint& jt = anim.joints.at(joint);
    RigidTransform t;
    t.translation = jt.offset;
    const auto row = static_cast<Eigen::Index>(frame);
    for (std::size_t c = 0; c < jt.channels.size(); ++c) {
        const double v = anim.frames(row, static_cast<Eigen::Index>(jt.first_channel + c));
        const Channel ch = jt.channels[c];
        if (is_rotation(ch)) {
            t.rotation = t.rotation * elementary_rotation(channel_axis(ch), deg2rad(v));
        } else {
            t.translation[channel_axis(ch)] += v;
        }
    }
    return t;
}

/// Global transform of every joint at `frame`, indexed like `anim.joints`.
inline std::vector<RigidTransform> forward_kinematics(const SkeletonAnimation& anim, std::size_t frame) {
    if (frame >= anim.frame_count()) {
        throw std::out_of_range("forward_kinematics: frame " + std::to_string(frame) + " out of range");
    }
    std::vector<RigidTransform> global(anim.joints.size());
    for (std::size_t j = 0; j < anim.joints.size(); ++j) {
        const RigidTransform local = local_transform(anim, j, frame);
        const int p = anim.joints[j].parent;
        global[j] = p < 0 ? local : global[static_cast<std::size_t>(p)] * local;
    }
    return global;
}

/// Child expressed in the parent's frame: parent^-1 * child.
inline RigidTransform relative_transform(const RigidTransform& parent_global, const RigidTransform& child_global) {
    return parent_global.inverse() * child_global;
}

inline UnitQuaternion extract_rotation(const RigidTransform& t) { return UnitQuaternion::from_matrix(t.rotation); }

struct JointPair {
    std::string parent;
    std::string child;
};

/// Parent/child segment names for each extremity joint in canonical order.
struct JointSet {
    std::array<JointPair, kJointCount> pairs;

    static JointSet default_rig() {
        return {{{{"RightForeArm", "RightHand"},
                  {"LeftForeArm", "LeftHand"},
                  {"RightLeg", "RightFoot"},
                  {"LeftLeg", "LeftFoot"}}}};
    }
};

namespace detail {

// An end site has no rotation channels; its distal frame is its parent's.
inline std::size_t resolve_segment(const SkeletonAnimation& anim, const std::string& name) {
    const auto idx = anim.find_joint(name);
    if (!idx) throw std::invalid_argument("joint set references unknown joint '" + name + "'");
    return *idx;
}

}  // namespace detail

inline PoseVector characterize_pose_virtual(const SkeletonAnimation& anim, std::size_t frame, const JointSet& joints) {
    std::array<std::size_t, kJointCount> parent{}, child{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        parent[j] = detail::resolve_segment(anim, joints.pairs[j].parent);
        child[j] = detail::resolve_segment(anim, joints.pairs[j].child);
    }
    const auto global = forward_kinematics(anim, frame);
    std::array<UnitQuaternion, kJointCount> q{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        q[j] = extract_rotation(relative_transform(global[parent[j]], global[child[j]]));
    }
    return PoseVector(q);
}

}  // namespace sleepose
