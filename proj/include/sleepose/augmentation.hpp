// SPDX-License-Identifier: Apache-2.0
//
// One-shot kinematic augmentation: Gaussian noise injected into the
// spherical axis-angle form (polar, azimuth, angle) of every joint.
#pragma once

#include "sleepose/dataset.hpp"
#include "sleepose/parallel.hpp"
#include "sleepose/pose.hpp"
#include "sleepose/random.hpp"
#include "sleepose/rotations.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sleepose {

/// Noise variances are in degrees squared.
struct AugmentSettings {
    double sigma_phi_sq = 800.0;    ///< axis (polar and azimuth) variance
    double sigma_theta_sq = 100.0;  ///< rotation-angle variance
    std::size_t count = 1000;       ///< rows per class, including the shot when kept
    std::uint64_t seed = 0;

    void validate() const {
        if (!(sigma_phi_sq >= 0.0) || !(sigma_theta_sq >= 0.0)) {
            throw std::invalid_argument("augmentation variances must be non-negative");
        }
        if (count < 1) throw std::invalid_argument("augmentation count must be >= 1");
    }
};

inline void to_json(nlohmann::json& j, const AugmentSettings& s) {
    j = {{"sigma_phi_sq", s.sigma_phi_sq}, {"sigma_theta_sq", s.sigma_theta_sq}, {"count", s.count}, {"seed", s.seed}};
}

/// The grid of (axis, angle) variances swept in the experiments.
inline const std::vector<double>& axis_variance_grid() {
    static const std::vector<double> g{20, 200, 400, 600, 800, 1000};
    return g;
}
inline const std::vector<double>& angle_variance_grid() {
    static const std::vector<double> g{20, 100, 200, 300, 400, 500};
    return g;
}

/// One reference observation per posture class; labels are 1-based indices.
struct PostureDictionary {
    std::vector<PoseVector> shots;
    std::vector<std::string> names;

    std::size_t classes() const { return shots.size(); }
};

/// Brings a perturbed spherical triple back into range: the polar angle is
/// reflected at the poles (flipping the azimuth by 180 degrees), the azimuth
/// wraps modulo 360 and the rotation angle is clamped to [0, 180].
inline AxisAngleSpherical wrap_spherical(AxisAngleSpherical s) {
    double p = std::fmod(s.polar, 360.0);
    if (p < 0.0) p += 360.0;
    double a = s.azimuth;
    if (p > 180.0) {
        p = 360.0 - p;
        a += 180.0;
    }
    s.polar = p;
    s.azimuth = wrap_degrees_360(a);
    s.angle = std::clamp(s.angle, 0.0, 180.0);
    return s;
}

/// Adds independent N(0, sigma_phi^2) noise to polar and azimuth and
/// N(0, sigma_theta^2) to the angle, then wraps. Always consumes three
/// standard normals so streams stay aligned across settings.
template <typename Engine>
AxisAngleSpherical augment_joint(const AxisAngleSpherical& joint, const AugmentSettings& settings, Engine& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    const double sp = std::sqrt(settings.sigma_phi_sq);
    const double st = std::sqrt(settings.sigma_theta_sq);
    const double dp = sp * unit(rng);
    const double da = sp * unit(rng);
    const double dt = st * unit(rng);
    if (dp == 0.0 && da == 0.0 && dt == 0.0) return joint;
    return wrap_spherical({joint.polar + dp, joint.azimuth + da, joint.angle + dt});
}

namespace detail {

// Converts one augmented joint into feature form. Unperturbed components are
// copied from the reference so zero-variance augmentation is bit-exact.
inline void write_joint_features(FeatureVector& x, std::size_t j, const AxisAngleCartesian& reference,
                                 const AxisAngleSpherical& ref_sph, const AxisAngleSpherical& out_sph) {
    const bool same_axis = out_sph.polar == ref_sph.polar && out_sph.azimuth == ref_sph.azimuth;
    const bool same_angle = out_sph.angle == ref_sph.angle;
    const AxisAngleCartesian cart = spherical_to_cartesian_axis(out_sph);
    x.segment<3>(4 * j) = same_axis ? reference.axis : cart.axis;
    x(4 * j + 3) = same_angle ? reference.angle : cart.angle;
}

}  // namespace detail

/// Augments every joint of one pose once.
template <typename Engine>
FeatureVector augment_pose_once(const PoseVector& shot, const AugmentSettings& settings, Engine& rng) {
    FeatureVector x;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const AxisAngleCartesian ref = shot.axis_angle(j);
        const AxisAngleSpherical sph = cartesian_to_spherical_axis(ref);
        detail::write_joint_features(x, j, ref, sph, augment_joint(sph, settings, rng));
    }
    return x;
}

/// `settings.count` feature rows for one posture. With `keep_shot` the first
/// row is the unmodified shot and the remaining rows are augmentations.
template <typename Engine>
FeatureMatrix augment_posture(const PoseVector& shot, const AugmentSettings& settings, Engine& rng,
                              bool keep_shot = true) {
    settings.validate();
    FeatureMatrix rows(static_cast<Eigen::Index>(settings.count), static_cast<Eigen::Index>(kFeatureDim));
    std::size_t start = 0;
    if (keep_shot) {
        rows.row(0) = pose_to_features(shot).transpose();
        start = 1;
    }
    for (std::size_t i = start; i < settings.count; ++i) {
        rows.row(static_cast<Eigen::Index>(i)) = augment_pose_once(shot, settings, rng).transpose();
    }
    return rows;
}

struct AugmentedDataset {
    LabeledFeatures data;
    AugmentSettings settings;
    std::uint64_t stream = 0;  ///< RNG stream tag the classes were derived from
    bool keeps_shot = true;
};

inline nlohmann::json manifest_json(const AugmentedDataset& d, const std::string& provenance) {
    return {{"settings", d.settings},
            {"seed", d.settings.seed},
            {"stream", d.stream},
            {"keeps_shot", d.keeps_shot},
            {"rows", d.data.size()},
            {"provenance", provenance}};
}

/// Per-class augmentation with class sub-seeds derived from
/// (settings.seed, stream + class index); classes run concurrently and are
/// concatenated in class order.
inline AugmentedDataset build_training_dictionary(const PostureDictionary& dict, const AugmentSettings& settings,
                                                  std::uint64_t stream = streams::kTrainAugment,
                                                  bool keep_shot = true, std::size_t jobs = 1) {
    settings.validate();
    if (dict.classes() < 1) throw std::invalid_argument("posture dictionary is empty");
    std::vector<FeatureMatrix> blocks(dict.classes());
    parallel_for(dict.classes(), jobs, [&](std::size_t k) {
        Rng rng = make_rng(settings.seed, stream + k);
        blocks[k] = augment_posture(dict.shots[k], settings, rng, keep_shot);
    });
    AugmentedDataset out;
    out.settings = settings;
    out.stream = stream;
    out.keeps_shot = keep_shot;
    out.data.X.resize(static_cast<Eigen::Index>(settings.count * dict.classes()), Eigen::NoChange);
    for (std::size_t k = 0; k < dict.classes(); ++k) {
        out.data.X.middleRows(static_cast<Eigen::Index>(k * settings.count), static_cast<Eigen::Index>(settings.count)) =
            blocks[k];
        out.data.labels.insert(out.data.labels.end(), settings.count, static_cast<int>(k + 1));
    }
    return out;
}

/// Baseline for comparison only: Gaussian noise on raw quaternion components
/// followed by renormalization.
template <typename Engine>
UnitQuaternion augment_quaternion_naive(const UnitQuaternion& q, double variance, Engine& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    const double s = std::sqrt(variance);
    while (true) {
        const double w = q.w() + s * unit(rng), x = q.x() + s * unit(rng);
        const double y = q.y() + s * unit(rng), z = q.z() + s * unit(rng);
        if (w * w + x * x + y * y + z * z > 1e-24) return UnitQuaternion(w, x, y, z).canonical();
    }
}

}  // namespace sleepose
