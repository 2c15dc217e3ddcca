// SPDX-License-Identifier: Apache-2.0
//
// Inter-sensor fusion: per-module relative orientations from paired IMU
// estimates, resampling onto one time grid, the NaN-padded test matrix, and
// the IMU / orientation CSV formats.
#pragma once

#include "sleepose/dataset.hpp"
#include "sleepose/madgwick.hpp"
#include "sleepose/parallel.hpp"
#include "sleepose/pose.hpp"
#include "sleepose/rotations.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

/// Raw streams of one wearable module: parent IMU (proximal segment) and
/// child IMU (distal segment).
struct SensorModuleStream {
    std::size_t joint = 0;  ///< index into kJointCodes
    std::vector<ImuSample> parent;
    std::vector<ImuSample> child;
};

/// All four modules of one recording session.
struct ImuSession {
    std::array<SensorModuleStream, kJointCount> modules;

    ImuSession() {
        for (std::size_t j = 0; j < kJointCount; ++j) modules[j].joint = j;
    }
};

struct FusedSequence {
    std::vector<TimedQuat> samples;
    std::size_t dropped = 0;  ///< parent or child samples left unpaired
};

/// Pairs every parent sample with the nearest child sample within
/// `tolerance_us` and emits relative_quat at the parent's timestamp. Each child
/// sample is used at most once.
inline FusedSequence fuse_module(const std::vector<TimedQuat>& parent, const std::vector<TimedQuat>& child,
                                 std::int64_t tolerance_us) {
    if (parent.empty() || child.empty()) throw std::invalid_argument("fuse_module: empty orientation sequence");
    FusedSequence out;
    out.samples.reserve(parent.size());
    std::vector<bool> used(child.size(), false);
    std::size_t c = 0;
    for (const auto& p : parent) {
        while (c + 1 < child.size() &&
               std::llabs(child[c + 1].timestamp_us - p.timestamp_us) <= std::llabs(child[c].timestamp_us - p.timestamp_us)) {
            ++c;
        }
        if (!used[c] && std::llabs(child[c].timestamp_us - p.timestamp_us) <= tolerance_us) {
            used[c] = true;
            out.samples.push_back({p.timestamp_us, relative_quat(p.q, child[c].q)});
        } else {
            ++out.dropped;
        }
    }
    out.dropped += static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
    return out;
}

/// Four joint channels resampled onto a shared uniform grid.
struct PoseTimeseries {
    std::vector<std::int64_t> timestamps_us;
    std::vector<PoseVector> poses;

    std::size_t size() const { return poses.size(); }

    FeatureMatrix features() const {
        FeatureMatrix x(static_cast<Eigen::Index>(poses.size()), static_cast<Eigen::Index>(kFeatureDim));
        for (std::size_t i = 0; i < poses.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = pose_to_features(poses[i]).transpose();
        return x;
    }

    /// Drops samples earlier than `seconds` after the first one.
    PoseTimeseries after(double seconds) const {
        PoseTimeseries out;
        if (poses.empty()) return out;
        const auto cut = timestamps_us.front() + static_cast<std::int64_t>(std::llround(seconds * 1e6));
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (timestamps_us[i] >= cut) {
                out.timestamps_us.push_back(timestamps_us[i]);
                out.poses.push_back(poses[i]);
            }
        }
        return out;
    }
};

inline PoseVector characterize_pose_wearable(const std::array<UnitQuaternion, kJointCount>& relative) {
    return PoseVector(relative);
}

namespace detail {

// nlerp of a strictly time-ordered sequence at t, which must lie inside it.
inline UnitQuaternion sample_at(const std::vector<TimedQuat>& seq, std::size_t& cursor, std::int64_t t) {
    while (cursor + 1 < seq.size() && seq[cursor + 1].timestamp_us <= t) ++cursor;
    const TimedQuat& a = seq[cursor];
    if (a.timestamp_us == t || cursor + 1 == seq.size()) return a.q;
    const TimedQuat& b = seq[cursor + 1];
    const double u = static_cast<double>(t - a.timestamp_us) / static_cast<double>(b.timestamp_us - a.timestamp_us);
    return nlerp(a.q, b.q, u);
}

}  // namespace detail

/// Resamples four relative-orientation channels at `rate_hz` over the window
/// covered by all of them. Interpolation is nlerp; nothing is extrapolated.
inline PoseTimeseries synchronize_streams(const std::array<std::vector<TimedQuat>, kJointCount>& channels,
                                          double rate_hz) {
    if (!(rate_hz > 0.0)) throw std::invalid_argument("synchronize_streams: rate must be positive");
    std::int64_t start = std::numeric_limits<std::int64_t>::min();
    std::int64_t end = std::numeric_limits<std::int64_t>::max();
    for (const auto& ch : channels) {
        if (ch.empty()) throw std::invalid_argument("synchronize_streams: empty channel");
        for (std::size_t i = 1; i < ch.size(); ++i) {
            if (ch[i].timestamp_us <= ch[i - 1].timestamp_us) {
                throw std::invalid_argument("synchronize_streams: non-monotonic timestamps");
            }
        }
        start = std::max(start, ch.front().timestamp_us);
        end = std::min(end, ch.back().timestamp_us);
    }
    if (start > end) throw std::invalid_argument("synchronize_streams: empty intersection window");

    PoseTimeseries out;
    std::array<std::size_t, kJointCount> cursor{};
    const double period_us = 1e6 / rate_hz;
    for (std::size_t k = 0;; ++k) {
        const auto t = start + static_cast<std::int64_t>(std::llround(static_cast<double>(k) * period_us));
        if (t > end) break;
        std::array<UnitQuaternion, kJointCount> q;
        for (std::size_t j = 0; j < kJointCount; ++j) q[j] = detail::sample_at(channels[j], cursor[j], t);
        out.timestamps_us.push_back(t);
        out.poses.push_back(characterize_pose_wearable(q));
    }
    return out;
}

struct FusionConfig {
    double beta = 0.1;
    double rate_hz = 30.0;
    double warmup_s = 5.0;
};

struct SessionDiagnostics {
    std::array<std::size_t, kJointCount> dropped{};
    FilterDiagnostics filter;
};

/// Filters both IMUs of every module, fuses, synchronizes and discards the
/// warm-up. The eight filters are independent and run on up to `jobs` threads.
inline PoseTimeseries process_session(const ImuSession& session, const FusionConfig& cfg, std::size_t jobs = 1,
                                      SessionDiagnostics* diag = nullptr) {
    std::array<std::vector<TimedQuat>, 2 * kJointCount> est;
    std::array<FilterDiagnostics, 2 * kJointCount> fd{};
    parallel_for(2 * kJointCount, jobs, [&](std::size_t i) {
        const auto& m = session.modules[i / 2];
        const auto& stream = i % 2 == 0 ? m.parent : m.child;
        if (stream.empty()) {
            throw std::invalid_argument(std::string("module ") + std::string(kJointCodes[i / 2]) + " has an empty stream");
        }
        est[i] = estimate_stream_orientation(stream, cfg.beta, UnitQuaternion::identity(), cfg.rate_hz, &fd[i]);
    });
    const auto tol = static_cast<std::int64_t>(std::llround(0.5e6 / cfg.rate_hz));
    std::array<std::vector<TimedQuat>, kJointCount> rel;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        FusedSequence f = fuse_module(est[2 * j], est[2 * j + 1], tol);
        if (f.samples.empty()) throw std::invalid_argument("module " + std::string(kJointCodes[j]) + ": no paired samples");
        rel[j] = std::move(f.samples);
        if (diag) diag->dropped[j] = f.dropped;
    }
    if (diag) {
        for (const auto& d : fd) {
            diag->filter.updates += d.updates;
            diag->filter.gyro_only_steps += d.gyro_only_steps;
        }
    }
    return synchronize_streams(rel, cfg.rate_hz).after(cfg.warmup_s);
}

// ---------------------------------------------------------------------------
// Test matrix

struct LabeledRecording {
    int label = 0;  ///< 1-based
    FeatureMatrix features;
};

/// Recordings side by side: column block j holds recording j, rows past its
/// length are padding. `mask(r, j)` is true for real rows.
struct TestMatrix {
    Eigen::MatrixXd values;  ///< O x (16 * recordings), NaN in padding
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
    std::vector<std::size_t> lengths;
    std::vector<int> labels;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t recordings() const { return lengths.size(); }

    std::size_t padded_count() const {
        std::size_t n = 0;
        for (std::size_t l : lengths) n += rows() - l;
        return n;
    }

    /// Real rows only, recording by recording.
    LabeledFeatures flatten() const {
        LabeledFeatures out;
        std::size_t total = 0;
        for (std::size_t l : lengths) total += l;
        out.X.resize(static_cast<Eigen::Index>(total), Eigen::NoChange);
        out.labels.reserve(total);
        Eigen::Index r = 0;
        for (std::size_t j = 0; j < recordings(); ++j) {
            for (Eigen::Index i = 0; i < values.rows(); ++i) {
                if (!mask(i, static_cast<Eigen::Index>(j))) continue;
                out.X.row(r++) = values.block(i, static_cast<Eigen::Index>(kFeatureDim * j), 1, kFeatureDim);
                out.labels.push_back(labels[j]);
            }
        }
        return out;
    }
};

inline TestMatrix build_test_matrix(const std::vector<LabeledRecording>& recs) {
    if (recs.empty()) throw std::invalid_argument("build_test_matrix: no recordings");
    TestMatrix m;
    std::size_t o = 0;
    for (const auto& r : recs) {
        if (r.features.rows() == 0) throw std::invalid_argument("build_test_matrix: zero-length recording");
        o = std::max(o, static_cast<std::size_t>(r.features.rows()));
    }
    const auto rows = static_cast<Eigen::Index>(o);
    m.values = Eigen::MatrixXd::Constant(rows, static_cast<Eigen::Index>(kFeatureDim * recs.size()),
                                         std::numeric_limits<double>::quiet_NaN());
    m.mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, static_cast<Eigen::Index>(recs.size()), false);
    for (std::size_t j = 0; j < recs.size(); ++j) {
        const auto n = recs[j].features.rows();
        m.values.block(0, static_cast<Eigen::Index>(kFeatureDim * j), n, kFeatureDim) = recs[j].features;
        m.mask.col(static_cast<Eigen::Index>(j)).head(n).setConstant(true);
        m.lengths.push_back(static_cast<std::size_t>(n));
        m.labels.push_back(recs[j].label);
    }
    return m;
}

// ---------------------------------------------------------------------------
// CSV formats

inline constexpr const char* kImuCsvHeader = "timestamp_us,module_id,imu_role,gx,gy,gz,ax,ay,az,mx,my,mz";
inline constexpr const char* kOrientationCsvHeader = "t,joint,qw,qx,qy,qz";

/// Gyro values are written in deg/s.
inline void write_imu_csv(std::ostream& out, const ImuSession& s) {
    out << kImuCsvHeader << "\n";
    struct Row {
        std::int64_t t;
        std::size_t joint;
        char role;
        const ImuSample* s;
    };
    std::vector<Row> rows;
    for (const auto& m : s.modules) {
        for (const auto& x : m.parent) rows.push_back({x.timestamp_us, m.joint, 'p', &x});
        for (const auto& x : m.child) rows.push_back({x.timestamp_us, m.joint, 'c', &x});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.joint != b.joint) return a.joint < b.joint;
        return a.role > b.role;  // p before c
    });
    for (const auto& r : rows) {
        out << r.t << ',' << kJointCodes[r.joint] << ',' << r.role;
        for (int k = 0; k < 3; ++k) out << ',' << detail::shortest(rad2deg(r.s->gyro(k)));
        for (int k = 0; k < 3; ++k) out << ',' << detail::shortest(r.s->accel(k));
        for (int k = 0; k < 3; ++k) out << ',' << detail::shortest(r.s->mag(k));
        out << "\n";
    }
}

/// Reads one session; gyro converted from deg/s to rad/s. Each stream must be
/// strictly increasing in time.
inline ImuSession read_imu_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("IMU CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kImuCsvHeader) throw std::runtime_error("IMU CSV: unexpected header");
    ImuSession s;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 12) throw std::runtime_error("IMU CSV line " + std::to_string(lineno) + ": expected 12 columns");
        ImuSample x;
        const double t = detail::to_double(cells[0], lineno);
        if (t != std::floor(t)) throw std::runtime_error("IMU CSV line " + std::to_string(lineno) + ": fractional timestamp");
        x.timestamp_us = static_cast<std::int64_t>(t);
        std::size_t joint = 0;
        try {
            joint = joint_index_from_code(cells[1]);
        } catch (const std::exception&) {
            throw std::runtime_error("IMU CSV line " + std::to_string(lineno) + ": unknown module '" + cells[1] + "'");
        }
        if (cells[2] != "p" && cells[2] != "c") {
            throw std::runtime_error("IMU CSV line " + std::to_string(lineno) + ": imu_role must be p or c");
        }
        for (int k = 0; k < 3; ++k) {
            x.gyro(k) = deg2rad(detail::to_double(cells[3 + static_cast<std::size_t>(k)], lineno));
            x.accel(k) = detail::to_double(cells[6 + static_cast<std::size_t>(k)], lineno);
            x.mag(k) = detail::to_double(cells[9 + static_cast<std::size_t>(k)], lineno);
        }
        if (!x.gyro.allFinite() || !x.accel.allFinite() || !x.mag.allFinite()) {
            throw std::runtime_error("IMU CSV line " + std::to_string(lineno) + ": non-finite value");
        }
        auto& stream = cells[2] == "p" ? s.modules[joint].parent : s.modules[joint].child;
        if (!stream.empty() && x.timestamp_us <= stream.back().timestamp_us) {
            throw std::runtime_error("IMU CSV line " + std::to_string(lineno) + ": timestamps not increasing");
        }
        stream.push_back(x);
    }
    return s;
}

inline ImuSession load_imu_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_imu_csv(in);
}

inline void save_imu_csv(const std::string& path, const ImuSession& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_imu_csv(out, s);
}

/// `t` in seconds relative to the first sample.
inline void write_orientation_csv(std::ostream& out, const PoseTimeseries& ts) {
    out << kOrientationCsvHeader << "\n";
    if (ts.poses.empty()) return;
    const auto t0 = ts.timestamps_us.front();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string t = detail::shortest(static_cast<double>(ts.timestamps_us[i] - t0) * 1e-6);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const UnitQuaternion& q = ts.poses[i][j];
            out << t << ',' << kJointCodes[j] << ',' << detail::shortest(q.w()) << ',' << detail::shortest(q.x()) << ','
                << detail::shortest(q.y()) << ',' << detail::shortest(q.z()) << "\n";
        }
    }
}

inline PoseTimeseries read_orientation_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("orientation CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kOrientationCsvHeader) throw std::runtime_error("orientation CSV: unexpected header");
    std::map<std::int64_t, std::array<std::optional<UnitQuaternion>, kJointCount>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c = detail::split_csv(line);
        if (c.size() != 6) throw std::runtime_error("orientation CSV line " + std::to_string(lineno) + ": expected 6 columns");
        const auto t = static_cast<std::int64_t>(std::llround(detail::to_double(c[0], lineno) * 1e6));
        std::size_t j = 0;
        try {
            j = joint_index_from_code(c[1]);
        } catch (const std::exception&) {
            throw std::runtime_error("orientation CSV line " + std::to_string(lineno) + ": unknown joint '" + c[1] + "'");
        }
        rows[t][j] = UnitQuaternion(detail::to_double(c[2], lineno), detail::to_double(c[3], lineno),
                                    detail::to_double(c[4], lineno), detail::to_double(c[5], lineno));
    }
    PoseTimeseries ts;
    for (const auto& [t, qs] : rows) {
        std::array<UnitQuaternion, kJointCount> q;
        for (std::size_t j = 0; j < kJointCount; ++j) {
            if (!qs[j]) throw std::runtime_error("orientation CSV: joint " + std::string(kJointCodes[j]) + " missing at a timestamp");
            q[j] = *qs[j];
        }
        ts.timestamps_us.push_back(t);
        ts.poses.push_back(PoseVector(q));
    }
    return ts;
}

}  // namespace sleepose
