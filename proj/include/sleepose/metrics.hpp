// SPDX-License-Identifier: Apache-2.0
//
// Classification metrics and the hybrid axis/angle similarity score.
#pragma once

#include "sleepose/dataset.hpp"
#include "sleepose/pose.hpp"
#include "sleepose/random.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace sleepose {

namespace detail {

inline void check_pairs(std::span<const int> preds, std::span<const int> labels) {
    if (preds.size() != labels.size()) throw std::invalid_argument("predictions and labels differ in length");
    if (preds.empty()) throw std::invalid_argument("no samples to evaluate");
}

}  // namespace detail

inline double accuracy(std::span<const int> preds, std::span<const int> labels) {
    detail::check_pairs(preds, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

/// Rows are true classes, columns predicted; labels are 1-based.
struct ConfusionMatrix {
    Eigen::MatrixXi counts;

    int classes() const { return static_cast<int>(counts.rows()); }
    long long total() const { return counts.cast<long long>().sum(); }

    /// Each row divided by its support; rows without support stay zero.
    Eigen::MatrixXd row_normalized() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
        for (Eigen::Index r = 0; r < counts.rows(); ++r) {
            const double s = counts.row(r).sum();
            if (s > 0) out.row(r) = counts.row(r).cast<double>() / s;
        }
        return out;
    }

    std::vector<int> empty_rows() const {
        std::vector<int> out;
        for (Eigen::Index r = 0; r < counts.rows(); ++r) {
            if (counts.row(r).sum() == 0) out.push_back(static_cast<int>(r) + 1);
        }
        return out;
    }
};

inline ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, int classes) {
    detail::check_pairs(preds, labels);
    ConfusionMatrix m;
    m.counts = Eigen::MatrixXi::Zero(classes, classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] < 1 || labels[i] > classes || preds[i] < 1 || preds[i] > classes) {
            throw std::out_of_range("confusion: label out of range 1.." + std::to_string(classes));
        }
        ++m.counts(labels[i] - 1, preds[i] - 1);
    }
    return m;
}

struct F1Report {
    double macro = 0.0;
    std::vector<double> per_class;
    std::vector<int> zero_division;  ///< 1-based classes whose precision + recall was 0
};

/// Unweighted mean of per-class F1. A class with precision + recall = 0
/// (including a class absent from both truth and predictions) scores 0 and is
/// listed in `zero_division`.
inline F1Report macro_f1_report(std::span<const int> preds, std::span<const int> labels, int classes) {
    const ConfusionMatrix cm = confusion(preds, labels, classes);
    F1Report r;
    r.per_class.assign(static_cast<std::size_t>(classes), 0.0);
    long double sum = 0.0L;
    for (int k = 0; k < classes; ++k) {
        const long tp = cm.counts(k, k);
        const long fn = cm.counts.row(k).sum() - tp;
        const long fp = cm.counts.col(k).sum() - tp;
        // 2PR/(P+R) written as 2TP/(2TP+FP+FN): one rounding per class.
        if (tp > 0) {
            const long double f1 = 2.0L * tp / static_cast<long double>(2 * tp + fp + fn);
            r.per_class[static_cast<std::size_t>(k)] = static_cast<double>(f1);
            sum += f1;
        } else {
            r.zero_division.push_back(k + 1);
        }
    }
    r.macro = static_cast<double>(sum / classes);
    return r;
}

inline double macro_f1(std::span<const int> preds, std::span<const int> labels, int classes) {
    return macro_f1_report(preds, labels, classes).macro;
}

/// Axis and angle similarity of two pose feature vectors.
struct SimilarityScore {
    double lambda_phi = 0.0;    ///< sum of per-joint axis dot products, [-4, 4]
    double lambda_theta = 0.0;  ///< (4 pi - sum |dtheta|) / pi, [0, 4]
    double lambda = 0.0;        ///< lambda_phi + lambda_theta, [-4, 8]
};

inline SimilarityScore lambda_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (!valid_features(a, 1e-6) || !valid_features(b, 1e-6)) {
        throw std::invalid_argument("lambda_similarity: features need unit axes and angles in [0, pi]");
    }
    SimilarityScore s;
    double angle_err = 0.0;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        s.lambda_phi += a.segment<3>(4 * j).dot(b.segment<3>(4 * j));
        angle_err += std::abs(a(4 * j + 3) - b(4 * j + 3));
    }
    s.lambda_theta = (4.0 * kPi - angle_err) / kPi;
    s.lambda = s.lambda_phi + s.lambda_theta;
    return s;
}

/// Time-domain mean of pose features: per-joint mean axis renormalized to
/// unit length and the arithmetic mean of the angles.
inline FeatureVector feature_mean(const FeatureMatrix& rows) {
    if (rows.rows() == 0) throw std::invalid_argument("feature_mean: no rows");
    FeatureVector m = rows.colwise().mean().transpose();
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const double n = m.segment<3>(4 * j).norm();
        if (n > 1e-12) {
            m.segment<3>(4 * j) /= n;
        } else {
            m.segment<3>(4 * j) = Vec3::UnitZ();
        }
    }
    return m;
}

struct SimilarityMatrixOptions {
    std::size_t pair_cap = 100'000;  ///< max (test, train) pairs averaged per cell
    std::uint64_t seed = 0;
};

/// Entry (a, b): mean lambda over pairs of a test row of class a and a train
/// row of class b. Cells with more pairs than the cap use a seeded uniform
/// subsample of pairs.
inline Eigen::MatrixXd similarity_matrix(const LabeledFeatures& train, const LabeledFeatures& test, int classes,
                                         const SimilarityMatrixOptions& opt = {}) {
    std::vector<std::vector<std::size_t>> tr(static_cast<std::size_t>(classes)), te(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < train.size(); ++i) tr.at(static_cast<std::size_t>(train.labels[i] - 1)).push_back(i);
    for (std::size_t i = 0; i < test.size(); ++i) te.at(static_cast<std::size_t>(test.labels[i] - 1)).push_back(i);
    for (int k = 0; k < classes; ++k) {
        if (tr[static_cast<std::size_t>(k)].empty() || te[static_cast<std::size_t>(k)].empty()) {
            throw std::invalid_argument("similarity_matrix: class " + std::to_string(k + 1) + " has no rows");
        }
    }
    Eigen::MatrixXd out(classes, classes);
    for (int a = 0; a < classes; ++a) {
        for (int b = 0; b < classes; ++b) {
            const auto& ra = te[static_cast<std::size_t>(a)];
            const auto& rb = tr[static_cast<std::size_t>(b)];
            const std::size_t pairs = ra.size() * rb.size();
            double sum = 0.0;
            std::size_t used = 0;
            if (pairs <= opt.pair_cap) {
                for (std::size_t i : ra) {
                    for (std::size_t k : rb) sum += lambda_similarity(test.row(i), train.row(k)).lambda;
                }
                used = pairs;
            } else {
                Rng rng = make_rng(opt.seed, streams::kSubsample + static_cast<std::uint64_t>(a * classes + b));
                std::uniform_int_distribution<std::size_t> pick_a(0, ra.size() - 1), pick_b(0, rb.size() - 1);
                for (std::size_t s = 0; s < opt.pair_cap; ++s) {
                    sum += lambda_similarity(test.row(ra[pick_a(rng)]), train.row(rb[pick_b(rng)])).lambda;
                }
                used = opt.pair_cap;
            }
            out(a, b) = sum / static_cast<double>(used);
        }
    }
    return out;
}

/// Similarity of one test mean against each class's training mean.
inline std::vector<SimilarityScore> one_vs_all_similarity(const FeatureVector& test_mean,
                                                          const LabeledFeatures& train, int classes) {
    std::vector<SimilarityScore> out;
    out.reserve(static_cast<std::size_t>(classes));
    for (int k = 1; k <= classes; ++k) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < train.size(); ++i) {
            if (train.labels[i] == k) rows.push_back(i);
        }
        if (rows.empty()) throw std::invalid_argument("one_vs_all_similarity: class without training rows");
        out.push_back(lambda_similarity(test_mean, feature_mean(train.subset(rows).X)));
    }
    return out;
}

/// Mean and (population) standard deviation.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

inline MeanStd mean_std(std::span<const double> v) {
    MeanStd r;
    if (v.empty()) return r;
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size()));
    return r;
}

}  // namespace sleepose
