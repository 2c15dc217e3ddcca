// SPDX-License-Identifier: Apache-2.0
#include "sleepose/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace sleepose;

namespace {

FeatureVector random_features(std::mt19937_64& rng) {
    std::array<UnitQuaternion, kJointCount> q;
    for (auto& x : q) x = sleepose::testing::random_quat(rng);
    return pose_to_features(PoseVector(q));
}

TEST(Metrics, HandComputedThreeClassF1) {
    const std::vector<int> truth{1, 1, 2, 3}, pred{1, 2, 2, 3};
    const auto r = macro_f1_report(pred, truth, 3);
    EXPECT_DOUBLE_EQ(r.per_class[0], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.per_class[1], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.per_class[2], 1.0);
    EXPECT_DOUBLE_EQ(r.macro, 7.0 / 9.0);
    EXPECT_DOUBLE_EQ(accuracy(pred, truth), 0.75);
}

TEST(Metrics, ZeroDivisionScoresZero) {
    const std::vector<int> truth{1, 1, 2}, pred{1, 1, 1};
    const auto r = macro_f1_report(pred, truth, 3);
    EXPECT_EQ(r.per_class[1], 0.0);
    EXPECT_EQ(r.per_class[2], 0.0);
    EXPECT_EQ(r.zero_division, (std::vector<int>{2, 3}));
    EXPECT_DOUBLE_EQ(r.macro, (0.8 + 0 + 0) / 3.0);
}

TEST(Metrics, ConfusionAndRowNormalization) {
    const std::vector<int> truth{1, 1, 2, 2, 2, 3}, pred{1, 2, 2, 2, 3, 3};
    const auto c = confusion(pred, truth, 4);
    EXPECT_EQ(c.counts(1, 2), 1);
    EXPECT_EQ(c.total(), 6);
    const Eigen::MatrixXd n = c.row_normalized();
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(n.row(r).sum(), 1.0, 1e-15);
    EXPECT_EQ(n.row(3).sum(), 0.0);
    EXPECT_EQ(c.empty_rows(), std::vector<int>{4});
    EXPECT_THROW(confusion(std::vector<int>{5}, std::vector<int>{1}, 4), std::out_of_range);
    EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
    EXPECT_THROW(accuracy(std::vector<int>{1}, std::vector<int>{1, 2}), std::invalid_argument);
}

TEST(Similarity, SelfScoreIsEight) {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 100; ++i) {
        const FeatureVector x = random_features(rng);
        const auto s = lambda_similarity(x, x);
        EXPECT_NEAR(s.lambda_phi, 4.0, 1e-12);
        EXPECT_EQ(s.lambda_theta, 4.0);
    }
    FeatureVector e = FeatureVector::Zero();
    for (int j = 0; j < 4; ++j) e(4 * j) = 1.0;
    EXPECT_EQ(lambda_similarity(e, e).lambda, 8.0);
}

TEST(Similarity, BoundsOnRandomPairs) {
    std::mt19937_64 rng(52);
    for (int i = 0; i < 10'000; ++i) {
        const auto s = lambda_similarity(random_features(rng), random_features(rng));
        EXPECT_GE(s.lambda, -4.0);
        EXPECT_LE(s.lambda, 8.0);
    }
    // Opposite axes, angles 0 vs pi: the lower corner.
    FeatureVector a = FeatureVector::Zero(), b = FeatureVector::Zero();
    for (int j = 0; j < 4; ++j) {
        a(4 * j) = 1.0;
        b(4 * j) = -1.0;
        b(4 * j + 3) = kPi;
    }
    EXPECT_NEAR(lambda_similarity(a, b).lambda, -4.0, 1e-15);
    FeatureVector bad = a;
    bad(0) = 2.0;
    EXPECT_THROW(lambda_similarity(bad, a), std::invalid_argument);
}

TEST(Similarity, MatrixAndOneVsAll) {
    std::mt19937_64 rng(53);
    LabeledFeatures tr, te;
    tr.X.resize(6, kFeatureDim);
    te.X.resize(4, kFeatureDim);
    std::vector<FeatureVector> protos{random_features(rng), random_features(rng)};
    for (int i = 0; i < 6; ++i) {
        tr.X.row(i) = protos[static_cast<std::size_t>(i % 2)].transpose();
        tr.labels.push_back(i % 2 + 1);
    }
    for (int i = 0; i < 4; ++i) {
        te.X.row(i) = protos[static_cast<std::size_t>(i % 2)].transpose();
        te.labels.push_back(i % 2 + 1);
    }
    const auto m = similarity_matrix(tr, te, 2);
    EXPECT_NEAR(m(0, 0), 8.0, 1e-12);
    EXPECT_NEAR(m(1, 1), 8.0, 1e-12);
    EXPECT_NEAR(m(0, 1), lambda_similarity(protos[0], protos[1]).lambda, 1e-12);
    const auto capped = similarity_matrix(tr, te, 2, {4, 1});
    EXPECT_NEAR(capped(0, 1), m(0, 1), 1e-12);  // identical rows, so any subsample agrees
    const auto ova = one_vs_all_similarity(protos[1], tr, 2);
    EXPECT_NEAR(ova[1].lambda, 8.0, 1e-12);
    LabeledFeatures one = tr.subset({0});
    EXPECT_THROW(similarity_matrix(one, te, 2), std::invalid_argument);
}

TEST(Similarity, FeatureMeanRenormalizesAxes) {
    FeatureMatrix rows = FeatureMatrix::Zero(2, kFeatureDim);
    for (int j = 0; j < 4; ++j) {
        rows(0, 4 * j) = 1.0;
        rows(1, 4 * j + 1) = 1.0;
        rows(0, 4 * j + 3) = 0.2;
        rows(1, 4 * j + 3) = 0.4;
    }
    const FeatureVector m = feature_mean(rows);
    EXPECT_NEAR(m(0), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(m(1), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(m(3), 0.3, 1e-15);
}

TEST(Metrics, MeanStdIsPopulation) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = mean_std(v);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
}

}  // namespace
