// SPDX-License-Identifier: Apache-2.0
#include "sleepose/pipeline.hpp"

#include <gtest/gtest.h>

using namespace sleepose;

namespace {

PipelineConfig quick() {
    PipelineConfig c;
    c.repeats = 2;
    c.grid_phi_sq = {20, 800};
    c.grid_theta_sq = {20};
    c.virtual_train_count = 40;
    c.virtual_test_count = 10;
    c.tuning.budget = 4;
    return c;
}

TEST(Config, DefaultsMatchExperimentConstants) {
    const PipelineConfig c;
    EXPECT_EQ(c.fusion.beta, 0.1);
    EXPECT_EQ(c.fusion.rate_hz, 30.0);
    EXPECT_EQ(c.repeats, 10u);
    EXPECT_EQ(c.tuning.budget, 60u);
    EXPECT_EQ(c.tuning.bounds.log_lo, -3.0);
    EXPECT_EQ(c.tuning.bounds.log_hi, 3.0);
    EXPECT_EQ(c.virtual_train_count, 500u);
    EXPECT_EQ(c.virtual_test_count, 125u);
    EXPECT_EQ(c.wearable_train_count, 1000u);
    EXPECT_EQ(c.grid_phi_sq, (std::vector<double>{20, 200, 400, 600, 800, 1000}));
    EXPECT_EQ(c.grid_theta_sq, (std::vector<double>{20, 100, 200, 300, 400, 500}));
    EXPECT_EQ(c.hold_frames, 10u);
    EXPECT_EQ(c.transition_frames, 10u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTripAndOverlay) {
    const PipelineConfig c = config_from_json({{"seed", 7}, {"tuning", {{"budget", 5}}}, {"fusion", {{"beta", 0.2}}}});
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.tuning.budget, 5u);
    EXPECT_EQ(c.fusion.beta, 0.2);
    EXPECT_EQ(c.repeats, 10u);
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))).dump(), config_to_json(c).dump());
}

TEST(Config, RejectsInvalidDocuments) {
    EXPECT_THROW(config_from_json({{"sede", 1}}), ValidationError);
    EXPECT_THROW(config_from_json({{"tuning", {{"budgett", 1}}}}), ValidationError);
    EXPECT_THROW(config_from_json({{"seed", "x"}}), ValidationError);
    EXPECT_THROW(config_from_json({{"virtual", {{"grid_sigma_phi_sq", {20, -1}}}}}), ValidationError);
    EXPECT_THROW(config_from_json({{"repeats", 0}}), ValidationError);
    EXPECT_THROW(config_from_json({{"tuning", {{"strategy", "grid"}}}}), ValidationError);
    EXPECT_THROW(config_from_json({{"session", {{"duration_s", 4.0}}}}), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::array()), ValidationError);
}

TEST(Digest, Fnv1aKnownVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Virtual, ReportShapeAndDeterminism) {
    const PipelineConfig c = quick();
    const auto dict = virtual_dictionary(generate_motion_sequence(canonical_postures(c.seed), 10, 10, 1.0 / 30), c);
    const auto a = run_virtual(dict, c);
    PipelineConfig c2 = c;
    c2.jobs = 3;
    const auto b = run_virtual(dict, c2);
    ASSERT_EQ(a.cells.size(), 2u);
    EXPECT_EQ(a.cells[0].runs.size(), 2u);
    EXPECT_EQ(virtual_report_json(a).dump(), virtual_report_json(b).dump());
    const std::string csv = heatmap_csv(a, [](const GridCell& g) { return cell_f1(g).mean; });
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "sigma_phi_sq\\sigma_theta_sq,20");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_EQ(a.cells[0].runs[0].train_rows, 12u * 40u);
    EXPECT_EQ(a.cells[0].runs[0].test_rows, 12u * 10u);
    EXPECT_NE(a.cells[0].runs[0].seed, a.cells[0].runs[1].seed);
}

TEST(Metrics, JsonDocumentFields) {
    RunResult r;
    const std::vector<int> t{1, 1, 2, 3}, p{1, 2, 2, 3};
    r.accuracy = accuracy(p, t);
    r.f1 = macro_f1_report(p, t, 3);
    r.confusion = confusion(p, t, 3);
    const auto j = metrics_json({r, r}, 3);
    for (const char* k : {"accuracy", "macro_f1", "per_class_f1", "confusion", "confusion_row_norm", "runs"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    EXPECT_DOUBLE_EQ(j["macro_f1"].get<double>(), 7.0 / 9.0);
    EXPECT_EQ(j["macro_f1_std"].get<double>(), 0.0);
    EXPECT_EQ(j["confusion"][0][1].get<int>(), 2);
    EXPECT_EQ(j["runs"].size(), 2u);
    EXPECT_THROW(metrics_json({}, 3), std::invalid_argument);
}

TEST(Wearable, SyntheticSessionsEndToEnd) {
    PipelineConfig c;
    c.repeats = 1;
    c.wearable_train_count = 100;
    c.tuning.budget = 4;
    c.session.duration_s = 8;
    c.test_duration_jitter_s = 2;
    const auto set = canonical_postures(c.seed);
    const auto sessions = synthesize_sessions(set.dictionary, c);
    EXPECT_EQ(sessions.train.size(), 12u);
    EXPECT_EQ(sessions.test.size(), 12u);
    const auto rep = run_wearable(sessions, 12, c, true);
    EXPECT_EQ(rep.runs.size(), 1u);
    EXPECT_EQ(rep.shot_frames.size(), 12u);
    EXPECT_EQ(rep.train_features.size(), 1200u);
    EXPECT_EQ(rep.similarity.rows(), 12);
    EXPECT_EQ(rep.one_vs_all.size(), 12u);
    EXPECT_GT(rep.test_matrix.padded_count(), 0u);
    EXPECT_TRUE(rep.test_matrix.flatten().X.allFinite());
    EXPECT_GE(rep.runs[0].f1.macro, 0.8);

    auto missing = sessions;
    missing.train.pop_back();
    EXPECT_THROW(run_wearable(missing, 12, c, true), ValidationError);
}

}  // namespace
