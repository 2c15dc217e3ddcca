// SPDX-License-Identifier: Apache-2.0
#include "sleepose/pipeline.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / ("sleepose_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

int run(const std::string& args) {
    const std::string cmd = std::string(SLEEPOSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const fs::path& p) {
    const std::string s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string dir(const std::string& name) { return (scratch() / name).string(); }

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("--out-dir " + dir("x") + " nonsense"), 1);
    std::ofstream(scratch() / "bad.json") << R"({"unknown_key": 1})";
    EXPECT_EQ(run("--config " + dir("bad.json") + " --out-dir " + dir("x") + " simulate"), 1);
    std::ofstream(scratch() / "broken.json") << "{";
    EXPECT_EQ(run("--config " + dir("broken.json") + " --out-dir " + dir("x") + " simulate"), 1);
    EXPECT_EQ(run("--out-dir " + dir("x") + " train " + dir("does_not_exist.csv")), 2);
    std::ofstream(scratch() / "garbage.csv") << "not,a,dataset\n";
    EXPECT_EQ(run("--out-dir " + dir("x") + " train " + dir("garbage.csv")), 2);
}

TEST(Cli, SimulateIsReproducible) {
    ASSERT_EQ(run("--out-dir " + dir("sim1") + " simulate --imu"), 0);
    ASSERT_EQ(run("--out-dir " + dir("sim2") + " simulate --imu"), 0);
    ASSERT_EQ(run("--seed 43 --out-dir " + dir("sim3") + " simulate"), 0);
    EXPECT_EQ(slurp(scratch() / "sim1/manifest.json"), slurp(scratch() / "sim2/manifest.json"));
    EXPECT_EQ(slurp(scratch() / "sim1/motion.bvh"), slurp(scratch() / "sim2/motion.bvh"));
    EXPECT_NE(slurp(scratch() / "sim1/motion.bvh"), slurp(scratch() / "sim3/motion.bvh"));
    const auto anim = sleepose::load_bvh((scratch() / "sim1/motion.bvh").string());
    EXPECT_EQ(anim.frame_count(), 230u);
    for (const char* m : {"RW", "LW", "RA", "LA"}) {
        const fs::path p = scratch() / "sim1/imu" / (std::string("module_") + m + ".csv");
        ASSERT_TRUE(fs::exists(p));
        EXPECT_EQ(lines(p), 1u + 2u * 230u);  // header, parent and child per frame
    }
    const auto manifest = nlohmann::json::parse(slurp(scratch() / "sim1/manifest.json"));
    EXPECT_EQ(manifest["command"], "simulate");
    EXPECT_EQ(manifest["config"]["fusion"]["beta"], 0.1);
    for (const auto& o : manifest["outputs"]) {
        EXPECT_EQ(o["fnv1a64"].get<std::string>(), sleepose::file_digest((scratch() / "sim1" / o["file"].get<std::string>()).string()));
    }
}

TEST(Cli, FuseModuleFiles) {
    ASSERT_EQ(run("--out-dir " + dir("simf") + " simulate --imu"), 0);
    const std::string files = dir("simf/sessions/train_1.csv");
    ASSERT_EQ(run("--out-dir " + dir("fused") + " fuse " + files), 0);
    const auto ts = [&] {
        std::ifstream in(scratch() / "fused/orientation.csv");
        return sleepose::read_orientation_csv(in);
    }();
    EXPECT_GT(ts.size(), 400u);
    // The same module twice is ambiguous.
    EXPECT_EQ(run("--out-dir " + dir("fused2") + " fuse " + dir("simf/imu/module_RW.csv") + " " + dir("simf/imu/module_RW.csv")), 1);
}

TEST(Cli, DatasetCommandsChain) {
    const std::string t = dir("aug_train"), v = dir("aug_test");
    ASSERT_EQ(run("--out-dir " + t + " augment --sigma-phi-sq 200 --sigma-theta-sq 100 --count 30"), 0);
    ASSERT_EQ(run("--out-dir " + v + " augment --sigma-phi-sq 200 --sigma-theta-sq 100 --count 10 --test"), 0);
    EXPECT_EQ(lines(t + "/dataset.csv"), 1u + 360u);
    EXPECT_EQ(lines(v + "/dataset.csv"), 1u + 120u);
    const auto side = nlohmann::json::parse(slurp(t + "/dataset.json"));
    EXPECT_EQ(side["rows"], 360);
    EXPECT_EQ(side["split"], "train");

    ASSERT_EQ(run("--out-dir " + dir("model") + " train " + t + "/dataset.csv --C 10 --gamma 0.1"), 0);
    ASSERT_EQ(run("--out-dir " + dir("pred") + " predict " + dir("model/model.json") + " " + v + "/dataset.csv"), 0);
    EXPECT_EQ(lines(dir("pred/predictions.csv")), 121u);
    ASSERT_EQ(run("--out-dir " + dir("eval") + " evaluate " + dir("model/model.json") + " " + v + "/dataset.csv"), 0);
    const auto m = nlohmann::json::parse(slurp(dir("eval/metrics.json")));
    for (const char* k : {"accuracy", "macro_f1", "per_class_f1", "confusion", "confusion_row_norm", "runs"}) EXPECT_TRUE(m.contains(k));
    EXPECT_GT(m["macro_f1"].get<double>(), 0.9);
    ASSERT_EQ(run("--out-dir " + dir("sim_m") + " similarity " + t + "/dataset.csv " + v + "/dataset.csv"), 0);
    EXPECT_EQ(lines(dir("sim_m/similarity_matrix.csv")), 13u);
    EXPECT_EQ(lines(dir("sim_m/one_vs_all.csv")), 1u + 144u);
    EXPECT_EQ(run("--out-dir " + dir("model2") + " train " + t + "/dataset.csv --C 10"), 1);
}

TEST(Cli, ExportFeaturesSplitsAndSkipsPadding) {
    const std::string t = dir("exp_train");
    ASSERT_EQ(run("--out-dir " + t + " augment --count 5"), 0);
    // A test set containing one padded row.
    std::string padded = sleepose::dataset_csv_header() + "\n1";
    for (int i = 0; i < 16; ++i) padded += ",nan";
    padded += "\n2";
    for (int i = 0; i < 4; ++i) padded += ",1,0,0,0.5";
    padded += "\n";
    std::ofstream(scratch() / "padded.csv") << padded;
    ASSERT_EQ(run("--out-dir " + dir("exp") + " export-features " + t + "/dataset.csv " + dir("padded.csv")), 0);
    const std::string csv = slurp(dir("exp/features.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "split," + sleepose::dataset_csv_header());
    EXPECT_EQ(lines(dir("exp/features.csv")), 1u + 60u + 1u);
    EXPECT_NE(csv.find("\ntest,2,"), std::string::npos);
    EXPECT_EQ(csv.find("nan"), std::string::npos);
    const auto man = nlohmann::json::parse(slurp(dir("exp/manifest.json")));
    EXPECT_EQ(man["export"]["skipped_non_finite"], 1);
}

TEST(Cli, WearableFromSessionManifest) {
    ASSERT_EQ(run("--out-dir " + dir("simw") + " simulate --imu"), 0);
    std::ofstream(scratch() / "w.json") << R"({"repeats": 1, "wearable": {"train_count": 60}, "tuning": {"budget": 3}})";
    ASSERT_EQ(run("--config " + dir("w.json") + " --out-dir " + dir("wear") + " run-wearable --sessions " +
                  dir("simw/sessions/sessions.json")),
              0);
    const auto r = nlohmann::json::parse(slurp(dir("wear/report.json")));
    EXPECT_EQ(r["mode"], "one-shot-augmented");
    EXPECT_EQ(r["shot_frames"].size(), 12u);
    for (const char* f : {"metrics.json", "similarity_matrix.csv", "one_vs_all.csv", "model.json", "train_features.csv"}) {
        EXPECT_TRUE(fs::exists(dir("wear") + "/" + f)) << f;
    }
    std::ofstream(scratch() / "nolabel.json") << R"({"sessions": [{"file": "train_1.csv", "split": "train"}]})";
    fs::copy_file(dir("simw/sessions/train_1.csv"), scratch() / "train_1.csv", fs::copy_options::overwrite_existing);
    EXPECT_EQ(run("--out-dir " + dir("wear2") + " run-wearable --sessions " + dir("nolabel.json")), 1);
}

}  // namespace
