// SPDX-License-Identifier: Apache-2.0
//
// sleepose: command-line front end for the virtual and wearable pipelines.
//
// Exit codes: 0 success, 1 validation error, 2 runtime or IO error.

#include "sleepose/sleepose.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sleepose;

namespace {

void log(const std::string& msg) { std::cerr << "[sleepose] " << msg << "\n"; }

/// Collects inputs and outputs of one command and writes the manifest.
class Run {
public:
    Run(std::string command, PipelineConfig cfg, fs::path out_dir)
        : command_(std::move(command)), cfg_(std::move(cfg)), out_(std::move(out_dir)),
          start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        fs::create_directories(out_, ec);
        if (ec) throw std::runtime_error("cannot create output directory '" + out_.string() + "': " + ec.message());
    }

    const PipelineConfig& cfg() const { return cfg_; }

    void input(const std::string& path) {
        inputs_.push_back({{"path", path}, {"fnv1a64", file_digest(path)}});
    }

    void write(const std::string& rel, const std::string& content) {
        const fs::path p = out_ / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
        f << content;
        if (!f) throw std::runtime_error("write failed for '" + p.string() + "'");
        outputs_.push_back({{"file", rel}, {"fnv1a64", fnv1a_hex(content)}});
    }

    void write_json(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }

    void note(const std::string& key, json value) { extra_[key] = std::move(value); }

    void finish() {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json timing = {{"command", command_}, {"wall_seconds", secs}};
        std::ofstream(out_ / "timing.json", std::ios::binary) << timing.dump(2) << "\n";
        json m = {{"command", command_},
                  {"seed", cfg_.seed},
                  {"config", config_to_json(cfg_)},
                  {"inputs", inputs_},
                  {"outputs", outputs_},
                  {"timing_file", "timing.json"}};
        for (const auto& [k, v] : extra_.items()) m[k] = v;
        std::ofstream f(out_ / "manifest.json", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write manifest");
        f << m.dump(2) << "\n";
        log(command_ + " finished in " + std::to_string(secs) + " s; outputs in " + out_.string());
    }

private:
    std::string command_;
    PipelineConfig cfg_;
    fs::path out_;
    std::chrono::steady_clock::time_point start_;
    json inputs_ = json::array();
    json outputs_ = json::array();
    json extra_ = json::object();
};

std::string dataset_text(const LabeledFeatures& d) {
    std::ostringstream s;
    write_dataset_csv(s, d);
    return s.str();
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

CanonicalPostureSet load_or_generate_postures(Run& run, const std::string& path) {
    if (path.empty()) return canonical_postures(run.cfg().seed);
    run.input(path);
    return posture_set_from_json(read_json_file(path));
}

SkeletonAnimation motion_for(const CanonicalPostureSet& set, const PipelineConfig& cfg) {
    return generate_motion_sequence(set, cfg.hold_frames, cfg.transition_frames, cfg.frame_time);
}

/// Segment orientations of the motion sequence as seen by body-worn IMUs. The
/// BVH world is y-up; the sensor Earth frame is z-up.
ImuSession motion_imu(const SkeletonAnimation& anim, const PipelineConfig& cfg) {
    const UnitQuaternion y_up_to_z_up = UnitQuaternion::from_axis_angle(Vec3::UnitX(), kPi / 2);
    const JointSet js = JointSet::default_rig();
    const double rate = 1.0 / anim.frame_time;
    std::vector<std::vector<RigidTransform>> fk(anim.frame_count());
    for (std::size_t f = 0; f < anim.frame_count(); ++f) fk[f] = forward_kinematics(anim, f);
    ImuSession s;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const std::size_t p = anim.joint_index(js.pairs[j].parent), c = anim.joint_index(js.pairs[j].child);
        auto traj = [&](std::size_t seg) {
            return uniform_trajectory(0, rate, anim.frame_count(), [&](double t) {
                const auto f = std::min<std::size_t>(static_cast<std::size_t>(std::llround(t * rate)), anim.frame_count() - 1);
                return (y_up_to_z_up * extract_rotation(fk[f][seg])).canonical();
            });
        };
        s.modules[j] = synthesize_imu_streams(traj(p), traj(c), rate, cfg.session.noise,
                                              derive_seed(cfg.seed, streams::kImuNoise + 0x100), j);
    }
    return s;
}

std::string imu_text(const ImuSession& s) {
    std::ostringstream o;
    write_imu_csv(o, s);
    return o.str();
}

/// Streams from several CSVs; each module/role stream must come from one file.
ImuSession merge_sessions(const std::vector<ImuSession>& parts) {
    ImuSession out;
    for (std::size_t j = 0; j < kJointCount; ++j) out.modules[j].joint = j;
    for (const auto& p : parts) {
        for (std::size_t j = 0; j < kJointCount; ++j) {
            for (auto [src, dst] : {std::pair{&p.modules[j].parent, &out.modules[j].parent},
                                    std::pair{&p.modules[j].child, &out.modules[j].child}}) {
                if (src->empty()) continue;
                if (!dst->empty()) {
                    throw ValidationError("module " + std::string(kJointCodes[j]) + " appears in more than one file");
                }
                *dst = *src;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_simulate(Run& run, bool imu) {
    const auto& cfg = run.cfg();
    const CanonicalPostureSet set = canonical_postures(cfg.seed);
    const SkeletonAnimation anim = motion_for(set, cfg);
    run.write("motion.bvh", write_bvh(anim));
    run.write_json("postures.json", posture_manifest_json(set));
    log("wrote " + std::to_string(anim.frame_count()) + "-frame BVH with " + std::to_string(set.size()) + " postures");
    if (!imu) return;

    const ImuSession night = motion_imu(anim, cfg);
    for (std::size_t j = 0; j < kJointCount; ++j) {
        ImuSession one;
        one.modules[j] = night.modules[j];
        run.write("imu/module_" + std::string(kJointCodes[j]) + ".csv", imu_text(one));
    }

    const SessionSet sessions = synthesize_sessions(set.dictionary, cfg);
    json list = json::array();
    for (std::size_t i = 0; i < sessions.train.size(); ++i) {
        const std::string name = "train_" + std::to_string(i + 1) + ".csv";
        run.write("sessions/" + name, imu_text(sessions.train[i].imu));
        list.push_back({{"file", name}, {"label", sessions.train[i].label}, {"split", "train"}});
    }
    for (std::size_t i = 0; i < sessions.test.size(); ++i) {
        const std::string name = "test_" + std::to_string(i + 1) + ".csv";
        run.write("sessions/" + name, imu_text(sessions.test[i].imu));
        list.push_back({{"file", name}, {"label", sessions.test[i].label}, {"split", "test"}});
    }
    run.write_json("sessions/sessions.json", {{"classes", set.size()}, {"sessions", list}});
    log("wrote 4 module CSVs and " + std::to_string(list.size()) + " labeled sessions");
}

void cmd_run_virtual(Run& run, const std::string& bvh_path, std::size_t postures) {
    const auto& cfg = run.cfg();
    SkeletonAnimation anim;
    if (bvh_path.empty()) {
        anim = motion_for(canonical_postures(cfg.seed), cfg);
    } else {
        run.input(bvh_path);
        anim = load_bvh(bvh_path);
    }
    const PostureDictionary dict = virtual_dictionary(anim, cfg, postures);
    log("virtual experiment: " + std::to_string(cfg.grid_phi_sq.size() * cfg.grid_theta_sq.size()) + " settings x " +
        std::to_string(cfg.repeats) + " repeats");
    const VirtualReport rep = run_virtual(dict, cfg);
    for (const auto& c : rep.cells) {
        const MeanStd f = cell_f1(c);
        log("(" + detail::shortest(c.sigma_phi_sq) + ", " + detail::shortest(c.sigma_theta_sq) +
            ") macro-F1 " + detail::shortest(f.mean) + " +/- " + detail::shortest(f.std));
    }
    run.write("heatmap_macro_f1_mean.csv", heatmap_csv(rep, [](const GridCell& c) { return cell_f1(c).mean; }));
    run.write("heatmap_macro_f1_std.csv", heatmap_csv(rep, [](const GridCell& c) { return cell_f1(c).std; }));
    run.write("heatmap_accuracy_mean.csv", heatmap_csv(rep, [](const GridCell& c) { return cell_accuracy(c).mean; }));
    run.write("heatmap_accuracy_std.csv", heatmap_csv(rep, [](const GridCell& c) { return cell_accuracy(c).std; }));
    json report = virtual_report_json(rep);
    report["config"] = config_to_json(cfg);
    report["postures_source"] = bvh_path.empty() ? "canonical" : "bvh";
    run.write_json("report.json", report);
}

SessionSet load_session_manifest(Run& run, const std::string& path, int& classes) {
    const json j = read_json_file(path);
    run.input(path);
    if (!j.contains("sessions") || !j["sessions"].is_array()) throw ValidationError("session manifest needs a 'sessions' array");
    const fs::path base = fs::path(path).parent_path();
    SessionSet s;
    int max_label = 0;
    for (const auto& e : j["sessions"]) {
        if (!e.contains("file") || !e.contains("label") || !e.contains("split")) {
            throw ValidationError("session entries need file, label and split");
        }
        const std::string file = (base / e["file"].get<std::string>()).string();
        const int label = e["label"].get<int>();
        const std::string split = e["split"].get<std::string>();
        if (label < 1) throw ValidationError("session labels are 1-based");
        run.input(file);
        LabeledSession ls{label, load_imu_csv(file), e["file"].get<std::string>()};
        if (split == "train") {
            s.train.push_back(std::move(ls));
        } else if (split == "test") {
            s.test.push_back(std::move(ls));
        } else {
            throw ValidationError("session split must be train or test");
        }
        max_label = std::max(max_label, label);
    }
    classes = j.value("classes", max_label);
    if (s.train.empty() || s.test.empty()) throw ValidationError("session manifest needs train and test sessions");
    return s;
}

void cmd_run_wearable(Run& run, const std::string& sessions_path, bool no_augment) {
    const auto& cfg = run.cfg();
    SessionSet sessions;
    int classes = 0;
    if (sessions_path.empty()) {
        const CanonicalPostureSet set = canonical_postures(cfg.seed);
        sessions = synthesize_sessions(set.dictionary, cfg);
        classes = static_cast<int>(set.size());
        log("synthesized " + std::to_string(sessions.train.size() + sessions.test.size()) + " sessions");
    } else {
        sessions = load_session_manifest(run, sessions_path, classes);
    }
    const WearableReport rep = run_wearable(sessions, classes, cfg, !no_augment);

    const json metrics = metrics_json(rep.runs, classes);
    log(std::string(no_augment ? "baseline (no augmentation)" : "augmented") + ": accuracy " +
        detail::shortest(metrics["accuracy"].get<double>()) + ", macro-F1 " +
        detail::shortest(metrics["macro_f1"].get<double>()));
    run.write_json("metrics.json", metrics);
    run.write("similarity_matrix.csv", matrix_csv(rep.similarity, "test_class\\train_class"));
    run.write("one_vs_all.csv", one_vs_all_csv(rep.one_vs_all, rep.test_matrix.labels));
    run.write("train_features.csv", dataset_text(rep.train_features));
    run.write("test_features.csv", dataset_text(rep.test_matrix.flatten()));
    run.write_json("model.json", model_to_json(rep.model));
    json shots = json::array();
    for (std::size_t k = 0; k < rep.shot_frames.size(); ++k) shots.push_back({{"label", k + 1}, {"frame", rep.shot_frames[k]}});
    json report = {{"config", config_to_json(cfg)},
                   {"mode", no_augment ? "raw-timeseries" : "one-shot-augmented"},
                   {"sessions", sessions_path.empty() ? "synthetic" : "manifest"},
                   {"shot_frames", shots},
                   {"test_recordings", rep.test_matrix.recordings()},
                   {"test_matrix_rows", rep.test_matrix.rows()},
                   {"test_padded_rows", rep.test_matrix.padded_count()},
                   {"metrics", metrics}};
    run.write_json("report.json", report);
}

void cmd_fuse(Run& run, const std::vector<std::string>& files) {
    std::vector<ImuSession> parts;
    for (const auto& f : files) {
        run.input(f);
        parts.push_back(load_imu_csv(f));
    }
    const ImuSession s = merge_sessions(parts);
    SessionDiagnostics diag;
    const PoseTimeseries ts = process_session(s, run.cfg().fusion, run.cfg().jobs, &diag);
    std::ostringstream o;
    write_orientation_csv(o, ts);
    run.write("orientation.csv", o.str());
    run.note("fusion", {{"samples", ts.size()},
                        {"dropped_per_module", diag.dropped},
                        {"filter_updates", diag.filter.updates},
                        {"gyro_only_steps", diag.filter.gyro_only_steps}});
    log("fused " + std::to_string(ts.size()) + " synchronized samples after warm-up");
}

void cmd_augment(Run& run, const std::string& postures_path, std::optional<double> phi, std::optional<double> theta,
                 std::optional<std::size_t> count, bool test_split) {
    const auto& cfg = run.cfg();
    const CanonicalPostureSet set = load_or_generate_postures(run, postures_path);
    AugmentSettings s;
    s.sigma_phi_sq = phi.value_or(cfg.sigma_phi_sq);
    s.sigma_theta_sq = theta.value_or(cfg.sigma_theta_sq);
    s.count = count.value_or(test_split ? cfg.virtual_test_count : cfg.wearable_train_count);
    s.seed = cfg.seed;
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    const AugmentedDataset d = build_training_dictionary(
        set.dictionary, s, test_split ? streams::kTestAugment : streams::kTrainAugment, !test_split, cfg.jobs);
    run.write("dataset.csv", dataset_text(d.data));
    json m = manifest_json(d, postures_path.empty() ? "canonical" : "postures-file");
    m["split"] = test_split ? "test" : "train";
    m["classes"] = set.size();
    run.write_json("dataset.json", m);
    log("wrote " + std::to_string(d.data.size()) + " rows");
}

LabeledFeatures load_dataset(Run& run, const std::string& path) {
    run.input(path);
    return load_dataset_csv(path);
}

EcocModel load_model(Run& run, const std::string& path) {
    run.input(path);
    try {
        return model_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("model '" + path + "' is malformed: " + e.what());
    }
}

void cmd_train(Run& run, const std::string& dataset, std::optional<double> C, std::optional<double> gamma) {
    const auto& cfg = run.cfg();
    const LabeledFeatures data = load_dataset(run, dataset);
    const int classes = data.max_label();
    if (classes < 2) throw ValidationError("training needs at least two classes");
    if (C.has_value() != gamma.has_value()) throw ValidationError("--C and --gamma must be given together");
    EcocTrainOptions opt;
    opt.classes = classes;
    opt.jobs = cfg.jobs;
    opt.svm = cfg.tuning.svm;
    json tuning_doc;
    if (C) {
        if (!(*C > 0) || !(*gamma > 0)) throw ValidationError("--C and --gamma must be positive");
        opt.C = *C;
        opt.gamma = *gamma;
        tuning_doc = {{"strategy", "fixed"}, {"C", *C}, {"gamma", *gamma}};
    } else {
        TuningOptions t = cfg.tuning;
        t.seed = cfg.seed;
        t.jobs = cfg.jobs;
        const TuningResult r = tune_hyperparameters(data, classes, t);
        opt.C = r.C;
        opt.gamma = r.gamma;
        json trials = json::array();
        for (const auto& tr : r.trials) trials.push_back({{"log10_C", tr.log_c}, {"log10_gamma", tr.log_gamma}, {"score", tr.score}});
        tuning_doc = {{"strategy", r.strategy}, {"C", r.C}, {"gamma", r.gamma}, {"score", r.score}, {"trials", trials}};
        log("tuned C=" + detail::shortest(r.C) + " gamma=" + detail::shortest(r.gamma) + " holdout macro-F1 " +
            detail::shortest(r.score) + " after " + std::to_string(r.trials.size()) + " trials");
    }
    const EcocModel model = train_ecoc(data, opt);
    run.write_json("model.json", model_to_json(model));
    run.write_json("tuning.json", tuning_doc);
}

void cmd_predict(Run& run, const std::string& model_path, const std::string& dataset) {
    const EcocModel model = load_model(run, model_path);
    const LabeledFeatures data = load_dataset(run, dataset);
    const auto preds = ecoc_predict_labels(model, data.X);
    std::ostringstream o;
    o << "row,label,predicted\n";
    for (std::size_t i = 0; i < preds.size(); ++i) o << (i + 1) << ',' << data.labels[i] << ',' << preds[i] << "\n";
    run.write("predictions.csv", o.str());
}

void cmd_evaluate(Run& run, const std::string& model_path, const std::string& dataset) {
    const EcocModel model = load_model(run, model_path);
    const LabeledFeatures data = load_dataset(run, dataset);
    const int k = model.classes();
    if (data.max_label() > k) throw ValidationError("dataset has labels the model does not know");
    const auto preds = ecoc_predict_labels(model, data.X);
    RunResult r;
    r.seed = run.cfg().seed;
    r.C = model.C;
    r.gamma = model.gamma;
    r.accuracy = accuracy(preds, data.labels);
    r.f1 = macro_f1_report(preds, data.labels, k);
    r.confusion = confusion(preds, data.labels, k);
    r.test_rows = data.size();
    run.write_json("metrics.json", metrics_json({r}, k));
    log("accuracy " + detail::shortest(r.accuracy) + ", macro-F1 " + detail::shortest(r.f1.macro));
}

void cmd_similarity(Run& run, const std::string& train_path, const std::string& test_path) {
    const LabeledFeatures train = load_dataset(run, train_path);
    const LabeledFeatures test = load_dataset(run, test_path);
    const int k = std::max(train.max_label(), test.max_label());
    SimilarityMatrixOptions so;
    so.pair_cap = run.cfg().similarity_pair_cap;
    so.seed = run.cfg().seed;
    run.write("similarity_matrix.csv", matrix_csv(similarity_matrix(train, test, k, so), "test_class\\train_class"));
    std::vector<std::vector<SimilarityScore>> rows;
    std::vector<int> labels;
    for (int c = 1; c <= k; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < test.size(); ++i) {
            if (test.labels[i] == c) idx.push_back(i);
        }
        rows.push_back(one_vs_all_similarity(feature_mean(test.subset(idx).X), train, k));
        labels.push_back(c);
    }
    run.write("one_vs_all.csv", one_vs_all_csv(rows, labels));
}

void cmd_export_features(Run& run, const std::string& train_path, const std::string& test_path) {
    std::ostringstream o;
    o << "split," << dataset_csv_header() << "\n";
    std::size_t kept = 0, skipped = 0;
    auto emit = [&](const std::string& path, const char* split) {
        const LabeledFeatures d = load_dataset(run, path);
        for (std::size_t i = 0; i < d.size(); ++i) {
            const FeatureVector x = d.row(i);
            if (!x.allFinite()) {
                ++skipped;
                continue;
            }
            o << split << ',' << d.labels[i];
            for (Eigen::Index c = 0; c < x.size(); ++c) o << ',' << detail::shortest(x(c));
            o << "\n";
            ++kept;
        }
    };
    emit(train_path, "train");
    if (!test_path.empty()) emit(test_path, "test");
    run.write("features.csv", o.str());
    run.note("export", {{"rows", kept}, {"skipped_non_finite", skipped}});
    log("exported " + std::to_string(kept) + " rows, skipped " + std::to_string(skipped) + " padded rows");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-shot sleep posture learning pipeline"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--jobs", jobs, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "Output directory");

    auto* sim = app.add_subcommand("simulate", "Canonical postures, BVH sequence and optional IMU sessions");
    bool imu = false;
    sim->add_flag("--imu", imu, "Also write IMU CSVs");

    auto* virt = app.add_subcommand("run-virtual", "Augmentation grid experiment on virtual postures");
    std::string bvh_path;
    std::size_t bvh_postures = 12;
    virt->add_option("--bvh", bvh_path, "Motion sequence (default: canonical postures)");
    virt->add_option("--postures", bvh_postures, "Posture count in the BVH sequence")->check(CLI::Range(2, 1000));

    auto* wear = app.add_subcommand("run-wearable", "One-shot wearable experiment");
    std::string sessions_path;
    bool no_augment = false;
    wear->add_option("--sessions", sessions_path, "Session manifest JSON (default: synthesize)");
    wear->add_flag("--no-augment", no_augment, "Train on the raw training timeseries instead");

    auto* fuse = app.add_subcommand("fuse", "Filter, fuse and synchronize IMU CSVs");
    std::vector<std::string> imu_files;
    fuse->add_option("files", imu_files, "IMU CSV files")->required();

    auto* aug = app.add_subcommand("augment", "Augment a posture dictionary into a dataset");
    std::string postures_path;
    std::optional<double> phi, theta;
    std::optional<std::size_t> count;
    bool test_split = false;
    aug->add_option("--postures", postures_path, "Posture manifest JSON");
    aug->add_option("--sigma-phi-sq", phi, "Axis variance, deg^2");
    aug->add_option("--sigma-theta-sq", theta, "Angle variance, deg^2");
    aug->add_option("--count", count, "Rows per class");
    aug->add_flag("--test", test_split, "Test split: independent stream, shot not kept");

    auto* train = app.add_subcommand("train", "Tune and train an ECOC model");
    std::string train_data;
    std::optional<double> C, gamma;
    train->add_option("dataset", train_data, "Dataset CSV")->required();
    train->add_option("--C", C, "Box constraint (skips tuning with --gamma)");
    train->add_option("--gamma", gamma, "RBF width (skips tuning with --C)");

    auto* pred = app.add_subcommand("predict", "Predict labels for a dataset");
    std::string model_path, data_path;
    pred->add_option("model", model_path, "Model JSON")->required();
    pred->add_option("dataset", data_path, "Dataset CSV")->required();

    auto* eval = app.add_subcommand("evaluate", "Metrics of a model on a labeled dataset");
    eval->add_option("model", model_path, "Model JSON")->required();
    eval->add_option("dataset", data_path, "Dataset CSV")->required();

    auto* sim_cmd = app.add_subcommand("similarity", "Hybrid similarity between two datasets");
    std::string a_path, b_path;
    sim_cmd->add_option("train", a_path, "Training dataset CSV")->required();
    sim_cmd->add_option("test", b_path, "Test dataset CSV")->required();

    auto* exp = app.add_subcommand("export-features", "Labeled feature rows with a split column");
    std::string exp_test;
    exp->add_option("train", a_path, "Training dataset CSV")->required();
    exp->add_option("test", exp_test, "Test dataset CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (jobs) cfg.jobs = *jobs;
        cfg.validate();
        CLI::App* sub = app.get_subcommands().front();
        Run run(sub->get_name(), cfg, out_dir);
        if (!config_path.empty()) run.input(config_path);

        if (sub == sim) {
            cmd_simulate(run, imu);
        } else if (sub == virt) {
            cmd_run_virtual(run, bvh_path, bvh_postures);
        } else if (sub == wear) {
            cmd_run_wearable(run, sessions_path, no_augment);
        } else if (sub == fuse) {
            cmd_fuse(run, imu_files);
        } else if (sub == aug) {
            cmd_augment(run, postures_path, phi, theta, count, test_split);
        } else if (sub == train) {
            cmd_train(run, train_data, C, gamma);
        } else if (sub == pred) {
            cmd_predict(run, model_path, data_path);
        } else if (sub == eval) {
            cmd_evaluate(run, model_path, data_path);
        } else if (sub == sim_cmd) {
            cmd_similarity(run, a_path, b_path);
        } else if (sub == exp) {
            cmd_export_features(run, a_path, exp_test);
        }
        run.finish();
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
