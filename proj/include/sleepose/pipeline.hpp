// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration shared by the CLI and the acceptance suite:
// configuration, the virtual (BVH) and wearable (IMU) pipelines, and report
// documents.
#pragma once

#include "sleepose/augmentation.hpp"
#include "sleepose/bvh.hpp"
#include "sleepose/dataset.hpp"
#include "sleepose/ecoc.hpp"
#include "sleepose/fusion.hpp"
#include "sleepose/metrics.hpp"
#include "sleepose/parallel.hpp"
#include "sleepose/random.hpp"
#include "sleepose/synth.hpp"
#include "sleepose/tuning.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

/// Bad configuration or arguments (CLI exit code 1).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    std::size_t repeats = 10;

    // canonical postures and the BVH sequence
    std::size_t hold_frames = 10;
    std::size_t transition_frames = 10;
    double frame_time = 1.0 / 30.0;

    // virtual experiment
    std::vector<double> grid_phi_sq = axis_variance_grid();
    std::vector<double> grid_theta_sq = angle_variance_grid();
    std::size_t virtual_train_count = 500;
    std::size_t virtual_test_count = 125;

    // wearable experiment
    double sigma_phi_sq = 800.0;
    double sigma_theta_sq = 100.0;
    std::size_t wearable_train_count = 1000;
    FusionConfig fusion{};
    SessionOptions session{};
    std::size_t test_recordings_per_posture = 1;
    double test_duration_jitter_s = 4.0;  ///< test sessions vary in length by up to this much
    double test_perturb_phi_sq = 800.0;
    double test_perturb_theta_sq = 100.0;

    TuningOptions tuning = [] {
        TuningOptions t;
        t.max_rows_per_class = 200;
        return t;
    }();

    std::size_t similarity_pair_cap = 100'000;

    void validate() const {
        auto positive = [](double v, const char* what) {
            if (!(v > 0.0)) throw ValidationError(std::string(what) + " must be positive");
        };
        if (repeats < 1) throw ValidationError("repeats must be >= 1");
        if (jobs < 1) throw ValidationError("jobs must be >= 1");
        if (hold_frames < 1 || transition_frames < 1) throw ValidationError("hold and transition frames must be >= 1");
        positive(frame_time, "frame_time");
        if (grid_phi_sq.empty() || grid_theta_sq.empty()) throw ValidationError("augmentation grid must not be empty");
        for (double v : grid_phi_sq) positive(v, "grid sigma_phi_sq values");
        for (double v : grid_theta_sq) positive(v, "grid sigma_theta_sq values");
        if (virtual_train_count < 1 || virtual_test_count < 1) throw ValidationError("virtual counts must be >= 1");
        if (wearable_train_count < 1) throw ValidationError("wearable train count must be >= 1");
        if (sigma_phi_sq < 0 || sigma_theta_sq < 0) throw ValidationError("augmentation variances must be >= 0");
        positive(fusion.beta, "fusion.beta");
        positive(fusion.rate_hz, "fusion.rate_hz");
        if (fusion.warmup_s < 0) throw ValidationError("fusion.warmup_s must be >= 0");
        positive(session.duration_s, "session.duration_s");
        if (session.transition_s < 0 || session.transition_s >= session.duration_s) {
            throw ValidationError("session.transition_s must lie in [0, duration_s)");
        }
        if (session.duration_s <= fusion.warmup_s) throw ValidationError("session.duration_s must exceed fusion.warmup_s");
        if (test_recordings_per_posture < 1) throw ValidationError("test_recordings_per_posture must be >= 1");
        if (test_duration_jitter_s < 0) throw ValidationError("test_duration_jitter_s must be >= 0");
        if (test_perturb_phi_sq < 0 || test_perturb_theta_sq < 0) throw ValidationError("test perturbations must be >= 0");
        if (tuning.budget < 1) throw ValidationError("tuning.budget must be >= 1");
        if (!(tuning.bounds.log_lo <= tuning.bounds.log_hi)) throw ValidationError("tuning bounds are inverted");
        if (!(tuning.holdout_fraction > 0 && tuning.holdout_fraction < 1)) {
            throw ValidationError("tuning.holdout_fraction must be in (0, 1)");
        }
        if (tuning.strategy != "random" && tuning.strategy != "gp-ei" && tuning.strategy != "bayesian") {
            throw ValidationError("tuning.strategy must be random or gp-ei");
        }
        if (similarity_pair_cap < 1) throw ValidationError("similarity.pair_cap must be >= 1");
    }
};

namespace detail {

// Reads `key` from `obj` into `out` when present, rejecting type mismatches.
template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out, const std::string& path) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("config: '" + path + key + "' has the wrong type");
    }
}

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& path) {
    if (!obj.is_object()) throw ValidationError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw ValidationError("config: unknown key '" + path + k + "'");
    }
}

}  // namespace detail

/// Overlays a JSON document onto the defaults. Unknown keys are errors.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::read_key;
    PipelineConfig c;
    check_keys(j, {"seed", "jobs", "repeats", "motion", "virtual", "wearable", "fusion", "session", "tuning", "similarity"}, "");
    read_key(j, "seed", c.seed, "");
    read_key(j, "jobs", c.jobs, "");
    read_key(j, "repeats", c.repeats, "");
    if (j.contains("motion")) {
        const auto& m = j["motion"];
        check_keys(m, {"hold_frames", "transition_frames", "frame_time"}, "motion.");
        read_key(m, "hold_frames", c.hold_frames, "motion.");
        read_key(m, "transition_frames", c.transition_frames, "motion.");
        read_key(m, "frame_time", c.frame_time, "motion.");
    }
    if (j.contains("virtual")) {
        const auto& v = j["virtual"];
        check_keys(v, {"grid_sigma_phi_sq", "grid_sigma_theta_sq", "train_count", "test_count"}, "virtual.");
        read_key(v, "grid_sigma_phi_sq", c.grid_phi_sq, "virtual.");
        read_key(v, "grid_sigma_theta_sq", c.grid_theta_sq, "virtual.");
        read_key(v, "train_count", c.virtual_train_count, "virtual.");
        read_key(v, "test_count", c.virtual_test_count, "virtual.");
    }
    if (j.contains("wearable")) {
        const auto& w = j["wearable"];
        check_keys(w, {"sigma_phi_sq", "sigma_theta_sq", "train_count", "test_recordings_per_posture",
                       "test_duration_jitter_s", "test_perturb_phi_sq", "test_perturb_theta_sq"},
                   "wearable.");
        read_key(w, "sigma_phi_sq", c.sigma_phi_sq, "wearable.");
        read_key(w, "sigma_theta_sq", c.sigma_theta_sq, "wearable.");
        read_key(w, "train_count", c.wearable_train_count, "wearable.");
        read_key(w, "test_recordings_per_posture", c.test_recordings_per_posture, "wearable.");
        read_key(w, "test_duration_jitter_s", c.test_duration_jitter_s, "wearable.");
        read_key(w, "test_perturb_phi_sq", c.test_perturb_phi_sq, "wearable.");
        read_key(w, "test_perturb_theta_sq", c.test_perturb_theta_sq, "wearable.");
    }
    if (j.contains("fusion")) {
        const auto& f = j["fusion"];
        check_keys(f, {"beta", "rate_hz", "warmup_s"}, "fusion.");
        read_key(f, "beta", c.fusion.beta, "fusion.");
        read_key(f, "rate_hz", c.fusion.rate_hz, "fusion.");
        read_key(f, "warmup_s", c.fusion.warmup_s, "fusion.");
    }
    if (j.contains("session")) {
        const auto& s = j["session"];
        check_keys(s, {"duration_s", "transition_s", "base_tilt_deg", "sway_deg", "sway_hz", "relative_jitter_deg",
                       "gyro_noise", "accel_noise", "mag_noise"},
                   "session.");
        read_key(s, "duration_s", c.session.duration_s, "session.");
        read_key(s, "transition_s", c.session.transition_s, "session.");
        read_key(s, "base_tilt_deg", c.session.base_tilt_deg, "session.");
        read_key(s, "sway_deg", c.session.sway_deg, "session.");
        read_key(s, "sway_hz", c.session.sway_hz, "session.");
        read_key(s, "relative_jitter_deg", c.session.relative_jitter_deg, "session.");
        read_key(s, "gyro_noise", c.session.noise.gyro_std, "session.");
        read_key(s, "accel_noise", c.session.noise.accel_std, "session.");
        read_key(s, "mag_noise", c.session.noise.mag_std, "session.");
    }
    if (j.contains("tuning")) {
        const auto& t = j["tuning"];
        check_keys(t, {"budget", "log_lo", "log_hi", "holdout_fraction", "max_rows_per_class", "stop_at_perfect", "strategy"},
                   "tuning.");
        read_key(t, "budget", c.tuning.budget, "tuning.");
        read_key(t, "log_lo", c.tuning.bounds.log_lo, "tuning.");
        read_key(t, "log_hi", c.tuning.bounds.log_hi, "tuning.");
        read_key(t, "holdout_fraction", c.tuning.holdout_fraction, "tuning.");
        read_key(t, "max_rows_per_class", c.tuning.max_rows_per_class, "tuning.");
        read_key(t, "stop_at_perfect", c.tuning.stop_at_perfect, "tuning.");
        read_key(t, "strategy", c.tuning.strategy, "tuning.");
    }
    if (j.contains("similarity")) {
        const auto& s = j["similarity"];
        check_keys(s, {"pair_cap"}, "similarity.");
        read_key(s, "pair_cap", c.similarity_pair_cap, "similarity.");
    }
    c.session.rate_hz = c.fusion.rate_hz;
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
    return {{"seed", c.seed},
            {"jobs", c.jobs},
            {"repeats", c.repeats},
            {"motion", {{"hold_frames", c.hold_frames}, {"transition_frames", c.transition_frames}, {"frame_time", c.frame_time}}},
            {"virtual",
             {{"grid_sigma_phi_sq", c.grid_phi_sq},
              {"grid_sigma_theta_sq", c.grid_theta_sq},
              {"train_count", c.virtual_train_count},
              {"test_count", c.virtual_test_count}}},
            {"wearable",
             {{"sigma_phi_sq", c.sigma_phi_sq},
              {"sigma_theta_sq", c.sigma_theta_sq},
              {"train_count", c.wearable_train_count},
              {"test_recordings_per_posture", c.test_recordings_per_posture},
              {"test_duration_jitter_s", c.test_duration_jitter_s},
              {"test_perturb_phi_sq", c.test_perturb_phi_sq},
              {"test_perturb_theta_sq", c.test_perturb_theta_sq}}},
            {"fusion", {{"beta", c.fusion.beta}, {"rate_hz", c.fusion.rate_hz}, {"warmup_s", c.fusion.warmup_s}}},
            {"session",
             {{"duration_s", c.session.duration_s},
              {"transition_s", c.session.transition_s},
              {"base_tilt_deg", c.session.base_tilt_deg},
              {"sway_deg", c.session.sway_deg},
              {"sway_hz", c.session.sway_hz},
              {"relative_jitter_deg", c.session.relative_jitter_deg},
              {"gyro_noise", c.session.noise.gyro_std},
              {"accel_noise", c.session.noise.accel_std},
              {"mag_noise", c.session.noise.mag_std}}},
            {"tuning",
             {{"budget", c.tuning.budget},
              {"log_lo", c.tuning.bounds.log_lo},
              {"log_hi", c.tuning.bounds.log_hi},
              {"holdout_fraction", c.tuning.holdout_fraction},
              {"max_rows_per_class", c.tuning.max_rows_per_class},
              {"stop_at_perfect", c.tuning.stop_at_perfect},
              {"strategy", c.tuning.strategy}}},
            {"similarity", {{"pair_cap", c.similarity_pair_cap}}}};
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Digests

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

// ---------------------------------------------------------------------------
// Evaluation runs

struct RunResult {
    std::uint64_t seed = 0;
    double C = 1.0;
    double gamma = 1.0;
    double tuning_score = 0.0;
    std::size_t tuning_trials = 0;
    double accuracy = 0.0;
    F1Report f1;
    ConfusionMatrix confusion;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

inline nlohmann::json run_json(const RunResult& r) {
    return {{"seed", r.seed},         {"C", r.C},
            {"gamma", r.gamma},       {"tuning_score", r.tuning_score},
            {"tuning_trials", r.tuning_trials},
            {"accuracy", r.accuracy}, {"macro_f1", r.f1.macro},
            {"train_rows", r.train_rows}, {"test_rows", r.test_rows}};
}

/// Tunes on `train`, fits the final model on all of it and scores `test`.
inline RunResult tune_train_evaluate(const LabeledFeatures& train, const LabeledFeatures& test, int classes,
                                     TuningOptions tuning, std::uint64_t seed, std::size_t jobs,
                                     EcocModel* model_out = nullptr) {
    tuning.seed = seed;
    tuning.jobs = jobs;
    const TuningResult tr = tune_hyperparameters(train, classes, tuning);
    EcocTrainOptions opt;
    opt.C = tr.C;
    opt.gamma = tr.gamma;
    opt.classes = classes;
    opt.jobs = jobs;
    opt.svm = tuning.svm;
    EcocModel model = train_ecoc(train, opt);
    const auto preds = ecoc_predict_labels(model, test.X);
    RunResult r;
    r.seed = seed;
    r.C = tr.C;
    r.gamma = tr.gamma;
    r.tuning_score = tr.score;
    r.tuning_trials = tr.trials.size();
    r.accuracy = accuracy(preds, test.labels);
    r.f1 = macro_f1_report(preds, test.labels, classes);
    r.confusion = confusion(preds, test.labels, classes);
    r.train_rows = train.size();
    r.test_rows = test.size();
    if (model_out) *model_out = std::move(model);
    return r;
}

/// Metrics document over repeated runs: means and standard deviations,
/// per-class F1 averaged over runs, confusion summed over runs.
inline nlohmann::json metrics_json(const std::vector<RunResult>& runs, int classes) {
    if (runs.empty()) throw std::invalid_argument("metrics_json: no runs");
    std::vector<double> acc, f1;
    std::vector<double> per_class(static_cast<std::size_t>(classes), 0.0);
    ConfusionMatrix total;
    total.counts = Eigen::MatrixXi::Zero(classes, classes);
    std::set<int> zero_div;
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& r : runs) {
        acc.push_back(r.accuracy);
        f1.push_back(r.f1.macro);
        for (std::size_t k = 0; k < per_class.size(); ++k) per_class[k] += r.f1.per_class[k] / static_cast<double>(runs.size());
        total.counts += r.confusion.counts;
        zero_div.insert(r.f1.zero_division.begin(), r.f1.zero_division.end());
        jr.push_back(run_json(r));
    }
    const MeanStd a = mean_std(acc), f = mean_std(f1);
    std::vector<std::vector<int>> cm;
    std::vector<std::vector<double>> cmn;
    const Eigen::MatrixXd norm = total.row_normalized();
    for (int r = 0; r < classes; ++r) {
        cm.emplace_back();
        cmn.emplace_back();
        for (int c = 0; c < classes; ++c) {
            cm.back().push_back(total.counts(r, c));
            cmn.back().push_back(norm(r, c));
        }
    }
    return {{"accuracy", a.mean},
            {"accuracy_std", a.std},
            {"macro_f1", f.mean},
            {"macro_f1_std", f.std},
            {"per_class_f1", per_class},
            {"zero_division_classes", std::vector<int>(zero_div.begin(), zero_div.end())},
            {"empty_confusion_rows", total.empty_rows()},
            {"confusion", cm},
            {"confusion_row_norm", cmn},
            {"runs", jr}};
}

// ---------------------------------------------------------------------------
// Virtual pipeline

/// The canonical set rendered to a BVH sequence and characterized back at the
/// hold midpoints, so the dictionary goes through the kinematics path.
inline PostureDictionary virtual_dictionary(const SkeletonAnimation& anim, const PipelineConfig& cfg,
                                            std::size_t postures = 12) {
    return dictionary_from_motion(anim, postures, cfg.hold_frames, cfg.transition_frames);
}

struct GridCell {
    double sigma_phi_sq = 0.0;
    double sigma_theta_sq = 0.0;
    std::vector<RunResult> runs;
};

struct VirtualReport {
    std::vector<GridCell> cells;  ///< row-major over (phi, theta)
    std::size_t rows = 0, cols = 0;
    int classes = 0;
};

inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t r) { return derive_seed(seed, streams::kRepeat + r); }

/// One run of the virtual protocol for a single grid cell and repeat.
inline RunResult virtual_run(const PostureDictionary& dict, double phi_sq, double theta_sq, const PipelineConfig& cfg,
                             std::uint64_t seed, std::size_t jobs = 1) {
    AugmentSettings tr{phi_sq, theta_sq, cfg.virtual_train_count, seed};
    AugmentSettings te{phi_sq, theta_sq, cfg.virtual_test_count, seed};
    const auto train = build_training_dictionary(dict, tr, streams::kTrainAugment, true);
    const auto test = build_training_dictionary(dict, te, streams::kTestAugment, false);
    return tune_train_evaluate(train.data, test.data, static_cast<int>(dict.classes()), cfg.tuning, seed, jobs);
}

inline VirtualReport run_virtual(const PostureDictionary& dict, const PipelineConfig& cfg) {
    VirtualReport rep;
    rep.rows = cfg.grid_phi_sq.size();
    rep.cols = cfg.grid_theta_sq.size();
    rep.classes = static_cast<int>(dict.classes());
    rep.cells.resize(rep.rows * rep.cols);
    for (std::size_t a = 0; a < rep.rows; ++a) {
        for (std::size_t b = 0; b < rep.cols; ++b) {
            auto& c = rep.cells[a * rep.cols + b];
            c.sigma_phi_sq = cfg.grid_phi_sq[a];
            c.sigma_theta_sq = cfg.grid_theta_sq[b];
            c.runs.resize(cfg.repeats);
        }
    }
    const std::size_t tasks = rep.cells.size() * cfg.repeats;
    parallel_for(tasks, cfg.jobs, [&](std::size_t t) {
        auto& cell = rep.cells[t / cfg.repeats];
        const std::size_t r = t % cfg.repeats;
        cell.runs[r] = virtual_run(dict, cell.sigma_phi_sq, cell.sigma_theta_sq, cfg, repeat_seed(cfg.seed, r));
    });
    return rep;
}

/// Grid of one statistic: header row of theta variances, one row per phi
/// variance.
template <typename Fn>
std::string heatmap_csv(const VirtualReport& rep, Fn stat) {
    std::ostringstream out;
    out << "sigma_phi_sq\\sigma_theta_sq";
    for (std::size_t b = 0; b < rep.cols; ++b) out << ',' << detail::shortest(rep.cells[b].sigma_theta_sq);
    out << "\n";
    for (std::size_t a = 0; a < rep.rows; ++a) {
        out << detail::shortest(rep.cells[a * rep.cols].sigma_phi_sq);
        for (std::size_t b = 0; b < rep.cols; ++b) out << ',' << detail::shortest(stat(rep.cells[a * rep.cols + b]));
        out << "\n";
    }
    return out.str();
}

inline MeanStd cell_f1(const GridCell& c) {
    std::vector<double> v;
    for (const auto& r : c.runs) v.push_back(r.f1.macro);
    return mean_std(v);
}

inline MeanStd cell_accuracy(const GridCell& c) {
    std::vector<double> v;
    for (const auto& r : c.runs) v.push_back(r.accuracy);
    return mean_std(v);
}

inline nlohmann::json virtual_report_json(const VirtualReport& rep) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : rep.cells) {
        nlohmann::json m = metrics_json(c.runs, rep.classes);
        m["sigma_phi_sq"] = c.sigma_phi_sq;
        m["sigma_theta_sq"] = c.sigma_theta_sq;
        cells.push_back(std::move(m));
    }
    return {{"classes", rep.classes}, {"cells", cells}};
}

// ---------------------------------------------------------------------------
// Wearable pipeline

struct LabeledSession {
    int label = 0;
    ImuSession imu;
    std::string source;  ///< file name or "synthetic"
};

struct SessionSet {
    std::vector<LabeledSession> train;
    std::vector<LabeledSession> test;
};

/// Synthetic sessions for every posture: one unperturbed training recording
/// and `test_recordings_per_posture` test recordings, each with one draw of
/// systematic spherical perturbation and a seeded length.
inline SessionSet synthesize_sessions(const PostureDictionary& dict, const PipelineConfig& cfg) {
    SessionSet s;
    const std::size_t k = dict.classes();
    const std::size_t per = cfg.test_recordings_per_posture;
    s.train.resize(k);
    s.test.resize(k * per);
    Rng len_rng = make_rng(cfg.seed, streams::kSessions + 0x800);
    std::uniform_real_distribution<double> extra(0.0, cfg.test_duration_jitter_s);
    std::vector<double> durations(k * per);
    for (double& d : durations) d = cfg.session.duration_s + extra(len_rng);
    parallel_for(k * (1 + per), cfg.jobs, [&](std::size_t t) {
        SessionOptions o = cfg.session;
        o.rate_hz = cfg.fusion.rate_hz;
        if (t < k) {
            const auto syn = synthesize_session(dict.shots[t], static_cast<int>(t + 1), o,
                                                derive_seed(cfg.seed, streams::kSessions + t));
            s.train[t] = {static_cast<int>(t + 1), syn.imu, "synthetic"};
            return;
        }
        const std::size_t i = t - k;
        const std::size_t cls = i / per;
        o.duration_s = durations[i];
        o.perturb_phi_sq = cfg.test_perturb_phi_sq;
        o.perturb_theta_sq = cfg.test_perturb_theta_sq;
        const auto syn = synthesize_session(dict.shots[cls], static_cast<int>(cls + 1), o,
                                            derive_seed(cfg.seed, streams::kSessions + 0x400 + i));
        s.test[i] = {static_cast<int>(cls + 1), syn.imu, "synthetic"};
    });
    return s;
}

struct WearableReport {
    int classes = 0;
    bool augmented = true;
    std::vector<RunResult> runs;
    std::vector<std::size_t> shot_frames;  ///< shot frame per class, first run
    LabeledFeatures train_features;        ///< training set of the first run
    TestMatrix test_matrix;
    EcocModel model;                       ///< model of the first run
    Eigen::MatrixXd similarity;            ///< test class x train class mean Lambda
    std::vector<std::vector<SimilarityScore>> one_vs_all;  ///< per test recording
};

struct FusedRecording {
    int label = 0;
    PoseTimeseries series;
};

inline std::vector<FusedRecording> fuse_sessions(const std::vector<LabeledSession>& sessions, const PipelineConfig& cfg) {
    std::vector<FusedRecording> out(sessions.size());
    parallel_for(sessions.size(), cfg.jobs, [&](std::size_t i) {
        out[i].label = sessions[i].label;
        out[i].series = process_session(sessions[i].imu, cfg.fusion);
        if (out[i].series.size() == 0) {
            throw std::invalid_argument("session " + std::to_string(i) + " (" + sessions[i].source +
                                        ") has no samples after the warm-up");
        }
    });
    return out;
}

/// Shot selection, augmentation (or the raw-timeseries baseline), tuning,
/// training and evaluation on the NaN-padded test matrix, repeated with
/// seeded shot choices.
inline WearableReport run_wearable(const SessionSet& sessions, int classes, const PipelineConfig& cfg, bool augment) {
    if (classes < 2) throw ValidationError("run-wearable needs at least two posture classes");
    const auto train_rec = fuse_sessions(sessions.train, cfg);
    const auto test_rec = fuse_sessions(sessions.test, cfg);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < train_rec.size(); ++i) {
        const int l = train_rec[i].label;
        if (l < 1 || l > classes) throw ValidationError("training session label out of range");
        by_class[static_cast<std::size_t>(l - 1)].push_back(i);
    }
    for (int c = 0; c < classes; ++c) {
        if (by_class[static_cast<std::size_t>(c)].empty()) {
            throw ValidationError("no training session for posture " + std::to_string(c + 1));
        }
    }
    std::vector<LabeledRecording> recs;
    for (const auto& r : test_rec) {
        if (r.label < 1 || r.label > classes) throw ValidationError("test session label out of range");
        recs.push_back({r.label, r.series.features()});
    }

    WearableReport rep;
    rep.classes = classes;
    rep.augmented = augment;
    rep.test_matrix = build_test_matrix(recs);
    const LabeledFeatures test = rep.test_matrix.flatten();
    rep.runs.resize(cfg.repeats);

    std::vector<LabeledFeatures> train_sets(cfg.repeats);
    std::vector<std::vector<std::size_t>> shots(cfg.repeats);
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed = repeat_seed(cfg.seed, r);
        Rng pick = make_rng(seed, streams::kShotSelection);
        if (augment) {
            PostureDictionary dict;
            for (int c = 0; c < classes; ++c) {
                const auto& cand = by_class[static_cast<std::size_t>(c)];
                const auto& rec =
                    train_rec[cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(pick)]].series;
                const std::size_t f = std::uniform_int_distribution<std::size_t>(0, rec.size() - 1)(pick);
                shots[r].push_back(f);
                dict.shots.push_back(rec.poses[f]);
                dict.names.push_back("posture_" + std::to_string(c + 1));
            }
            AugmentSettings s{cfg.sigma_phi_sq, cfg.sigma_theta_sq, cfg.wearable_train_count, seed};
            train_sets[r] = build_training_dictionary(dict, s, streams::kTrainAugment, true).data;
        } else {
            for (const auto& rec : train_rec) {
                LabeledFeatures part;
                part.X = rec.series.features();
                part.labels.assign(rec.series.size(), rec.label);
                train_sets[r].append(part);
            }
        }
    }
    std::vector<EcocModel> first(1);
    parallel_for(cfg.repeats, cfg.jobs, [&](std::size_t r) {
        rep.runs[r] = tune_train_evaluate(train_sets[r], test, classes, cfg.tuning, repeat_seed(cfg.seed, r), 1,
                                          r == 0 ? &first[0] : nullptr);
    });
    rep.model = std::move(first[0]);
    rep.shot_frames = shots[0];
    rep.train_features = train_sets[0];

    SimilarityMatrixOptions so;
    so.pair_cap = cfg.similarity_pair_cap;
    so.seed = cfg.seed;
    rep.similarity = similarity_matrix(rep.train_features, test, classes, so);
    for (const auto& rec : recs) {
        rep.one_vs_all.push_back(one_vs_all_similarity(feature_mean(rec.features), rep.train_features, classes));
    }
    return rep;
}

inline std::string matrix_csv(const Eigen::MatrixXd& m, const std::string& corner) {
    std::ostringstream out;
    out << corner;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << (c + 1);
    out << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out << (r + 1);
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << detail::shortest(m(r, c));
        out << "\n";
    }
    return out.str();
}

inline std::string one_vs_all_csv(const std::vector<std::vector<SimilarityScore>>& rows, const std::vector<int>& labels) {
    std::ostringstream out;
    out << "recording,true_label,train_class,lambda_phi,lambda_theta,lambda\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            out << (i + 1) << ',' << labels[i] << ',' << (k + 1) << ',' << detail::shortest(rows[i][k].lambda_phi) << ','
                << detail::shortest(rows[i][k].lambda_theta) << ',' << detail::shortest(rows[i][k].lambda) << "\n";
        }
    }
    return out.str();
}

}  // namespace sleepose
