// SPDX-License-Identifier: Apache-2.0
//
// Hyperparameter search for (C, gamma) in log10 space, scored by macro-F1 on
// a stratified holdout of the training set.
#pragma once

#include "sleepose/dataset.hpp"
#include "sleepose/ecoc.hpp"
#include "sleepose/metrics.hpp"
#include "sleepose/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

struct TuningTrial {
    double log_c = 0.0;
    double log_gamma = 0.0;
    double score = 0.0;

    double C() const { return std::pow(10.0, log_c); }
    double gamma() const { return std::pow(10.0, log_gamma); }
};

struct TuningBounds {
    double log_lo = -3.0;
    double log_hi = 3.0;
};

/// Proposes the next point given the trials so far.
class TuningStrategy {
public:
    virtual ~TuningStrategy() = default;
    virtual TuningTrial propose(const std::vector<TuningTrial>& history, const TuningBounds& bounds, Rng& rng) = 0;
    virtual std::string name() const = 0;
};

class RandomSearch final : public TuningStrategy {
public:
    TuningTrial propose(const std::vector<TuningTrial>&, const TuningBounds& b, Rng& rng) override {
        std::uniform_real_distribution<double> u(b.log_lo, b.log_hi);
        TuningTrial t;
        t.log_c = u(rng);
        t.log_gamma = u(rng);
        return t;
    }
    std::string name() const override { return "random"; }
};

/// Gaussian-process surrogate (squared-exponential kernel on the log box)
/// with expected improvement maximized over random candidates.
class GaussianProcessSearch final : public TuningStrategy {
public:
    std::size_t warmup = 8;
    std::size_t candidates = 512;
    double length_scale = 1.0;
    double noise = 1e-4;

    TuningTrial propose(const std::vector<TuningTrial>& history, const TuningBounds& b, Rng& rng) override {
        std::uniform_real_distribution<double> u(b.log_lo, b.log_hi);
        if (history.size() < warmup) return {u(rng), u(rng), 0.0};

        const auto n = static_cast<Eigen::Index>(history.size());
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = history[static_cast<std::size_t>(i)].score;
        const double mu0 = y.mean();
        y.array() -= mu0;
        auto k = [&](double a1, double a2, double b1, double b2) {
            const double d2 = (a1 - b1) * (a1 - b1) + (a2 - b2) * (a2 - b2);
            return std::exp(-0.5 * d2 / (length_scale * length_scale));
        };
        Eigen::MatrixXd kmat(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto& hi = history[static_cast<std::size_t>(i)];
                const auto& hj = history[static_cast<std::size_t>(j)];
                kmat(i, j) = k(hi.log_c, hi.log_gamma, hj.log_c, hj.log_gamma) + (i == j ? noise : 0.0);
            }
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(kmat);
        const Eigen::VectorXd alpha = llt.solve(y);
        const double best = y.maxCoeff();

        TuningTrial pick{u(rng), u(rng), 0.0};
        double best_ei = -1.0;
        Eigen::VectorXd ks(n);
        for (std::size_t c = 0; c < candidates; ++c) {
            const double lc = u(rng), lg = u(rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                ks(i) = k(lc, lg, history[static_cast<std::size_t>(i)].log_c, history[static_cast<std::size_t>(i)].log_gamma);
            }
            const double mean = ks.dot(alpha);
            const double var = std::max(1e-12, 1.0 - ks.dot(llt.solve(ks)));
            const double sd = std::sqrt(var);
            const double z = (mean - best) / sd;
            const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
            const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
            const double ei = (mean - best) * cdf + sd * pdf;
            if (ei > best_ei) {
                best_ei = ei;
                pick = {lc, lg, 0.0};
            }
        }
        return pick;
    }
    std::string name() const override { return "gp-ei"; }
};

inline std::unique_ptr<TuningStrategy> make_tuning_strategy(const std::string& name) {
    if (name == "random") return std::make_unique<RandomSearch>();
    if (name == "gp-ei" || name == "bayesian") return std::make_unique<GaussianProcessSearch>();
    throw std::invalid_argument("unknown tuning strategy '" + name + "'");
}

struct TuningOptions {
    std::size_t budget = 60;
    TuningBounds bounds{};
    double holdout_fraction = 0.2;
    /// Rows per class drawn for the search (0 keeps all); limits search cost.
    std::size_t max_rows_per_class = 0;
    /// Stop as soon as a point scores a perfect validation macro-F1.
    bool stop_at_perfect = true;
    std::string strategy = "random";
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    SvmParams svm{};
};

struct TuningResult {
    double C = 1.0;
    double gamma = 1.0;
    double score = 0.0;
    std::vector<TuningTrial> trials;
    std::string strategy;
};

struct HoldoutSplit {
    LabeledFeatures train;
    LabeledFeatures validation;
};

/// Per class, a seeded shuffle sends round(fraction * n_k) rows (at least one,
/// at most n_k - 1) to validation. Classes with a single row stay in training.
inline HoldoutSplit stratified_holdout(const LabeledFeatures& data, int classes, double fraction, Rng& rng,
                                       std::size_t max_rows_per_class = 0) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("holdout fraction must be in (0, 1)");
    std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < data.size(); ++i) rows.at(static_cast<std::size_t>(data.labels[i] - 1)).push_back(i);
    std::vector<std::size_t> tr, va;
    for (auto& r : rows) {
        std::shuffle(r.begin(), r.end(), rng);
        if (max_rows_per_class > 0 && r.size() > max_rows_per_class) r.resize(max_rows_per_class);
        if (r.size() < 2) {
            tr.insert(tr.end(), r.begin(), r.end());
            continue;
        }
        auto nv = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(r.size())));
        nv = std::clamp<std::size_t>(nv, 1, r.size() - 1);
        va.insert(va.end(), r.begin(), r.begin() + static_cast<std::ptrdiff_t>(nv));
        tr.insert(tr.end(), r.begin() + static_cast<std::ptrdiff_t>(nv), r.end());
    }
    std::sort(tr.begin(), tr.end());
    std::sort(va.begin(), va.end());
    return {data.subset(tr), data.subset(va)};
}

inline double holdout_score(const HoldoutSplit& split, int classes, double C, double gamma, std::size_t jobs,
                            const SvmParams& svm = {}) {
    EcocTrainOptions opt;
    opt.C = C;
    opt.gamma = gamma;
    opt.classes = classes;
    opt.jobs = jobs;
    opt.svm = svm;
    const EcocModel model = train_ecoc(split.train, opt);
    const auto preds = ecoc_predict_labels(model, split.validation.X);
    return macro_f1(preds, split.validation.labels, classes);
}

/// Best (C, gamma) by holdout macro-F1; ties keep the earlier trial.
inline TuningResult tune_hyperparameters(const LabeledFeatures& train, int classes, const TuningOptions& opt) {
    if (opt.budget < 1) throw std::invalid_argument("tuning budget must be >= 1");
    if (!(opt.bounds.log_lo <= opt.bounds.log_hi)) throw std::invalid_argument("tuning bounds are inverted");
    Rng rng = make_rng(opt.seed, streams::kTuning);
    const HoldoutSplit split = stratified_holdout(train, classes, opt.holdout_fraction, rng, opt.max_rows_per_class);
    if (split.validation.size() == 0) throw std::invalid_argument("tuning needs at least two rows per class");
    auto strategy = make_tuning_strategy(opt.strategy);

    TuningResult res;
    res.strategy = strategy->name();
    res.score = -1.0;
    for (std::size_t it = 0; it < opt.budget; ++it) {
        TuningTrial t = strategy->propose(res.trials, opt.bounds, rng);
        t.log_c = std::clamp(t.log_c, opt.bounds.log_lo, opt.bounds.log_hi);
        t.log_gamma = std::clamp(t.log_gamma, opt.bounds.log_lo, opt.bounds.log_hi);
        t.score = holdout_score(split, classes, t.C(), t.gamma(), opt.jobs, opt.svm);
        res.trials.push_back(t);
        if (t.score > res.score) {
            res.score = t.score;
            res.C = t.C();
            res.gamma = t.gamma();
        }
        if (opt.stop_at_perfect && t.score >= 1.0) break;
    }
    return res;
}

}  // namespace sleepose
