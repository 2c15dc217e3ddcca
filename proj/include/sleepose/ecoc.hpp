// SPDX-License-Identifier: Apache-2.0
//
// Multi-class classification by error-correcting output codes over binary
// Gaussian-kernel SVMs: one-vs-one encoding, Hamming-loss decoding.
#pragma once

#include "sleepose/dataset.hpp"
#include "sleepose/parallel.hpp"
#include "sleepose/svm.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sleepose {

/// K x L matrix over {-1, 0, +1}; column i says which classes binary i sees.
struct EncodingMatrix {
    Eigen::MatrixXi codes;
    std::vector<std::pair<int, int>> pairs;  ///< 1-based (positive, negative) class per column

    int classes() const { return static_cast<int>(codes.rows()); }
    int learners() const { return static_cast<int>(codes.cols()); }
};

/// Columns (1,2), (1,3), ..., (K-1,K); +1 for the lower class, -1 for the higher.
inline EncodingMatrix build_ovo_encoding(int classes) {
    if (classes < 2) throw std::invalid_argument("one-vs-one encoding needs at least two classes");
    EncodingMatrix m;
    const int l = classes * (classes - 1) / 2;
    m.codes = Eigen::MatrixXi::Zero(classes, l);
    int col = 0;
    for (int a = 0; a < classes; ++a) {
        for (int b = a + 1; b < classes; ++b) {
            m.codes(a, col) = 1;
            m.codes(b, col) = -1;
            m.pairs.emplace_back(a + 1, b + 1);
            ++col;
        }
    }
    return m;
}

struct DecodeResult {
    int label = 0;                ///< 1-based
    std::vector<double> losses;   ///< per class, each in [0, 1]
};

/// Sign of a binary output for decoding; exact zeros vote negative.
inline int output_sign(double f) { return f > 0.0 ? 1 : -1; }

/// Hamming-loss decoding: loss_j = 1/(2L) * sum_i (1 - sgn(m_ji * f_i)), with
/// sgn(0) = 0 so ignored classes contribute 1/2 each. Ties go to the lowest
/// class index.
inline DecodeResult ecoc_decode(const EncodingMatrix& m, std::span<const double> outputs) {
    if (static_cast<int>(outputs.size()) != m.learners()) {
        throw std::invalid_argument("ecoc_decode: output count does not match encoding");
    }
    const int k = m.classes(), l = m.learners();
    DecodeResult r;
    r.losses.assign(static_cast<std::size_t>(k), 0.0);
    for (int j = 0; j < k; ++j) {
        double s = 0.0;
        for (int i = 0; i < l; ++i) {
            const int code = m.codes(j, i);
            const int sgn = code * output_sign(outputs[static_cast<std::size_t>(i)]);
            s += 1.0 - sgn;
        }
        r.losses[static_cast<std::size_t>(j)] = s / (2.0 * l);
    }
    r.label = static_cast<int>(std::min_element(r.losses.begin(), r.losses.end()) - r.losses.begin()) + 1;
    return r;
}

/// Per-dimension z-score fitted on training rows.
struct Normalization {
    FeatureVector mean = FeatureVector::Zero();
    FeatureVector scale = FeatureVector::Ones();

    static Normalization fit(const FeatureMatrix& x) {
        Normalization n;
        if (x.rows() == 0) return n;
        n.mean = x.colwise().mean().transpose();
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double var = (x.col(c).array() - n.mean(c)).square().mean();
            const double sd = std::sqrt(var);
            n.scale(c) = sd > 1e-12 ? sd : 1.0;
        }
        return n;
    }

    FeatureVector apply(const FeatureVector& x) const { return (x - mean).cwiseQuotient(scale); }

    FeatureMatrix apply(const FeatureMatrix& x) const {
        FeatureMatrix out = x;
        out.rowwise() -= mean.transpose();
        out.array().rowwise() /= scale.transpose().array();
        return out;
    }
};

/// One binary learner in the model. Support vectors live in a pool shared by
/// all learners, so a test row's kernel values are computed once per model.
struct EcocBinary {
    std::vector<std::size_t> pool_index;
    std::vector<double> coefficients;
    double bias = 0.0;
    double C = 1.0;
    double gamma = 1.0;
    SvmDiagnostics diagnostics;
};

struct EcocModel {
    static constexpr int kSchemaVersion = 1;

    EncodingMatrix encoding;
    std::vector<EcocBinary> binaries;
    FeatureMatrix pool;  ///< normalized support vectors
    Normalization normalization;
    std::vector<std::string> class_names;
    double C = 1.0;
    double gamma = 1.0;

    int classes() const { return encoding.classes(); }

    /// Per-learner SVM view (normalized feature space).
    SvmModel binary_model(std::size_t i) const {
        const EcocBinary& b = binaries.at(i);
        SvmModel m;
        m.C = b.C;
        m.gamma = b.gamma;
        m.bias = b.bias;
        m.coefficients = b.coefficients;
        m.diagnostics = b.diagnostics;
        m.support_vectors.resize(static_cast<Eigen::Index>(b.pool_index.size()), Eigen::NoChange);
        for (std::size_t k = 0; k < b.pool_index.size(); ++k) {
            m.support_vectors.row(static_cast<Eigen::Index>(k)) = pool.row(static_cast<Eigen::Index>(b.pool_index[k]));
        }
        return m;
    }
};

struct EcocTrainOptions {
    double C = 1.0;
    double gamma = 1.0;
    int classes = 0;  ///< 0: infer from the largest label
    std::size_t jobs = 1;
    SvmParams svm{};
};

namespace detail {

// Builds the shared pool from per-learner support rows (indices into the
// normalized training matrix), keeping first-seen order.
inline void assemble_pool(EcocModel& model, const FeatureMatrix& xn,
                          const std::vector<std::vector<std::size_t>>& rows_per_binary) {
    std::map<std::size_t, std::size_t> remap;
    std::vector<std::size_t> order;
    for (const auto& rows : rows_per_binary) {
        for (std::size_t r : rows) {
            if (remap.emplace(r, order.size()).second) order.push_back(r);
        }
    }
    model.pool.resize(static_cast<Eigen::Index>(order.size()), Eigen::NoChange);
    for (std::size_t k = 0; k < order.size(); ++k) {
        model.pool.row(static_cast<Eigen::Index>(k)) = xn.row(static_cast<Eigen::Index>(order[k]));
    }
    for (std::size_t i = 0; i < rows_per_binary.size(); ++i) {
        auto& idx = model.binaries[i].pool_index;
        idx.clear();
        for (std::size_t r : rows_per_binary[i]) idx.push_back(remap.at(r));
    }
}

}  // namespace detail

/// Fits the normalization on all rows, then trains every column's SVM on the
/// rows of its two member classes.
inline EcocModel train_ecoc(const LabeledFeatures& data, const EcocTrainOptions& opt) {
    const int k = opt.classes > 0 ? opt.classes : data.max_label();
    if (k < 2) throw std::invalid_argument("train_ecoc: need at least two classes");
    const auto counts = data.class_counts(k);
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw std::invalid_argument("train_ecoc: class " + std::to_string(c + 1) + " has no training rows");
        }
    }
    for (int l : data.labels) {
        if (l < 1 || l > k) throw std::invalid_argument("train_ecoc: label out of range");
    }

    EcocModel model;
    model.encoding = build_ovo_encoding(k);
    model.normalization = Normalization::fit(data.X);
    model.C = opt.C;
    model.gamma = opt.gamma;
    const FeatureMatrix xn = model.normalization.apply(data.X);

    std::vector<std::vector<std::size_t>> rows_of(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < data.size(); ++i) rows_of[static_cast<std::size_t>(data.labels[i] - 1)].push_back(i);

    const std::size_t l = model.encoding.pairs.size();
    model.binaries.resize(l);
    std::vector<std::vector<std::size_t>> support_rows(l);
    SvmParams params = opt.svm;
    params.C = opt.C;
    params.gamma = opt.gamma;

    parallel_for(l, opt.jobs, [&](std::size_t col) {
        const auto [pos, neg] = model.encoding.pairs[col];
        const auto& rp = rows_of[static_cast<std::size_t>(pos - 1)];
        const auto& rn = rows_of[static_cast<std::size_t>(neg - 1)];
        std::vector<std::size_t> rows;
        rows.reserve(rp.size() + rn.size());
        rows.insert(rows.end(), rp.begin(), rp.end());
        rows.insert(rows.end(), rn.begin(), rn.end());
        FeatureMatrix xb(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureDim));
        std::vector<int> yb(rows.size());
        for (std::size_t t = 0; t < rows.size(); ++t) {
            xb.row(static_cast<Eigen::Index>(t)) = xn.row(static_cast<Eigen::Index>(rows[t]));
            yb[t] = t < rp.size() ? 1 : -1;
        }
        const SvmModel svm = train_svm_binary(xb, yb, params);

        EcocBinary& b = model.binaries[col];
        b.bias = svm.bias;
        b.C = svm.C;
        b.gamma = svm.gamma;
        b.diagnostics = svm.diagnostics;
        b.coefficients = svm.coefficients;
        for (std::size_t t : svm.support_indices) support_rows[col].push_back(rows[t]);
    });
    detail::assemble_pool(model, xn, support_rows);
    return model;
}

inline EcocModel train_ecoc(const LabeledFeatures& data, double C, double gamma, std::size_t jobs = 1) {
    EcocTrainOptions opt;
    opt.C = C;
    opt.gamma = gamma;
    opt.jobs = jobs;
    return train_ecoc(data, opt);
}

/// Raw binary outputs f_i(x) for a block of rows (rows in original units).
inline Eigen::MatrixXd ecoc_binary_outputs(const EcocModel& model, const FeatureMatrix& x) {
    const FeatureMatrix xn = model.normalization.apply(x);
    const Eigen::Index n = xn.rows();
    const Eigen::Index l = static_cast<Eigen::Index>(model.binaries.size());
    const Eigen::Index p = model.pool.rows();
    Eigen::MatrixXd out(n, l);
    if (n == 0) return out;

    // Learners sharing one gamma collapse into a single product K * W.
    bool shared_gamma = true;
    for (const auto& b : model.binaries) shared_gamma = shared_gamma && b.gamma == model.binaries.front().gamma;
    Eigen::MatrixXd w;
    Eigen::RowVectorXd bias(l);
    if (shared_gamma) {
        w = Eigen::MatrixXd::Zero(p, l);
        for (Eigen::Index i = 0; i < l; ++i) {
            const EcocBinary& b = model.binaries[static_cast<std::size_t>(i)];
            for (std::size_t s = 0; s < b.pool_index.size(); ++s) {
                w(static_cast<Eigen::Index>(b.pool_index[s]), i) += b.coefficients[s];
            }
            bias(i) = b.bias;
        }
    }

    const Eigen::VectorXd pool_sq = model.pool.rowwise().squaredNorm();
    const Eigen::VectorXd x_sq = xn.rowwise().squaredNorm();
    constexpr Eigen::Index kChunk = 256;
    for (Eigen::Index start = 0; start < n; start += kChunk) {
        const Eigen::Index m = std::min(kChunk, n - start);
        Eigen::MatrixXd d2 = -2.0 * (xn.middleRows(start, m) * model.pool.transpose());
        d2.colwise() += x_sq.segment(start, m);
        d2.rowwise() += pool_sq.transpose();
        d2 = d2.cwiseMax(0.0);
        if (shared_gamma) {
            const Eigen::MatrixXd k = (-model.binaries.front().gamma * d2.array()).exp().matrix();
            out.middleRows(start, m) = (k * w).rowwise() + bias;
            continue;
        }
        for (Eigen::Index i = 0; i < l; ++i) {
            const EcocBinary& b = model.binaries[static_cast<std::size_t>(i)];
            for (Eigen::Index r = 0; r < m; ++r) {
                double f = b.bias;
                for (std::size_t s = 0; s < b.pool_index.size(); ++s) {
                    f += b.coefficients[s] * std::exp(-b.gamma * d2(r, static_cast<Eigen::Index>(b.pool_index[s])));
                }
                out(start + r, i) = f;
            }
        }
    }
    return out;
}

inline DecodeResult ecoc_predict(const EcocModel& model, const FeatureVector& x) {
    FeatureMatrix one(1, static_cast<Eigen::Index>(kFeatureDim));
    one.row(0) = x.transpose();
    const Eigen::MatrixXd f = ecoc_binary_outputs(model, one);
    std::vector<double> outputs(static_cast<std::size_t>(f.cols()));
    for (Eigen::Index i = 0; i < f.cols(); ++i) outputs[static_cast<std::size_t>(i)] = f(0, i);
    return ecoc_decode(model.encoding, outputs);
}

inline std::vector<int> ecoc_predict_labels(const EcocModel& model, const FeatureMatrix& x) {
    const Eigen::MatrixXd f = ecoc_binary_outputs(model, x);
    std::vector<int> labels(static_cast<std::size_t>(x.rows()));
    std::vector<double> outputs(static_cast<std::size_t>(f.cols()));
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        for (Eigen::Index i = 0; i < f.cols(); ++i) outputs[static_cast<std::size_t>(i)] = f(r, i);
        labels[static_cast<std::size_t>(r)] = ecoc_decode(model.encoding, outputs).label;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// JSON model document

inline nlohmann::json model_to_json(const EcocModel& model) {
    using nlohmann::json;
    auto vec = [](const FeatureVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json enc = json::array();
    for (Eigen::Index r = 0; r < model.encoding.codes.rows(); ++r) {
        std::vector<int> row(static_cast<std::size_t>(model.encoding.codes.cols()));
        for (Eigen::Index c = 0; c < model.encoding.codes.cols(); ++c) row[static_cast<std::size_t>(c)] = model.encoding.codes(r, c);
        enc.push_back(row);
    }
    json bins = json::array();
    for (const auto& b : model.binaries) {
        json svs = json::array();
        for (std::size_t idx : b.pool_index) {
            const auto row = model.pool.row(static_cast<Eigen::Index>(idx));
            svs.push_back(std::vector<double>(row.data(), row.data() + row.size()));
        }
        bins.push_back({{"svs", svs},
                        {"coeffs", b.coefficients},
                        {"b", b.bias},
                        {"C", b.C},
                        {"gamma", b.gamma},
                        {"iterations", b.diagnostics.iterations},
                        {"kkt_gap", b.diagnostics.kkt_gap},
                        {"converged", b.diagnostics.converged}});
    }
    return {{"schema_version", EcocModel::kSchemaVersion},
            {"normalization", {{"kind", "zscore"}, {"mean", vec(model.normalization.mean)},
                               {"scale", vec(model.normalization.scale)}}},
            {"encoding", enc},
            {"class_names", model.class_names},
            {"C", model.C},
            {"gamma", model.gamma},
            {"binaries", bins}};
}

inline EcocModel model_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != EcocModel::kSchemaVersion) {
        throw std::runtime_error("unsupported model schema_version");
    }
    EcocModel model;
    const auto mean = j.at("normalization").at("mean").get<std::vector<double>>();
    const auto scale = j.at("normalization").at("scale").get<std::vector<double>>();
    if (mean.size() != kFeatureDim || scale.size() != kFeatureDim) throw std::runtime_error("bad normalization");
    for (std::size_t c = 0; c < kFeatureDim; ++c) {
        model.normalization.mean(static_cast<Eigen::Index>(c)) = mean[c];
        model.normalization.scale(static_cast<Eigen::Index>(c)) = scale[c];
    }
    const auto enc = j.at("encoding").get<std::vector<std::vector<int>>>();
    const int k = static_cast<int>(enc.size());
    model.encoding = build_ovo_encoding(k);
    for (int r = 0; r < k; ++r) {
        if (static_cast<int>(enc[static_cast<std::size_t>(r)].size()) != model.encoding.learners()) {
            throw std::runtime_error("encoding shape mismatch");
        }
        for (int c = 0; c < model.encoding.learners(); ++c) {
            if (model.encoding.codes(r, c) != enc[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
                throw std::runtime_error("only one-vs-one encodings are supported");
            }
        }
    }
    if (j.contains("class_names")) model.class_names = j.at("class_names").get<std::vector<std::string>>();
    model.C = j.value("C", 1.0);
    model.gamma = j.value("gamma", 1.0);

    const auto& bins = j.at("binaries");
    if (static_cast<int>(bins.size()) != model.encoding.learners()) throw std::runtime_error("binary count mismatch");
    std::vector<std::vector<double>> pool_rows;
    std::map<std::vector<double>, std::size_t> seen;
    for (const auto& jb : bins) {
        EcocBinary b;
        b.coefficients = jb.at("coeffs").get<std::vector<double>>();
        b.bias = jb.at("b").get<double>();
        b.C = jb.at("C").get<double>();
        b.gamma = jb.at("gamma").get<double>();
        b.diagnostics.iterations = jb.value("iterations", std::size_t{0});
        b.diagnostics.kkt_gap = jb.value("kkt_gap", 0.0);
        b.diagnostics.converged = jb.value("converged", true);
        const auto svs = jb.at("svs").get<std::vector<std::vector<double>>>();
        if (svs.size() != b.coefficients.size()) throw std::runtime_error("svs/coeffs length mismatch");
        for (const auto& sv : svs) {
            if (sv.size() != kFeatureDim) throw std::runtime_error("support vector must have 16 entries");
            auto [it, inserted] = seen.emplace(sv, pool_rows.size());
            if (inserted) pool_rows.push_back(sv);
            b.pool_index.push_back(it->second);
        }
        model.binaries.push_back(std::move(b));
    }
    model.pool.resize(static_cast<Eigen::Index>(pool_rows.size()), Eigen::NoChange);
    for (std::size_t r = 0; r < pool_rows.size(); ++r) {
        for (std::size_t c = 0; c < kFeatureDim; ++c) {
            model.pool(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pool_rows[r][c];
        }
    }
    return model;
}

}  // namespace sleepose
