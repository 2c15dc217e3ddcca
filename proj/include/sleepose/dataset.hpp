// SPDX-License-Identifier: Apache-2.0
//
// Labeled 16-dim feature datasets and their CSV form.
#pragma once

#include "sleepose/pose.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepose {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kFeatureDim), Eigen::RowMajor>;

/// Rows of pose features with 1-based class labels.
struct LabeledFeatures {
    FeatureMatrix X;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }

    FeatureVector row(std::size_t i) const { return X.row(static_cast<Eigen::Index>(i)).transpose(); }

    int max_label() const {
        int m = 0;
        for (int l : labels) m = std::max(m, l);
        return m;
    }

    std::vector<std::size_t> class_counts(int classes) const {
        std::vector<std::size_t> counts(static_cast<std::size_t>(classes), 0);
        for (int l : labels) {
            if (l >= 1 && l <= classes) ++counts[static_cast<std::size_t>(l - 1)];
        }
        return counts;
    }

    LabeledFeatures subset(const std::vector<std::size_t>& rows) const {
        LabeledFeatures out;
        out.X.resize(static_cast<Eigen::Index>(rows.size()), Eigen::NoChange);
        out.labels.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
            out.labels.push_back(labels[rows[i]]);
        }
        return out;
    }

    void append(const LabeledFeatures& other) {
        const Eigen::Index n = X.rows();
        X.conservativeResize(n + other.X.rows(), Eigen::NoChange);
        X.bottomRows(other.X.rows()) = other.X;
        labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    }
};

inline std::string dataset_csv_header() {
    std::string h = "label";
    for (std::size_t j = 1; j <= kJointCount; ++j) {
        const std::string p = ",j" + std::to_string(j) + "_";
        h += p + "ax" + p + "ay" + p + "az" + p + "theta";
    }
    return h;
}

namespace detail {

inline std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double to_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    if (b < e && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e) {
        throw std::runtime_error("CSV line " + std::to_string(line) + ": invalid number '" + s + "'");
    }
    return v;
}

}  // namespace detail

/// Writes `label,j1_ax,...,j4_theta` rows; angles in radians.
inline void write_dataset_csv(std::ostream& out, const LabeledFeatures& data) {
    out << dataset_csv_header() << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        for (Eigen::Index c = 0; c < data.X.cols(); ++c) {
            out << ',' << detail::shortest(data.X(static_cast<Eigen::Index>(i), c));
        }
        out << "\n";
    }
}

inline LabeledFeatures read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != dataset_csv_header()) throw std::runtime_error("dataset CSV: unexpected header");
    std::vector<std::array<double, kFeatureDim>> rows;
    LabeledFeatures out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != kFeatureDim + 1) {
            throw std::runtime_error("dataset CSV line " + std::to_string(lineno) + ": expected 17 columns");
        }
        const double label = detail::to_double(cells[0], lineno);
        if (label < 1 || label != std::floor(label)) {
            throw std::runtime_error("dataset CSV line " + std::to_string(lineno) + ": invalid label");
        }
        out.labels.push_back(static_cast<int>(label));
        std::array<double, kFeatureDim> r{};
        for (std::size_t c = 0; c < kFeatureDim; ++c) r[c] = detail::to_double(cells[c + 1], lineno);
        rows.push_back(r);
    }
    out.X.resize(static_cast<Eigen::Index>(rows.size()), Eigen::NoChange);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < kFeatureDim; ++c) {
            out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
    }
    return out;
}

inline void save_dataset_csv(const std::string& path, const LabeledFeatures& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_dataset_csv(out, data);
}

inline LabeledFeatures load_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_dataset_csv(in);
}

}  // namespace sleepose
