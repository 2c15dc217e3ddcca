// SPDX-License-Identifier: Apache-2.0
//
// Soft-margin binary SVM with a Gaussian kernel, trained by sequential
// minimal optimization on the dual:
//
//   min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,
//   Q_ij = y_i y_j exp(-gamma |x_i - x_j|^2).
//
// Working pairs are chosen LIBSVM-style: i is the maximal KKT violator, j
// maximizes the second-order decrease of the objective.
#pragma once

#include "sleepose/dataset.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace sleepose {

struct SvmParams {
    double C = 1.0;
    double gamma = 1.0;
    double tolerance = 1e-3;
    /// Iteration cap is max(min_iterations, iterations_per_sample * n).
    std::size_t min_iterations = 10'000;
    std::size_t iterations_per_sample = 100;
    /// Memory budget for cached kernel columns.
    std::size_t cache_bytes = std::size_t{256} << 20;
};

struct SvmDiagnostics {
    std::size_t iterations = 0;
    double kkt_gap = 0.0;  ///< max violation m(a) - M(a) at exit
    bool converged = false;
};

/// Support vectors with their signed dual coefficients alpha_k * y_k.
struct SvmModel {
    FeatureMatrix support_vectors;
    std::vector<double> coefficients;
    std::vector<std::size_t> support_indices;  ///< training rows of the support vectors
    double bias = 0.0;
    double C = 1.0;
    double gamma = 1.0;
    SvmDiagnostics diagnostics;

    std::size_t support_count() const { return coefficients.size(); }
};

inline double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

/// f(x) = sum_k alpha_k y_k k(x_k, x) + b; its sign is the binary vote.
inline double svm_decision(const SvmModel& model, const FeatureVector& x) {
    double f = model.bias;
    for (std::size_t k = 0; k < model.coefficients.size(); ++k) {
        const auto sv = model.support_vectors.row(static_cast<Eigen::Index>(k));
        f += model.coefficients[k] * std::exp(-model.gamma * (sv.transpose() - x).squaredNorm());
    }
    return f;
}

namespace detail {

// Lazily computed columns of Q with FIFO eviction once the budget is used.
class KernelColumns {
public:
    KernelColumns(const FeatureMatrix& x, std::span<const double> y, double gamma, std::size_t budget_bytes)
        : x_(x), y_(y), gamma_(gamma), n_(static_cast<std::size_t>(x.rows())), columns_(n_) {
        sq_norms_ = x.rowwise().squaredNorm();
        const std::size_t per_col = std::max<std::size_t>(1, n_ * sizeof(double));
        capacity_ = std::max<std::size_t>(2, budget_bytes / per_col);
        diag_.assign(n_, 1.0);  // k(x, x) = 1 for the Gaussian kernel
    }

    /// `keep` names a column that must survive this call's eviction.
    const std::vector<double>& column(std::size_t i, std::size_t keep = static_cast<std::size_t>(-1)) {
        auto& col = columns_[i];
        if (col.empty()) {
            if (resident_.size() >= capacity_) {
                if (resident_[evict_] == keep) evict_ = (evict_ + 1) % resident_.size();
                columns_[resident_[evict_]].clear();
                columns_[resident_[evict_]].shrink_to_fit();
                resident_[evict_] = i;
                evict_ = (evict_ + 1) % resident_.size();
            } else {
                resident_.push_back(i);
            }
            col.resize(n_);
            const Eigen::VectorXd dots = x_ * x_.row(static_cast<Eigen::Index>(i)).transpose();
            const double si = sq_norms_(static_cast<Eigen::Index>(i));
            for (std::size_t t = 0; t < n_; ++t) {
                const double d2 = std::max(0.0, si + sq_norms_(static_cast<Eigen::Index>(t)) -
                                                    2.0 * dots(static_cast<Eigen::Index>(t)));
                col[t] = y_[i] * y_[t] * std::exp(-gamma_ * d2);
            }
            col[i] = 1.0;
        }
        return col;
    }

    double diag(std::size_t i) const { return diag_[i]; }

private:
    const FeatureMatrix& x_;
    std::span<const double> y_;
    double gamma_;
    std::size_t n_;
    Eigen::VectorXd sq_norms_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::size_t> resident_;
    std::size_t evict_ = 0;
    std::size_t capacity_ = 2;
    std::vector<double> diag_;
};

}  // namespace detail

/// Trains one binary classifier. Labels must be +1/-1 with both present.
inline SvmModel train_svm_binary(const FeatureMatrix& x, std::span<const int> labels, const SvmParams& params) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    if (labels.size() != n) throw std::invalid_argument("train_svm_binary: label count mismatch");
    if (n < 2) throw std::invalid_argument("train_svm_binary: need at least two samples");
    if (!(params.C > 0.0) || !(params.gamma > 0.0)) {
        throw std::invalid_argument("train_svm_binary: C and gamma must be positive");
    }
    if (!x.allFinite()) throw std::invalid_argument("train_svm_binary: non-finite features");
    std::vector<double> y(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 1) {
            has_pos = true;
        } else if (labels[i] == -1) {
            has_neg = true;
        } else {
            throw std::invalid_argument("train_svm_binary: labels must be +1 or -1");
        }
        y[i] = labels[i];
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("train_svm_binary: both classes must be present");

    const double C = params.C;
    const double tau = 1e-12;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // Q a - e at a = 0
    detail::KernelColumns q(x, y, params.gamma, params.cache_bytes);

    auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

    const std::size_t max_iter = std::max(params.min_iterations, params.iterations_per_sample * n);
    SvmDiagnostics diag;
    while (true) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] >= gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        double best = std::numeric_limits<double>::infinity();
        const std::vector<double>* qi = i < n ? &q.column(i) : nullptr;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = -y[t] * grad[t];
            gmin = std::min(gmin, v);
            if (qi && v < gmax) {
                const double b = gmax - v;
                double a = q.diag(i) + q.diag(t) - 2.0 * y[i] * y[t] * (*qi)[t];
                if (a <= 0) a = tau;
                const double score = -(b * b) / a;
                if (score <= best) {
                    best = score;
                    j = t;
                }
            }
        }
        diag.kkt_gap = gmax - gmin;
        if (i == n || j == n || diag.kkt_gap < params.tolerance) {
            diag.converged = true;
            break;
        }
        if (diag.iterations >= max_iter) break;
        ++diag.iterations;

        const std::vector<double>& col_i = q.column(i);
        const std::vector<double>& col_j = q.column(j, i);
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = q.diag(i) + q.diag(j) + 2.0 * col_i[j];
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = C + diff;
                }
            }
        } else {
            double quad = q.diag(i) + q.diag(j) - 2.0 * col_i[j];
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = sum;
                }
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = sum;
                }
            }
        }
        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += col_i[t] * dai + col_j[t] * daj;
    }

    // Offset from free vectors, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    SvmModel model;
    model.C = C;
    model.gamma = params.gamma;
    model.bias = -rho;
    model.diagnostics = diag;
    std::size_t count = 0;
    for (double a : alpha) count += a > 0 ? 1 : 0;
    model.support_vectors.resize(static_cast<Eigen::Index>(count), Eigen::NoChange);
    model.coefficients.reserve(count);
    for (std::size_t t = 0, k = 0; t < n; ++t) {
        if (alpha[t] > 0) {
            model.support_vectors.row(static_cast<Eigen::Index>(k++)) = x.row(static_cast<Eigen::Index>(t));
            model.coefficients.push_back(alpha[t] * y[t]);
            model.support_indices.push_back(t);
        }
    }
    return model;
}

inline SvmModel train_svm_binary(const FeatureMatrix& x, std::span<const int> labels, double C, double gamma) {
    SvmParams p;
    p.C = C;
    p.gamma = gamma;
    return train_svm_binary(x, labels, p);
}

/// Largest KKT violation of a trained model re-evaluated on its training set:
/// max over i of the amount by which y_i f(x_i) breaks its margin condition
/// for the dual variable's state (0, free, or at C).
inline double kkt_residual(const SvmModel& model, const FeatureMatrix& x, std::span<const int> labels) {
    // Map each training row to its coefficient (0 when not a support vector).
    std::vector<double> alpha(static_cast<std::size_t>(x.rows()), 0.0);
    for (std::size_t k = 0; k < model.support_count(); ++k) {
        for (Eigen::Index t = 0; t < x.rows(); ++t) {
            if (alpha[static_cast<std::size_t>(t)] == 0.0 &&
                x.row(t) == model.support_vectors.row(static_cast<Eigen::Index>(k))) {
                alpha[static_cast<std::size_t>(t)] = std::abs(model.coefficients[k]);
                break;
            }
        }
    }
    const double eps = 1e-9 * model.C;
    double worst = 0.0;
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        const double yf = labels[static_cast<std::size_t>(t)] * svm_decision(model, x.row(t).transpose());
        const double a = alpha[static_cast<std::size_t>(t)];
        double v = 0.0;
        if (a <= eps) {
            v = std::max(0.0, 1.0 - yf);
        } else if (a >= model.C - eps) {
            v = std::max(0.0, yf - 1.0);
        } else {
            v = std::abs(yf - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace sleepose
