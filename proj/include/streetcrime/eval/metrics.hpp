#pragma once

#include <string>

#include <Eigen/Dense>

#include "streetcrime/core/error.hpp"

namespace streetcrime::eval {

inline double mean(const Eigen::VectorXd& v) {
    double sum = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) sum += v(i);
    return sum / static_cast<double>(v.size());
}

inline void check_lengths(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, Eigen::Index min_len) {
    if (y.size() != yhat.size())
        throw DimensionError("length mismatch: y has " + std::to_string(y.size()) + ", predictions have " +
                              std::to_string(yhat.size()));
    if (y.size() < min_len) throw ValidationError("need at least " + std::to_string(min_len) + " values");
}

inline double sum_squared_residuals(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    double ss = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ss += (y(i) - yhat(i)) * (y(i) - yhat(i));
    return ss;
}

inline double mse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    check_lengths(y, yhat, 1);
    return sum_squared_residuals(y, yhat) / static_cast<double>(y.size());
}

struct R2Score {
    double value = 0;
    bool degenerate_target = false;  // SS_tot == 0; value reported as 0
};

// 1 - SS_res / SS_tot. The residual and total sums use the same loop, so a
// constant prediction equal to mean(y) scores exactly 0.
inline R2Score r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    check_lengths(y, yhat, 2);
    const Eigen::VectorXd ybar = Eigen::VectorXd::Constant(y.size(), mean(y));
    const double ss_tot = sum_squared_residuals(y, ybar);
    if (ss_tot == 0) return {0.0, true};
    return {1.0 - sum_squared_residuals(y, yhat) / ss_tot, false};
}

struct MetricReport {
    double mse = 0;
    double r2 = 0;
    bool degenerate_target = false;
    std::size_t n = 0;
    std::string split;  // "train", "loo", "cv(k)", "holdout(f)"
};

inline MetricReport evaluate(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, std::string split) {
    const auto score = r2(y, yhat);
    return {mse(y, yhat), score.value, score.degenerate_target, static_cast<std::size_t>(y.size()), std::move(split)};
}

} // namespace streetcrime::eval
