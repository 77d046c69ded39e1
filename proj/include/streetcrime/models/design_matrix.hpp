#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetcrime/core/error.hpp"

namespace streetcrime::models {

// n x d predictors, n targets, d feature names.
struct DesignMatrix {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> feature_names;

    Eigen::Index rows() const noexcept { return X.rows(); }
    Eigen::Index cols() const noexcept { return X.cols(); }

    void validate() const {
        if (X.rows() < 2) throw ValidationError("design matrix needs at least 2 rows");
        if (X.cols() < 1) throw ValidationError("design matrix needs at least 1 feature");
        if (y.size() != X.rows())
            throw ValidationError("target length " + std::to_string(y.size()) + " != row count " +
                                  std::to_string(X.rows()));
        if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols())
            throw ValidationError("feature name count does not match column count");
        if (!X.allFinite() || !y.allFinite()) throw ValidationError("design matrix has non-finite entries");
    }

    // Row subset, used by cross-validation folds.
    DesignMatrix subset(const std::vector<Eigen::Index>& idx) const {
        DesignMatrix out;
        out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
        out.y.resize(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            out.X.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
            out.y(static_cast<Eigen::Index>(i)) = y(idx[i]);
        }
        out.feature_names = feature_names;
        return out;
    }
};

inline void check_dimension(Eigen::Index expected, Eigen::Index actual) {
    if (expected != actual)
        throw DimensionError("model expects d=" + std::to_string(expected) + " features, got d=" +
                             std::to_string(actual));
}

// Per-column affine map to mean 0, variance 1 (population variance).
// Constant columns keep scale 1 and become all zeros.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& X) {
        Standardizer s;
        const double n = static_cast<double>(X.rows());
        s.mean = X.colwise().mean().transpose();
        s.scale.resize(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double var = (X.col(j).array() - s.mean(j)).square().sum() / n;
            const double sd = std::sqrt(var);
            s.scale(j) = sd > 0 ? sd : 1.0;
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        check_dimension(mean.size(), X.cols());
        return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    }
};

} // namespace streetcrime::models
