#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/parallel.hpp"
#include "streetcrime/core/random.hpp"
#include "streetcrime/models/design_matrix.hpp"
#include "streetcrime/models/tree.hpp"

namespace streetcrime::models {

enum class EnsembleKind { forest, gradient_boosting, xgboost };

inline std::string to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::forest: return "random_forest";
        case EnsembleKind::gradient_boosting: return "gradient_boosting";
        case EnsembleKind::xgboost: return "xgboost";
    }
    return "random_forest";
}

struct ForestParams {
    std::size_t n_trees = 100;
    int max_depth = kUnlimitedDepth;
    std::size_t mtry = 0;  // 0 means ceil(d / 3)
    std::size_t min_samples_leaf = 1;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct GbtParams {
    std::size_t n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    std::size_t min_samples_leaf = 1;
    std::uint64_t seed = 0;  // recorded; boosting here uses no row or column sampling
};

struct XgbConfig {
    std::size_t n_trees = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    double lambda = 1.0;
    double gamma = 0.0;
    std::size_t min_samples_leaf = 1;
};

// forest:  mean over trees.
// boosting: base_score + learning_rate * sum over trees.
struct Ensemble {
    EnsembleKind kind = EnsembleKind::forest;
    std::vector<RegressionTree> trees;
    double learning_rate = 1.0;
    double base_score = 0.0;
    std::vector<std::uint64_t> tree_seeds;  // forest only
    Eigen::Index n_features = 0;
    // Fit configuration, echoed into serialized models.
    int max_depth = 0;
    std::size_t min_samples_leaf = 1;
    std::size_t mtry = 0;
    bool bootstrap = false;
    std::uint64_t seed = 0;
    double lambda = 0;
    double gamma = 0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X, std::size_t n_trees_used) const {
        check_dimension(n_features, X.cols());
        n_trees_used = std::min(n_trees_used, trees.size());
        if (kind == EnsembleKind::forest) {
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
            for (std::size_t b = 0; b < n_trees_used; ++b) sum += trees[b].predict(X);
            return sum / static_cast<double>(n_trees_used);
        }
        Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base_score);
        for (std::size_t k = 0; k < n_trees_used; ++k) out += learning_rate * trees[k].predict(X);
        return out;
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const { return predict(X, trees.size()); }
};

inline std::size_t default_mtry(Eigen::Index d) {
    return static_cast<std::size_t>((d + 2) / 3);
}

// Bagged CART. Tree b draws its bootstrap rows and per-node feature subsets
// from SplitMix64(derive_seed(seed, b)), so the model does not depend on
// how trees are scheduled across threads.
inline Ensemble fit_forest(const DesignMatrix& data, const ForestParams& params, std::size_t threads = 1) {
    data.validate();
    if (params.n_trees < 1) throw ValidationError("forest needs at least one tree");
    const std::size_t mtry = params.mtry == 0 ? default_mtry(data.cols()) : params.mtry;
    if (mtry < 1 || mtry > static_cast<std::size_t>(data.cols())) throw ValidationError("mtry must be in [1, d]");

    Ensemble e;
    e.kind = EnsembleKind::forest;
    e.n_features = data.cols();
    e.max_depth = params.max_depth;
    e.min_samples_leaf = params.min_samples_leaf;
    e.mtry = mtry;
    e.bootstrap = params.bootstrap;
    e.seed = params.seed;
    e.trees.resize(params.n_trees);
    e.tree_seeds.resize(params.n_trees);
    for (std::size_t b = 0; b < params.n_trees; ++b) e.tree_seeds[b] = derive_seed(params.seed, std::uint64_t{b});

    const TreeParams tp{params.max_depth, params.min_samples_leaf, mtry};
    const auto n = static_cast<std::size_t>(data.rows());
    const std::span<const double> y(data.y.data(), n);
    parallel_for(params.n_trees, threads, [&](std::size_t b) {
        SplitMix64 rng(e.tree_seeds[b]);
        std::vector<Eigen::Index> rows(n);
        for (std::size_t i = 0; i < n; ++i)
            rows[i] = params.bootstrap ? static_cast<Eigen::Index>(rng.uniform_below(n)) : static_cast<Eigen::Index>(i);
        e.trees[b] = fit_variance_tree(data.X, y, std::move(rows), tp, &rng);
    });
    return e;
}

// Least-squares gradient boosting: base_score = mean(y); tree k is a CART fit
// to the current residuals; predictions accumulate learning_rate * tree_k.
inline Ensemble fit_gbt(const DesignMatrix& data, const GbtParams& params) {
    data.validate();
    if (params.n_trees < 1) throw ValidationError("boosting needs at least one tree");
    if (!(params.learning_rate > 0 && params.learning_rate <= 1))
        throw ValidationError("learning_rate must be in (0, 1]");
    Ensemble e;
    e.kind = EnsembleKind::gradient_boosting;
    e.n_features = data.cols();
    e.learning_rate = params.learning_rate;
    e.max_depth = params.max_depth;
    e.min_samples_leaf = params.min_samples_leaf;
    e.seed = params.seed;
    e.base_score = data.y.mean();

    const TreeParams tp{params.max_depth, params.min_samples_leaf, 0};
    Eigen::VectorXd current = Eigen::VectorXd::Constant(data.rows(), e.base_score);
    Eigen::VectorXd residual(data.rows());
    for (std::size_t k = 0; k < params.n_trees; ++k) {
        residual = data.y - current;
        auto tree = fit_variance_tree(data.X, std::span(residual.data(), static_cast<std::size_t>(residual.size())),
                                      detail::all_rows(data.rows()), tp);
        current += params.learning_rate * tree.predict(data.X);
        e.trees.push_back(std::move(tree));
    }
    return e;
}

// Second-order boosting on squared loss l = 1/2 (y - yhat)^2, so g = yhat - y
// and h = 1. Leaves hold the unshrunk weight -G/(H + lambda); predictions add
// learning_rate times that weight.
inline Ensemble fit_xgb(const DesignMatrix& data, const XgbConfig& config) {
    data.validate();
    if (config.n_trees < 1) throw ValidationError("boosting needs at least one tree");
    if (!(config.learning_rate > 0 && config.learning_rate <= 1))
        throw ValidationError("learning_rate must be in (0, 1]");
    if (!(config.lambda >= 0) || !(config.gamma >= 0)) throw ValidationError("lambda and gamma must be >= 0");
    Ensemble e;
    e.kind = EnsembleKind::xgboost;
    e.n_features = data.cols();
    e.learning_rate = config.learning_rate;
    e.max_depth = config.max_depth;
    e.min_samples_leaf = config.min_samples_leaf;
    e.lambda = config.lambda;
    e.gamma = config.gamma;
    e.base_score = data.y.mean();

    const TreeParams tp{config.max_depth, config.min_samples_leaf, 0};
    const SecondOrderParams so{config.lambda, config.gamma};
    const auto n = static_cast<std::size_t>(data.rows());
    Eigen::VectorXd current = Eigen::VectorXd::Constant(data.rows(), e.base_score);
    Eigen::VectorXd grad(data.rows());
    const std::vector<double> hess(n, 1.0);
    for (std::size_t k = 0; k < config.n_trees; ++k) {
        grad = current - data.y;
        auto tree = fit_second_order_tree(data.X, std::span(grad.data(), n), hess, tp, so);
        current += config.learning_rate * tree.predict(data.X);
        e.trees.push_back(std::move(tree));
    }
    return e;
}

// Regularized objective after the first `n_trees_used` trees:
//   sum_i 1/2 (y_i - yhat_i)^2 + sum_k [gamma T_k + 1/2 lambda ||lr * w_k||^2]
// where w_k are tree k's leaf weights and lr the learning rate.
inline double xgb_objective(const Ensemble& e, const DesignMatrix& data, std::size_t n_trees_used) {
    const Eigen::VectorXd yhat = e.predict(data.X, n_trees_used);
    double obj = 0.5 * (data.y - yhat).squaredNorm();
    for (std::size_t k = 0; k < std::min(n_trees_used, e.trees.size()); ++k) {
        for (const auto& node : e.trees[k].nodes) {
            if (!node.is_leaf()) continue;
            const double w = e.learning_rate * node.value;
            obj += e.gamma + 0.5 * e.lambda * w * w;
        }
    }
    return obj;
}

} // namespace streetcrime::models
