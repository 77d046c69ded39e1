#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/models/ensemble.hpp"
#include "streetcrime/models/linear.hpp"
#include "streetcrime/models/svr.hpp"
#include "streetcrime/models/tree.hpp"

namespace streetcrime::models {

using TrainedModel = std::variant<ConstantModel, LinearModel, SvrModel, RegressionTree, Ensemble>;

enum class ModelKind {
    mean,
    linear,
    polynomial,
    ridge,
    svr,
    decision_tree,
    random_forest,
    gradient_boosting,
    xgboost,
};

inline const std::vector<std::pair<ModelKind, std::string>>& model_kind_names() {
    static const std::vector<std::pair<ModelKind, std::string>> names{
        {ModelKind::mean, "mean"},
        {ModelKind::linear, "linear"},
        {ModelKind::polynomial, "polynomial"},
        {ModelKind::ridge, "ridge"},
        {ModelKind::svr, "svr"},
        {ModelKind::decision_tree, "decision_tree"},
        {ModelKind::random_forest, "random_forest"},
        {ModelKind::gradient_boosting, "gradient_boosting"},
        {ModelKind::xgboost, "xgboost"},
    };
    return names;
}

inline std::string to_string(ModelKind k) {
    for (const auto& [kind, name] : model_kind_names())
        if (kind == k) return name;
    return "unknown";
}

inline ModelKind parse_model_kind(std::string_view s) {
    std::string supported;
    for (const auto& [kind, name] : model_kind_names()) {
        if (name == s) return kind;
        supported += (supported.empty() ? "" : ", ") + name;
    }
    throw ConfigError("unknown model kind '" + std::string(s) + "'; supported: " + supported);
}

inline bool is_tree_based(ModelKind k) {
    return k == ModelKind::decision_tree || k == ModelKind::random_forest || k == ModelKind::gradient_boosting ||
           k == ModelKind::xgboost;
}

// Model kind plus every hyperparameter any kind uses; fields irrelevant to
// `kind` are ignored.
struct ModelSpec {
    ModelKind kind = ModelKind::linear;
    int degree = 2;
    double alpha = 1.0;
    SvrParams svr{};
    TreeParams tree{4, 1, 0};
    ForestParams forest{};
    GbtParams gbt{};
    XgbConfig xgb{};
};

// Sets a named hyperparameter for the spec's kind. Names: degree, alpha,
// epsilon, C, gamma, kernel (0 rbf, 1 linear), max_depth, min_samples_leaf,
// n_estimators, mtry, bootstrap, learning_rate, lambda, split_gamma, seed.
inline void set_hyperparameter(ModelSpec& spec, const std::string& name, double value) {
    auto as_count = [&](const char* what) {
        if (!(value >= 0) || value != std::floor(value)) throw ConfigError(std::string(what) + " must be a count");
        return static_cast<std::size_t>(value);
    };
    auto as_depth = [&] {
        if (!(value >= 1) || value != std::floor(value)) throw ConfigError("max_depth must be an integer >= 1");
        return value > kUnlimitedDepth ? kUnlimitedDepth : static_cast<int>(value);
    };
    const auto k = spec.kind;
    if (name == "degree") {
        spec.degree = static_cast<int>(value);
    } else if (name == "alpha") {
        spec.alpha = value;
    } else if (name == "epsilon") {
        spec.svr.epsilon = value;
    } else if (name == "C") {
        spec.svr.C = value;
    } else if (name == "gamma") {
        spec.svr.kernel.gamma = value;
    } else if (name == "kernel") {
        spec.svr.kernel.type = value == 0 ? Kernel::Type::rbf : Kernel::Type::linear;
    } else if (name == "max_depth") {
        const int d = as_depth();
        spec.tree.max_depth = d;
        spec.forest.max_depth = d;
        spec.gbt.max_depth = d;
        spec.xgb.max_depth = d;
    } else if (name == "min_samples_leaf") {
        const auto m = as_count("min_samples_leaf");
        spec.tree.min_samples_leaf = m;
        spec.forest.min_samples_leaf = m;
        spec.gbt.min_samples_leaf = m;
        spec.xgb.min_samples_leaf = m;
    } else if (name == "n_estimators") {
        const auto n = as_count("n_estimators");
        spec.forest.n_trees = n;
        spec.gbt.n_trees = n;
        spec.xgb.n_trees = n;
    } else if (name == "mtry") {
        spec.forest.mtry = as_count("mtry");
    } else if (name == "bootstrap") {
        spec.forest.bootstrap = value != 0;
    } else if (name == "learning_rate") {
        spec.gbt.learning_rate = value;
        spec.xgb.learning_rate = value;
    } else if (name == "lambda") {
        spec.xgb.lambda = value;
    } else if (name == "split_gamma") {
        spec.xgb.gamma = value;
    } else if (name == "seed") {
        spec.forest.seed = static_cast<std::uint64_t>(as_count("seed"));
        spec.gbt.seed = spec.forest.seed;
    } else {
        throw ConfigError("unknown hyperparameter '" + name + "' for model " + to_string(k));
    }
}

inline TrainedModel fit_model(const ModelSpec& spec, const DesignMatrix& data, std::size_t threads = 1) {
    switch (spec.kind) {
        case ModelKind::mean: return fit_mean(data);
        case ModelKind::linear: return fit_linear(data);
        case ModelKind::polynomial: return fit_polynomial(data, spec.degree);
        case ModelKind::ridge: return fit_ridge(data, spec.alpha);
        case ModelKind::svr: return fit_svr(data, spec.svr);
        case ModelKind::decision_tree: return fit_tree(data, spec.tree);
        case ModelKind::random_forest: return fit_forest(data, spec.forest, threads);
        case ModelKind::gradient_boosting: return fit_gbt(data, spec.gbt);
        case ModelKind::xgboost: return fit_xgb(data, spec.xgb);
    }
    throw ConfigError("unknown model kind");
}

inline Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& X) {
    return std::visit([&](const auto& m) -> Eigen::VectorXd { return m.predict(X); }, model);
}

inline std::string model_name(const TrainedModel& model) {
    struct {
        std::string operator()(const ConstantModel&) const { return "mean"; }
        std::string operator()(const LinearModel& m) const { return to_string(m.kind); }
        std::string operator()(const SvrModel&) const { return "svr"; }
        std::string operator()(const RegressionTree&) const { return "decision_tree"; }
        std::string operator()(const Ensemble& e) const { return to_string(e.kind); }
    } visitor;
    return std::visit(visitor, model);
}

} // namespace streetcrime::models
