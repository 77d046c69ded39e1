#pragma once

#include <string>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/parallel.hpp"
#include "streetcrime/eval/validation.hpp"
#include "streetcrime/models/model.hpp"

namespace streetcrime::eval {

struct SweepSpec {
    std::string name;
    models::ModelSpec base;
    std::string hyperparameter;
    std::vector<double> grid;
    Protocol protocol;
};

struct SweepPoint {
    double value = 0;
    MetricReport train;
    MetricReport validation;
};

struct SweepResult {
    std::string name;
    models::ModelKind kind = models::ModelKind::linear;
    std::string hyperparameter;
    std::vector<SweepPoint> points;  // grid order
};

inline const std::vector<std::string>& builtin_sweep_names() {
    static const std::vector<std::string> names{"polynomial_degree", "ridge_alpha",       "svr_epsilon",
                                                "tree_depth",        "forest_estimators", "gbt_estimators"};
    return names;
}

// The experiment grids: polynomial degree {2,3}; ridge alpha
// {0.1,1,10,100,1000}; SVR epsilon {0.01,0.1,1,10,100}; tree depth
// {2,4,6,8,10}; forest and boosting estimators {10,...,50,100,200,500}.
inline SweepSpec builtin_sweep(const std::string& name, const Protocol& protocol = Protocol::loo(),
                               std::uint64_t seed = 0) {
    using models::ModelKind;
    const std::vector<double> estimators{10, 15, 20, 25, 30, 35, 40, 50, 100, 200, 500};
    SweepSpec s;
    s.name = name;
    s.protocol = protocol;
    if (name == "polynomial_degree") {
        s.base.kind = ModelKind::polynomial;
        s.hyperparameter = "degree";
        s.grid = {2, 3};
    } else if (name == "ridge_alpha") {
        s.base.kind = ModelKind::ridge;
        s.hyperparameter = "alpha";
        s.grid = {0.1, 1, 10, 100, 1000};
    } else if (name == "svr_epsilon") {
        s.base.kind = ModelKind::svr;
        s.hyperparameter = "epsilon";
        s.grid = {0.01, 0.1, 1, 10, 100};
    } else if (name == "tree_depth") {
        s.base.kind = ModelKind::decision_tree;
        s.hyperparameter = "max_depth";
        s.grid = {2, 4, 6, 8, 10};
    } else if (name == "forest_estimators") {
        s.base.kind = ModelKind::random_forest;
        s.hyperparameter = "n_estimators";
        s.grid = estimators;
    } else if (name == "gbt_estimators") {
        s.base.kind = ModelKind::gradient_boosting;
        s.hyperparameter = "n_estimators";
        s.grid = estimators;
    } else {
        std::string known;
        for (const auto& n : builtin_sweep_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown sweep '" + name + "'; built-in sweeps: " + known);
    }
    models::set_hyperparameter(s.base, "seed", static_cast<double>(seed));
    return s;
}

// Evaluates every grid value (in parallel) and returns results in grid order.
inline SweepResult run_sweep(const models::DesignMatrix& data, const SweepSpec& spec, std::size_t threads = 1) {
    if (spec.grid.empty()) throw ConfigError("sweep '" + spec.name + "' has an empty grid");
    SweepResult out{spec.name, spec.base.kind, spec.hyperparameter, std::vector<SweepPoint>(spec.grid.size())};
    parallel_for(spec.grid.size(), threads, [&](std::size_t g) {
        auto model_spec = spec.base;
        models::set_hyperparameter(model_spec, spec.hyperparameter, spec.grid[g]);
        const auto cv = cross_validate(data, model_spec, spec.protocol);
        out.points[g] = {spec.grid[g], cv.train, cv.validation};
    });
    return out;
}

} // namespace streetcrime::eval
