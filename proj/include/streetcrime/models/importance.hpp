#pragma once

#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/models/model.hpp"

namespace streetcrime::models {

struct FeatureImportance {
    std::vector<double> values;  // non-negative, sums to 1
    bool no_splits = false;      // no tree split anywhere; values are uniform
};

// Per-feature sum of split scores. Variance trees credit the SSE reduction
// divided by the root sample count (variance reduction times node sample
// fraction); second-order trees credit the regularized gain.
inline std::vector<double> tree_split_scores(const RegressionTree& tree) {
    std::vector<double> v(static_cast<std::size_t>(tree.n_features), 0.0);
    if (tree.nodes.empty()) return v;
    const double n_root = static_cast<double>(std::max<std::size_t>(tree.nodes.front().n_samples, 1));
    const bool variance = tree.criterion == SplitCriterion::variance;
    for (const auto& n : tree.nodes) {
        if (n.is_leaf()) continue;
        v[static_cast<std::size_t>(n.feature)] += variance ? n.gain / n_root : n.gain;
    }
    return v;
}

// Mean of the per-tree score vectors, normalized to sum 1. A model without any
// split yields a uniform vector with no_splits set.
inline FeatureImportance importance_from_trees(const std::vector<RegressionTree>& trees, Eigen::Index n_features) {
    FeatureImportance out;
    out.values.assign(static_cast<std::size_t>(n_features), 0.0);
    for (const auto& t : trees) {
        const auto v = tree_split_scores(t);
        for (std::size_t j = 0; j < v.size(); ++j) out.values[j] += v[j] / static_cast<double>(trees.size());
    }
    double total = 0;
    for (double x : out.values) total += x;
    if (!(total > 0)) {
        out.values.assign(out.values.size(), 1.0 / static_cast<double>(n_features));
        out.no_splits = true;
        return out;
    }
    for (auto& x : out.values) x /= total;
    return out;
}

inline FeatureImportance feature_importance(const TrainedModel& model) {
    if (const auto* tree = std::get_if<RegressionTree>(&model)) return importance_from_trees({*tree}, tree->n_features);
    if (const auto* ens = std::get_if<Ensemble>(&model)) return importance_from_trees(ens->trees, ens->n_features);
    throw UnsupportedModelError("feature importance is defined for tree-based models only, not " +
                                model_name(model));
}

} // namespace streetcrime::models
