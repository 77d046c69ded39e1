#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "streetcrime/core/error.hpp"
#include "streetcrime/models/model.hpp"

// JSON layout (all models):
//   { "format": "streetcrime-model/1", "kind": <model kind>, "config": {...}, ...payload }
// Payloads:
//   mean          value, input_dim
//   linear family intercept, coefficients[], standardized_coefficients[], input_dim,
//                 rank_deficient, underdetermined           (config: degree, alpha)
//   svr           dual[], bias, support[[...]], scaler{mean[], scale[]}, converged,
//                 iterations, dual_objective                (config: epsilon, C, kernel, gamma)
//   decision_tree n_features, nodes[]                        (config: max_depth)
//   ensembles     n_features, base_score, learning_rate, tree_seeds[], trees[{nodes[]}]
//                 (config: max_depth, min_samples_leaf, mtry, bootstrap, seed, lambda, gamma)
// A node is {feature, threshold, left, right, value, n_samples, gain, stat_sum, stat_weight}.
namespace streetcrime::models {

using nlohmann::json;

inline constexpr const char* kModelFormat = "streetcrime-model/1";

namespace detail {

inline json vec_to_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd vec_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json nodes_to_json(const RegressionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"n_samples", n.n_samples},
                         {"gain", n.gain},
                         {"stat_sum", n.stat_sum},
                         {"stat_weight", n.stat_weight}});
    return nodes;
}

inline RegressionTree tree_from_json(const json& nodes, int max_depth, Eigen::Index n_features) {
    RegressionTree t;
    t.max_depth = max_depth;
    t.n_features = n_features;
    for (const auto& n : nodes) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.value = n.at("value").get<double>();
        node.n_samples = n.at("n_samples").get<std::size_t>();
        node.gain = n.at("gain").get<double>();
        node.stat_sum = n.at("stat_sum").get<double>();
        node.stat_weight = n.at("stat_weight").get<double>();
        t.nodes.push_back(node);
    }
    const auto count = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes)
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
                             n.feature >= n_features))
            throw ValidationError("tree node references are out of range");
    if (t.nodes.empty()) throw ValidationError("tree has no nodes");
    return t;
}

} // namespace detail

inline json to_json(const TrainedModel& model) {
    json j{{"format", kModelFormat}, {"kind", model_name(model)}};
    struct Visitor {
        json& j;
        void operator()(const ConstantModel& m) const {
            j["config"] = json::object();
            j["value"] = m.value;
            j["input_dim"] = m.input_dim;
        }
        void operator()(const LinearModel& m) const {
            j["config"] = {{"degree", m.degree}, {"alpha", m.alpha}};
            j["intercept"] = m.intercept;
            j["coefficients"] = detail::vec_to_json(m.coefficients);
            j["standardized_coefficients"] = detail::vec_to_json(m.standardized_coefficients);
            j["input_dim"] = m.input_dim;
            j["rank_deficient"] = m.rank_deficient;
            j["underdetermined"] = m.underdetermined;
        }
        void operator()(const SvrModel& m) const {
            j["config"] = {{"epsilon", m.epsilon},
                           {"C", m.C},
                           {"kernel", to_string(m.kernel.type)},
                           {"gamma", m.kernel.gamma}};
            j["dual"] = detail::vec_to_json(m.dual);
            j["bias"] = m.bias;
            json support = json::array();
            for (Eigen::Index r = 0; r < m.support.rows(); ++r)
                support.push_back(detail::vec_to_json(m.support.row(r).transpose()));
            j["support"] = support;
            j["scaler"] = {{"mean", detail::vec_to_json(m.scaler.mean)}, {"scale", detail::vec_to_json(m.scaler.scale)}};
            j["converged"] = m.converged;
            j["iterations"] = m.iterations;
            j["dual_objective"] = m.dual_objective;
        }
        void operator()(const RegressionTree& t) const {
            j["config"] = {{"max_depth", t.max_depth}};
            j["n_features"] = t.n_features;
            j["nodes"] = detail::nodes_to_json(t);
        }
        void operator()(const Ensemble& e) const {
            j["config"] = {{"max_depth", e.max_depth}, {"min_samples_leaf", e.min_samples_leaf},
                           {"mtry", e.mtry},           {"bootstrap", e.bootstrap},
                           {"seed", e.seed},           {"lambda", e.lambda},
                           {"gamma", e.gamma}};
            j["n_features"] = e.n_features;
            j["base_score"] = e.base_score;
            j["learning_rate"] = e.learning_rate;
            j["tree_seeds"] = e.tree_seeds;
            json trees = json::array();
            for (const auto& t : e.trees) trees.push_back({{"nodes", detail::nodes_to_json(t)}});
            j["trees"] = trees;
        }
    };
    std::visit(Visitor{j}, model);
    return j;
}

inline TrainedModel from_json(const json& j) {
    try {
        if (j.value("format", "") != kModelFormat) throw ValidationError("not a streetcrime model document");
        const auto kind = parse_model_kind(j.at("kind").get<std::string>());
        const auto& cfg = j.at("config");
        switch (kind) {
            case ModelKind::mean:
                return ConstantModel{j.at("value").get<double>(), j.at("input_dim").get<Eigen::Index>()};
            case ModelKind::linear:
            case ModelKind::polynomial:
            case ModelKind::ridge: {
                LinearModel m;
                m.kind = kind == ModelKind::linear       ? LinearKind::ordinary
                         : kind == ModelKind::polynomial ? LinearKind::polynomial
                                                         : LinearKind::ridge;
                m.degree = cfg.at("degree").get<int>();
                m.alpha = cfg.at("alpha").get<double>();
                m.intercept = j.at("intercept").get<double>();
                m.coefficients = detail::vec_from_json(j.at("coefficients"));
                m.standardized_coefficients = detail::vec_from_json(j.at("standardized_coefficients"));
                m.input_dim = j.at("input_dim").get<Eigen::Index>();
                m.rank_deficient = j.at("rank_deficient").get<bool>();
                m.underdetermined = j.at("underdetermined").get<bool>();
                return m;
            }
            case ModelKind::svr: {
                SvrModel m;
                m.epsilon = cfg.at("epsilon").get<double>();
                m.C = cfg.at("C").get<double>();
                m.kernel.type = cfg.at("kernel").get<std::string>() == "linear" ? Kernel::Type::linear : Kernel::Type::rbf;
                m.kernel.gamma = cfg.at("gamma").get<double>();
                m.dual = detail::vec_from_json(j.at("dual"));
                m.bias = j.at("bias").get<double>();
                const auto& support = j.at("support");
                m.scaler.mean = detail::vec_from_json(j.at("scaler").at("mean"));
                m.scaler.scale = detail::vec_from_json(j.at("scaler").at("scale"));
                m.support.resize(static_cast<Eigen::Index>(support.size()), m.scaler.mean.size());
                for (std::size_t r = 0; r < support.size(); ++r)
                    m.support.row(static_cast<Eigen::Index>(r)) = detail::vec_from_json(support[r]).transpose();
                m.converged = j.at("converged").get<bool>();
                m.iterations = j.at("iterations").get<std::size_t>();
                m.dual_objective = j.at("dual_objective").get<double>();
                return m;
            }
            case ModelKind::decision_tree:
                return detail::tree_from_json(j.at("nodes"), cfg.at("max_depth").get<int>(),
                                              j.at("n_features").get<Eigen::Index>());
            case ModelKind::random_forest:
            case ModelKind::gradient_boosting:
            case ModelKind::xgboost: {
                Ensemble e;
                e.kind = kind == ModelKind::random_forest       ? EnsembleKind::forest
                         : kind == ModelKind::gradient_boosting ? EnsembleKind::gradient_boosting
                                                                : EnsembleKind::xgboost;
                e.max_depth = cfg.at("max_depth").get<int>();
                e.min_samples_leaf = cfg.at("min_samples_leaf").get<std::size_t>();
                e.mtry = cfg.at("mtry").get<std::size_t>();
                e.bootstrap = cfg.at("bootstrap").get<bool>();
                e.seed = cfg.at("seed").get<std::uint64_t>();
                e.lambda = cfg.at("lambda").get<double>();
                e.gamma = cfg.at("gamma").get<double>();
                e.n_features = j.at("n_features").get<Eigen::Index>();
                e.base_score = j.at("base_score").get<double>();
                e.learning_rate = j.at("learning_rate").get<double>();
                e.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
                for (const auto& t : j.at("trees")) {
                    e.trees.push_back(detail::tree_from_json(t.at("nodes"), e.max_depth, e.n_features));
                    if (e.kind == EnsembleKind::xgboost) e.trees.back().criterion = SplitCriterion::second_order;
                }
                return e;
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model JSON: ") + e.what());
    }
    throw ValidationError("malformed model JSON");
}

inline std::string serialize_model(const TrainedModel& model) { return to_json(model).dump(2) + "\n"; }

inline TrainedModel deserialize_model(const std::string& text) {
    try {
        return from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed model JSON: ") + e.what());
    }
}

} // namespace streetcrime::models
