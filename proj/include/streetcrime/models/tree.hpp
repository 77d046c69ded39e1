#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/random.hpp"
#include "streetcrime/models/design_matrix.hpp"

namespace streetcrime::models {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    double value = 0;  // leaf output
    std::size_t n_samples = 0;
    // Split score credited to `feature`: SSE reduction for variance splits,
    // regularized gain for second-order splits. Zero on leaves.
    double gain = 0;
    // Node statistics. Variance trees: sum of targets and sample count.
    // Second-order trees: gradient sum G and hessian sum H.
    double stat_sum = 0;
    double stat_weight = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

inline constexpr int kUnlimitedDepth = 1 << 20;

enum class SplitCriterion { variance, second_order };

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root, preorder
    int max_depth = 0;
    Eigen::Index n_features = 0;
    SplitCriterion criterion = SplitCriterion::variance;

    double predict_row(const Eigen::MatrixXd& X, Eigen::Index r) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = X(r, n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        check_dimension(n_features, X.cols());
        Eigen::VectorXd out(X.rows());
        for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict_row(X, r);
        return out;
    }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
    }

    // Longest root-to-leaf path, in edges.
    int depth() const {
        auto rec = [&](auto&& self, int i) -> int {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            return n.is_leaf() ? 0 : 1 + std::max(self(self, n.left), self(self, n.right));
        };
        return nodes.empty() ? 0 : rec(rec, 0);
    }
};

struct TreeParams {
    int max_depth = 3;
    std::size_t min_samples_leaf = 1;
    std::size_t mtry = 0;  // features tried per node; 0 means all
};

// Second-order split rule: leaf weight -G/(H + lambda), split gain
// 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma.
struct SecondOrderParams {
    double lambda = 1.0;
    double gamma = 0.0;
};

namespace detail {

using Criterion = SplitCriterion;

inline constexpr double kTieTolerance = 1e-12;

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, std::span<const double> target, std::span<const double> hessian,
                Criterion criterion, const TreeParams& params, SecondOrderParams so, SplitMix64* rng)
        : X_(X), target_(target), hessian_(hessian), criterion_(criterion), params_(params), so_(so), rng_(rng) {
        if (params_.max_depth < 1) throw ValidationError("max_depth must be >= 1");
        if (params_.min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
        if (params_.mtry > static_cast<std::size_t>(X.cols()))
            throw ValidationError("mtry must be in [1, d]");
    }

    RegressionTree build(std::vector<Eigen::Index> idx) {
        if (idx.empty()) throw ValidationError("cannot fit a tree on zero samples");
        tree_ = {};
        tree_.max_depth = params_.max_depth;
        tree_.n_features = X_.cols();
        tree_.criterion = criterion_;
        grow(idx, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        Eigen::Index feature = -1;
        double threshold = 0;
        double score = 0;
    };

    double score(double sl, double wl, double sr, double wr, double s, double w) const {
        if (criterion_ == Criterion::variance) return sl * sl / wl + sr * sr / wr - s * s / w;
        const double l = so_.lambda;
        return 0.5 * (sl * sl / (wl + l) + sr * sr / (wr + l) - s * s / (w + l)) - so_.gamma;
    }

    double hess(Eigen::Index i) const { return hessian_.empty() ? 1.0 : hessian_[static_cast<std::size_t>(i)]; }

    std::vector<Eigen::Index> candidate_features() {
        const auto d = static_cast<std::size_t>(X_.cols());
        std::vector<Eigen::Index> f(d);
        std::iota(f.begin(), f.end(), Eigen::Index{0});
        if (params_.mtry == 0 || params_.mtry >= d) return f;
        for (std::size_t k = 0; k < params_.mtry; ++k) {
            const auto j = k + static_cast<std::size_t>(rng_->uniform_below(d - k));
            std::swap(f[k], f[j]);
        }
        f.resize(params_.mtry);
        std::sort(f.begin(), f.end());
        return f;
    }

    int grow(std::vector<Eigen::Index>& idx, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const std::size_t m = idx.size();

        double sum = 0, weight = 0;
        for (auto i : idx) {
            sum += target_[static_cast<std::size_t>(i)];
            weight += hess(i);
        }
        // Variance splits score targets centred at the node mean.
        const double center = criterion_ == Criterion::variance ? sum / static_cast<double>(m) : 0.0;
        {
            auto& node = tree_.nodes[static_cast<std::size_t>(id)];
            node.n_samples = m;
            node.stat_sum = sum;
            node.stat_weight = weight;
            node.value = criterion_ == Criterion::variance ? center : -sum / (weight + so_.lambda);
        }

        const bool constant = std::all_of(idx.begin(), idx.end(), [&](Eigen::Index i) {
            return target_[static_cast<std::size_t>(i)] == target_[static_cast<std::size_t>(idx.front())];
        });
        if (depth >= params_.max_depth || constant || m < 2 * params_.min_samples_leaf) return id;

        double s_all = 0;
        for (auto i : idx) s_all += target_[static_cast<std::size_t>(i)] - center;

        Split best;
        best.score = -std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, Eigen::Index>> order(m);
        for (auto f : candidate_features()) {
            for (std::size_t k = 0; k < m; ++k) order[k] = {X_(idx[k], f), idx[k]};
            std::sort(order.begin(), order.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double sl = 0, wl = 0;
            for (std::size_t k = 0; k + 1 < m; ++k) {
                sl += target_[static_cast<std::size_t>(order[k].second)] - center;
                wl += hess(order[k].second);
                if (!(order[k].first < order[k + 1].first)) continue;
                if (k + 1 < params_.min_samples_leaf || m - k - 1 < params_.min_samples_leaf) continue;
                const double sc = score(sl, wl, s_all - sl, weight - wl, s_all, weight);
                // Scores within kTieTolerance count as ties, so the same
                // partition reached through two features (summed in different
                // orders) resolves to the lower feature index.
                if (best.feature < 0 || sc > best.score + kTieTolerance * std::abs(best.score)) {
                    double thr = order[k].first + (order[k + 1].first - order[k].first) / 2.0;
                    if (!(thr < order[k + 1].first)) thr = order[k].first;
                    best = {f, thr, sc};
                }
            }
        }
        if (best.feature < 0 || !(best.score > 0)) return id;

        std::vector<Eigen::Index> left, right;
        left.reserve(m);
        right.reserve(m);
        for (auto i : idx) (X_(i, best.feature) <= best.threshold ? left : right).push_back(i);
        {
            auto& node = tree_.nodes[static_cast<std::size_t>(id)];
            node.feature = static_cast<int>(best.feature);
            node.threshold = best.threshold;
            node.gain = best.score;
            node.value = 0;
        }
        std::vector<Eigen::Index>().swap(idx);
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        tree_.nodes[static_cast<std::size_t>(id)].left = l;
        tree_.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    const Eigen::MatrixXd& X_;
    std::span<const double> target_;
    std::span<const double> hessian_;
    Criterion criterion_;
    TreeParams params_;
    SecondOrderParams so_;
    SplitMix64* rng_;
    RegressionTree tree_;
};

inline std::vector<Eigen::Index> all_rows(Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    return idx;
}

} // namespace detail

// Greedy CART on the rows listed in `rows` (repeats allowed, as in a
// bootstrap resample). Each node takes the (feature, threshold) with the
// largest SSE reduction over midpoints of consecutive distinct values; ties
// (relative difference within 1e-12) go to the lowest feature index, then the
// lowest threshold. Growth stops at
// max_depth, at min_samples_leaf, or when all targets in a node are equal.
inline RegressionTree fit_variance_tree(const Eigen::MatrixXd& X, std::span<const double> y,
                                        std::vector<Eigen::Index> rows, const TreeParams& params,
                                        SplitMix64* rng = nullptr) {
    if (params.mtry != 0 && params.mtry < static_cast<std::size_t>(X.cols()) && rng == nullptr)
        throw ValidationError("feature subsampling needs a random stream");
    detail::TreeBuilder b(X, y, {}, detail::Criterion::variance, params, {0.0, 0.0}, rng);
    return b.build(std::move(rows));
}

inline RegressionTree fit_tree(const DesignMatrix& data, const TreeParams& params = {}) {
    data.validate();
    TreeParams p = params;
    p.mtry = 0;
    return fit_variance_tree(data.X, std::span(data.y.data(), static_cast<std::size_t>(data.y.size())),
                             detail::all_rows(data.rows()), p);
}

// Tree on gradients/hessians with the second-order gain; splits with gain <= 0
// are rejected. Leaf values are the unshrunk weights -G/(H + lambda).
inline RegressionTree fit_second_order_tree(const Eigen::MatrixXd& X, std::span<const double> gradient,
                                            std::span<const double> hessian, const TreeParams& params,
                                            const SecondOrderParams& so) {
    if (!(so.lambda >= 0) || !(so.gamma >= 0)) throw ValidationError("lambda and gamma must be >= 0");
    TreeParams p = params;
    p.mtry = 0;
    detail::TreeBuilder b(X, gradient, hessian, detail::Criterion::second_order, p, so, nullptr);
    return b.build(detail::all_rows(X.rows()));
}

} // namespace streetcrime::models
