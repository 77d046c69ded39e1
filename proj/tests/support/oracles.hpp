#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

struct Affine {
    double intercept = 0;
    Eigen::VectorXd slope;
};

// Normal equations with an explicit intercept column, solved by LDLT.
inline Affine normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    return {beta(0), beta.tail(X.cols())};
}

// (Z'Z + alpha I)^{-1} Z'(y - ybar) on population-standardized Z, mapped back.
inline Affine ridge_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    const Eigen::Index n = X.rows(), d = X.cols();
    Eigen::VectorXd mu(d), sd(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        mu(j) = X.col(j).sum() / static_cast<double>(n);
        double v = 0;
        for (Eigen::Index i = 0; i < n; ++i) v += (X(i, j) - mu(j)) * (X(i, j) - mu(j));
        sd(j) = std::sqrt(v / static_cast<double>(n));
        if (sd(j) == 0) sd(j) = 1;
    }
    Eigen::MatrixXd Z(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) Z(i, j) = (X(i, j) - mu(j)) / sd(j);
    const double ybar = y.sum() / static_cast<double>(n);
    const Eigen::MatrixXd M = Z.transpose() * Z + alpha * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd bz = M.llt().solve(Z.transpose() * (y.array() - ybar).matrix());
    Affine out;
    out.slope = bz.array() / sd.array();
    out.intercept = ybar - mu.dot(out.slope);
    return out;
}

// Gains this close (relative) are ties; the earlier (feature, threshold) wins.
inline bool beats(double gain, double best) { return gain > best + 1e-12 * std::abs(best); }

struct OracleSplit {
    int feature = -1;
    double threshold = 0;
    double score = -std::numeric_limits<double>::infinity();
};

// Greedy variance tree built by trying every (feature, midpoint) pair and
// scoring it with two-pass child SSEs.
struct OracleNode {
    int feature = -1;
    double threshold = 0;
    double value = 0;
    std::vector<OracleNode> kids;
};

inline double sse(const std::vector<double>& v) {
    if (v.empty()) return 0;
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

inline std::vector<double> midpoints(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) out.push_back(v[k] + (v[k + 1] - v[k]) / 2);
    return out;
}

inline OracleNode exhaustive_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& rows,
                                  int depth_left, std::size_t min_leaf = 1) {
    OracleNode node;
    double mean = 0;
    for (int r : rows) mean += y(r);
    node.value = mean / static_cast<double>(rows.size());
    if (depth_left == 0 || rows.size() < 2 * min_leaf) return node;
    std::vector<double> ys;
    for (int r : rows) ys.push_back(y(r));
    const double parent = sse(ys);
    if (parent == 0) return node;
    double best = -std::numeric_limits<double>::infinity();
    int bf = -1;
    double bt = 0;
    for (int f = 0; f < X.cols(); ++f) {
        std::vector<double> xs;
        for (int r : rows) xs.push_back(X(r, f));
        for (double t : midpoints(xs)) {
            std::vector<double> l, rr;
            for (int r : rows) (X(r, f) <= t ? l : rr).push_back(y(r));
            if (l.size() < min_leaf || rr.size() < min_leaf) continue;
            const double gain = parent - sse(l) - sse(rr);
            if (bf < 0 || beats(gain, best)) best = gain, bf = f, bt = t;
        }
    }
    if (bf < 0 || !(best > 0)) return node;
    node.feature = bf;
    node.threshold = bt;
    std::vector<int> l, rr;
    for (int r : rows) (X(r, bf) <= bt ? l : rr).push_back(r);
    node.kids.push_back(exhaustive_tree(X, y, l, depth_left - 1, min_leaf));
    node.kids.push_back(exhaustive_tree(X, y, rr, depth_left - 1, min_leaf));
    return node;
}

inline double oracle_predict(const OracleNode& n, const Eigen::MatrixXd& X, Eigen::Index r) {
    const OracleNode* cur = &n;
    while (cur->feature >= 0) cur = &cur->kids[X(r, cur->feature) <= cur->threshold ? 0 : 1];
    return cur->value;
}

// Best second-order split of `rows`: gain
// 1/2 [GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)] - gamma,
// with G, H summed directly over each side.
inline OracleSplit best_gain_split(const Eigen::MatrixXd& X, const std::vector<double>& g,
                                   const std::vector<double>& h, const std::vector<int>& rows, double lambda,
                                   double gamma) {
    OracleSplit best;
    double G = 0, H = 0;
    for (int r : rows) G += g[static_cast<std::size_t>(r)], H += h[static_cast<std::size_t>(r)];
    for (int f = 0; f < X.cols(); ++f) {
        std::vector<double> xs;
        for (int r : rows) xs.push_back(X(r, f));
        for (double t : midpoints(xs)) {
            double GL = 0, HL = 0;
            for (int r : rows)
                if (X(r, f) <= t) GL += g[static_cast<std::size_t>(r)], HL += h[static_cast<std::size_t>(r)];
            const double GR = G - GL, HR = H - HL;
            const double gain =
                0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) - G * G / (H + lambda)) - gamma;
            if (best.feature < 0 || beats(gain, best.score)) best = {f, t, gain};
        }
    }
    return best;
}

// Minimizes 1/2 a'Qa + p'a subject to z'a = 0, 0 <= a <= C by accelerated
// projected gradient. The projection solves for the multiplier mu in
// sum_t z_t clip(v_t - mu z_t, 0, C) = 0 by bisection.
inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& v, const Eigen::VectorXd& z, double C) {
    auto at = [&](double mu) {
        Eigen::VectorXd a(v.size());
        for (Eigen::Index t = 0; t < v.size(); ++t) a(t) = std::clamp(v(t) - mu * z(t), 0.0, C);
        return a;
    };
    double lo = -1, hi = 1;
    while (z.dot(at(lo)) < 0) lo *= 2;
    while (z.dot(at(hi)) > 0) hi *= 2;
    for (int it = 0; it < 100; ++it) {
        const double mid = (lo + hi) / 2;
        (z.dot(at(mid)) > 0 ? lo : hi) = mid;
    }
    return at((lo + hi) / 2);
}

inline double dense_qp_min(const Eigen::MatrixXd& Q, const Eigen::VectorXd& p, const Eigen::VectorXd& z, double C,
                           int iterations = 20000) {
    const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff();
    const double step = 1.0 / std::max(L, 1e-12);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p.size()), yk = a, prev = a;
    double t = 1;
    for (int it = 0; it < iterations; ++it) {
        a = project_box_hyperplane(yk - step * (Q * yk + p), z, C);
        const double tn = (1 + std::sqrt(1 + 4 * t * t)) / 2;
        yk = a + ((t - 1) / tn) * (a - prev);
        prev = a;
        t = tn;
    }
    return 0.5 * a.dot(Q * a) + p.dot(a);
}

// Dual objective of epsilon-SVR on a precomputed kernel matrix.
inline double svr_dual_min(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double eps, double C,
                           int iterations = 20000) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd Q(2 * n, 2 * n);
    Eigen::VectorXd p(2 * n), z(2 * n);
    for (Eigen::Index s = 0; s < 2 * n; ++s) {
        z(s) = s < n ? 1.0 : -1.0;
        p(s) = s < n ? eps - y(s) : eps + y(s - n);
    }
    for (Eigen::Index s = 0; s < 2 * n; ++s)
        for (Eigen::Index t = 0; t < 2 * n; ++t) Q(s, t) = z(s) * z(t) * K(s % n, t % n);
    return dense_qp_min(Q, p, z, C, iterations);
}

} // namespace oracles
