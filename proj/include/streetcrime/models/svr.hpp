#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetcrime/core/error.hpp"
#include "streetcrime/models/design_matrix.hpp"

namespace streetcrime::models {

struct Kernel {
    enum class Type { rbf, linear };
    Type type = Type::rbf;
    // rbf width; <= 0 means 1 / (d * mean feature variance) on the
    // standardized training features.
    double gamma = 0;

    double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                      const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
        if (type == Type::linear) return a.dot(b);
        return std::exp(-gamma * (a - b).squaredNorm());
    }
};

inline std::string to_string(Kernel::Type t) { return t == Kernel::Type::rbf ? "rbf" : "linear"; }

struct SvrParams {
    double epsilon = 0.1;
    double C = 1.0;
    Kernel kernel{};
    double tolerance = 1e-3;              // KKT violation gap
    std::size_t max_iter_per_sample = 10'000;
};

// f(x) = sum_i dual_i k(z_i, z(x)) + bias with z the standardized inputs.
struct SvrModel {
    Eigen::VectorXd dual;        // alpha_i - alpha*_i, |dual_i| <= C
    double bias = 0;
    double epsilon = 0;
    double C = 1;
    Kernel kernel;
    Eigen::MatrixXd support;     // standardized training inputs
    Standardizer scaler;
    bool converged = false;
    std::size_t iterations = 0;
    double dual_objective = 0;   // 1/2 a'Qa + p'a over the 2n variables

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        check_dimension(scaler.mean.size(), X.cols());
        const Eigen::MatrixXd Z = scaler.apply(X);
        Eigen::VectorXd out(Z.rows());
        for (Eigen::Index r = 0; r < Z.rows(); ++r) {
            double s = bias;
            for (Eigen::Index i = 0; i < support.rows(); ++i)
                if (dual(i) != 0) s += dual(i) * kernel(support.row(i), Z.row(r));
            out(r) = s;
        }
        return out;
    }
};

// Dual of epsilon-insensitive regression in the 2n-variable form
//   min 1/2 a'Qa + p'a   s.t. z'a = 0, 0 <= a <= C
// with a = (alpha, alpha*), z = (+1.., -1..), p = (eps - y, eps + y),
// Q_st = z_s z_t K(i_s, i_t). Solved by sequential minimal optimization with
// second-order working-set selection (Fan, Chen, Lin 2005). Stops when the
// maximal KKT violation drops below `tolerance` or after
// max_iter_per_sample * n iterations (converged = false).
inline SvrModel fit_svr(const DesignMatrix& data, const SvrParams& params = {}) {
    data.validate();
    if (!(params.epsilon >= 0)) throw ValidationError("svr epsilon must be >= 0");
    if (!(params.C > 0)) throw ValidationError("svr C must be > 0");

    SvrModel m;
    m.epsilon = params.epsilon;
    m.C = params.C;
    m.kernel = params.kernel;
    m.scaler = Standardizer::fit(data.X);
    m.support = m.scaler.apply(data.X);
    const Eigen::Index n = m.support.rows();
    if (m.kernel.type == Kernel::Type::rbf && m.kernel.gamma <= 0) {
        double mean_var = 0;
        for (Eigen::Index j = 0; j < m.support.cols(); ++j)
            mean_var += m.support.col(j).squaredNorm() / static_cast<double>(n);
        mean_var /= static_cast<double>(m.support.cols());
        m.kernel.gamma = 1.0 / (static_cast<double>(m.support.cols()) * (mean_var > 0 ? mean_var : 1.0));
    }

    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = m.kernel(m.support.row(i), m.support.row(j));

    const Eigen::Index l = 2 * n;
    const double C = params.C;
    auto point = [n](Eigen::Index t) { return t < n ? t : t - n; };
    auto sign = [n](Eigen::Index t) { return t < n ? 1.0 : -1.0; };
    std::vector<double> a(static_cast<std::size_t>(l), 0.0), p(a.size()), G(a.size());
    for (Eigen::Index t = 0; t < n; ++t) {
        p[static_cast<std::size_t>(t)] = params.epsilon - data.y(t);
        p[static_cast<std::size_t>(t + n)] = params.epsilon + data.y(t);
    }
    G = p;
    auto Q = [&](Eigen::Index s, Eigen::Index t) { return sign(s) * sign(t) * K(point(s), point(t)); };
    auto in_up = [&](Eigen::Index t) { return sign(t) > 0 ? a[t] < C : a[t] > 0; };
    auto in_low = [&](Eigen::Index t) { return sign(t) > 0 ? a[t] > 0 : a[t] < C; };
    constexpr double tau = 1e-12;

    const std::size_t max_iter = params.max_iter_per_sample * static_cast<std::size_t>(n);
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < l; ++t) {
            if (in_up(t) && -sign(t) * G[t] > gmax) {
                gmax = -sign(t) * G[t];
                i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < l; ++t) {
            if (!in_low(t)) continue;
            const double zg = sign(t) * G[t];
            gmax2 = std::max(gmax2, zg);
            if (i < 0) continue;
            const double b = gmax + zg;
            if (b > 0) {
                double quad = K(point(i), point(i)) + K(point(t), point(t)) - 2.0 * K(point(i), point(t));
                if (quad <= 0) quad = tau;
                if (-(b * b) / quad < best) {
                    best = -(b * b) / quad;
                    j = t;
                }
            }
        }
        if (i < 0 || j < 0 || gmax + gmax2 < params.tolerance) break;

        const double Qij = Q(i, j);
        const double Qii = K(point(i), point(i)), Qjj = K(point(j), point(j));
        const double old_ai = a[i], old_aj = a[j];
        if (sign(i) != sign(j)) {
            double quad = Qii + Qjj + 2.0 * Qij;
            if (quad <= 0) quad = tau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) { a[j] = 0; a[i] = diff; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
            }
            if (diff > 0) {
                if (a[i] > C) { a[i] = C; a[j] = C - diff; }
            } else {
                if (a[j] > C) { a[j] = C; a[i] = C + diff; }
            }
        } else {
            double quad = Qii + Qjj - 2.0 * Qij;
            if (quad <= 0) quad = tau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) { a[i] = C; a[j] = sum - C; }
            } else {
                if (a[j] < 0) { a[j] = 0; a[i] = sum; }
            }
            if (sum > C) {
                if (a[j] > C) { a[j] = C; a[i] = sum - C; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = sum; }
            }
        }
        const double dai = a[i] - old_ai, daj = a[j] - old_aj;
        for (Eigen::Index t = 0; t < l; ++t) G[t] += Q(t, i) * dai + Q(t, j) * daj;
    }
    m.iterations = iter;
    m.converged = iter < max_iter;

    // Bias from the KKT conditions: average over free variables, otherwise
    // the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0;
    std::size_t n_free = 0;
    for (Eigen::Index t = 0; t < l; ++t) {
        const double zg = sign(t) * G[t];
        if (a[t] >= C) {
            if (sign(t) < 0) ub = std::min(ub, zg); else lb = std::max(lb, zg);
        } else if (a[t] <= 0) {
            if (sign(t) > 0) ub = std::min(ub, zg); else lb = std::max(lb, zg);
        } else {
            ++n_free;
            sum_free += zg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    m.bias = -rho;

    m.dual.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) m.dual(t) = a[t] - a[t + n];
    double obj = 0;
    for (Eigen::Index t = 0; t < l; ++t) obj += a[t] * (G[t] + p[t]);
    m.dual_objective = obj / 2.0;
    return m;
}

} // namespace streetcrime::models
