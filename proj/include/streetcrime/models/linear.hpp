#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetcrime/core/error.hpp"
#include "streetcrime/models/design_matrix.hpp"

namespace streetcrime::models {

// All monomials of total degree 1..degree over d columns, cross terms
// included, constant excluded: C(d + degree, degree) - 1 columns. Order is
// by degree, then lexicographic in the (non-decreasing) factor indices, so
// d=2, degree=2 gives x1, x2, x1^2, x1 x2, x2^2.
struct PolynomialTerms {
    std::vector<std::vector<Eigen::Index>> factors;

    static PolynomialTerms make(Eigen::Index d, int degree) {
        if (degree < 1 || degree > 3) throw ValidationError("polynomial degree must be 1, 2 or 3");
        PolynomialTerms t;
        std::vector<Eigen::Index> cur;
        auto rec = [&](auto&& self, Eigen::Index start, int remaining) -> void {
            if (remaining == 0) {
                t.factors.push_back(cur);
                return;
            }
            for (Eigen::Index j = start; j < d; ++j) {
                cur.push_back(j);
                self(self, j, remaining - 1);
                cur.pop_back();
            }
        };
        for (int k = 1; k <= degree; ++k) rec(rec, 0, k);
        return t;
    }
};

struct PolynomialExpansion {
    Eigen::MatrixXd X;
    std::vector<std::string> names;
};

inline PolynomialExpansion expand_polynomial(const Eigen::MatrixXd& X, int degree,
                                             const std::vector<std::string>& names = {}) {
    const auto terms = PolynomialTerms::make(X.cols(), degree);
    PolynomialExpansion out;
    out.X.resize(X.rows(), static_cast<Eigen::Index>(terms.factors.size()));
    for (std::size_t t = 0; t < terms.factors.size(); ++t) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(X.rows());
        for (auto j : terms.factors[t]) col.array() *= X.col(j).array();
        out.X.col(static_cast<Eigen::Index>(t)) = col;
    }
    if (!names.empty()) {
        if (static_cast<Eigen::Index>(names.size()) != X.cols()) throw ValidationError("name count mismatch");
        for (const auto& f : terms.factors) {
            std::string name;
            for (std::size_t k = 0; k < f.size();) {
                std::size_t run = 1;
                while (k + run < f.size() && f[k + run] == f[k]) ++run;
                if (!name.empty()) name += " ";
                name += names[static_cast<std::size_t>(f[k])];
                if (run > 1) name += "^" + std::to_string(run);
                k += run;
            }
            out.names.push_back(name);
        }
    }
    return out;
}

enum class LinearKind { ordinary, polynomial, ridge };

inline std::string to_string(LinearKind k) {
    switch (k) {
        case LinearKind::ordinary: return "linear";
        case LinearKind::polynomial: return "polynomial";
        case LinearKind::ridge: return "ridge";
    }
    return "linear";
}

// y = intercept + coefficients . features, where features are the raw inputs
// or their polynomial expansion when degree > 1.
struct LinearModel {
    LinearKind kind = LinearKind::ordinary;
    double intercept = 0;
    Eigen::VectorXd coefficients;
    Eigen::Index input_dim = 0;
    int degree = 1;
    double alpha = 0;
    // Ridge only: slopes on the internally standardized features, i.e. the
    // vector the penalty acts on.
    Eigen::VectorXd standardized_coefficients;
    bool rank_deficient = false;   // minimum-norm solution returned
    bool underdetermined = false;  // n <= expanded d

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        check_dimension(input_dim, X.cols());
        if (degree > 1) return (expand_polynomial(X, degree).X * coefficients).array() + intercept;
        return (X * coefficients).array() + intercept;
    }
};

namespace detail {

// Least squares with a free intercept via centering; the slope part is the
// minimum-norm solution from a complete orthogonal decomposition.
inline LinearModel least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Xc);
    LinearModel m;
    m.coefficients = cod.solve(yc);
    m.intercept = y_mean - x_mean.dot(m.coefficients);
    m.rank_deficient = cod.rank() < X.cols();
    m.underdetermined = X.rows() <= X.cols();
    return m;
}

} // namespace detail

// Ordinary least squares, minimizing the sum of squared residuals.
inline LinearModel fit_linear(const DesignMatrix& data) {
    data.validate();
    auto m = detail::least_squares(data.X, data.y);
    m.kind = LinearKind::ordinary;
    m.input_dim = data.cols();
    return m;
}

// OLS on the full polynomial expansion of the inputs.
inline LinearModel fit_polynomial(const DesignMatrix& data, int degree) {
    data.validate();
    auto m = detail::least_squares(expand_polynomial(data.X, degree).X, data.y);
    m.kind = LinearKind::polynomial;
    m.degree = degree;
    m.input_dim = data.cols();
    return m;
}

// argmin ||y - b0 - Z b||^2 + alpha ||b||^2 on standardized features Z with
// an unpenalized intercept, solved as the augmented least-squares system
// [Z; sqrt(alpha) I] b = [y - mean(y); 0]. Coefficients are mapped back to
// the raw feature scale.
inline LinearModel fit_ridge(const DesignMatrix& data, double alpha) {
    data.validate();
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw ValidationError("ridge alpha must be >= 0");
    const auto scaler = Standardizer::fit(data.X);
    const Eigen::MatrixXd Z = scaler.apply(data.X);
    const Eigen::Index n = Z.rows(), d = Z.cols();
    const double y_mean = data.y.mean();

    Eigen::MatrixXd A(n + d, d);
    A.topRows(n) = Z;
    A.bottomRows(d) = std::sqrt(alpha) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd b(n + d);
    b.head(n) = data.y.array() - y_mean;
    b.tail(d).setZero();

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    LinearModel m;
    m.kind = LinearKind::ridge;
    m.alpha = alpha;
    m.input_dim = d;
    m.standardized_coefficients = cod.solve(b);
    m.coefficients = m.standardized_coefficients.array() / scaler.scale.array();
    m.intercept = y_mean - scaler.mean.dot(m.coefficients);
    m.rank_deficient = cod.rank() < d;
    m.underdetermined = n <= d;
    return m;
}

// Predicts the training mean everywhere. Baseline for validation protocols.
struct ConstantModel {
    double value = 0;
    Eigen::Index input_dim = 0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        check_dimension(input_dim, X.cols());
        return Eigen::VectorXd::Constant(X.rows(), value);
    }
};

inline ConstantModel fit_mean(const DesignMatrix& data) {
    data.validate();
    double sum = 0;
    for (Eigen::Index i = 0; i < data.y.size(); ++i) sum += data.y(i);
    return {sum / static_cast<double>(data.y.size()), data.cols()};
}

} // namespace streetcrime::models
