#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/core/parallel.hpp"
#include "streetcrime/core/random.hpp"
#include "streetcrime/eval/metrics.hpp"
#include "streetcrime/features/dataset.hpp"
#include "streetcrime/models/model.hpp"

namespace streetcrime::eval {

// Features become columns (named by display name), crime rate the target.
inline models::DesignMatrix design_from_dataset(const features::Dataset& ds) {
    const auto d = static_cast<Eigen::Index>(ds.schema.size());
    models::DesignMatrix m;
    m.X.resize(static_cast<Eigen::Index>(ds.rows.size()), d);
    m.y.resize(static_cast<Eigen::Index>(ds.rows.size()));
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        const auto& r = ds.rows[i];
        models::check_dimension(d, static_cast<Eigen::Index>(r.feature.size()));
        for (Eigen::Index j = 0; j < d; ++j) m.X(static_cast<Eigen::Index>(i), j) = r.feature[static_cast<std::size_t>(j)];
        m.y(static_cast<Eigen::Index>(i)) = r.crime_rate;
    }
    for (std::size_t j = 0; j < ds.schema.size(); ++j) m.feature_names.push_back(ds.schema.display_name(j));
    return m;
}

struct Protocol {
    enum class Kind { loo, kfold, holdout };
    Kind kind = Kind::loo;
    std::size_t k = 5;           // kfold
    double test_fraction = 0.2;  // holdout
    std::uint64_t seed = 0;

    static Protocol loo() { return {}; }
    static Protocol kfold(std::size_t k, std::uint64_t seed) { return {Kind::kfold, k, 0.2, seed}; }
    static Protocol holdout(double frac, std::uint64_t seed) { return {Kind::holdout, 5, frac, seed}; }

    std::string label() const {
        switch (kind) {
            case Kind::loo: return "loo";
            case Kind::kfold: return "cv(" + std::to_string(k) + ")";
            case Kind::holdout: return "holdout(" + format_double(test_fraction) + ")";
        }
        return "loo";
    }
};

// Parses "loo", "kfold:<k>" or "holdout:<fraction>".
inline Protocol parse_protocol(std::string_view s, std::uint64_t seed) {
    if (s == "loo") return Protocol::loo();
    if (s.rfind("kfold:", 0) == 0) {
        const auto k = parse_integer<std::size_t>(s.substr(6));
        if (!k || *k < 2) throw ConfigError("kfold needs an integer k >= 2, got '" + std::string(s) + "'");
        return Protocol::kfold(*k, seed);
    }
    if (s.rfind("holdout:", 0) == 0) {
        const auto f = parse_double(s.substr(8));
        if (!f || *f <= 0 || *f >= 1) throw ConfigError("bad holdout fraction in '" + std::string(s) + "'");
        return Protocol::holdout(*f, seed);
    }
    throw ConfigError("unknown validation protocol '" + std::string(s) + "' (loo|kfold:<k>|holdout:<fraction>)");
}

// Seeded permutation of 0..n-1 (Fisher-Yates on SplitMix64).
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(seed, "folds"));
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[static_cast<std::size_t>(rng.uniform_below(i))]);
    return p;
}

inline constexpr std::ptrdiff_t kTrainOnly = -1;

// Validation fold of every row; holdout uses fold 0 for the test rows and
// kTrainOnly for the rest.
inline std::vector<std::ptrdiff_t> assign_folds(std::size_t n, const Protocol& protocol) {
    std::vector<std::ptrdiff_t> fold(n, kTrainOnly);
    switch (protocol.kind) {
        case Protocol::Kind::loo:
            if (n < 3) throw ValidationError("leave-one-out needs n >= 3");
            std::iota(fold.begin(), fold.end(), std::ptrdiff_t{0});
            break;
        case Protocol::Kind::kfold: {
            if (protocol.k < 2 || protocol.k > n) throw ValidationError("k-fold needs n >= k >= 2");
            const auto perm = permutation(n, protocol.seed);
            for (std::size_t p = 0; p < n; ++p) fold[perm[p]] = static_cast<std::ptrdiff_t>(p % protocol.k);
            break;
        }
        case Protocol::Kind::holdout: {
            const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * protocol.test_fraction));
            if (n_test < 2 || n - n_test < 2)
                throw ValidationError("holdout split leaves fewer than 2 rows on one side");
            const auto perm = permutation(n, protocol.seed);
            for (std::size_t p = 0; p < n_test; ++p) fold[perm[p]] = 0;
            break;
        }
    }
    return fold;
}

struct CvResult {
    MetricReport validation;
    MetricReport train;  // fit and evaluated on all rows
    std::vector<std::ptrdiff_t> fold_of_row;
    Eigen::VectorXd out_of_fold;  // prediction for every row with a validation fold
};

// Fits one model per fold, assembles the out-of-fold predictions into one
// vector and scores it once.
inline CvResult cross_validate(const models::DesignMatrix& data, const models::ModelSpec& spec,
                               const Protocol& protocol, std::size_t threads = 1) {
    data.validate();
    const auto n = static_cast<std::size_t>(data.rows());
    CvResult out;
    out.fold_of_row = assign_folds(n, protocol);
    const auto n_folds = static_cast<std::size_t>(
        *std::max_element(out.fold_of_row.begin(), out.fold_of_row.end()) + 1);

    std::vector<std::vector<Eigen::Index>> train_rows(n_folds), test_rows(n_folds);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < n_folds; ++f) {
            if (out.fold_of_row[i] == static_cast<std::ptrdiff_t>(f))
                test_rows[f].push_back(static_cast<Eigen::Index>(i));
            else
                train_rows[f].push_back(static_cast<Eigen::Index>(i));
        }
    }
    std::vector<Eigen::VectorXd> fold_pred(n_folds);
    parallel_for(n_folds, threads, [&](std::size_t f) {
        try {
            const auto model = models::fit_model(spec, data.subset(train_rows[f]));
            fold_pred[f] = models::predict(model, data.subset(test_rows[f]).X);
        } catch (const std::exception& e) {
            throw FoldError(f, e.what());
        }
    });

    std::vector<Eigen::Index> evaluated;
    for (std::size_t i = 0; i < n; ++i)
        if (out.fold_of_row[i] != kTrainOnly) evaluated.push_back(static_cast<Eigen::Index>(i));
    out.out_of_fold = Eigen::VectorXd::Constant(data.rows(), std::nan(""));
    for (std::size_t f = 0; f < n_folds; ++f)
        for (std::size_t k = 0; k < test_rows[f].size(); ++k)
            out.out_of_fold(test_rows[f][k]) = fold_pred[f](static_cast<Eigen::Index>(k));
    Eigen::VectorXd y_eval(static_cast<Eigen::Index>(evaluated.size())), p_eval(y_eval.size());
    for (std::size_t k = 0; k < evaluated.size(); ++k) {
        y_eval(static_cast<Eigen::Index>(k)) = data.y(evaluated[k]);
        p_eval(static_cast<Eigen::Index>(k)) = out.out_of_fold(evaluated[k]);
    }
    out.validation = evaluate(y_eval, p_eval, protocol.label());

    const auto full = models::fit_model(spec, data, threads);
    out.train = evaluate(data.y, models::predict(full, data.X), "train");
    return out;
}

} // namespace streetcrime::eval
