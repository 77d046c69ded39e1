#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "streetcrime/eval/metrics.hpp"
#include "streetcrime/eval/plot.hpp"
#include "streetcrime/eval/report.hpp"
#include "streetcrime/eval/sweep.hpp"
#include "streetcrime/eval/validation.hpp"
#include "test_support.hpp"

using namespace streetcrime;
using namespace streetcrime::eval;
using namespace testing_support;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

models::DesignMatrix linear_data(std::uint64_t seed, Eigen::Index n, Eigen::Index d, double noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    models::DesignMatrix m;
    m.X.resize(n, d);
    m.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = 0.5;
        for (Eigen::Index j = 0; j < d; ++j) {
            m.X(i, j) = g(rng);
            t += (j + 1) * m.X(i, j);
        }
        m.y(i) = t + noise * g(rng);
    }
    for (Eigen::Index j = 0; j < d; ++j) m.feature_names.push_back("x" + std::to_string(j));
    return m;
}

} // namespace

TEST(Metrics, PerfectAndMeanPredictions) {
    const auto y = vec({1, 4, 2, 8, 5});
    EXPECT_EQ(mse(y, y), 0.0);
    EXPECT_EQ(r2(y, y).value, 1.0);
    const VectorXd ybar = VectorXd::Constant(5, mean(y));
    EXPECT_EQ(r2(y, ybar).value, 0.0);
    EXPECT_FALSE(r2(y, ybar).degenerate_target);
}

TEST(Metrics, SmallExamples) {
    EXPECT_EQ(mse(vec({0, 0}), vec({1, 1})), 1.0);
    EXPECT_DOUBLE_EQ(mse(vec({1, 2, 3}), vec({2, 2, 1})), 5.0 / 3.0);
    // SS_res = 5, SS_tot = 2.
    EXPECT_DOUBLE_EQ(r2(vec({1, 2, 3}), vec({2, 2, 1})).value, 1.0 - 5.0 / 2.0);
}

TEST(Metrics, ConstantTargetIsFlagged) {
    const auto s = r2(vec({3, 3, 3}), vec({1, 2, 3}));
    EXPECT_TRUE(s.degenerate_target);
    EXPECT_EQ(s.value, 0.0);
    EXPECT_TRUE(evaluate(vec({3, 3, 3}), vec({3, 3, 3}), "x").degenerate_target);
}

TEST(Metrics, LengthChecks) {
    EXPECT_THROW(mse(vec({1, 2}), vec({1})), DimensionError);
    EXPECT_THROW(mse(VectorXd(0), VectorXd(0)), ValidationError);
    EXPECT_THROW(r2(vec({1}), vec({1})), ValidationError);
}

TEST(Protocol, ParsingAndLabels) {
    EXPECT_EQ(parse_protocol("loo", 1).label(), "loo");
    EXPECT_EQ(parse_protocol("kfold:5", 1).label(), "cv(5)");
    EXPECT_EQ(parse_protocol("holdout:0.2", 1).label(), "holdout(0.2)");
    EXPECT_THROW(parse_protocol("holdout:1.5", 1), ConfigError);
    EXPECT_THROW(parse_protocol("kfold:x", 1), ConfigError);
    EXPECT_THROW(parse_protocol("bootstrap", 1), ConfigError);
}

TEST(Folds, KFoldPartitionsAndIsSeeded) {
    const auto a = assign_folds(71, Protocol::kfold(5, 42));
    EXPECT_EQ(a, assign_folds(71, Protocol::kfold(5, 42)));
    EXPECT_NE(a, assign_folds(71, Protocol::kfold(5, 43)));
    std::vector<int> sizes(5, 0);
    for (auto f : a) {
        ASSERT_GE(f, 0);
        ASSERT_LT(f, 5);
        ++sizes[static_cast<std::size_t>(f)];
    }
    for (int s : sizes) EXPECT_TRUE(s == 14 || s == 15) << s;
    EXPECT_THROW(assign_folds(4, Protocol::kfold(5, 1)), ValidationError);
}

TEST(Folds, HoldoutSizes) {
    const auto f = assign_folds(71, Protocol::holdout(0.2, 7));
    EXPECT_EQ(std::count(f.begin(), f.end(), 0), 14);
    EXPECT_EQ(std::count(f.begin(), f.end(), kTrainOnly), 57);
    EXPECT_THROW(assign_folds(5, Protocol::holdout(0.2, 7)), ValidationError);
}

TEST(Folds, LooNeedsThreeRows) {
    EXPECT_THROW(assign_folds(2, Protocol::loo()), ValidationError);
    const auto f = assign_folds(3, Protocol::loo());
    EXPECT_EQ(f, (std::vector<std::ptrdiff_t>{0, 1, 2}));
}

TEST(CrossValidate, LooMeanModel) {
    models::DesignMatrix m;
    m.X = Eigen::MatrixXd::Zero(3, 1);
    m.y = vec({0, 1, 2});
    models::ModelSpec spec;
    spec.kind = models::ModelKind::mean;
    const auto cv = cross_validate(m, spec, Protocol::loo());
    EXPECT_DOUBLE_EQ(cv.out_of_fold(0), 1.5);
    EXPECT_DOUBLE_EQ(cv.out_of_fold(2), 0.5);
    EXPECT_DOUBLE_EQ(cv.validation.mse, 1.5);
    EXPECT_DOUBLE_EQ(cv.validation.r2, -1.25);
    EXPECT_EQ(cv.validation.split, "loo");
    EXPECT_EQ(cv.train.r2, 0.0);
}

// LOO residuals of OLS follow from one fit: e_i / (1 - h_ii).
TEST(CrossValidate, LooOlsMatchesHatMatrixShortcut) {
    const auto m = linear_data(5, 30, 3, 0.7);
    models::ModelSpec spec;
    spec.kind = models::ModelKind::linear;
    const auto cv = cross_validate(m, spec, Protocol::loo());

    Eigen::MatrixXd A(m.rows(), m.cols() + 1);
    A << Eigen::VectorXd::Ones(m.rows()), m.X;
    const Eigen::MatrixXd H = A * (A.transpose() * A).ldlt().solve(A.transpose());
    const VectorXd e = m.y - H * m.y;
    double ss = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double loo_resid = e(i) / (1 - H(i, i));
        EXPECT_NEAR(m.y(i) - cv.out_of_fold(i), loo_resid, 1e-9);
        ss += loo_resid * loo_resid;
    }
    EXPECT_NEAR(cv.validation.mse, ss / static_cast<double>(m.rows()), 1e-9);
}

TEST(CrossValidate, ThreadCountDoesNotChangeResults) {
    const auto m = linear_data(9, 40, 4, 1.0);
    models::ModelSpec spec;
    spec.kind = models::ModelKind::random_forest;
    spec.forest.n_trees = 10;
    const auto a = cross_validate(m, spec, Protocol::kfold(5, 3), 1);
    const auto b = cross_validate(m, spec, Protocol::kfold(5, 3), 4);
    EXPECT_EQ(a.validation.mse, b.validation.mse);
    EXPECT_EQ(a.train.mse, b.train.mse);
}

TEST(CrossValidate, FoldFailureNamesFold) {
    const auto m = linear_data(2, 10, 2, 0.1);
    models::ModelSpec spec;
    spec.kind = models::ModelKind::polynomial;
    spec.degree = 7;
    try {
        cross_validate(m, spec, Protocol::kfold(2, 1));
        FAIL() << "expected FoldError";
    } catch (const FoldError& e) {
        EXPECT_EQ(e.fold(), 0u);
        EXPECT_NE(std::string(e.what()).find("degree"), std::string::npos);
    }
}

TEST(Sweep, BuiltinGrids) {
    EXPECT_EQ(builtin_sweep("ridge_alpha").grid, (std::vector<double>{0.1, 1, 10, 100, 1000}));
    EXPECT_EQ(builtin_sweep("polynomial_degree").grid, (std::vector<double>{2, 3}));
    EXPECT_EQ(builtin_sweep("svr_epsilon").grid, (std::vector<double>{0.01, 0.1, 1, 10, 100}));
    EXPECT_EQ(builtin_sweep("tree_depth").grid, (std::vector<double>{2, 4, 6, 8, 10}));
    const auto f = builtin_sweep("forest_estimators");
    EXPECT_EQ(f.grid.size(), 11u);
    EXPECT_EQ(f.grid.back(), 500);
    EXPECT_EQ(builtin_sweep("gbt_estimators").grid, f.grid);
    try {
        builtin_sweep("lasso_alpha");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("tree_depth"), std::string::npos);
    }
}

TEST(Sweep, PointsMatchDirectCrossValidation) {
    const auto m = linear_data(3, 25, 3, 0.5);
    auto spec = builtin_sweep("ridge_alpha", Protocol::kfold(5, 11));
    const auto res = run_sweep(m, spec, 2);
    ASSERT_EQ(res.points.size(), 5u);
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        auto ms = spec.base;
        ms.alpha = spec.grid[g];
        const auto cv = cross_validate(m, ms, spec.protocol);
        EXPECT_EQ(res.points[g].value, spec.grid[g]);
        EXPECT_EQ(res.points[g].validation.mse, cv.validation.mse);
        EXPECT_EQ(res.points[g].train.r2, cv.train.r2);
    }
    spec.grid.clear();
    EXPECT_THROW(run_sweep(m, spec), ConfigError);
}

TEST(Report, ImportanceSortedWithNameTies) {
    // Two stumps on features 0 and 2 with identical gains.
    models::DesignMatrix m;
    m.X = Eigen::MatrixXd::Zero(8, 3);
    m.y.resize(8);
    for (Eigen::Index i = 0; i < 8; ++i) {
        m.X(i, 0) = i % 2;
        m.X(i, 2) = i % 2;
        m.y(i) = i % 2;
    }
    models::ModelSpec spec;
    spec.kind = models::ModelKind::decision_tree;
    spec.tree.max_depth = 1;
    const auto model = models::fit_model(spec, m);
    const auto t = importance_report(model, {"Zeta", "Mid", "Alpha"});
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[0].importance, 1.0);
    EXPECT_EQ(t.rows[0].feature, "Zeta");  // lowest feature wins the tied split
    EXPECT_EQ(t.rows[1].feature, "Alpha");
    EXPECT_EQ(t.rows[2].feature, "Mid");
    EXPECT_EQ(importance_report(model, {"Zeta", "Mid", "Alpha"}, 1).rows.size(), 1u);
    EXPECT_THROW(importance_report(model, {"a", "b"}), DimensionError);

    std::ostringstream txt, csv;
    write_importance_text(txt, t);
    write_importance_csv(csv, t);
    EXPECT_EQ(txt.str().rfind("Class", 0), 0u);
    EXPECT_EQ(csv.str(), "class,importance\nZeta,1\nAlpha,0\nMid,0\n");
}

TEST(Report, SweepTextAndCsv) {
    const auto m = linear_data(4, 20, 2, 0.3);
    const auto res = run_sweep(m, builtin_sweep("polynomial_degree", Protocol::loo()));
    std::ostringstream txt, csv;
    write_sweep_text(txt, res);
    write_sweep_csv(csv, res);
    EXPECT_NE(txt.str().find("hyperparameter: degree"), std::string::npos) << txt.str();
    EXPECT_NE(txt.str().find("validation: loo"), std::string::npos) << txt.str();
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "model,hyperparameter,value,train_n,train_mse,train_r2,val_split,val_n,val_mse,val_r2");
    std::getline(lines, line);
    EXPECT_EQ(line.rfind("polynomial,degree,2,20,", 0), 0u) << line;
}

TEST(Plot, CsvRoundTripIsByteExact) {
    const std::vector<PlotRow> rows{{10, 0.1 / 3, 2.0 / 7, 0.91, -0.125}, {500, 1e-17, 123456.789, 1, -3}};
    std::stringstream ss;
    write_plot_csv(ss, rows);
    const auto text = ss.str();
    const auto back = read_plot_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].train_mse, rows[0].train_mse);
    std::ostringstream again;
    write_plot_csv(again, back);
    EXPECT_EQ(again.str(), text);
}

TEST(Plot, SvgHasTwoSeries) {
    const std::vector<PlotRow> rows{{10, 1, 2, 0, 0}, {100, 0.5, 1.5, 0, 0}, {1000, 0.2, 1.8, 0, 0}};
    EXPECT_TRUE(use_log_x(rows));
    std::ostringstream out;
    write_plot_svg(out, rows, "Ridge <alpha> & MSE", "alpha");
    const auto svg = out.str();
    std::size_t polylines = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
    EXPECT_EQ(polylines, 2u);
    EXPECT_NE(svg.find("data-series=\"train MSE\""), std::string::npos);
    EXPECT_NE(svg.find("data-series=\"validation MSE\""), std::string::npos);
    EXPECT_NE(svg.find("Ridge &lt;alpha&gt; &amp; MSE"), std::string::npos);
    EXPECT_NE(svg.find("(log scale)"), std::string::npos);
    EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
    EXPECT_THROW(write_plot_svg(out, {}, "t", "x"), ValidationError);
}
