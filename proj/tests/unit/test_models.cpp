#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "transitcast/errors.hpp"
#include "transitcast/models.hpp"

namespace tc = transitcast;

namespace {

struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Problem make_problem(int n, int p, std::uint64_t seed, double noise = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Problem out{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta[j] = 0.5 * (j + 1) * (j % 2 == 0 ? 1.0 : -1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) out.X(i, j) = z(rng) * (1.0 + j) + j;
    }
    for (int i = 0; i < n; ++i) out.y[i] = 3.0 + out.X.row(i).dot(beta) + noise * z(rng);
    return out;
}

const tc::LinearModelBase& as_linear(const tc::Regressor& r) { return dynamic_cast<const tc::LinearModelBase&>(r); }

}  // namespace

TEST(ModelKinds, ParseAndDefaults) {
    for (auto k : tc::all_model_kinds()) EXPECT_EQ(tc::parse_model_kind(tc::to_string(k)), k);
    EXPECT_EQ(tc::all_model_kinds().size(), 8u);
    EXPECT_THROW(tc::parse_model_kind("svr"), tc::ArgumentError);
    EXPECT_THROW(tc::parse_model_kind("xgboost"), tc::ArgumentError);
    EXPECT_EQ(tc::default_hyperparameters(tc::ModelKind::ridge).at("lambda"), 1.0);
    EXPECT_EQ(tc::default_hyperparameters(tc::ModelKind::knn).at("k"), 5.0);
    EXPECT_THROW(tc::make_regressor(tc::ModelKind::ridge, {{"alpha", 1.0}}), tc::ArgumentError);
    EXPECT_THROW(tc::make_regressor(tc::ModelKind::ridge, {{"lambda", -1.0}}), tc::ArgumentError);
}

TEST(Regressor, StateAndShapeErrors) {
    auto m = tc::make_regressor(tc::ModelKind::linear);
    EXPECT_THROW(m->predict(Eigen::MatrixXd::Zero(2, 2)), tc::StateError);
    EXPECT_THROW(m->to_json(), tc::StateError);
    EXPECT_THROW(m->fit(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)), tc::ArgumentError);
    const auto pr = make_problem(20, 2, 1);
    m->fit(pr.X, pr.y);
    EXPECT_THROW(m->predict(Eigen::MatrixXd::Zero(2, 3)), tc::ArgumentError);
}

TEST(Linear, MatchesNormalEquations) {
    const auto pr = make_problem(200, 6, 2);
    auto m = tc::make_regressor(tc::ModelKind::linear);
    m->fit(pr.X, pr.y);
    const auto ref = oracle::normal_equations(pr.X, pr.y);
    const auto& lin = as_linear(*m);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(lin.coefficients()[j], ref.coef[j], 1e-8);
    EXPECT_NEAR(lin.intercept(), ref.intercept, 1e-8);
}

TEST(Linear, RankDeficientGivesMinimumNorm) {
    auto pr = make_problem(50, 2, 3);
    Eigen::MatrixXd X(50, 3);
    X << pr.X, pr.X.col(0);  // duplicated column
    auto m = tc::make_regressor(tc::ModelKind::linear);
    m->fit(X, pr.y);
    const auto& c = as_linear(*m).coefficients();
    EXPECT_NEAR(c[0], c[2], 1e-8);
    auto single = tc::make_regressor(tc::ModelKind::linear);
    single->fit(pr.X, pr.y);
    EXPECT_NEAR(c[0] + c[2], as_linear(*single).coefficients()[0], 1e-8);
    EXPECT_LE((m->predict(X) - single->predict(pr.X)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ridge, MatchesPenalizedNormalEquations) {
    const auto pr = make_problem(120, 5, 4);
    for (double lambda : {0.0, 1e-10, 0.5, 10.0, 1000.0}) {
        auto m = tc::make_regressor(tc::ModelKind::ridge, {{"lambda", lambda}});
        m->fit(pr.X, pr.y);
        const auto ref = oracle::normal_equations(pr.X, pr.y, lambda);
        const auto& lin = as_linear(*m);
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(lin.coefficients()[j], ref.coef[j], 1e-8) << lambda;
        EXPECT_NEAR(lin.intercept(), ref.intercept, 1e-8) << lambda;
    }
}

TEST(Ridge, SmallLambdaApproachesOls) {
    const auto pr = make_problem(120, 5, 5);
    auto ols = tc::make_regressor(tc::ModelKind::linear);
    ols->fit(pr.X, pr.y);
    auto ridge = tc::make_regressor(tc::ModelKind::ridge, {{"lambda", 1e-9}});
    ridge->fit(pr.X, pr.y);
    EXPECT_LE((as_linear(*ols).coefficients() - as_linear(*ridge).coefficients()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lasso, AllZeroAtLambdaMax) {
    const auto pr = make_problem(100, 4, 6);
    const double n = 100.0;
    const Eigen::VectorXd yc = pr.y.array() - pr.y.mean();
    double lambda_max = 0.0;
    for (int j = 0; j < 4; ++j) {
        const Eigen::VectorXd xc = pr.X.col(j).array() - pr.X.col(j).mean();
        const double sd = std::sqrt(xc.squaredNorm() / n);
        lambda_max = std::max(lambda_max, std::abs(xc.dot(yc)) / (n * sd));
    }
    auto at = tc::make_regressor(tc::ModelKind::lasso, {{"lambda", lambda_max * (1 + 1e-12)}});
    at->fit(pr.X, pr.y);
    EXPECT_EQ(as_linear(*at).coefficients().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(as_linear(*at).intercept(), pr.y.mean(), 1e-12);
    auto below = tc::make_regressor(tc::ModelKind::lasso, {{"lambda", lambda_max * 0.99}});
    below->fit(pr.X, pr.y);
    EXPECT_GT(as_linear(*below).coefficients().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lasso, ZeroLambdaIsOlsAndObjectiveDescends) {
    const auto pr = make_problem(150, 4, 7);
    auto m = tc::make_regressor(tc::ModelKind::lasso, {{"lambda", 0.0}, {"tol", 1e-12}});
    m->fit(pr.X, pr.y);
    const auto ref = oracle::normal_equations(pr.X, pr.y);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(as_linear(*m).coefficients()[j], ref.coef[j], 1e-6);
    const auto& trace = dynamic_cast<const tc::LassoRegressor&>(*m).objective_trace();
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-12);
}

TEST(Lasso, KktConditions) {
    const auto pr = make_problem(150, 5, 8);
    const double lambda = 0.3;
    auto m = tc::make_regressor(tc::ModelKind::lasso, {{"lambda", lambda}, {"tol", 1e-13}});
    m->fit(pr.X, pr.y);
    const auto& lin = as_linear(*m);
    const double n = 150.0;
    const Eigen::VectorXd resid = pr.y - m->predict(pr.X);
    for (int j = 0; j < 5; ++j) {
        const Eigen::VectorXd xc = pr.X.col(j).array() - pr.X.col(j).mean();
        const double sd = std::sqrt(xc.squaredNorm() / n);
        const double grad = xc.dot(resid) / (n * sd);
        const double b = lin.coefficients()[j] * sd;
        if (b != 0.0) {
            EXPECT_NEAR(grad, std::copysign(lambda, b), 1e-8) << j;
        } else {
            EXPECT_LE(std::abs(grad), lambda + 1e-8) << j;
        }
    }
}

TEST(Poisson, BinaryFeatureClosedForm) {
    Eigen::MatrixXd X(8, 1);
    X << 0, 0, 0, 0, 1, 1, 1, 1;
    Eigen::VectorXd y(8);
    y << 1, 2, 3, 2, 7, 9, 8, 4;
    auto m = tc::make_regressor(tc::ModelKind::poisson);
    m->fit(X, y);
    const auto& lin = as_linear(*m);
    EXPECT_NEAR(lin.intercept(), std::log(2.0), 1e-9);
    EXPECT_NEAR(lin.coefficients()[0], std::log(7.0) - std::log(2.0), 1e-9);
    const auto pred = m->predict(X);
    EXPECT_NEAR(pred[0], 2.0, 1e-9);
    EXPECT_NEAR(pred[7], 7.0, 1e-9);
    const auto& trace = dynamic_cast<const tc::PoissonRegressor&>(*m).log_likelihood_trace();
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1]);
}

TEST(Poisson, DomainErrors) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
    auto m = tc::make_regressor(tc::ModelKind::poisson);
    EXPECT_THROW(m->fit(X, Eigen::Vector3d(1, -1, 2)), tc::DomainError);
    EXPECT_THROW(m->fit(X, Eigen::Vector3d(0, 0, 0)), tc::NonConvergenceError);
}

TEST(Knn, OneNeighbourRetrievesTrainingTargets) {
    const auto pr = make_problem(60, 3, 9);
    auto m = tc::make_regressor(tc::ModelKind::knn, {{"k", 1}});
    m->fit(pr.X, pr.y);
    EXPECT_EQ(m->predict(pr.X), pr.y);
}

TEST(Knn, MeanOfNearestWithIndexTieBreak) {
    Eigen::MatrixXd X(4, 1);
    X << 0, 2, 4, 10;
    Eigen::VectorXd y(4);
    y << 1, 3, 5, 100;
    auto m = tc::make_regressor(tc::ModelKind::knn, {{"k", 2}});
    m->fit(X, y);
    Eigen::MatrixXd q(2, 1);
    q << 1, 3;  // 1 is equidistant to rows 0 and 1; 3 to rows 1 and 2
    const auto pred = m->predict(q);
    EXPECT_EQ(pred[0], 2.0);
    EXPECT_EQ(pred[1], 4.0);
    auto big = tc::make_regressor(tc::ModelKind::knn, {{"k", 50}});
    big->fit(X, y);
    EXPECT_EQ(big->predict(q)[0], y.mean());
}

TEST(MovingAverage, MeansTargetLags) {
    const std::vector<std::string> names{"target_lag2", "dow_lag2", "target_lag1", "dow_lag1"};
    Eigen::MatrixXd X(2, 4);
    X << 10, 3, 20, 4, 1, 0, 2, 6;
    auto m = tc::make_regressor(tc::ModelKind::moving_average);
    m->fit(X, Eigen::Vector2d(0, 0), tc::FitContext{0, names});
    EXPECT_EQ(m->predict(X), Eigen::Vector2d(15.0, 1.5));
    const std::vector<std::string> none{"a", "b", "c", "d"};
    EXPECT_THROW(m->fit(X, Eigen::Vector2d(0, 0), tc::FitContext{0, none}), tc::ArgumentError);
}

TEST(RegressionTree, TieBreaksToLowestFeature) {
    Eigen::MatrixXd X(6, 2);
    X << 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;  // identical columns
    Eigen::VectorXd y(6);
    y << 1, 1, 1, 9, 9, 9;
    std::vector<Eigen::Index> rows{0, 1, 2, 3, 4, 5};
    tc::RegressionTree tree;
    tree.fit(X, y, rows, tc::TreeOptions{}, 1);
    ASSERT_FALSE(tree.nodes().empty());
    EXPECT_EQ(tree.nodes()[0].feature, 0);
    EXPECT_EQ(tree.nodes()[0].threshold, 2.5);
    EXPECT_EQ(tree.depth(), 1);
    EXPECT_EQ(tree.predict_row(X.row(0)), 1.0);
    EXPECT_EQ(tree.predict_row(X.row(5)), 9.0);
}

TEST(RegressionTree, MinLeafAndDepthCap) {
    const auto pr = make_problem(200, 3, 10);
    std::vector<Eigen::Index> rows(200);
    for (int i = 0; i < 200; ++i) rows[static_cast<std::size_t>(i)] = i;
    tc::RegressionTree shallow;
    shallow.fit(pr.X, pr.y, rows, tc::TreeOptions{2, 1, 0}, 1);
    EXPECT_LE(shallow.depth(), 2);
    tc::RegressionTree full;
    full.fit(pr.X, pr.y, rows, tc::TreeOptions{0, 1, 0}, 1);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(full.predict_row(pr.X.row(i)), pr.y[i]);
    const auto back = tc::RegressionTree::from_json(full.to_json());
    EXPECT_EQ(back.to_json().dump(), full.to_json().dump());
}

TEST(RandomForest, DeterministicAcrossThreads) {
    const auto pr = make_problem(150, 6, 11);
    auto a = tc::make_regressor(tc::ModelKind::random_forest, {{"n_trees", 20}});
    auto b = tc::make_regressor(tc::ModelKind::random_forest, {{"n_trees", 20}});
    a->fit(pr.X, pr.y, tc::FitContext{5, {}, 1});
    b->fit(pr.X, pr.y, tc::FitContext{5, {}, 4});
    EXPECT_EQ(a->predict(pr.X), b->predict(pr.X));
    auto c = tc::make_regressor(tc::ModelKind::random_forest, {{"n_trees", 20}});
    c->fit(pr.X, pr.y, tc::FitContext{6, {}, 1});
    EXPECT_NE(a->predict(pr.X), c->predict(pr.X));
}

TEST(RandomForest, BeatsMeanOnSignal) {
    const auto train = make_problem(300, 3, 12);
    const auto test = make_problem(100, 3, 13);
    auto rf = tc::make_regressor(tc::ModelKind::random_forest, {{"n_trees", 50}});
    rf->fit(train.X, train.y, tc::FitContext{1});
    const double rmse = std::sqrt((rf->predict(test.X) - test.y).squaredNorm() / 100.0);
    const double base = std::sqrt((test.y.array() - train.y.mean()).square().sum() / 100.0);
    EXPECT_LT(rmse, 0.6 * base);
}

TEST(GradientBoosting, SingleStumpClosedForm) {
    Eigen::MatrixXd X(4, 1);
    X << 0, 1, 2, 3;
    Eigen::VectorXd y(4);
    y << 0, 0, 4, 4;
    auto m = tc::make_regressor(tc::ModelKind::gradient_boosting,
                                {{"n_trees", 1}, {"max_depth", 1}, {"learning_rate", 0.5}});
    m->fit(X, y);
    // init 2, residual leaves -2 / +2, shrunk by one half.
    const auto pred = m->predict(X);
    EXPECT_DOUBLE_EQ(pred[0], 1.0);
    EXPECT_DOUBLE_EQ(pred[3], 3.0);
}

TEST(Serialization, RoundTripIsExactForEveryKind) {
    const auto pr = make_problem(80, 3, 14, 1.0);
    Eigen::VectorXd counts = (pr.y.array() - pr.y.minCoeff()).round();
    const std::vector<std::string> names{"target_lag2", "x", "target_lag1"};
    for (auto kind : tc::all_model_kinds()) {
        tc::Hyperparameters h;
        if (kind == tc::ModelKind::random_forest || kind == tc::ModelKind::gradient_boosting) h["n_trees"] = 10;
        auto m = tc::make_regressor(kind, h);
        const Eigen::VectorXd& y = kind == tc::ModelKind::poisson ? counts : pr.y;
        m->fit(pr.X, y, tc::FitContext{3, names});
        const auto text = m->to_json().dump();
        const auto back = tc::regressor_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back->kind(), kind);
        EXPECT_EQ(back->predict(pr.X), m->predict(pr.X)) << tc::to_string(kind);
        EXPECT_EQ(back->to_json().dump(), text) << tc::to_string(kind);
    }
    EXPECT_THROW(tc::regressor_from_json(nlohmann::json{{"format", "other"}}), tc::InputError);
}
