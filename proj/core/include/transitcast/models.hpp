#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace transitcast {

enum class ModelKind { moving_average, linear, ridge, lasso, poisson, knn, random_forest, gradient_boosting };

std::string_view to_string(ModelKind kind);
// Throws ArgumentError for unknown names (including svr/mlp, which are not built).
ModelKind parse_model_kind(std::string_view name);
std::vector<ModelKind> all_model_kinds();

using Hyperparameters = std::map<std::string, double>;

// Defaults:
//   ridge             lambda=1
//   lasso             lambda=0.1, tol=1e-6, max_sweeps=10000
//   knn               k=5
//   random_forest     n_trees=100, max_features_fraction=1/3 (ceil), min_samples_leaf=1, max_depth=0 (none)
//   gradient_boosting n_trees=100, max_depth=3, learning_rate=0.1, min_samples_leaf=1
//   poisson           max_iterations=100, max_step_halvings=10, tol=1e-10
Hyperparameters default_hyperparameters(ModelKind kind);

struct FitContext {
    std::uint64_t seed{0};
    // Needed by moving_average to locate the lagged-target columns
    // ("target_lag*"); other models ignore it.
    std::span<const std::string> feature_names{};
    unsigned threads{1};
};

class Regressor {
public:
    virtual ~Regressor() = default;

    ModelKind kind() const noexcept { return kind_; }
    const Hyperparameters& hyperparameters() const noexcept { return hyper_; }
    bool fitted() const noexcept { return fitted_; }
    std::size_t n_features() const noexcept { return n_features_; }

    // Throws ArgumentError on dimension mismatch; kind-specific errors
    // (DomainError, NonConvergenceError) propagate.
    void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context = {});

    // Throws StateError before fit, ArgumentError on a column mismatch.
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

    // {"format": "transitcast-model", "version": 1, "kind", "hyperparameters",
    //  "n_features", "state"}
    nlohmann::json to_json() const;

protected:
    Regressor(ModelKind kind, Hyperparameters hyper);

    virtual void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) = 0;
    virtual Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const = 0;
    virtual nlohmann::json state_json() const = 0;
    virtual void load_state(const nlohmann::json& state) = 0;
    virtual std::size_t min_rows() const { return 1; }

    double hyper(const std::string& key) const;

private:
    friend std::unique_ptr<Regressor> regressor_from_json(const nlohmann::json& doc);

    ModelKind kind_;
    Hyperparameters hyper_;
    bool fitted_{false};
    std::size_t n_features_{0};
};

// Overrides must name keys from default_hyperparameters(kind).
std::unique_ptr<Regressor> make_regressor(ModelKind kind, const Hyperparameters& overrides = {});
std::unique_ptr<Regressor> regressor_from_json(const nlohmann::json& doc);

// Predicts the mean of the lagged-target columns of each row.
class MovingAverageRegressor final : public Regressor {
public:
    explicit MovingAverageRegressor(Hyperparameters hyper);
    const std::vector<Eigen::Index>& target_columns() const noexcept { return columns_; }

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
    Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const override;
    nlohmann::json state_json() const override;
    void load_state(const nlohmann::json& state) override;

    std::vector<Eigen::Index> columns_;
};

// Shared shape of the linear-predictor models: y ~ intercept + X beta.
class LinearModelBase : public Regressor {
public:
    const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
    double intercept() const noexcept { return intercept_; }

protected:
    using Regressor::Regressor;
    Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const override;
    nlohmann::json state_json() const override;
    void load_state(const nlohmann::json& state) override;

    Eigen::VectorXd coef_;
    double intercept_{0.0};
};

// Least squares on centred data through a complete orthogonal
// decomposition (column-pivoted QR): minimum-norm under rank deficiency.
class LinearRegressor final : public LinearModelBase {
public:
    explicit LinearRegressor(Hyperparameters hyper);

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
};

// (Xc'Xc + lambda I) beta = Xc'yc on centred data; intercept unpenalized.
class RidgeRegressor final : public LinearModelBase {
public:
    explicit RidgeRegressor(Hyperparameters hyper);

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
};

// Cyclic coordinate descent on standardized columns minimizing
//   (1 / 2n) ||yc - Z b||^2 + lambda ||b||_1,
// coefficients mapped back to the original scale.
class LassoRegressor final : public LinearModelBase {
public:
    explicit LassoRegressor(Hyperparameters hyper);
    // Objective after each sweep (standardized problem).
    const std::vector<double>& objective_trace() const noexcept { return trace_; }
    int sweeps() const noexcept { return static_cast<int>(trace_.size()); }

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
    std::vector<double> trace_;
};

// Log-link Poisson GLM by IRLS with step-halving. Targets are rounded to
// the nearest integer; negative targets raise DomainError.
class PoissonRegressor final : public LinearModelBase {
public:
    explicit PoissonRegressor(Hyperparameters hyper);
    // Log-likelihood after every accepted iteration (first entry: start).
    const std::vector<double>& log_likelihood_trace() const noexcept { return trace_; }

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
    Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const override;
    std::vector<double> trace_;
};

// Mean target of the k nearest training rows (Euclidean); equal distances
// resolve to the lower training-row index, so results depend on row order.
class KnnRegressor final : public Regressor {
public:
    explicit KnnRegressor(Hyperparameters hyper);

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
    Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const override;
    nlohmann::json state_json() const override;
    void load_state(const nlohmann::json& state) override;

    Eigen::MatrixXd train_X_;
    Eigen::VectorXd train_y_;
};

// CART regression tree with variance-reduction splits.
struct TreeNode {
    int feature{-1};  // -1 marks a leaf
    double threshold{0.0};
    int left{-1};
    int right{-1};
    double value{0.0};
};

struct TreeOptions {
    int max_depth{0};  // 0 = unlimited
    std::size_t min_samples_leaf{1};
    std::size_t max_features{0};  // features examined per split; 0 = all
};

class RegressionTree {
public:
    // Fits on the rows listed in `rows` (duplicates allowed, as in a
    // bootstrap sample). Ties between splits resolve to the lowest feature
    // index, then the lowest threshold.
    void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const Eigen::Index> rows,
             const TreeOptions& options, std::uint64_t seed);
    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    int depth() const;

    nlohmann::json to_json() const;  // nested {"leaf"} / {"feature","threshold","left","right"}
    static RegressionTree from_json(const nlohmann::json& node);

private:
    std::vector<TreeNode> nodes_;
};

// Bagged CART trees, ceil(p * max_features_fraction) features per split.
// Tree t draws its bootstrap and feature subsets from derive_seed(seed, t).
class RandomForestRegressor final : public Regressor {
public:
    explicit RandomForestRegressor(Hyperparameters hyper);
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
    Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const override;
    nlohmann::json state_json() const override;
    void load_state(const nlohmann::json& state) override;

    std::vector<RegressionTree> trees_;
};

// Stagewise squared-loss boosting of depth-limited trees with shrinkage.
class GradientBoostingRegressor final : public Regressor {
public:
    explicit GradientBoostingRegressor(Hyperparameters hyper);
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

private:
    void do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) override;
    Eigen::VectorXd do_predict(const Eigen::MatrixXd& X) const override;
    nlohmann::json state_json() const override;
    void load_state(const nlohmann::json& state) override;

    double init_{0.0};
    std::vector<RegressionTree> trees_;
};

}  // namespace transitcast
