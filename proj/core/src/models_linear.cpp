#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "transitcast/errors.hpp"
#include "transitcast/models.hpp"

namespace transitcast {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct Centered {
    Eigen::MatrixXd X;
    Eigen::RowVectorXd x_mean;
    double y_mean{0.0};
    Eigen::VectorXd y;
};

Centered center(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Centered c;
    c.x_mean = X.colwise().mean();
    c.X = X.rowwise() - c.x_mean;
    c.y_mean = y.mean();
    c.y = y.array() - c.y_mean;
    return c;
}

double poisson_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ll += y[i] * eta[i] - std::exp(eta[i]) - std::lgamma(y[i] + 1.0);
    }
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::VectorXd LinearModelBase::do_predict(const Eigen::MatrixXd& X) const {
    return (X * coef_).array() + intercept_;
}

nlohmann::json LinearModelBase::state_json() const {
    return {{"coefficients", to_vector(coef_)}, {"intercept", intercept_}};
}

void LinearModelBase::load_state(const nlohmann::json& state) {
    const auto coef = state.at("coefficients").get<std::vector<double>>();
    coef_ = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    intercept_ = state.at("intercept").get<double>();
}

// ---- ordinary least squares -------------------------------------------------

LinearRegressor::LinearRegressor(Hyperparameters hyper) : LinearModelBase(ModelKind::linear, std::move(hyper)) {}

void LinearRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext&) {
    const auto c = center(X, y);
    if (X.cols() == 0) {
        coef_.resize(0);
        intercept_ = c.y_mean;
        return;
    }
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c.X);
    coef_ = cod.solve(c.y);
    intercept_ = c.y_mean - c.x_mean.dot(coef_);
}

// ---- ridge ------------------------------------------------------------------

RidgeRegressor::RidgeRegressor(Hyperparameters hyper) : LinearModelBase(ModelKind::ridge, std::move(hyper)) {
    if (!(this->hyper("lambda") >= 0.0)) throw ArgumentError("ridge: lambda must be >= 0");
}

void RidgeRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext&) {
    const auto c = center(X, y);
    const double lambda = hyper("lambda");
    Eigen::MatrixXd gram = c.X.transpose() * c.X;
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = c.X.transpose() * c.y;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && lambda > 0.0) {
        coef_ = ldlt.solve(rhs);
    } else {
        // lambda = 0 on a singular Gram matrix: fall back to minimum norm.
        coef_ = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(gram).solve(rhs);
    }
    intercept_ = c.y_mean - c.x_mean.dot(coef_);
}

// ---- lasso ------------------------------------------------------------------

LassoRegressor::LassoRegressor(Hyperparameters hyper) : LinearModelBase(ModelKind::lasso, std::move(hyper)) {
    if (!(this->hyper("lambda") >= 0.0)) throw ArgumentError("lasso: lambda must be >= 0");
}

void LassoRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext&) {
    const double lambda = hyper("lambda");
    const double tol = hyper("tol");
    const auto max_sweeps = static_cast<int>(hyper("max_sweeps"));
    const auto n = static_cast<double>(X.rows());
    const auto p = X.cols();

    const auto c = center(X, y);
    Eigen::VectorXd scale(p);
    Eigen::MatrixXd Z = c.X;
    std::vector<bool> active(static_cast<std::size_t>(p), true);
    for (Eigen::Index j = 0; j < p; ++j) {
        scale[j] = std::sqrt(Z.col(j).squaredNorm() / n);
        if (scale[j] > 0.0 && X.col(j).maxCoeff() != X.col(j).minCoeff()) {
            Z.col(j) /= scale[j];
        } else {
            active[static_cast<std::size_t>(j)] = false;
        }
    }

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd residual = c.y;
    auto objective = [&] { return residual.squaredNorm() / (2.0 * n) + lambda * b.lpNorm<1>(); };
    trace_.clear();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!active[static_cast<std::size_t>(j)]) continue;
            const double old = b[j];
            // Columns of Z have unit mean square, so the coordinate minimizer
            // is a soft threshold of the partial-residual correlation.
            const double rho = Z.col(j).dot(residual) / n + old;
            const double updated = std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho);
            if (updated != old) {
                residual -= (updated - old) * Z.col(j);
                b[j] = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        trace_.push_back(objective());
        if (max_change < tol) break;
    }
    coef_ = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (active[static_cast<std::size_t>(j)]) coef_[j] = b[j] / scale[j];
    }
    intercept_ = c.y_mean - c.x_mean.dot(coef_);
}

// ---- Poisson GLM ------------------------------------------------------------

PoissonRegressor::PoissonRegressor(Hyperparameters hyper) : LinearModelBase(ModelKind::poisson, std::move(hyper)) {}

void PoissonRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_in, const FitContext&) {
    if ((y_in.array() < 0.0).any()) throw DomainError("poisson: targets must be non-negative");
    const Eigen::VectorXd y = y_in.array().round();
    if (y.sum() <= 0.0) throw NonConvergenceError("poisson: all-zero targets, the MLE does not exist");

    const auto max_iterations = static_cast<int>(hyper("max_iterations"));
    const auto max_halvings = static_cast<int>(hyper("max_step_halvings"));
    const double tol = hyper("tol");
    const auto n = X.rows();
    const auto p = X.cols();

    // Standardized design [1, Z] for conditioning; constant columns get no
    // coefficient.
    const Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
    std::vector<bool> active(static_cast<std::size_t>(p), false);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, p + 1);
    A.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) {
        const double sd = std::sqrt((X.col(j).array() - mean[j]).square().mean());
        if (sd > 0.0 && X.col(j).maxCoeff() != X.col(j).minCoeff()) {
            active[static_cast<std::size_t>(j)] = true;
            scale[j] = sd;
            A.col(j + 1) = (X.col(j).array() - mean[j]) / sd;
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    beta[0] = std::log(y.mean());
    Eigen::VectorXd eta = A * beta;
    double ll = poisson_log_likelihood(y, eta);
    trace_.assign(1, ll);

    for (int iter = 0; iter < max_iterations; ++iter) {
        const Eigen::ArrayXd mu = eta.array().exp();
        const Eigen::ArrayXd sqrt_w = mu.sqrt();
        const Eigen::VectorXd working = (eta.array() + (y.array() - mu) / mu).matrix();
        const Eigen::MatrixXd weighted = A.array().colwise() * sqrt_w;
        const Eigen::VectorXd rhs = (working.array() * sqrt_w).matrix();
        const Eigen::VectorXd target = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(weighted).solve(rhs);
        if (!target.allFinite()) throw NonConvergenceError("poisson: IRLS produced non-finite coefficients");
        const Eigen::VectorXd step = target - beta;

        double factor = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial_beta;
        Eigen::VectorXd trial_eta;
        double trial_ll = -std::numeric_limits<double>::infinity();
        for (int h = 0; h <= max_halvings; ++h) {
            trial_beta = beta + factor * step;
            trial_eta = A * trial_beta;
            trial_ll = poisson_log_likelihood(y, trial_eta);
            if (trial_ll >= ll) {
                accepted = true;
                break;
            }
            factor *= 0.5;
        }
        if (!accepted) {
            // No ascent along the Newton direction: either we sit at the
            // optimum to working precision or IRLS has diverged.
            if (std::abs(trial_ll - ll) <= 1e-9 * (std::abs(ll) + 1.0)) break;
            throw NonConvergenceError("poisson: IRLS failed to increase the likelihood after " +
                                      std::to_string(max_halvings) + " step-halvings");
        }
        const double previous = ll;
        beta = trial_beta;
        eta = trial_eta;
        ll = trial_ll;
        trace_.push_back(ll);
        if (ll - previous <= tol * (std::abs(previous) + 1.0)) break;
    }

    coef_ = Eigen::VectorXd::Zero(p);
    double shift = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        coef_[j] = beta[j + 1] / scale[j];
        shift += coef_[j] * mean[j];
    }
    intercept_ = beta[0] - shift;
}

Eigen::VectorXd PoissonRegressor::do_predict(const Eigen::MatrixXd& X) const {
    return ((X * coef_).array() + intercept_).exp();
}

}  // namespace transitcast
