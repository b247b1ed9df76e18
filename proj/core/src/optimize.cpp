#include "optimize.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace transitcast::detail {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

struct LineSearchOutcome {
    bool accepted{false};
    Eigen::VectorXd x;
    Eigen::VectorXd g;
    double f{0.0};
};

LineSearchOutcome backtrack(const Objective& objective, const Eigen::VectorXd& x, double f, const Eigen::VectorXd& g,
                            const Eigen::VectorXd& direction, double max_step) {
    LineSearchOutcome out;
    const double slope = g.dot(direction);
    if (!(slope < 0.0)) return out;
    double step = 1.0;
    const double longest = direction.cwiseAbs().maxCoeff();
    if (longest * step > max_step) step = max_step / longest;
    Eigen::VectorXd trial_g(x.size());
    for (int k = 0; k < kMaxBacktracks; ++k) {
        const Eigen::VectorXd trial = x + step * direction;
        const double trial_f = objective(trial, trial_g);
        if (std::isfinite(trial_f) && trial_g.allFinite() && trial_f <= f + kArmijo * step * slope) {
            out.accepted = true;
            out.x = trial;
            out.g = trial_g;
            out.f = trial_f;
            return out;
        }
        step *= 0.5;
    }
    return out;
}

}  // namespace

BfgsResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0, const BfgsOptions& options) {
    const auto n = x0.size();
    BfgsResult r;
    r.x = x0;
    r.gradient = Eigen::VectorXd::Zero(n);
    r.value = objective(r.x, r.gradient);
    if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
        r.finite_start = false;
        r.gradient_norm = std::numeric_limits<double>::infinity();
        return r;
    }
    Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(n, n);
    bool fresh_hessian = true;
    r.gradient_norm = r.gradient.cwiseAbs().maxCoeff();

    while (r.iterations < options.max_iterations) {
        if (r.gradient_norm <= options.gradient_tolerance) {
            r.converged = true;
            return r;
        }
        Eigen::VectorXd direction = -inverse_hessian * r.gradient;
        auto step = backtrack(objective, r.x, r.value, r.gradient, direction, options.max_step);
        if (!step.accepted && !fresh_hessian) {
            // Curvature model went stale; retry along steepest descent.
            inverse_hessian.setIdentity();
            fresh_hessian = true;
            direction = -r.gradient;
            step = backtrack(objective, r.x, r.value, r.gradient, direction, options.max_step);
        }
        if (!step.accepted) {
            r.converged = r.gradient_norm <= options.stall_tolerance;
            return r;
        }
        ++r.iterations;
        const Eigen::VectorXd s = step.x - r.x;
        const Eigen::VectorXd y = step.g - r.gradient;
        r.x = step.x;
        r.value = step.f;
        r.gradient = step.g;
        r.gradient_norm = r.gradient.cwiseAbs().maxCoeff();

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh_hessian) {
                // Shanno scaling of the initial matrix before the first update.
                inverse_hessian = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
            inverse_hessian = left * inverse_hessian * left.transpose() + rho * s * s.transpose();
            fresh_hessian = false;
        }
    }
    r.converged = r.gradient_norm <= options.gradient_tolerance;
    return r;
}

}  // namespace transitcast::detail
