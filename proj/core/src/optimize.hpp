#pragma once

#include <functional>

#include <Eigen/Core>

namespace transitcast::detail {

// Returns f(x) and writes the gradient. A non-finite value marks x as
// infeasible; the line search then backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
    int max_iterations{500};
    double gradient_tolerance{1e-8};  // infinity norm
    double max_step{4.0};             // infinity norm of a single trial step
    // A stalled line search still counts as converged below this gradient
    // norm: the objective can no longer resolve further decrease.
    double stall_tolerance{1e-5};
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value{0.0};
    Eigen::VectorXd gradient;
    double gradient_norm{0.0};
    int iterations{0};
    bool converged{false};
    bool finite_start{true};
};

BfgsResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0, const BfgsOptions& options);

}  // namespace transitcast::detail
