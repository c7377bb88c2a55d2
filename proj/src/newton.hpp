#pragma once

// Damped Newton with a central-difference Jacobian for small dense systems.

#include <functional>

#include <Eigen/Dense>

namespace spikewave::detail {

struct NewtonResult {
    Eigen::VectorXd x;
    double residual = 0.0;  // inf-norm
    int iterations = 0;
    bool converged = false;
};

using VecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using Admissible = std::function<bool(const Eigen::VectorXd&)>;

Eigen::MatrixXd fd_jacobian(const VecFn& F, const Eigen::VectorXd& x, double rel_step = 1e-6);

// Steps are halved (at most 20 times) while the iterate is inadmissible;
// shortened steps must decrease the residual.
NewtonResult damped_newton(const VecFn& F, Eigen::VectorXd x, const Admissible& ok, double tol, int max_iter,
                           double rel_step = 1e-6);

}  // namespace spikewave::detail
