#include "newton.hpp"

#include <cmath>

namespace spikewave::detail {

Eigen::MatrixXd fd_jacobian(const VecFn& F, const Eigen::VectorXd& x, double rel_step) {
    Eigen::MatrixXd J;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = rel_step * std::max(1.0, std::abs(x[k]));
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const Eigen::VectorXd col = (F(xp) - F(xm)) / (2.0 * h);
        if (k == 0) J.resize(col.size(), x.size());
        J.col(k) = col;
    }
    return J;
}

NewtonResult damped_newton(const VecFn& F, Eigen::VectorXd x, const Admissible& ok, double tol, int max_iter,
                           double rel_step) {
    NewtonResult out;
    Eigen::VectorXd r = F(x);
    double rn = r.lpNorm<Eigen::Infinity>();
    while (rn > tol && out.iterations < max_iter) {
        ++out.iterations;
        const Eigen::MatrixXd J = fd_jacobian(F, x, rel_step);
        const Eigen::VectorXd dx = J.fullPivLu().solve(-r);
        if (!dx.allFinite()) break;
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= 20; ++h, t *= 0.5) {
            const Eigen::VectorXd trial = x + t * dx;
            if (!ok(trial)) continue;
            const Eigen::VectorXd tr = F(trial);
            const double tn = tr.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(tn)) continue;
            if (h == 0 || tn < rn) {
                x = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    out.x = x;
    out.residual = rn;
    out.converged = rn <= tol;
    return out;
}

}  // namespace spikewave::detail
