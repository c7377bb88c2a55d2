#pragma once

// Brute-force references for the test suite and the `verify` command.
// Nothing here calls the closed-form profile or stability code; only the
// kernel definitions (kernel_w, alpha) are shared.

#include <complex>
#include <functional>
#include <vector>

#include "spikewave/params.hpp"
#include "spikewave/profile.hpp"

namespace spikewave::oracles {

struct QuadratureSpec {
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    // Improper integrals are cut where the exponential bound on the tail
    // drops below abs_tol / truncation_margin.
    double truncation_margin = 10.0;
};

double quad_nu(double xi, const CoarseWave& wave, const ModelParams& p, const QuadratureSpec& spec = {});
double quad_sigma(double xi, const CoarseWave& wave, const ModelParams& p,
                  const QuadratureSpec& spec = {});
double quad_psi(int i, int j, double y, const CoarseWave& wave, const ModelParams& p,
                const QuadratureSpec& spec = {});
std::complex<double> quad_M(int i, int j, std::complex<double> z, const CoarseWave& wave,
                            const ModelParams& p, const QuadratureSpec& spec = {});

// int_R exp(eta |x|) |w(x)| dx
double weighted_kernel_norm(double eta, const ModelParams& p, const QuadratureSpec& spec = {});

// c int_{-inf}^0 int_0^inf exp(s) w(c (y - s)) p(y) dy ds - (1 - I)
double quad_compatibility(double c, const ModelParams& p, const QuadratureSpec& spec = {});
// Root of quad_compatibility in [lo, hi] by bisection; requires a sign change.
double bisect_compatibility(double lo, double hi, const ModelParams& p, double tol = 1e-12);

// Dense-output Dormand-Prince integration of dv = I_i - v + s, ds = -beta s
// for a set of uncoupled neurons (no firing inside the span).
struct RkState {
    std::vector<double> v;
    std::vector<double> s;
};
struct RkTrajectory {
    std::vector<double> t;
    std::vector<RkState> states;
};
RkTrajectory rk_reference(const RkState& init, const std::vector<double>& drive, double beta,
                          const std::vector<double>& times, double tol = 1e-12);

// Voltage mapping V_m u evaluated at (x, u_i(x)^-) for general firing
// functions, minus 1. Everything by quadrature.
struct FiringFunctions {
    std::vector<std::function<double(double)>> u;
};
double threshold_residual_quadrature(const FiringFunctions& ff, int i, double x, const ModelParams& p,
                                     double slope_hint_c, const QuadratureSpec& spec = {});

struct LinearizationCheck {
    std::vector<double> eps;
    std::vector<double> residual;  // max over grid and spikes
    double order = 0.0;            // least-squares slope of log residual vs log eps
};
// Perturbs tau_j(x) = x / c + T_j by eps * 2 Re(Phi_j exp(lambda x)) and
// measures the exact threshold residual on an x grid.
LinearizationCheck fd_linearization_check(const CoarseWave& wave, const ModelParams& p,
                                          std::complex<double> lambda,
                                          const std::vector<std::complex<double>>& Phi,
                                          const std::vector<double>& eps_list,
                                          const std::vector<double>& x_grid = {-0.5, 0.0, 0.5});

}  // namespace spikewave::oracles
