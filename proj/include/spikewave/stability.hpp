#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spikewave/params.hpp"
#include "spikewave/profile.hpp"

namespace spikewave {

using cplx = std::complex<double>;

struct StabilityMatrices {
    int m = 0;
    Eigen::VectorXd D;  // diagonal
    CoarseWave wave;
    ModelParams params;

    Eigen::MatrixXcd M_at(cplx z) const;
    Eigen::MatrixXcd operator_at(cplx z) const;  // D - M(z)
    // D - S^-1 M(z) S with S = diag(exp(z c T_i)); same determinant.
    Eigen::MatrixXcd scaled_operator_at(cplx z) const;
    // prod_i max(|D_i|, 1)
    double scale() const;
};

StabilityMatrices build_matrices(const CoarseWave& wave, const ModelParams& p);

cplx evaluate_E(cplx z, const StabilityMatrices& mats);

struct RootWindow {
    // re_min >= re_max selects the default [-eta + 0.05, 1]; im_max <= 0
    // selects 20 beta.
    double re_min = 0.0;
    double re_max = 0.0;
    double im_max = 0.0;
    // classify() also sweeps the real axis (re_max, real_sweep] for sign
    // changes of E; slow waves carry real unstable roots far beyond re_max.
    // 0 selects 1e3 (1 + 1/c), negative disables the sweep.
    double real_sweep = 0.0;
};

struct RootGrid {
    int n_re = 101;
    int n_im = 101;
    int threads = 1;  // grid evaluation only; results do not depend on it
};

struct StabilityRoot {
    cplx lambda;
    Eigen::VectorXcd phi;  // |phi|_inf = 1
    double residual = 0.0;  // |E(lambda)| / scale
};

struct RootSearch {
    std::vector<StabilityRoot> roots;
    int dropped = 0;  // candidates whose polish diverged or left the window
};

RootSearch find_roots(const StabilityMatrices& mats, RootWindow window = {}, RootGrid grid = {},
                      double root_tol = 1e-9);

// Real roots in (x_lo, x_hi] from sign changes of E on a log-spaced grid.
std::vector<StabilityRoot> find_real_roots(const StabilityMatrices& mats, double x_lo, double x_hi, int count = 400,
                                           double root_tol = 1e-9);

// Complex Newton from a single starting point; nullopt when it diverges.
std::optional<StabilityRoot> polish_root(const StabilityMatrices& mats, cplx z0, double root_tol = 1e-9);

enum class Classification { stable, unstable, marginal };
const char* to_string(Classification c);

struct StabilityReport {
    CoarseWave wave;
    double beta = 0.0;
    std::vector<StabilityRoot> roots;
    Classification classification = Classification::stable;
    std::optional<StabilityRoot> leading;  // excludes the trivial zero root
    int dropped = 0;
};

StabilityReport classify(const CoarseWave& wave, const ModelParams& p, RootWindow window = {},
                         RootGrid grid = {}, double class_tol = 1e-7);

bool is_trivial_root(cplx lambda);

// (L phi)_i(x) for phi_j(x) = Phi_j exp(lambda x), evaluated by quadrature
// at each sample x. Entry [k][i] holds component i at xs[k].
std::vector<std::vector<cplx>> linearized_apply(const Eigen::VectorXcd& Phi, cplx lambda, const CoarseWave& wave,
                                                const ModelParams& p, const std::vector<double>& xs);

// Dense E values on the window grid, for external level-set plotting.
struct EGridSample {
    double re, im;
    cplx E;
};
std::vector<EGridSample> sample_E(const StabilityMatrices& mats, RootWindow window, RootGrid grid);

}  // namespace spikewave
