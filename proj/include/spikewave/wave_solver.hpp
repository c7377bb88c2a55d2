#pragma once

#include <vector>

#include "spikewave/network.hpp"
#include "spikewave/params.hpp"
#include "spikewave/profile.hpp"

namespace spikewave {

struct ValidationGrid {
    // xi_min >= xi_max selects the default [-0.5 c T_m - 5, 2 c T_m + 5].
    double xi_min = 0.0;
    double xi_max = 0.0;
    int count = 4001;
};

struct SolveOptions {
    double newton_tol = 1e-11;
    int max_iter = 50;
    ValidationGrid validation_grid;
    double threshold_margin = 0.0;
    double finite_diff_step = 1e-6;  // relative
    void validate() const;
};

struct SecondaryMax {
    double xi_max = 0.0;
    double value = 0.0;
};

struct WaveRecord {
    CoarseWave wave;
    double beta = 0.0;
    double residual = 0.0;
    bool validated = false;
    SecondaryMax secondary_max;
};

// nu(c T_i^-) - 1 for each spike.
std::vector<double> threshold_residual(const CoarseWave& wave, const ModelParams& p);

// Newton on (c, T_2..T_m) with T_1 = 0 held fixed. Converged roots that
// break the sub-threshold condition come back with validated == false.
WaveRecord solve_wave(int m, const CoarseWave& guess, const ModelParams& p, const SolveOptions& opts = {});

// Sub-threshold check on the validation grid; true when nu < 1 - margin off
// the firing set.
bool validate_subthreshold(const CoarseWave& wave, const ModelParams& p, const SolveOptions& opts);

// Largest value of nu on (c T_m, c T_m + 10 / min(b1, b2)], refined.
SecondaryMax secondary_maximum(const CoarseWave& wave, const ModelParams& p);

// Scalar speed condition for a single-spike wave; roots are TW_1 speeds.
double compatibility_m1(double c, const ModelParams& p);
// All sign changes of compatibility_m1 on [c_lo, c_hi], refined by Brent.
std::vector<double> compatibility_roots(const ModelParams& p, double c_lo = 1e-3, double c_hi = 50.0,
                                        int scan = 2000);

// Least-squares parallel-line fit to the latest burst of every neuron in
// the most recently activated arc.
CoarseWave seed_from_simulation(const NetworkTrajectory& traj, int m);
CoarseWave seed_from_events(const std::vector<double>& x, const std::vector<std::vector<double>>& tau);

// Concatenates groups with the given gaps between the last spike of one
// group and the first of the next.
CoarseWave seed_composite(const std::vector<CoarseWave>& waves, const std::vector<double>& gaps);

}  // namespace spikewave
