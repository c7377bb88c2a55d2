#pragma once

// Oracle battery: closed forms, the event propagator, the single-spike
// speed and the linearised operator checked against the brute-force
// references in oracles.hpp.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "spikewave/oracles.hpp"

namespace spikewave::oracles {

struct BatteryCheck {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string detail;
};

struct BatteryOptions {
    int evaluations = 200;
    std::uint64_t seed = 1;
    bool linearization = true;
};

// Largest absolute deviation of nu, sigma and M_ij from quadrature over
// randomized waves (m <= 3), abscissae and z with Re z >= -0.3.
double closed_form_deviation(int evaluations, std::uint64_t seed);
// Largest deviation of propagate() from Runge-Kutta over unit intervals.
double propagator_deviation(int neurons, std::uint64_t seed);
// |c(solve_wave, m = 1) - bisection root| for the fastest speed.
double m1_speed_deviation(const ModelParams& p);

struct LinearizationCase {
    int m = 0;
    double beta = 0.0;
    std::complex<double> lambda;
    double pair_order = 0.0;
    double generic_order = 0.0;
};
// Two roots of TW_3 at beta 16 and the leading root of TW_3 at beta 10.
std::vector<LinearizationCase> linearization_cases();

std::vector<BatteryCheck> oracle_battery(const BatteryOptions& o = {});

}  // namespace spikewave::oracles
