#pragma once

// Quadrature-backed evaluation for user-supplied couplings. Used by the
// public profile and stability functions when ModelParams::generic is set.

#include <complex>

#include "spikewave/params.hpp"
#include "spikewave/profile.hpp"

namespace spikewave::detail {

double generic_nu(double xi, const CoarseWave& wave, const ModelParams& p);
double generic_dnu(double xi, const CoarseWave& wave, const ModelParams& p);
double generic_sigma(double xi, const CoarseWave& wave, const ModelParams& p);
double generic_psi(double X, const ModelParams& p);
std::complex<double> generic_M(int i, int j, std::complex<double> z, const CoarseWave& wave,
                               const ModelParams& p);

}  // namespace spikewave::detail
