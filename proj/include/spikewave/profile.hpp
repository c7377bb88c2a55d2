#pragma once

#include <complex>
#include <vector>

#include "spikewave/params.hpp"

namespace spikewave {

// Coarse description of a travelling wave with m spikes: speed c and
// firing offsets T (T[0] == 0, strictly increasing). Firing functions are
// tau_j(x) = x / c + T[j].
struct CoarseWave {
    int m = 0;
    double c = 0.0;
    std::vector<double> T;

    static CoarseWave make(double c, std::vector<double> T);
    // Throws OrderViolation when the invariants fail.
    void validate() const;
    double width() const { return c * T.back(); }
};

struct ProfileSample {
    double xi;
    double nu;
    double sigma;
};

double kernel_w(double x, const ModelParams& p);
double alpha(double t, const ModelParams& p);

// Voltage profile in the comoving coordinate xi = c t - x. At xi == c T_j
// the value is the left limit (reset of spike j not yet applied).
double profile_nu(double xi, const CoarseWave& wave, const ModelParams& p);
// d nu / d xi; at xi == c T_j the left derivative.
double profile_dnu(double xi, const CoarseWave& wave, const ModelParams& p);
// Synaptic input s = sigma(c t - x), so that c nu' = -nu + I + sigma away
// from the spikes.
double profile_sigma(double xi, const CoarseWave& wave, const ModelParams& p);

std::vector<ProfileSample> sample_profile(const CoarseWave& wave, const ModelParams& p,
                                          double xi_min, double xi_max, int count);

// Integrand factor of the linearised voltage mapping, defined for
// y >= c (T_j - T_i). Indices are zero-based.
double psi(int i, int j, double y, const CoarseWave& wave, const ModelParams& p);

// Entry (i, j) of the stability matrix M(z); requires Re z > -eta.
std::complex<double> stability_entry_M(int i, int j, std::complex<double> z,
                                       const CoarseWave& wave, const ModelParams& p);
// M_ij exp(z c (T_j - T_i)): a diagonal similarity of M, so det(D - M) is
// unchanged, but entries stay bounded for large Re z.
std::complex<double> stability_entry_M_scaled(int i, int j, std::complex<double> z, const CoarseWave& wave,
                                              const ModelParams& p);

// Full matrix, row-major m x m. Cheaper than m^2 calls of the entry.
std::vector<std::complex<double>> stability_matrix(std::complex<double> z, const CoarseWave& wave,
                                                   const ModelParams& p);

}  // namespace spikewave
