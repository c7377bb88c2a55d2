#include "generic_route.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace spikewave::detail {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr double kTol = 1e-12;
constexpr unsigned kDepth = 18;

template <class F>
double integrate(F&& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return GK::integrate(f, a, b, kDepth, kTol);
}

double tail_length(const ModelParams& p) { return 40.0 / p.generic->decay; }

// F(z) = (1/c) int_0^inf w(y - z) p(y / c) dy
double F(double z, double c, const ModelParams& p) {
    const auto& g = *p.generic;
    auto f = [&](double y) { return g.w(y - z) * g.p(y / c); };
    const double cut = std::max(z, 0.0) + tail_length(p);
    double s = 0.0;
    if (z > 0.0) s += integrate(f, 0.0, z);
    s += integrate(f, std::max(z, 0.0), cut);
    return s / c;
}

// G(u) = int_{-inf}^u exp((z - u) / c) F(z) dz
double G(double u, double c, const ModelParams& p) {
    auto f = [&](double z) { return std::exp((z - u) / c) * F(z, c, p); };
    const double lo = u - 40.0 * c - tail_length(p);
    if (u <= 0.0) return integrate(f, lo, u);
    return integrate(f, lo, 0.0) + integrate(f, 0.0, u);
}

}  // namespace

double generic_nu(double xi, const CoarseWave& wave, const ModelParams& p) {
    double v = p.I;
    for (double Tj : wave.T) {
        const double u = xi - wave.c * Tj;
        if (u > 0.0) v -= std::exp(-u / wave.c);
        v += G(u, wave.c, p);
    }
    return v;
}

double generic_dnu(double xi, const CoarseWave& wave, const ModelParams& p) {
    double d = 0.0;
    for (double Tj : wave.T) {
        const double u = xi - wave.c * Tj;
        if (u > 0.0) d += std::exp(-u / wave.c) / wave.c;
        d += F(u, wave.c, p) - G(u, wave.c, p) / wave.c;
    }
    return d;
}

double generic_sigma(double xi, const CoarseWave& wave, const ModelParams& p) {
    double s = 0.0;
    for (double Tj : wave.T) s += F(xi - wave.c * Tj, wave.c, p);
    return wave.c * s;
}

double generic_psi(double X, const ModelParams& p) {
    const auto& g = *p.generic;
    return g.p(0.0) + integrate([&](double s) { return std::exp(s) * g.dp(s); }, 0.0, X);
}

std::complex<double> generic_M(int i, int j, std::complex<double> z, const CoarseWave& wave,
                               const ModelParams& p) {
    const auto& g = *p.generic;
    const double c = wave.c;
    const double Tji = wave.T.at(j) - wave.T.at(i);
    const double y0 = c * Tji;
    // exp(T_ji) exp(-y / c) psi(y) = exp(-X) psi(X), X = y / c - T_ji
    auto weight = [&](double y) {
        const double X = std::max(y / c - Tji, 0.0);
        return std::exp(-X) * generic_psi(X, p) * g.w(y);
    };
    auto re = [&](double y) { return weight(y) * std::exp(-z.real() * y) * std::cos(z.imag() * y); };
    auto im = [&](double y) { return -weight(y) * std::exp(-z.real() * y) * std::sin(z.imag() * y); };
    const double hi = std::max(y0, 0.0) + 37.0 / (z.real() + g.decay);
    double sr = 0.0, si = 0.0;
    if (y0 < 0.0) {
        sr += integrate(re, y0, 0.0);
        si += integrate(im, y0, 0.0);
    }
    sr += integrate(re, std::max(y0, 0.0), hi);
    si += integrate(im, std::max(y0, 0.0), hi);
    std::complex<double> out(sr, si);
    if (j < i) out += std::exp(Tji);
    return out;
}

}  // namespace spikewave::detail
