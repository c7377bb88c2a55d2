#include "spikewave/profile.hpp"

#include <cmath>
#include <sstream>

#include "generic_route.hpp"
#include "spikewave/errors.hpp"
#include "spikewave/expconv.hpp"

namespace spikewave {

using cplx = std::complex<double>;
using expconv::conv1;
using expconv::conv2;

CoarseWave CoarseWave::make(double c, std::vector<double> T) {
    CoarseWave w;
    w.m = static_cast<int>(T.size());
    w.c = c;
    w.T = std::move(T);
    return w;
}

void CoarseWave::validate() const {
    if (m < 1 || static_cast<int>(T.size()) != m)
        throw OrderViolation("coarse wave: T must hold m >= 1 offsets");
    if (!(c > 0.0) || !std::isfinite(c)) throw OrderViolation("coarse wave: speed must be positive");
    if (T[0] != 0.0) throw OrderViolation("coarse wave: T_1 must be 0");
    for (int j = 1; j < m; ++j) {
        if (!(T[j] > T[j - 1]) || !std::isfinite(T[j])) {
            std::ostringstream os;
            os << "coarse wave: T not strictly increasing at index " << j;
            throw OrderViolation(os.str());
        }
    }
}

double kernel_w(double x, const ModelParams& p) {
    if (p.generic) return p.generic->w(x);
    const double ax = std::abs(x);
    return p.a1 * std::exp(-p.b1 * ax) - p.a2 * std::exp(-p.b2 * ax);
}

double alpha(double t, const ModelParams& p) {
    if (t < 0.0) return 0.0;
    if (p.generic) return p.generic->p(t);
    return p.beta * std::exp(-p.beta * t);
}

namespace {

// Per-term constants of the synaptic response F and its exponential
// smoothing G (G' = F - G / c), for a single spike at the origin.
struct TermConst {
    double b;      // kernel rate
    double K;      // A beta / c
    double k;      // beta / c
    double r;      // 1 / c
    double inv_bk; // 1 / (b + k)
    double inv_bkbr;
};

struct SpikeResponse {
    std::vector<TermConst> terms;
    double r = 0.0;

    SpikeResponse(double c, const ModelParams& p) {
        r = 1.0 / c;
        const double k = p.beta / c;
        for (const auto& t : p.kernel_terms()) {
            TermConst tc{};
            tc.b = t.rate;
            tc.K = t.amplitude * p.beta / c;
            tc.k = k;
            tc.r = r;
            tc.inv_bk = 1.0 / (t.rate + k);
            tc.inv_bkbr = tc.inv_bk / (t.rate + r);
            terms.push_back(tc);
        }
    }

    // F(u) = (1/c) int_0^inf w(y - u) p(y / c) dy
    double F(double u) const {
        double s = 0.0;
        for (const auto& t : terms) {
            if (u <= 0.0) s += t.K * std::exp(t.b * u) * t.inv_bk;
            else s += t.K * (conv1(u, t.k, t.b) + std::exp(-t.k * u) * t.inv_bk);
        }
        return s;
    }

    // G(u) = int_{-inf}^u exp((z - u) / c) F(z) dz
    double G(double u) const {
        double s = 0.0;
        for (const auto& t : terms) {
            if (u <= 0.0) {
                s += t.K * std::exp(t.b * u) * t.inv_bkbr;
            } else {
                s += t.K * (std::exp(-t.r * u) * t.inv_bkbr + conv1(u, t.k, t.r) * t.inv_bk +
                            conv2(u, t.k, t.b, t.r));
            }
        }
        return s;
    }
};

}  // namespace

double profile_nu(double xi, const CoarseWave& wave, const ModelParams& p) {
    if (p.generic) return detail::generic_nu(xi, wave, p);
    const SpikeResponse resp(wave.c, p);
    double v = p.I;
    for (double Tj : wave.T) {
        const double u = xi - wave.c * Tj;
        if (u > 0.0) v -= std::exp(-u * resp.r);
        v += resp.G(u);
    }
    return v;
}

double profile_dnu(double xi, const CoarseWave& wave, const ModelParams& p) {
    if (p.generic) return detail::generic_dnu(xi, wave, p);
    const SpikeResponse resp(wave.c, p);
    double d = 0.0;
    for (double Tj : wave.T) {
        const double u = xi - wave.c * Tj;
        if (u > 0.0) d += resp.r * std::exp(-u * resp.r);
        d += resp.F(u) - resp.r * resp.G(u);
    }
    return d;
}

double profile_sigma(double xi, const CoarseWave& wave, const ModelParams& p) {
    if (p.generic) return detail::generic_sigma(xi, wave, p);
    const SpikeResponse resp(wave.c, p);
    double s = 0.0;
    for (double Tj : wave.T) s += resp.F(xi - wave.c * Tj);
    return wave.c * s;
}

std::vector<ProfileSample> sample_profile(const CoarseWave& wave, const ModelParams& p,
                                          double xi_min, double xi_max, int count) {
    std::vector<ProfileSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double xi = count == 1 ? xi_min : xi_min + (xi_max - xi_min) * k / (count - 1);
        out.push_back({xi, profile_nu(xi, wave, p), profile_sigma(xi, wave, p)});
    }
    return out;
}

double psi(int i, int j, double y, const CoarseWave& wave, const ModelParams& p) {
    const double Tji = wave.T.at(j) - wave.T.at(i);
    const double X = y / wave.c - Tji;
    if (X < -1e-12 * (1.0 + std::abs(Tji))) throw DomainError("psi: y below c T_ji");
    if (p.generic) return detail::generic_psi(std::max(X, 0.0), p);
    const double beta = p.beta;
    const double d = 1.0 - beta;
    const double Xc = std::max(X, 0.0);
    double e;  // (exp(d X) - 1) / d
    if (std::abs(d) < 1e-6) e = Xc * (1.0 + 0.5 * d * Xc);
    else e = std::expm1(d * Xc) / d;
    return beta - beta * beta * e;
}

namespace {

struct EntryConst {
    double rho1;   // 1 / c
    double rhob;   // beta / c
    double beta;
    double bb_c;   // beta^2 / c
};

// int_{y0}^inf exp(-z y) A exp(-b |y|) chi(y - y0) dy with
// chi(s) = beta exp(-s/c) - (beta^2/c) conv1(s; 1/c, beta/c).
cplx entry_integral(double y0, cplx z, double A, double b, const EntryConst& k) {
    const cplx q = z + b;
    const cplx q1 = q + k.rho1;
    if (y0 >= 0.0) {
        const cplx lchi = k.beta / q1 - k.bb_c / (q1 * (q + k.rhob));
        return A * std::exp(-q * y0) * lchi;
    }
    const double h = -y0;
    const cplx kappa = b - z;
    const cplx partA = k.beta * conv1<cplx>(h, kappa, cplx(k.rho1)) -
                       k.bb_c * conv2<cplx>(h, kappa, cplx(k.rho1), cplx(k.rhob));
    const cplx partB =
        k.beta * std::exp(-k.rho1 * h) / q1 -
        k.bb_c * (conv1(h, k.rho1, k.rhob) / q1 + std::exp(-k.rhob * h) / (q1 * (q + k.rhob)));
    return A * (partA + partB);
}

// Same integral times exp(z y0). For y0 < 0 the factor exp(-z h) is
// absorbed by shifting every rate by z, so nothing overflows at large Re z.
cplx entry_integral_scaled(double y0, cplx z, double A, double b, const EntryConst& k) {
    const cplx q = z + b;
    const cplx q1 = q + k.rho1;
    if (y0 >= 0.0) {
        const cplx lchi = k.beta / q1 - k.bb_c / (q1 * (q + k.rhob));
        return A * std::exp(-b * y0) * lchi;
    }
    const double h = -y0;
    const cplx r1 = k.rho1 + z, rb = k.rhob + z;
    const cplx partA = k.beta * conv1<cplx>(h, cplx(b), r1) - k.bb_c * conv2<cplx>(h, cplx(b), r1, rb);
    const cplx partB = k.beta * std::exp(-r1 * h) / q1 -
                       k.bb_c * (conv1<cplx>(h, r1, rb) / q1 + std::exp(-rb * h) / (q1 * (q + k.rhob)));
    return A * (partA + partB);
}

}  // namespace

std::complex<double> stability_entry_M_scaled(int i, int j, std::complex<double> z, const CoarseWave& wave,
                                              const ModelParams& p) {
    const double eta = p.strip_eta();
    if (!(z.real() > -eta)) throw DomainError("stability_entry_M: Re z must exceed -eta");
    const double Tji = wave.T.at(j) - wave.T.at(i);
    const double y0 = wave.c * Tji;
    if (p.generic) return detail::generic_M(i, j, z, wave, p) * std::exp(z * y0);
    const EntryConst k{1.0 / wave.c, p.beta / wave.c, p.beta, p.beta * p.beta / wave.c};
    cplx s = (j < i) ? std::exp(Tji * (1.0 + z * wave.c)) : cplx(0.0);
    for (const auto& t : p.kernel_terms()) s += entry_integral_scaled(y0, z, t.amplitude, t.rate, k);
    return s;
}

std::complex<double> stability_entry_M(int i, int j, std::complex<double> z, const CoarseWave& wave,
                                       const ModelParams& p) {
    const double eta = p.strip_eta();
    if (!(z.real() > -eta)) throw DomainError("stability_entry_M: Re z must exceed -eta");
    if (p.generic) return detail::generic_M(i, j, z, wave, p);
    const double Tji = wave.T.at(j) - wave.T.at(i);
    const EntryConst k{1.0 / wave.c, p.beta / wave.c, p.beta, p.beta * p.beta / wave.c};
    const double y0 = wave.c * Tji;
    cplx s = (j < i) ? cplx(std::exp(Tji)) : cplx(0.0);
    for (const auto& t : p.kernel_terms()) s += entry_integral(y0, z, t.amplitude, t.rate, k);
    return s;
}

std::vector<std::complex<double>> stability_matrix(std::complex<double> z, const CoarseWave& wave,
                                                   const ModelParams& p) {
    const int m = wave.m;
    std::vector<cplx> M(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M[static_cast<std::size_t>(i) * m + j] = stability_entry_M(i, j, z, wave, p);
    return M;
}

}  // namespace spikewave
