#include "spikewave/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "spikewave/errors.hpp"

namespace spikewave::oracles {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr unsigned kDepth = 15;

template <class F>
double quad(F&& f, double a, double b, const QuadratureSpec& spec) {
    if (!(b > a)) return 0.0;
    double err = 0.0, l1 = 0.0;
    // The adaptive rule only takes a relative tolerance; fold abs_tol in
    // using a first non-adaptive pass.
    GK::integrate(f, a, b, 0, spec.rel_tol, &err, &l1);
    const double rel = std::max(spec.rel_tol, spec.abs_tol / std::max(l1, 1e-300));
    const double v = GK::integrate(f, a, b, kDepth, rel, &err, &l1);
    if (!(err <= std::max(spec.abs_tol, spec.rel_tol * l1) * 100.0))
        throw NumericalError("oracle quadrature: tolerance not met on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "] err " + std::to_string(err) + " l1 " + std::to_string(l1));
    return v;
}

// Quadrature over [a, b] split at the interior breakpoints.
template <class F>
double quad_split(F&& f, double a, double b, std::vector<double> breaks, const QuadratureSpec& spec) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = std::max(breaks[k], a), hi = std::min(breaks[k + 1], b);
        if (hi > lo) s += quad(f, lo, hi, spec);
    }
    return s;
}

double kernel_bound(const ModelParams& p) {
    if (p.generic) return std::max(std::abs(p.generic->w(0.0)), 1.0);
    return std::abs(p.a1) + std::abs(p.a2);
}

double p_bound(const ModelParams& p) {
    if (p.generic) return std::max(std::abs(p.generic->p(0.0)), 1.0);
    return p.beta;
}

double dalpha(double s, const ModelParams& p) {
    if (p.generic) return p.generic->dp(s);
    return -p.beta * p.beta * std::exp(-p.beta * s);
}

// Length beyond which a tail bounded by amp * exp(-rate * len) / rate is
// below abs_tol / margin.
double tail_len(double amp, double rate, const QuadratureSpec& spec) {
    const double target = spec.abs_tol / spec.truncation_margin;
    return std::max(std::log(std::max(amp / (rate * target), 1.0)) / rate, 1.0);
}

// (1/c) int_0^inf w(y - u) p(y / c) dy
double synaptic_single(double u, double c, const ModelParams& p, const QuadratureSpec& spec) {
    const double b = p.slowest_rate();
    auto f = [&](double y) { return kernel_w(y - u, p) * alpha(y / c, p); };
    const double kink = std::max(u, 0.0);
    const double hi = kink + tail_len(kernel_bound(p) * p_bound(p) / c, b, spec);
    return quad_split(f, 0.0, hi, {kink}, spec) / c;
}

}  // namespace

double quad_sigma(double xi, const CoarseWave& wave, const ModelParams& p, const QuadratureSpec& spec) {
    double s = 0.0;
    for (double Tj : wave.T) s += synaptic_single(xi - wave.c * Tj, wave.c, p, spec);
    return wave.c * s;
}

double quad_nu(double xi, const CoarseWave& wave, const ModelParams& p, const QuadratureSpec& spec) {
    const double c = wave.c;
    const double b = p.slowest_rate();
    const double fmax = 2.0 * kernel_bound(p) * p_bound(p) / (b * c);
    const double span = c * std::log(std::max(spec.truncation_margin * c * fmax / spec.abs_tol, 2.0)) +
                        tail_len(fmax, b, spec);
    double v = p.I;
    for (double Tj : wave.T) {
        const double shift = c * Tj;
        if (xi - shift > 0.0) v -= std::exp(-(xi - shift) / c);
        // (1/c) int_{-inf}^xi exp((z - xi)/c) int_0^inf w(y - z + c T_j) p(y/c) dy dz
        auto outer = [&](double z) {
            return std::exp((z - xi) / c) * synaptic_single(z - shift, c, p, spec);
        };
        v += quad_split(outer, xi - span, xi, {shift}, spec);
    }
    return v;
}

double quad_psi(int i, int j, double y, const CoarseWave& wave, const ModelParams& p,
                const QuadratureSpec& spec) {
    const double X = y / wave.c - (wave.T.at(j) - wave.T.at(i));
    if (X < -1e-12) throw DomainError("quad_psi: outside support");
    auto f = [&](double s) { return std::exp(s) * dalpha(s, p); };
    return alpha(0.0, p) + quad(f, 0.0, std::max(X, 0.0), spec);
}

std::complex<double> quad_M(int i, int j, std::complex<double> z, const CoarseWave& wave,
                            const ModelParams& p, const QuadratureSpec& spec) {
    if (!(z.real() > -p.strip_eta())) throw DomainError("quad_M: outside strip");
    const double c = wave.c;
    const double Tji = wave.T.at(j) - wave.T.at(i);
    const double y0 = c * Tji;
    auto base = [&](double y) {
        return std::exp(-y / c) * kernel_w(y, p) * quad_psi(i, j, std::max(y, y0), wave, p, spec);
    };
    auto fr = [&](double y) { return base(y) * std::exp(-z.real() * y) * std::cos(z.imag() * y); };
    auto fi = [&](double y) { return -base(y) * std::exp(-z.real() * y) * std::sin(z.imag() * y); };
    // exp(-y/c)|psi| <= 2 max(|p|, |p'|) exp(-T_ji) and the rest decays with Re z + b.
    const double rate = z.real() + p.slowest_rate();
    const double amp = kernel_bound(p) * 2.0 * std::max(p_bound(p), p.beta * p_bound(p)) *
                       std::exp(std::abs(Tji)) * std::exp(-z.real() * std::min(y0, 0.0));
    const double hi = std::max(y0, 0.0) + tail_len(amp, rate, spec);
    const double re = quad_split(fr, y0, hi, {0.0}, spec);
    const double im = quad_split(fi, y0, hi, {0.0}, spec);
    std::complex<double> out(re, im);
    if (j < i) out += 1.0;
    return std::exp(Tji) * out;
}

double weighted_kernel_norm(double eta, const ModelParams& p, const QuadratureSpec& spec) {
    // Log form: exp(eta x) alone overflows long before the cutoff.
    auto f = [&](double x) {
        const double aw = std::abs(kernel_w(x, p));
        return aw > 0.0 ? std::exp(eta * x + std::log(aw)) : 0.0;
    };
    const double rate = p.slowest_rate() - eta;
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    const double hi = tail_len(kernel_bound(p), rate, spec);
    // |w| has a kink wherever w changes sign; locate it on a coarse scan.
    std::vector<double> breaks;
    double prev = kernel_w(0.0, p);
    const int N = 2000;
    for (int k = 1; k <= N; ++k) {
        const double x = hi * k / N;
        const double cur = kernel_w(x, p);
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = hi * (k - 1) / N, up = x;
            for (int it = 0; it < 200 && up - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + up);
                if ((kernel_w(mid, p) < 0.0) == (kernel_w(lo, p) < 0.0)) lo = mid;
                else up = mid;
            }
            breaks.push_back(0.5 * (lo + up));
        }
        prev = cur;
    }
    return 2.0 * quad_split(f, 0.0, hi, breaks, spec);
}

double quad_compatibility(double c, const ModelParams& p, const QuadratureSpec& spec) {
    const double b = p.slowest_rate();
    auto inner = [&](double s) {
        auto f = [&](double y) { return kernel_w(c * (y - s), p) * alpha(y, p); };
        // w(c (y - s)) decays with rate c b in y; alpha with rate beta.
        const double rate = c * b + (p.generic ? 0.0 : p.beta);
        const double hi = tail_len(kernel_bound(p) * p_bound(p), rate, spec);
        return std::exp(s) * quad(f, 0.0, hi, spec);
    };
    const double lo = -std::log(kernel_bound(p) * p_bound(p) * spec.truncation_margin / spec.abs_tol);
    return c * quad(inner, lo, 0.0, spec) - (1.0 - p.I);
}

double bisect_compatibility(double lo, double hi, const ModelParams& p, double tol) {
    QuadratureSpec spec;
    spec.abs_tol = 1e-11;
    spec.rel_tol = 1e-11;
    double flo = quad_compatibility(lo, p, spec);
    const double fhi = quad_compatibility(hi, p, spec);
    if ((flo < 0.0) == (fhi < 0.0)) throw NumericalError("bisect_compatibility: no sign change");
    while (hi - lo > tol * std::max(1.0, std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        const double fm = quad_compatibility(mid, p, spec);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

RkTrajectory rk_reference(const RkState& init, const std::vector<double>& drive, double beta,
                          const std::vector<double>& times, double tol) {
    namespace odeint = boost::numeric::odeint;
    using state_t = std::vector<double>;
    const std::size_t n = init.v.size();
    state_t x(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = init.v[i];
        x[n + i] = init.s[i];
    }
    auto rhs = [&](const state_t& y, state_t& dy, double) {
        for (std::size_t i = 0; i < n; ++i) {
            dy[i] = drive[i] - y[i] + y[n + i];
            dy[n + i] = -beta * y[n + i];
        }
    };
    RkTrajectory out;
    auto observer = [&](const state_t& y, double t) {
        RkState s;
        s.v.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
        s.s.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
        out.t.push_back(t);
        out.states.push_back(std::move(s));
    };
    auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<state_t>());
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3, observer);
    return out;
}

namespace {

// int_0^delta exp(-(delta - s)) alpha(s) ds
double membrane_response(double delta, const ModelParams& p, const QuadratureSpec& spec) {
    if (delta <= 0.0) return 0.0;
    auto f = [&](double s) { return std::exp(-(delta - s)) * alpha(s, p); };
    return quad(f, 0.0, delta, spec);
}

double find_crossing(const std::function<double(double)>& u, double t, double guess, double c) {
    double y = guess;
    for (int it = 0; it < 60; ++it) {
        const double g = u(y) - t;
        if (std::abs(g) < 1e-15 * std::max(1.0, std::abs(t))) return y;
        y -= g * c;
    }
    // Fall back to bisection on a bracket around the secant estimate.
    double lo = y - 1.0, hi = y + 1.0;
    while (u(lo) > t) lo -= 1.0;
    while (u(hi) < t) hi += 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (u(mid) < t) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double threshold_residual_quadrature(const FiringFunctions& ff, int i, double x, const ModelParams& p,
                                     double slope_hint_c, const QuadratureSpec& spec) {
    const int m = static_cast<int>(ff.u.size());
    const double t = ff.u.at(i)(x);
    double v = p.I;
    const double b = p.slowest_rate();
    const double ycut = tail_len(2.0 * kernel_bound(p) * p_bound(p), b, spec);
    for (int j = 0; j < m; ++j) {
        const double uj = ff.u[j](x);
        if (j != i && uj < t) v -= std::exp(uj - t);
        const double ystar = j == i ? x : find_crossing(ff.u[j], t, x + slope_hint_c * (t - uj), slope_hint_c);
        auto f = [&](double y) {
            const double delta = t - ff.u[j](y);
            return kernel_w(x - y, p) * membrane_response(delta, p, spec);
        };
        const double hi = std::min(ystar, x + ycut);
        const double lo = x - ycut;
        if (hi > lo) v += quad_split(f, lo, hi, {x}, spec);
    }
    return v - 1.0;
}

LinearizationCheck fd_linearization_check(const CoarseWave& wave, const ModelParams& p,
                                          std::complex<double> lambda,
                                          const std::vector<std::complex<double>>& Phi,
                                          const std::vector<double>& eps_list,
                                          const std::vector<double>& x_grid) {
    if (eps_list.size() < 2) throw NumericalError("fd_linearization_check: need at least two eps values");
    if (x_grid.empty()) throw NumericalError("fd_linearization_check: grid too small");
    double scale = 0.0;
    for (const auto& v : Phi) scale = std::max(scale, std::abs(v));
    if (!(scale > 0.0)) throw NumericalError("fd_linearization_check: zero mode");

    QuadratureSpec spec;
    spec.abs_tol = 1e-11;
    spec.rel_tol = 1e-11;

    LinearizationCheck out;
    for (double eps : eps_list) {
        FiringFunctions ff;
        for (int j = 0; j < wave.m; ++j) {
            const std::complex<double> amp = Phi[j] / scale;
            const double Tj = wave.T[j];
            const double c = wave.c;
            ff.u.push_back([=](double y) {
                return y / c + Tj + eps * 2.0 * std::real(amp * std::exp(lambda * y));
            });
        }
        double r = 0.0;
        for (double x : x_grid)
            for (int i = 0; i < wave.m; ++i)
                r = std::max(r, std::abs(threshold_residual_quadrature(ff, i, x, p, wave.c, spec)));
        out.eps.push_back(eps);
        out.residual.push_back(r);
    }
    // Least-squares slope in log-log coordinates.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(out.eps.size());
    for (std::size_t k = 0; k < out.eps.size(); ++k) {
        const double lx = std::log(out.eps[k]);
        const double ly = std::log(std::max(out.residual[k], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    out.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

}  // namespace spikewave::oracles
