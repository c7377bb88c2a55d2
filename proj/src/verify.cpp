#include "spikewave/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spikewave/difm.hpp"
#include "spikewave/errors.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/wave_solver.hpp"

namespace spikewave::oracles {

namespace {

using cplx = std::complex<double>;

CoarseWave random_wave(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_m(1, 3);
    std::uniform_real_distribution<double> speed(0.2, 1.5), gap(0.2, 1.2);
    const int m = pick_m(rng);
    std::vector<double> T{0.0};
    for (int j = 1; j < m; ++j) T.push_back(T.back() + gap(rng));
    return CoarseWave::make(speed(rng), T);
}

BatteryCheck check(std::string name, double value, double tol, bool pass, std::string detail = {}) {
    return {std::move(name), value, tol, pass, std::move(detail)};
}

CoarseWave walk(int m, double beta, ModelParams p) {
    std::vector<double> T;
    for (int j = 0; j < m; ++j) T.push_back(0.8 * j);
    auto w = solve_wave(m, CoarseWave::make(0.3, T), p).wave;
    while (std::abs(p.beta - beta) > 1e-12) {
        p.beta += std::clamp(beta - p.beta, -0.5, 0.5);
        w = solve_wave(m, w, p).wave;
    }
    return w;
}

}  // namespace

double closed_form_deviation(int evaluations, std::uint64_t seed) {
    const ModelParams p;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < evaluations; ++k) {
        const auto w = random_wave(rng);
        const double xi = -2.0 + (w.width() + 4.0) * u(rng);
        switch (k % 3) {
            case 0: worst = std::max(worst, std::abs(profile_nu(xi, w, p) - quad_nu(xi, w, p))); break;
            case 1: worst = std::max(worst, std::abs(profile_sigma(xi, w, p) - quad_sigma(xi, w, p))); break;
            default: {
                const int i = int(u(rng) * w.m), j = int(u(rng) * w.m);
                const cplx z(-0.3 + 1.3 * u(rng), -10.0 + 20.0 * u(rng));
                worst = std::max(worst, std::abs(stability_entry_M(i, j, z, w, p) - quad_M(i, j, z, w, p)));
            }
        }
    }
    return worst;
}

double propagator_deviation(int neurons, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(-1.0, 0.9), s(0.0, 3.0), drive(0.0, 1.0);
    double worst = 0.0;
    for (double beta : {1.0, 4.5, 17.0}) {
        RkState init;
        std::vector<double> I;
        for (int k = 0; k < neurons; ++k) {
            init.v.push_back(v(rng));
            init.s.push_back(s(rng));
            I.push_back(drive(rng));
        }
        const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
        const auto ref = rk_reference(init, I, beta, times);
        for (std::size_t t = 0; t < times.size(); ++t)
            for (int k = 0; k < neurons; ++k) {
                const auto x = propagate({init.v[k], init.s[k]}, I[k], beta, times[t]);
                worst = std::max({worst, std::abs(x.v - ref.states[t].v[k]), std::abs(x.s - ref.states[t].s[k])});
            }
    }
    return worst;
}

double m1_speed_deviation(const ModelParams& p) {
    const auto roots = compatibility_roots(p);
    if (roots.empty()) throw NoConvergence("no single-spike speed to compare");
    const double c0 = roots.back();
    const double h = std::min(0.05, 0.25 * c0);
    const double ref = bisect_compatibility(c0 - h, c0 + h, p);
    const auto rec = solve_wave(1, CoarseWave::make(c0 * 1.02, {0.0}), p);
    return std::abs(rec.wave.c - ref);
}

std::vector<LinearizationCase> linearization_cases() {
    std::vector<LinearizationCase> out;
    const std::vector<double> eps{1e-2, 1e-3, 1e-4};
    auto add = [&](int m, double beta, int which) {
        ModelParams p;
        p.beta = beta;
        const auto w = walk(m, beta, p);
        const auto rep = classify(w, p);
        std::vector<StabilityRoot> nontrivial;
        for (const auto& r : rep.roots)
            if (!is_trivial_root(r.lambda) && r.lambda.imag() >= 0.0) nontrivial.push_back(r);
        if (int(nontrivial.size()) <= which) throw NoConvergence("too few roots for the linearisation check");
        const auto& r = nontrivial[which];
        const std::vector<cplx> Phi(r.phi.data(), r.phi.data() + r.phi.size());
        std::vector<cplx> generic(m);
        for (int j = 0; j < m; ++j) generic[j] = cplx(1.0 - 0.3 * j, 0.2 + 0.25 * j);
        LinearizationCase c;
        c.m = m;
        c.beta = beta;
        c.lambda = r.lambda;
        c.pair_order = fd_linearization_check(w, p, r.lambda, Phi, eps).order;
        c.generic_order = fd_linearization_check(w, p, r.lambda, generic, eps).order;
        out.push_back(c);
    };
    add(3, 16.0, 0);
    add(3, 16.0, 1);
    add(3, 10.0, 0);
    return out;
}

std::vector<BatteryCheck> oracle_battery(const BatteryOptions& o) {
    std::vector<BatteryCheck> out;
    const double dev = closed_form_deviation(o.evaluations, o.seed);
    out.push_back(check("closed forms vs quadrature (" + std::to_string(o.evaluations) + " evaluations)", dev, 1e-8,
                        dev <= 1e-8));
    const double prop = propagator_deviation(20, o.seed);
    out.push_back(check("analytic propagator vs Runge-Kutta", prop, 1e-9, prop <= 1e-9));
    for (double beta : {3.0, 4.5, 8.0}) {
        ModelParams p;
        p.beta = beta;
        const double d = m1_speed_deviation(p);
        out.push_back(check("single-spike speed vs bisection at beta " + std::to_string(beta).substr(0, 4), d, 1e-8,
                            d <= 1e-8));
    }
    if (o.linearization) {
        for (const auto& c : linearization_cases()) {
            const std::string tag = "TW_" + std::to_string(c.m) + " beta " + std::to_string(c.beta).substr(0, 4);
            out.push_back(check("kernel pair order " + tag, c.pair_order, 1.9, c.pair_order >= 1.9));
            out.push_back(check("generic vector order " + tag, c.generic_order, 0.2,
                                std::abs(c.generic_order - 1.0) <= 0.2));
        }
    }
    return out;
}

}  // namespace spikewave::oracles
