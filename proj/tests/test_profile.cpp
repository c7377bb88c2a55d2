#include <cmath>
#include <random>

#include "doctest.h"
#include "spikewave/errors.hpp"
#include "spikewave/oracles.hpp"
#include "spikewave/profile.hpp"

using namespace spikewave;
using cplx = std::complex<double>;

namespace {

CoarseWave three_spike() { return CoarseWave::make(2.1, {0.0, 0.45, 1.3}); }

}  // namespace

TEST_CASE("profile closed forms agree with quadrature") {
    const ModelParams p;
    for (const auto& wave : {CoarseWave::make(1.7, {0.0}), three_spike()}) {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> U(-3.0, wave.width() + 3.0);
        for (int k = 0; k < 12; ++k) {
            const double xi = U(rng);
            CHECK(profile_nu(xi, wave, p) == doctest::Approx(oracles::quad_nu(xi, wave, p)).epsilon(1e-9));
            CHECK(profile_sigma(xi, wave, p) ==
                  doctest::Approx(oracles::quad_sigma(xi, wave, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("sigma drives nu through the membrane equation") {
    const ModelParams p;
    const auto wave = three_spike();
    for (double xi : {-1.5, -0.2, 0.4, 1.7, 2.9, 4.0}) {
        const double lhs = wave.c * profile_dnu(xi, wave, p) + profile_nu(xi, wave, p) - p.I;
        CHECK(lhs == doctest::Approx(profile_sigma(xi, wave, p)).epsilon(1e-10));
    }
}

TEST_CASE("profile is continuous through coincident rates") {
    ModelParams p;
    // beta / c == b1 and 1 / c == b2 on the nose, then nudged.
    const double c = 1.0 / 3.5;
    p.beta = 5.0 * c;
    const auto w0 = CoarseWave::make(c, {0.0, 0.7});
    for (double xi : {-0.2, 0.05, 0.3}) {
        const double v0 = profile_nu(xi, w0, p);
        CHECK(v0 == doctest::Approx(oracles::quad_nu(xi, w0, p)).epsilon(1e-8));
        const auto w1 = CoarseWave::make(c * (1.0 + 1e-9), {0.0, 0.7});
        CHECK(std::abs(profile_nu(xi, w1, p) - v0) < 1e-7);
    }
}

TEST_CASE("profile derivative matches finite differences") {
    const ModelParams p;
    const auto wave = three_spike();
    for (double xi : {-1.0, 0.4, 1.5, 3.0}) {
        const double h = 1e-5;
        const double fd = (profile_nu(xi + h, wave, p) - profile_nu(xi - h, wave, p)) / (2 * h);
        CHECK(profile_dnu(xi, wave, p) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("psi at the degenerate rate is the limit of nearby rates") {
    ModelParams p;
    const auto wave = three_spike();
    p.beta = 1.0;
    const double y = 1.2;
    const double at = psi(0, 1, y, wave, p);
    for (double d : {1e-6, -1e-6}) {
        ModelParams q = p;
        q.beta = 1.0 + d;
        CHECK(std::abs(psi(0, 1, y, wave, q) - at) < 1e-5);
    }
    CHECK(at == doctest::Approx(oracles::quad_psi(0, 1, y, wave, p)).epsilon(1e-10));
    p.beta = 4.5;
    CHECK(psi(2, 0, 4.0, wave, p) == doctest::Approx(oracles::quad_psi(2, 0, 4.0, wave, p)).epsilon(1e-10));
    CHECK_THROWS_AS(psi(0, 2, 0.0, wave, p), DomainError);
}

TEST_CASE("stability entries agree with quadrature") {
    const ModelParams p;
    const auto wave = three_spike();
    for (cplx z : {cplx(0.0, 0.0), cplx(0.3, 1.7), cplx(-1.5, -4.0), cplx(2.0, 9.0)}) {
        for (int i = 0; i < wave.m; ++i) {
            for (int j = 0; j < wave.m; ++j) {
                const cplx a = stability_entry_M(i, j, z, wave, p);
                const cplx b = oracles::quad_M(i, j, z, wave, p);
                CHECK(std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(b)));
            }
        }
    }
    CHECK_THROWS_AS(stability_entry_M(0, 0, cplx(-3.5, 0.0), wave, p), DomainError);
}

TEST_CASE("stability matrix stays bounded along vertical lines") {
    const ModelParams p;
    const auto wave = three_spike();
    const auto far = stability_matrix(cplx(0.1, 1e4), wave, p);
    for (int i = 0; i < wave.m; ++i)
        for (int j = 0; j < wave.m; ++j) {
            const cplx expected = j < i ? cplx(std::exp(wave.T[j] - wave.T[i])) : cplx(0.0);
            CHECK(std::abs(far[i * wave.m + j] - expected) < 1e-2);
        }
}

TEST_CASE("generic coupling route reproduces the exponential kernel") {
    ModelParams ex;
    ModelParams gen = ex;
    auto g = std::make_shared<GenericCoupling>();
    g->w = [ex](double x) { return ex.a1 * std::exp(-ex.b1 * std::abs(x)) - ex.a2 * std::exp(-ex.b2 * std::abs(x)); };
    g->p = [b = ex.beta](double s) { return b * std::exp(-b * s); };
    g->dp = [b = ex.beta](double s) { return -b * b * std::exp(-b * s); };
    g->decay = ex.b2;
    gen.generic = g;
    const auto wave = three_spike();
    for (double xi : {-0.5, 1.0, 2.5}) {
        CHECK(profile_nu(xi, wave, gen) == doctest::Approx(profile_nu(xi, wave, ex)).epsilon(1e-9));
        CHECK(profile_sigma(xi, wave, gen) == doctest::Approx(profile_sigma(xi, wave, ex)).epsilon(1e-9));
    }
    const cplx z(0.2, 1.1);
    CHECK(std::abs(stability_entry_M(1, 2, z, wave, gen) - stability_entry_M(1, 2, z, wave, ex)) < 1e-8);
}
