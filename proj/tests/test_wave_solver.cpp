#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "spikewave/difm.hpp"
#include "spikewave/errors.hpp"
#include "spikewave/oracles.hpp"
#include "spikewave/wave_solver.hpp"

using namespace spikewave;

namespace {

CoarseWave spaced(int m, double c = 0.3, double dT = 0.8) {
    std::vector<double> T;
    for (int j = 0; j < m; ++j) T.push_back(dT * j);
    return CoarseWave::make(c, T);
}

// Reference waves at beta = 4.5, Table 1 defaults.
struct Ref {
    int m;
    double c;
    std::vector<double> T;
};
const std::vector<Ref> kRefs = {
    {1, 0.479596637969, {0.0}},
    {2, 0.301530387215, {0.0, 0.7716844353}},
    {3, 0.225508042293, {0.0, 0.8217399917, 1.5531999485}},
    {4, 0.181469566787, {0.0, 0.8838753339, 1.6070084884, 2.3552360785}},
};

WaveRecord walk_beta(int m, CoarseWave w, ModelParams& p, double target) {
    WaveRecord rec;
    while (std::abs(p.beta - target) > 1e-12) {
        p.beta += std::clamp(target - p.beta, -0.25, 0.25);
        rec = solve_wave(m, w, p);
        w = rec.wave;
    }
    return rec;
}

}  // namespace

TEST_CASE("travelling waves at the default parameters") {
    const ModelParams p;
    for (const auto& ref : kRefs) {
        const auto rec = solve_wave(ref.m, spaced(ref.m), p);
        CAPTURE(ref.m);
        CHECK(rec.validated);
        CHECK(rec.wave.T.front() == 0.0);
        CHECK(rec.wave.c == doctest::Approx(ref.c).epsilon(1e-9));
        for (int j = 0; j < ref.m; ++j) CHECK(rec.wave.T[j] == doctest::Approx(ref.T[j]).epsilon(1e-8));
        for (double r : threshold_residual(rec.wave, p)) CHECK(std::abs(r) <= 1e-11);
        CHECK(rec.secondary_max.value < 1.0);
        CHECK(rec.secondary_max.xi_max > rec.wave.width());
    }
}

TEST_CASE("five-spike wave from a simulated guess") {
    ModelParams p;
    p.domain.n = 80;
    p.domain.L = 1.0;
    p.stimulus.d1 = 0.4;
    p.stimulus.d2 = 12.0;
    const auto tr = simulate(uniform_random_state(p, 2), p, {.horizon = 100.0});
    const auto guess = seed_from_simulation(tr, 5);
    const auto rec = solve_wave(5, guess, ModelParams{});
    CHECK(rec.validated);
    CHECK(rec.wave.c == doctest::Approx(0.152197692710).epsilon(1e-9));
    // Localised profile with exactly five threshold crossings.
    int crossings = 0;
    const auto prof = sample_profile(rec.wave, p, -0.5, 1.0, 3001);
    for (std::size_t k = 1; k < prof.size(); ++k)
        if (prof[k - 1].nu - prof[k].nu > 0.5) ++crossings;
    CHECK(crossings == 5);
    CHECK(std::abs(prof.front().nu - p.I) < 0.2);
}

TEST_CASE("single-spike speed agrees with the scalar condition") {
    for (double beta : {2.0, 7.0, 12.0}) {
        ModelParams p;
        p.beta = beta;
        const auto roots = compatibility_roots(p);
        REQUIRE(roots.size() == 2);
        const double fast = roots.back();
        const double bis = oracles::bisect_compatibility(0.9 * fast, 1.1 * fast, p);
        const auto rec = solve_wave(1, CoarseWave::make(1.05 * fast, {0.0}), p);
        CHECK(std::abs(rec.wave.c - bis) <= 1e-8);
        for (double c : {0.05, 0.3, 1.0, 4.0})
            CHECK(std::abs(compatibility_m1(c, p) - oracles::quad_compatibility(c, p)) <= 1e-8);
    }
    ModelParams p;
    const auto roots = compatibility_roots(p);
    CHECK(roots.front() == doctest::Approx(0.033619357495).epsilon(1e-9));
    CHECK(roots.back() == doctest::Approx(0.479596637969).epsilon(1e-9));
    // Sign change brackets each root.
    for (double r : roots) CHECK(compatibility_m1(0.99 * r, p) * compatibility_m1(1.01 * r, p) < 0.0);
}

TEST_CASE("solution does not depend on the validation grid") {
    const ModelParams p;
    SolveOptions a, b;
    b.validation_grid = {-20.0, 30.0, 9001};
    const auto ra = solve_wave(3, spaced(3), p, a);
    const auto rb = solve_wave(3, spaced(3), p, b);
    CHECK(ra.wave.c == rb.wave.c);
    CHECK(ra.wave.T == rb.wave.T);
    CHECK(ra.validated == rb.validated);
}

TEST_CASE("speeds are nested in the spike count") {
    const ModelParams p;
    double prev = 1e9;
    CoarseWave w = spaced(1);
    for (int m = 1; m <= 6; ++m) {
        if (m > 1) {
            auto T = w.T;
            T.push_back(T.back() + 0.75);
            w = CoarseWave::make(0.85 * w.c, T);
        }
        const auto rec = solve_wave(m, w, p);
        CHECK(rec.validated);
        CHECK(rec.wave.c < prev);
        prev = rec.wave.c;
        w = rec.wave;
    }
}

TEST_CASE("roots past the grazing point are kept but flagged") {
    ModelParams p;
    auto rec = walk_beta(3, spaced(3), p, 2.25);
    CHECK(rec.validated);
    rec = walk_beta(3, rec.wave, p, 2.15);
    CHECK_FALSE(rec.validated);
    CHECK(rec.secondary_max.value > 1.0);
    CHECK(rec.residual <= 1e-11);
}

TEST_CASE("solver failures") {
    const ModelParams p;
    SolveOptions o;
    o.max_iter = 1;
    CHECK_THROWS_AS(solve_wave(3, spaced(3, 2.0, 0.05), p, o), NoConvergence);
    CHECK_THROWS_AS(solve_wave(2, spaced(3), p), OrderViolation);
    o = {};
    o.newton_tol = 0.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = {};
    o.validation_grid.count = 1;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    CHECK_THROWS_AS(CoarseWave::make(0.3, {0.0, 0.0}).validate(), OrderViolation);
    CHECK_THROWS_AS(CoarseWave::make(-0.3, {0.0}).validate(), OrderViolation);
    CHECK_THROWS_AS(CoarseWave::make(0.3, {0.1, 0.5}).validate(), OrderViolation);
}

TEST_CASE("line fit recovers exact firing lines") {
    std::vector<double> x;
    std::vector<std::vector<double>> tau;
    for (int k = 0; k < 30; ++k) {
        const double xk = -1.0 + 0.07 * k;
        x.push_back(xk);
        tau.push_back({xk / 3.0 + 2.0, xk / 3.0 + 2.1});
    }
    const auto w = seed_from_events(x, tau);
    CHECK(w.c == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(w.T[0] == 0.0);
    CHECK(w.T[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("simulation seed of a clean two-spike wave") {
    ModelParams p;
    p.domain.n = 1000;
    p.stimulus.d1 = 0.0;
    const auto ref = kRefs[1];
    const auto tr = simulate(state_from_wave(CoarseWave::make(ref.c, ref.T), p), p, {.horizon = 60.0});
    const auto g = seed_from_simulation(tr, 2);
    CHECK(std::abs(g.c - ref.c) <= 2.0 / p.domain.n);
    CHECK(std::abs(g.T[1] - ref.T[1]) <= 2.0 / p.domain.n);
    NetworkTrajectory empty;
    empty.n = 10;
    empty.L = 4.0;
    CHECK_THROWS_AS(seed_from_simulation(empty, 2), InsufficientEvents);
}

TEST_CASE("composite seeds") {
    const auto a = CoarseWave::make(0.3, {0.0, 0.7, 1.4});
    CHECK(seed_composite({a}, {}).T == a.T);
    const auto w = seed_composite({a, CoarseWave::make(0.5, {0.0, 0.8}), CoarseWave::make(0.9, {0.0})}, {3.0, 3.0});
    CHECK(w.m == 6);
    CHECK(w.c == 0.3);
    const std::vector<double> expect{0.0, 0.7, 1.4, 4.4, 5.2, 8.2};
    for (int j = 0; j < 6; ++j) CHECK(w.T[j] == doctest::Approx(expect[j]));
    CHECK_THROWS_AS(seed_composite({a, a}, {-1.0}), OrderViolation);
}

TEST_CASE("composite wave trails its leading group") {
    ModelParams p;
    const auto w3 = walk_beta(3, spaced(3), p, 10.0).wave;
    p.beta = 4.5;
    const auto w2 = walk_beta(2, spaced(2), p, 10.0).wave;
    p.beta = 4.5;
    const auto w1 = walk_beta(1, spaced(1), p, 10.0).wave;
    const auto rec = solve_wave(6, seed_composite({w3, w2, w1}, {3.0, 3.0}), p);
    CHECK(rec.validated);
    CHECK(rec.wave.c < w3.c);
    CHECK(rec.wave.c > 0.95 * w3.c);
    // Three groups: intra-group gaps well below the inter-group ones.
    const auto& T = rec.wave.T;
    CHECK(T[3] - T[2] > 3.0 * (T[2] - T[1]));
    CHECK(T[5] - T[4] > 3.0 * (T[4] - T[3]));
}
