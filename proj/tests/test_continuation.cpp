#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "spikewave/continuation.hpp"
#include "spikewave/errors.hpp"

using namespace spikewave;

namespace {

WaveRecord tw3_at(double beta) {
    ModelParams p;
    auto w = solve_wave(3, CoarseWave::make(0.3, {0.0, 0.8, 1.6}), p).wave;
    while (std::abs(p.beta - beta) > 1e-12) {
        p.beta += std::clamp(beta - p.beta, -0.5, 0.5);
        w = solve_wave(3, w, p).wave;
    }
    return solve_wave(3, w, p);
}

ModelParams at_beta(double beta) {
    ModelParams p;
    p.beta = beta;
    return p;
}

const BranchEvent* find_event(const Branch& b, EventKind k) {
    for (const auto& e : b.events)
        if (e.kind == k) return &e;
    return nullptr;
}

GrazingPoint tw3_grazing() {
    ContinuationOptions o;
    o.direction = -1;
    o.step = 0.1;
    o.param_min = 0.5;
    o.track_stability = false;
    const auto br = continue_branch(tw3_at(4.5), at_beta(4.5), o);
    const auto* e = find_event(br, EventKind::grazing);
    REQUIRE(e);
    return {e->beta, e->wave, e->T_G, e->residual};
}

}  // namespace

TEST_CASE("three-spike branch ends at a grazing point") {
    ContinuationOptions o;
    o.direction = -1;
    o.step = 0.1;
    o.param_min = 0.5;
    const auto br = continue_branch(tw3_at(10.0), at_beta(10.0), o);
    CHECK(br.termination == "grazing");
    CHECK(br.m == 3);
    const auto* g = find_event(br, EventKind::grazing);
    REQUIRE(g);
    CHECK(g->refined);
    CHECK(g->beta == doctest::Approx(2.1731768453).epsilon(1e-9));
    CHECK(g->residual <= 1e-9);
    CHECK(g->T_G > g->wave.T.back());
    // Stable all the way down from beta = 10.
    for (const auto& q : br.points)
        if (q.stability) CHECK(q.stability->classification == Classification::stable);
    for (std::size_t k = 1; k < br.points.size(); ++k) CHECK(br.points[k].beta < br.points[k - 1].beta);
    for (const auto& q : br.points) CHECK(q.secondary_max.value <= 1.0 + 1e-9);
}

TEST_CASE("first Hopf point on the three-spike branch") {
    ContinuationOptions o;
    o.step = 0.25;
    o.param_max = 15.5;
    const auto br = continue_branch(tw3_at(10.0), at_beta(10.0), o);
    CHECK(br.termination == "param_bounds");
    const auto* h = find_event(br, EventKind::hopf);
    REQUIRE(h);
    CHECK(h->refined);
    CHECK(h->beta == doctest::Approx(14.6061729210).epsilon(1e-9));
    CHECK(h->omega == doctest::Approx(14.709131).epsilon(1e-6));

    // Independent re-solve from the neighbouring branch point.
    const auto start = tw3_at(14.5);
    const auto hp = solve_hopf(start.wave, 14.5, 14.7, at_beta(14.5));
    CHECK(hp.residual <= 1e-9);
    CHECK(std::abs(hp.beta_HB - h->beta) <= 1e-6);

    // Leading pair crosses the imaginary axis there.
    auto lead_re = [](double beta) {
        const auto rep = classify(tw3_at(beta).wave, at_beta(beta));
        REQUIRE(rep.leading);
        return rep.leading->lambda.real();
    };
    CHECK(lead_re(h->beta - 0.02) < 0.0);
    CHECK(lead_re(h->beta + 0.02) > 0.0);
}

TEST_CASE("grazing solve from a nearby wave") {
    const auto g = tw3_grazing();
    CHECK(g.beta_G == doctest::Approx(2.1731768453).epsilon(1e-9));
    const auto near = tw3_at(2.5);
    const auto s = solve_grazing(near.wave, g.T_G, 2.5, at_beta(2.5));
    CHECK(s.residual <= 1e-9);
    CHECK(std::abs(s.beta_G - g.beta_G) <= 1e-8);
    CHECK_THROWS_AS(solve_grazing(near.wave, near.wave.T.back() - 0.1, 2.5, at_beta(2.5)), TangencyOrderViolation);
    CHECK_THROWS_AS(solve_hopf(near.wave, 2.5, 0.0, at_beta(2.5)), ZeroFrequencyCollapse);
}

TEST_CASE("grazing locus in a secondary parameter") {
    const auto g = tw3_grazing();
    const auto locus = continue_grazing_locus(g, at_beta(g.beta_G), "I", -0.01, 3);
    REQUIRE(locus.size() >= 3);
    for (const auto& q : locus) CHECK(q.extra > q.wave.T.back());
    CHECK(locus.back().secondary == doctest::Approx(0.87));
    CHECK(std::abs(locus.back().primary - g.beta_G) > 1e-4);
}

TEST_CASE("grazing chain grows slower and wider waves") {
    const auto g = tw3_grazing();
    double T_G = 0.0;
    const auto seed = bootstrap_seed(g, &T_G);
    CHECK(seed.m == 4);
    CHECK(T_G > seed.T.back());

    const auto st = grazing_scaling_study(g, 12, at_beta(g.beta_G));
    CHECK(st.failure.empty());
    CHECK(st.last_m == 12);
    REQUIRE(st.rows.size() >= 10);
    for (std::size_t k = 1; k < st.rows.size(); ++k) {
        CHECK(st.rows[k].m == st.rows[k - 1].m + 1);
        CHECK(st.rows[k].c < st.rows[k - 1].c);
        CHECK(st.rows[k].T_m > st.rows[k - 1].T_m);
    }
    CHECK(st.slope_c < 0.0);
    CHECK(st.slope_T > 0.0);

    const auto gain = gain_curve(st.points.back().wave);
    CHECK(gain.size() == 11u);
    for (const auto& s : gain) CHECK(s.rate > 0.0);
}

TEST_CASE("continuation option checks") {
    ContinuationOptions o;
    o.step_min = 1.0;
    o.step_max = 0.1;
    CHECK_THROWS_AS(continue_branch(tw3_at(4.5), at_beta(4.5), o), ConfigError);
}
