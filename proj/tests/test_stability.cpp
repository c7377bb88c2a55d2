#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "doctest.h"
#include "spikewave/errors.hpp"
#include "spikewave/oracles.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/wave_solver.hpp"

using namespace spikewave;

namespace {

CoarseWave tw(int m, double beta) {
    ModelParams p;
    std::vector<double> T;
    for (int j = 0; j < m; ++j) T.push_back(0.8 * j);
    auto w = solve_wave(m, CoarseWave::make(0.3, T), p).wave;
    while (std::abs(p.beta - beta) > 1e-12) {
        p.beta += std::clamp(beta - p.beta, -0.5, 0.5);
        w = solve_wave(m, w, p).wave;
    }
    return w;
}

ModelParams at_beta(double beta) {
    ModelParams p;
    p.beta = beta;
    return p;
}

}  // namespace

TEST_CASE("translation mode is in the kernel at zero") {
    for (int m = 1; m <= 4; ++m) {
        const auto p = at_beta(4.5);
        const auto mats = build_matrices(tw(m, 4.5), p);
        const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(m);
        CAPTURE(m);
        CHECK((mats.operator_at(0.0) * ones).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(evaluate_E(0.0, mats)) <= 1e-10 * mats.scale());
    }
}

TEST_CASE("single spike determinant is scalar") {
    const auto p = at_beta(4.5);
    const auto mats = build_matrices(tw(1, 4.5), p);
    for (cplx z : {cplx(0.3, 1.0), cplx(-1.0, 4.0), cplx(0.9, 0.0)})
        CHECK(std::abs(evaluate_E(z, mats) - (mats.D(0) - mats.M_at(z)(0, 0))) <= 1e-14);
}

TEST_CASE("matrix entries match quadrature and pair under conjugation") {
    const auto p = at_beta(10.0);
    const auto w = tw(3, 10.0);
    const auto mats = build_matrices(w, p);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> re(-3.0, 1.0), im(-50.0, 50.0);
    for (int k = 0; k < 20; ++k) {
        const cplx z(re(rng), im(rng));
        const auto M = mats.M_at(z);
        const auto Mc = mats.M_at(std::conj(z));
        CHECK(M.allFinite());
        CHECK((M.conjugate() - Mc).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK(std::abs(std::conj(evaluate_E(z, mats)) - evaluate_E(std::conj(z), mats)) <= 1e-12 * mats.scale());
    }
    for (cplx z : {cplx(0.0), cplx(0.5, 3.0), cplx(-2.0, 10.0)})
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(std::abs(mats.M_at(z)(i, j) - oracles::quad_M(i, j, z, w, p)) <= 1e-9);
}

TEST_CASE("evaluation outside the strip is refused") {
    const auto p = at_beta(4.5);
    const auto mats = build_matrices(tw(2, 4.5), p);
    const double eta = p.strip_eta();
    CHECK_THROWS_AS(evaluate_E(cplx(-eta - 0.1, 0.0), mats), DomainError);
    RootWindow bad;
    bad.re_min = -eta - 1.0;
    bad.re_max = 0.5;
    CHECK_THROWS_AS(find_roots(mats, bad), DomainError);
}

TEST_CASE("three-spike wave changes stability between beta 10 and 16") {
    const auto stable = classify(tw(3, 10.0), at_beta(10.0));
    CHECK(stable.classification == Classification::stable);
    REQUIRE(stable.leading);
    CHECK(stable.leading->lambda.real() < 0.0);

    const bool has_zero = std::any_of(stable.roots.begin(), stable.roots.end(),
                                      [](const StabilityRoot& r) { return is_trivial_root(r.lambda); });
    CHECK(has_zero);
    for (const auto& r : stable.roots) {
        if (!is_trivial_root(r.lambda)) continue;
        const auto& phi = r.phi;
        CHECK((phi.array() - phi(0)).abs().maxCoeff() <= 1e-8);
    }

    const auto unstable = classify(tw(3, 16.0), at_beta(16.0));
    CHECK(unstable.classification == Classification::unstable);
    REQUIRE(unstable.leading);
    CHECK(unstable.leading->lambda.real() > 0.0);
    CHECK(unstable.leading->lambda.imag() > 1.0);
}

TEST_CASE("roots survive grid refinement") {
    const auto p = at_beta(10.0);
    const auto mats = build_matrices(tw(3, 10.0), p);
    const auto coarse = find_roots(mats, {}, {101, 101});
    const auto fine = find_roots(mats, {}, {201, 201});
    REQUIRE(coarse.roots.size() == fine.roots.size());
    for (const auto& r : coarse.roots) {
        double best = 1e9;
        for (const auto& q : fine.roots) best = std::min(best, std::abs(r.lambda - q.lambda));
        CHECK(best <= 1e-6);
    }
}

TEST_CASE("reported roots are kernel pairs of the linearised operator") {
    const auto p = at_beta(16.0);
    const auto w = tw(3, 16.0);
    const auto mats = build_matrices(w, p);
    const auto search = find_roots(mats);
    REQUIRE(search.roots.size() >= 3);
    const std::vector<double> xs{-0.7, -0.1, 0.0, 0.4, 1.3};
    for (const auto& r : search.roots) {
        CAPTURE(r.lambda);
        CHECK(r.residual <= 1e-9);
        CHECK(std::abs(evaluate_E(std::conj(r.lambda), mats)) / mats.scale() <= 1e-9);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mats.operator_at(r.lambda));
        const auto& sv = svd.singularValues();
        CHECK(sv(sv.size() - 1) <= 1e-8 * sv(0));
        const auto L = linearized_apply(r.phi, r.lambda, w, p, xs);
        for (std::size_t k = 0; k < xs.size(); ++k)
            for (const cplx v : L[k]) CHECK(std::abs(v * std::exp(-r.lambda * xs[k])) <= 1e-8);
    }
    // Constant modes are annihilated; a generic vector is not.
    const auto Lc = linearized_apply(Eigen::VectorXcd::Constant(3, cplx(0.7)), 0.0, w, p, xs);
    for (const auto& row : Lc)
        for (const cplx v : row) CHECK(std::abs(v) <= 1e-12);
    Eigen::VectorXcd Phi(3);
    Phi << 1.0, cplx(-0.3, 0.2), 0.5;
    const auto Lr = linearized_apply(Phi, cplx(0.2, 2.0), w, p, xs);
    double mx = 0.0;
    for (const auto& row : Lr)
        for (const cplx v : row) mx = std::max(mx, std::abs(v));
    CHECK(mx > 1e-3);
    const Eigen::VectorXcd direct = mats.operator_at(cplx(0.2, 2.0)) * Phi;
    for (std::size_t k = 0; k < xs.size(); ++k)
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(Lr[k][i] - std::exp(cplx(0.2, 2.0) * xs[k]) * direct(i)) <= 1e-9);
}

TEST_CASE("grid sampling covers the window") {
    const auto p = at_beta(4.5);
    const auto mats = build_matrices(tw(2, 4.5), p);
    RootWindow win{-1.0, 0.5, 10.0};
    const auto g = sample_E(mats, win, {11, 21});
    REQUIRE(g.size() == 11u * 21u);
    CHECK(g.front().re == -1.0);
    CHECK(g.back().re == 0.5);
    CHECK(g.back().im == 10.0);
}

TEST_CASE("rescaled entries are a similarity of M") {
    const auto p = at_beta(4.5);
    const auto w = tw(3, 4.5);
    const auto mats = build_matrices(w, p);
    for (cplx z : {cplx(0.4, 2.0), cplx(-1.5, 7.0), cplx(3.0, 0.0)})
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const cplx expect = mats.M_at(z)(i, j) * std::exp(z * w.c * (w.T[j] - w.T[i]));
                CHECK(std::abs(stability_entry_M_scaled(i, j, z, w, p) - expect) <= 1e-12 * (1.0 + std::abs(expect)));
            }
    // Far along the real axis M vanishes and E tends to det D.
    const double detD = mats.D.prod();
    double prev = 0.0;
    for (double x : {1e2, 1e3, 1e4, 1e5}) {
        const cplx e = evaluate_E(x, mats);
        CHECK(std::isfinite(e.real()));
        CHECK(std::abs(e.imag()) <= 1e-12);
        CHECK(std::abs(e.real() - detD) < std::abs(prev - detD) + 1e-12);
        prev = e.real();
    }
    CHECK(std::abs(prev - detD) <= 1e-3 * std::abs(detD));
}

TEST_CASE("slow single-spike wave is unstable through a real root") {
    const ModelParams p;
    const auto roots = compatibility_roots(p);
    REQUIRE(roots.size() == 2);
    const auto slow = solve_wave(1, CoarseWave::make(roots.front(), {0.0}), p).wave;
    const auto rep = classify(slow, p);
    CHECK(rep.classification == Classification::unstable);
    REQUIRE(rep.leading);
    CHECK(rep.leading->lambda.imag() == 0.0);
    CHECK(rep.leading->lambda.real() > 1.0);
    // Invisible to the rectangular window alone.
    RootWindow no_sweep;
    no_sweep.real_sweep = -1.0;
    CHECK(classify(slow, p, no_sweep).classification == Classification::stable);
    // The fast wave has no such root.
    const auto fast = solve_wave(1, CoarseWave::make(roots.back(), {0.0}), p).wave;
    CHECK(classify(fast, p).classification == Classification::stable);
}
