#include "spikewave/stability.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "spikewave/errors.hpp"

namespace spikewave {

Eigen::MatrixXcd StabilityMatrices::M_at(cplx z) const {
    const auto flat = stability_matrix(z, wave, params);
    Eigen::MatrixXcd M(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M(i, j) = flat[static_cast<std::size_t>(i) * m + j];
    return M;
}

Eigen::MatrixXcd StabilityMatrices::operator_at(cplx z) const {
    Eigen::MatrixXcd A = -M_at(z);
    for (int i = 0; i < m; ++i) A(i, i) += D[i];
    return A;
}

double StabilityMatrices::scale() const {
    double s = 1.0;
    for (int i = 0; i < m; ++i) s *= std::max(std::abs(D[i]), 1.0);
    return s;
}

StabilityMatrices build_matrices(const CoarseWave& wave, const ModelParams& p) {
    wave.validate();
    StabilityMatrices s;
    s.m = wave.m;
    s.wave = wave;
    s.params = p;
    s.D = Eigen::VectorXd::Zero(wave.m);
    const Eigen::MatrixXcd M0 = s.M_at(cplx(0.0));
    for (int i = 0; i < wave.m; ++i) s.D[i] = M0.row(i).sum().real();
    return s;
}

Eigen::MatrixXcd StabilityMatrices::scaled_operator_at(cplx z) const {
    Eigen::MatrixXcd A(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = -stability_entry_M_scaled(i, j, z, wave, params);
    for (int i = 0; i < m; ++i) A(i, i) += D[i];
    return A;
}

cplx evaluate_E(cplx z, const StabilityMatrices& mats) {
    if (mats.m == 1) return mats.operator_at(z)(0, 0);
    return mats.scaled_operator_at(z).partialPivLu().determinant();
}

bool is_trivial_root(cplx lambda) { return std::abs(lambda) < 1e-6; }

const char* to_string(Classification c) {
    switch (c) {
        case Classification::stable: return "stable";
        case Classification::unstable: return "unstable";
        case Classification::marginal: return "marginal";
    }
    return "?";
}

namespace {

struct Window {
    double re_min, re_max, im_max;
};

// Rows are independent, so the result does not depend on the thread count.
template <class F>
void parallel_rows(int rows, int threads, F&& body) {
    const int k = std::clamp(threads, 1, std::max(rows, 1));
    if (k == 1) {
        for (int b = 0; b < rows; ++b) body(b);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int b = t; b < rows; b += k) body(b);
            } catch (...) {
                errs[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

Window resolve(const RootWindow& w, const ModelParams& p) {
    Window out{w.re_min, w.re_max, w.im_max};
    if (!(out.re_max > out.re_min)) {
        out.re_min = -p.strip_eta() + 0.05;
        out.re_max = 1.0;
    }
    if (!(out.im_max > 0.0)) out.im_max = 20.0 * p.beta;
    if (!(out.re_min > -p.strip_eta())) throw DomainError("root window leaves the strip");
    return out;
}

Eigen::VectorXcd kernel_vector(const Eigen::MatrixXcd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    Eigen::VectorXcd v = svd.matrixV().col(A.cols() - 1);
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::abs(v[k]) / v[k];  // largest component real positive
    v /= std::abs(v[k]);
    return v;
}

}  // namespace

std::optional<StabilityRoot> polish_root(const StabilityMatrices& mats, cplx z, double root_tol) {
    const double eta = mats.params.strip_eta();
    const double scale = mats.scale();
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        if (!(z.real() > -eta) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        const double h = 1e-7 * std::max(1.0, std::abs(z));
        const cplx E = evaluate_E(z, mats);
        if (!(z.real() - h > -eta)) return std::nullopt;
        const cplx dE = (evaluate_E(z + h, mats) - evaluate_E(z - h, mats)) / (2.0 * h);
        if (dE == cplx(0.0)) break;
        cplx dz = E / dE;
        // Keep steps local; a wild step means the start was far from a root.
        const double cap = 0.5 * std::max(1.0, std::abs(z));
        if (std::abs(dz) > cap) dz *= cap / std::abs(dz);
        z -= dz;
        if (std::abs(dz) < 1e-14 * std::max(1.0, std::abs(z))) {
            converged = true;
            break;
        }
    }
    if (!(z.real() > -eta)) return std::nullopt;
    if (std::abs(z.imag()) < 1e-10) z = cplx(z.real(), 0.0);
    const double res = std::abs(evaluate_E(z, mats)) / scale;
    if (!(res <= root_tol) && !converged) return std::nullopt;
    if (!(res <= root_tol)) return std::nullopt;
    StabilityRoot r;
    r.lambda = z;
    r.residual = res;
    r.phi = kernel_vector(mats.operator_at(z));
    return r;
}

std::vector<EGridSample> sample_E(const StabilityMatrices& mats, RootWindow window, RootGrid grid) {
    const Window w = resolve(window, mats.params);
    if (grid.n_re < 2 || grid.n_im < 2) throw ConfigError("sample_E: grid needs >= 2 points per axis");
    std::vector<EGridSample> out(static_cast<std::size_t>(grid.n_re) * grid.n_im);
    parallel_rows(grid.n_im, grid.threads, [&](int b) {
        for (int a = 0; a < grid.n_re; ++a) {
            const double re = w.re_min + (w.re_max - w.re_min) * a / (grid.n_re - 1);
            const double im = w.im_max * b / (grid.n_im - 1);
            out[static_cast<std::size_t>(b) * grid.n_re + a] = {re, im, evaluate_E(cplx(re, im), mats)};
        }
    });
    return out;
}

RootSearch find_roots(const StabilityMatrices& mats, RootWindow window, RootGrid grid, double root_tol) {
    if (grid.n_re < 2 || grid.n_im < 2) throw ConfigError("find_roots: grid needs >= 2 points per axis");
    const Window w = resolve(window, mats.params);
    const int nr = grid.n_re, ni = grid.n_im;
    const double dre = (w.re_max - w.re_min) / (nr - 1);
    const double dim = w.im_max / (ni - 1);
    std::vector<cplx> E(static_cast<std::size_t>(nr) * ni);
    auto at = [&](int a, int b) -> cplx& { return E[static_cast<std::size_t>(b) * nr + a]; };
    auto zat = [&](double a, double b) { return cplx(w.re_min + dre * a, dim * b); };
    parallel_rows(ni, grid.threads, [&](int b) {
        for (int a = 0; a < nr; ++a) at(a, b) = evaluate_E(zat(a, b), mats);
    });

    std::vector<cplx> candidates;
    // Cells where both Re E and Im E change sign.
    for (int b = 0; b + 1 < ni; ++b)
        for (int a = 0; a + 1 < nr; ++a) {
            const cplx c[4] = {at(a, b), at(a + 1, b), at(a, b + 1), at(a + 1, b + 1)};
            bool rp = false, rn = false, ip = false, in = false;
            for (const auto& v : c) {
                (v.real() >= 0 ? rp : rn) = true;
                (v.imag() >= 0 ? ip : in) = true;
            }
            if (rp && rn && ip && in) candidates.push_back(zat(a + 0.5, b + 0.5));
        }
    // Local minima of |E| catch near-misses of the level sets.
    for (int b = 0; b < ni; ++b)
        for (int a = 0; a < nr; ++a) {
            const double v = std::abs(at(a, b));
            bool is_min = true;
            for (int db = -1; db <= 1 && is_min; ++db)
                for (int da = -1; da <= 1; ++da) {
                    if (!da && !db) continue;
                    const int aa = a + da, bb = b + db;
                    if (aa < 0 || bb < 0 || aa >= nr || bb >= ni) continue;
                    if (std::abs(at(aa, bb)) < v) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) candidates.push_back(zat(a, b));
        }
    // Real axis: E is real there.
    for (int a = 0; a + 1 < nr; ++a)
        if ((at(a, 0).real() < 0) != (at(a + 1, 0).real() < 0)) candidates.push_back(zat(a + 0.5, 0));
    candidates.push_back(cplx(0.0));

    RootSearch out;
    auto push_unique = [&](const StabilityRoot& r) {
        for (const auto& q : out.roots)
            if (std::abs(q.lambda - r.lambda) < 1e-6) return;
        out.roots.push_back(r);
    };
    const double slack = 1e-9;
    for (const cplx& z0 : candidates) {
        auto r = polish_root(mats, z0, root_tol);
        if (!r) {
            ++out.dropped;
            continue;
        }
        cplx z = r->lambda;
        if (z.imag() < 0) {
            z = std::conj(z);
            r->lambda = z;
            r->phi = r->phi.conjugate();
        }
        if (z.real() < w.re_min - slack || z.real() > w.re_max + slack || z.imag() > w.im_max + slack) {
            ++out.dropped;
            continue;
        }
        if (is_trivial_root(z)) {
            r->lambda = cplx(0.0);
            r->phi = kernel_vector(mats.operator_at(cplx(0.0)));
        }
        push_unique(*r);
    }
    // Mirror by conjugacy.
    const std::size_t upper = out.roots.size();
    for (std::size_t k = 0; k < upper; ++k) {
        const auto& r = out.roots[k];
        if (r.lambda.imag() > 0.0) {
            StabilityRoot c = r;
            c.lambda = std::conj(r.lambda);
            c.phi = r.phi.conjugate();
            out.roots.push_back(c);
        }
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const StabilityRoot& a, const StabilityRoot& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        return a.lambda.imag() > b.lambda.imag();
    });
    return out;
}

std::vector<StabilityRoot> find_real_roots(const StabilityMatrices& mats, double x_lo, double x_hi, int count,
                                           double root_tol) {
    if (!(x_lo > 0.0) || !(x_hi > x_lo) || count < 2) throw ConfigError("find_real_roots: bad sweep range");
    const double scale = mats.scale();
    auto E = [&](double x) { return evaluate_E(cplx(x, 0.0), mats).real() / scale; };
    std::vector<StabilityRoot> out;
    const double ratio = std::log(x_hi / x_lo) / (count - 1);
    double a = x_lo, Ea = E(a);
    for (int k = 1; k < count; ++k) {
        const double b = x_lo * std::exp(ratio * k);
        const double Eb = E(b);
        if (Ea == 0.0 || (Ea < 0.0) != (Eb < 0.0)) {
            double root = a;
            if (Ea != 0.0) {
                std::uintmax_t iters = 200;
                const auto br = boost::math::tools::toms748_solve(
                    E, a, b, Ea, Eb, boost::math::tools::eps_tolerance<double>(50), iters);
                root = 0.5 * (br.first + br.second);
            }
            const cplx z(root, 0.0);
            const double res = std::abs(E(root));
            if (res <= root_tol) {
                // Undo the similarity: phi_i = phi~_i exp(z c T_i), rescaled in logs.
                const Eigen::VectorXcd pt = kernel_vector(mats.scaled_operator_at(z));
                const auto& w = mats.wave;
                Eigen::VectorXd lg(mats.m);
                for (int i = 0; i < mats.m; ++i)
                    lg[i] = std::log(std::max(std::abs(pt[i]), 1e-300)) + root * w.c * w.T[i];
                const double top = lg.maxCoeff();
                Eigen::VectorXcd phi(mats.m);
                for (int i = 0; i < mats.m; ++i)
                    phi[i] = std::abs(pt[i]) > 0.0 ? pt[i] / std::abs(pt[i]) * std::exp(lg[i] - top) : cplx(0.0);
                out.push_back({z, phi, res});
            }
        }
        a = b;
        Ea = Eb;
    }
    return out;
}

StabilityReport classify(const CoarseWave& wave, const ModelParams& p, RootWindow window, RootGrid grid,
                         double class_tol) {
    const auto mats = build_matrices(wave, p);
    auto search = find_roots(mats, window, grid);
    StabilityReport rep;
    rep.wave = wave;
    rep.beta = p.beta;
    rep.roots = std::move(search.roots);
    rep.dropped = search.dropped;
    if (window.real_sweep >= 0.0) {
        const Window w = resolve(window, p);
        const double hi = window.real_sweep > 0.0 ? window.real_sweep : 1e3 * (1.0 + 1.0 / wave.c);
        if (hi > w.re_max)
            for (auto& r : find_real_roots(mats, w.re_max, hi)) rep.roots.push_back(std::move(r));
    }
    for (const auto& r : rep.roots) {
        if (is_trivial_root(r.lambda)) continue;
        if (!rep.leading || r.lambda.real() > rep.leading->lambda.real() ||
            (r.lambda.real() == rep.leading->lambda.real() && r.lambda.imag() > rep.leading->lambda.imag()))
            rep.leading = r;
    }
    if (!rep.leading || rep.leading->lambda.real() < -class_tol) rep.classification = Classification::stable;
    else if (rep.leading->lambda.real() > class_tol) rep.classification = Classification::unstable;
    else rep.classification = Classification::marginal;
    return rep;
}

std::vector<std::vector<cplx>> linearized_apply(const Eigen::VectorXcd& Phi, cplx lambda, const CoarseWave& wave,
                                                const ModelParams& p, const std::vector<double>& xs) {
    wave.validate();
    if (!(lambda.real() > -p.strip_eta())) throw DomainError("linearized_apply: lambda outside the strip");
    if (Phi.size() != wave.m) throw DomainError("linearized_apply: Phi has the wrong length");
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const int m = wave.m;
    const double c = wave.c;
    const double rate = p.slowest_rate() + lambda.real();
    auto phi = [&](int j, double x) { return Phi[j] * std::exp(lambda * x); };

    std::vector<std::vector<cplx>> out;
    for (double x : xs) {
        std::vector<cplx> row(static_cast<std::size_t>(m), cplx(0.0));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const double Tji = wave.T[j] - wave.T[i];
                const double weight = std::exp(Tji);
                if (j < i) row[i] += weight * (phi(i, x) - phi(j, x));
                const double y0 = c * Tji;
                auto base = [&](double y) {
                    return std::exp(-y / c) * kernel_w(y, p) * psi(i, j, std::max(y, y0), wave, p);
                };
                auto part = [&](double y, bool imag) {
                    const cplx v = base(y) * (phi(i, x) - phi(j, x - y));
                    return imag ? v.imag() : v.real();
                };
                const double hi = std::max(y0, 0.0) + 40.0 / rate;
                std::vector<double> pts{y0};
                if (y0 < 0.0) pts.push_back(0.0);
                pts.push_back(hi);
                cplx acc(0.0);
                for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                    const double re = GK::integrate([&](double y) { return part(y, false); }, pts[k], pts[k + 1], 15, 1e-12);
                    const double im = GK::integrate([&](double y) { return part(y, true); }, pts[k], pts[k + 1], 15, 1e-12);
                    acc += cplx(re, im);
                }
                row[i] += weight * acc;
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace spikewave
