#include "spikewave/continuation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "newton.hpp"
#include "spikewave/errors.hpp"

namespace spikewave {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::grazing: return "grazing";
        case EventKind::hopf: return "hopf";
        case EventKind::fold: return "fold";
    }
    return "?";
}

namespace {

// Branch unknowns X = (c, T_2..T_m, gamma).
CoarseWave wave_of(const VectorXd& X, int m) {
    std::vector<double> T(static_cast<std::size_t>(m), 0.0);
    for (int k = 1; k < m; ++k) T[k] = X[k];
    return CoarseWave::make(X[0], std::move(T));
}

VectorXd pack(const CoarseWave& w, double gamma) {
    VectorXd X(w.m + 1);
    X[0] = w.c;
    for (int k = 1; k < w.m; ++k) X[k] = w.T[k];
    X[w.m] = gamma;
    return X;
}

ModelParams with(const ModelParams& p, const std::string& name, double v) {
    ModelParams q = p;
    set_param(q, name, v);
    return q;
}

bool wave_ok(const CoarseWave& w) {
    if (!(w.c > 0.0) || !std::isfinite(w.c)) return false;
    for (int j = 1; j < w.m; ++j)
        if (!(w.T[j] > w.T[j - 1]) || !std::isfinite(w.T[j])) return false;
    return true;
}

bool param_ok(const std::string& name, double v) {
    if (!std::isfinite(v)) return false;
    if (name == "beta" || name == "b1" || name == "b2") return v > 0.0;
    return true;
}

struct BranchSystem {
    int m;
    std::string name;
    const ModelParams& p;

    VectorXd F(const VectorXd& X) const {
        const auto r = threshold_residual(wave_of(X, m), with(p, name, X[m]));
        return Eigen::Map<const VectorXd>(r.data(), m);
    }
    bool ok(const VectorXd& X) const { return wave_ok(wave_of(X, m)) && param_ok(name, X[m]); }

    VectorXd tangent(const VectorXd& X, const VectorXd* prev, int direction) const {
        const MatrixXd J = detail::fd_jacobian([this](const VectorXd& x) { return F(x); }, X);
        Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeFullV);
        VectorXd t = svd.matrixV().col(m);
        if (prev) {
            if (t.dot(*prev) < 0.0) t = -t;
        } else if (t[m] * direction < 0.0) {
            t = -t;
        }
        return t.normalized();
    }

    // Newton on F(X) = 0, t . (X - X0) = s.
    std::optional<std::pair<VectorXd, int>> correct(const VectorXd& X0, const VectorXd& t, double s,
                                                    double tol) const {
        auto G = [&](const VectorXd& X) {
            VectorXd g(m + 1);
            g.head(m) = F(X);
            g[m] = t.dot(X - X0) - s;
            return g;
        };
        auto res = detail::damped_newton(G, X0 + s * t, [this](const VectorXd& x) { return ok(x); }, tol, 8);
        if (!res.converged) return std::nullopt;
        return std::pair{res.x, res.iterations};
    }
};

// Oscillatory roots in the right half plane, one per conjugate pair.
std::vector<cplx> oscillatory_unstable(const StabilityReport& r) {
    std::vector<cplx> out;
    for (const auto& q : r.roots)
        if (q.lambda.real() >= 0.0 && q.lambda.imag() > 1e-3 && !is_trivial_root(q.lambda)) out.push_back(q.lambda);
    return out;
}

// Largest spike gap in units of the slowest kernel length. Past ~25 the
// groups interact below roundoff and the gap becomes a free direction.
double max_gap_rate(const CoarseWave& w, const ModelParams& q) {
    double g = 0.0;
    for (int i = 1; i < w.m; ++i) g = std::max(g, w.T[i] - w.T[i - 1]);
    return w.c * g * q.slowest_rate();
}

}  // namespace

Branch continue_branch(const WaveRecord& start, const ModelParams& p, const ContinuationOptions& opts) {
    const int m = start.wave.m;
    start.wave.validate();
    if (!(opts.step > 0.0) || !(opts.step_min > 0.0) || !(opts.step_max >= opts.step_min))
        throw ConfigError("continuation: invalid step bounds");
    const BranchSystem sys{m, opts.param, p};
    const int every = opts.stability_every > 0 ? opts.stability_every : (m <= 10 ? 1 : 5);

    Branch br;
    br.m = m;
    br.param = opts.param;

    auto make_point = [&](const VectorXd& X, const VectorXd& t, bool with_stability) {
        BranchPoint bp;
        bp.beta = X[m];
        bp.wave = wave_of(X, m);
        const ModelParams q = with(p, opts.param, X[m]);
        bp.secondary_max = secondary_maximum(bp.wave, q);
        SolveOptions so;
        bp.validated = validate_subthreshold(bp.wave, q, so) && bp.secondary_max.value < 1.0;
        bp.tangent.assign(t.data(), t.data() + t.size());
        if (with_stability) bp.stability = classify(bp.wave, q, opts.window, opts.grid);
        return bp;
    };

    VectorXd X = pack(start.wave, get_param(p, opts.param));
    {
        // Square system in (c, T_2..T_m) at fixed parameter.
        const double gamma = X[m];
        auto full = [&](const VectorXd& x) {
            VectorXd y(m + 1);
            y << x, gamma;
            return y;
        };
        auto r0 = detail::damped_newton([&](const VectorXd& x) { return sys.F(full(x)); }, X.head(m),
                                        [&](const VectorXd& x) { return sys.ok(full(x)); }, opts.tol, 50);
        if (!r0.converged) throw NoConvergence("continue_branch: start point does not converge");
        X.head(m) = r0.x;
    }
    VectorXd t = sys.tangent(X, nullptr, opts.direction);
    br.points.push_back(make_point(X, t, opts.track_stability));
    int last_stab = opts.track_stability ? 0 : -1;

    double ds = opts.step;
    while (static_cast<int>(br.points.size()) < opts.max_points) {
        auto corr = sys.correct(X, t, ds, opts.tol);
        if (!corr) {
            ds *= 0.5;
            if (ds < opts.step_min) {
                br.termination = "corrector_failure";
                break;
            }
            continue;
        }
        const VectorXd Xn = corr->first;
        const VectorXd tn = sys.tangent(Xn, &t, opts.direction);
        const int idx = static_cast<int>(br.points.size());
        const bool stab_here = opts.track_stability && (idx % every == 0);
        BranchPoint bp = make_point(Xn, tn, stab_here);
        const BranchPoint& prev = br.points.back();

        // Fold: parameter component of the tangent changes sign.
        if (t[m] * tn[m] < 0.0) {
            double lo = 0.0, hi = ds;
            VectorXd Xf = Xn;
            for (int it = 0; it < 40 && hi - lo > 1e-12 * ds; ++it) {
                const double mid = 0.5 * (lo + hi);
                auto cm = sys.correct(X, t, mid, opts.tol);
                if (!cm) break;
                const VectorXd tm = sys.tangent(cm->first, &t, opts.direction);
                Xf = cm->first;
                if (tm[m] * t[m] > 0.0) lo = mid;
                else hi = mid;
            }
            BranchEvent ev{EventKind::fold, Xf[m], wave_of(Xf, m), 0.0, 0.0,
                           sys.F(Xf).lpNorm<Eigen::Infinity>(), true};
            br.events.push_back(ev);
        }

        // Grazing: secondary maximum reaches threshold.
        const double g_prev = 1.0 - prev.secondary_max.value;
        const double g_new = 1.0 - bp.secondary_max.value;
        if (g_prev > 0.0 && g_new <= 0.0) {
            double lo = 0.0, hi = ds;
            VectorXd Xg = X;
            for (int it = 0; it < 60 && hi - lo > 1e-13 * ds; ++it) {
                const double mid = 0.5 * (lo + hi);
                auto cm = sys.correct(X, t, mid, opts.tol);
                if (!cm) break;
                const auto w = wave_of(cm->first, m);
                const double g = 1.0 - secondary_maximum(w, with(p, opts.param, cm->first[m])).value;
                if (g > 0.0) {
                    lo = mid;
                    Xg = cm->first;
                } else {
                    hi = mid;
                }
            }
            const auto wg = wave_of(Xg, m);
            const auto sm = secondary_maximum(wg, with(p, opts.param, Xg[m]));
            BranchEvent ev{EventKind::grazing, Xg[m], wg, sm.xi_max / wg.c, 0.0, 0.0, false};
            try {
                const auto gp = solve_grazing(wg, sm.xi_max / wg.c, Xg[m], p, opts.param, opts.tol);
                ev.beta = gp.beta_G;
                ev.wave = gp.wave;
                ev.T_G = gp.T_G;
                ev.residual = gp.residual;
                ev.refined = true;
            } catch (const NumericalError&) {
            }
            br.events.push_back(ev);
            br.termination = "grazing";
            break;
        }

        // Hopf: the number of oscillatory right-half-plane pairs changes.
        // The crossing pair is the one nearest the imaginary axis on the
        // side holding more of them.
        if (stab_here && last_stab >= 0 && br.points[last_stab].stability) {
            const auto ua = oscillatory_unstable(*br.points[last_stab].stability);
            const auto ub = oscillatory_unstable(*bp.stability);
            if (ua.size() != ub.size()) {
                const bool rising = ub.size() > ua.size();
                const auto& side = rising ? ub : ua;
                const cplx lam_pos = *std::min_element(side.begin(), side.end(), [](cplx x, cplx y) {
                    return x.real() < y.real();
                });
                // A pair can also leave the count by merging onto the real
                // axis; only a pair found left of the axis at the other end
                // has crossed it.
                const auto& other = rising ? br.points[last_stab] : bp;
                const auto back = polish_root(build_matrices(other.wave, with(p, opts.param, other.beta)), lam_pos);
                const bool crossed = back && back->lambda.real() < 0.0 && std::abs(back->lambda.imag()) > 1e-3;
                const double lo_b = std::min(br.points[last_stab].beta, bp.beta);
                const double hi_b = std::max(br.points[last_stab].beta, bp.beta);
                BranchEvent ev{EventKind::hopf, bp.beta, bp.wave, 0.0, std::abs(lam_pos.imag()), 0.0, false};
                if (!crossed) {
                } else if (last_stab == idx - 1) {
                    double lo = 0.0, hi = ds;
                    cplx lam = lam_pos;
                    VectorXd Xh = rising ? X : Xn;
                    for (int it = 0; it < 40 && hi - lo > 1e-12 * ds; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        auto cm = sys.correct(X, t, mid, opts.tol);
                        if (!cm) break;
                        const auto mats = build_matrices(wave_of(cm->first, m), with(p, opts.param, cm->first[m]));
                        const auto root = polish_root(mats, cplx(lam.real(), std::abs(lam.imag())));
                        if (!root) break;
                        lam = root->lambda;
                        Xh = cm->first;
                        if ((lam.real() >= 0.0) == rising) hi = mid;
                        else lo = mid;
                    }
                    ev.beta = Xh[m];
                    ev.wave = wave_of(Xh, m);
                    ev.omega = std::abs(lam.imag());
                    try {
                        const auto hp = solve_hopf(ev.wave, ev.beta, ev.omega, p, opts.param, opts.tol);
                        const double slack = 1e-6 * (1.0 + std::abs(ev.beta));
                        if (hp.beta_HB < lo_b - slack || hp.beta_HB > hi_b + slack)
                            throw NoConvergence("solve_hopf left the bracketing step");
                        ev.beta = hp.beta_HB;
                        ev.wave = hp.wave;
                        ev.omega = hp.omega_HB;
                        ev.residual = hp.residual;
                        ev.refined = true;
                    } catch (const NumericalError&) {
                    }
                    br.events.push_back(ev);
                } else {
                    br.events.push_back(ev);
                }
            }
        }

        br.points.push_back(std::move(bp));
        if (stab_here) last_stab = idx;
        X = Xn;
        t = tn;
        if (X[m] < opts.param_min || X[m] > opts.param_max) {
            br.termination = "param_bounds";
            break;
        }
        if (max_gap_rate(br.points.back().wave, with(p, opts.param, X[m])) > opts.decouple_rate) {
            br.termination = "decoupled";
            break;
        }
        if (corr->second <= 3) ds = std::min(ds * 1.3, opts.step_max);
    }
    if (br.termination.empty()) br.termination = "max_points";
    return br;
}

GrazingPoint solve_grazing(const CoarseWave& wave, double T_G, double beta, const ModelParams& p,
                           const std::string& param, double tol) {
    wave.validate();
    const int m = wave.m;
    if (!(T_G > wave.T.back())) throw TangencyOrderViolation("solve_grazing: T_G must exceed T_m");
    // Y = (c, T_2..T_m, T_G, gamma)
    VectorXd Y(m + 2);
    Y.head(m + 1) = pack(wave, T_G).head(m + 1);
    Y[m] = T_G;
    Y[m + 1] = beta;
    auto unpack = [m](const VectorXd& y) { return wave_of(y, m); };
    auto F = [&](const VectorXd& y) {
        const auto w = unpack(y);
        const ModelParams q = with(p, param, y[m + 1]);
        const auto r = threshold_residual(w, q);
        VectorXd out(m + 2);
        for (int i = 0; i < m; ++i) out[i] = r[i];
        out[m] = profile_nu(w.c * y[m], w, q) - 1.0;
        out[m + 1] = profile_dnu(w.c * y[m], w, q);
        return out;
    };
    auto ok = [&](const VectorXd& y) {
        const auto w = unpack(y);
        return wave_ok(w) && y[m] > w.T.back() && param_ok(param, y[m + 1]);
    };
    const auto res = detail::damped_newton(F, Y, ok, tol, 50);
    if (!res.converged) throw NoConvergence("solve_grazing: Newton did not converge");
    GrazingPoint g;
    g.wave = unpack(res.x);
    g.T_G = res.x[m];
    g.beta_G = res.x[m + 1];
    g.residual = res.residual;
    if (!(g.T_G > g.wave.T.back())) throw TangencyOrderViolation("solve_grazing: tangency collapsed onto T_m");
    return g;
}

HopfPoint solve_hopf(const CoarseWave& wave, double beta, double omega, const ModelParams& p,
                     const std::string& param, double tol) {
    wave.validate();
    if (!(omega > 0.0)) throw ZeroFrequencyCollapse("solve_hopf: omega must be positive");
    const int m = wave.m;
    // Y = (c, T_2..T_m, gamma, omega)
    VectorXd Y(m + 2);
    Y.head(m + 1) = pack(wave, beta);
    Y[m + 1] = omega;
    auto F = [&](const VectorXd& y) {
        const auto w = wave_of(y, m);
        const ModelParams q = with(p, param, y[m]);
        const auto r = threshold_residual(w, q);
        const auto mats = build_matrices(w, q);
        const cplx E = evaluate_E(cplx(0.0, y[m + 1]), mats) / mats.scale();
        VectorXd out(m + 2);
        for (int i = 0; i < m; ++i) out[i] = r[i];
        out[m] = E.real();
        out[m + 1] = E.imag();
        return out;
    };
    auto ok = [&](const VectorXd& y) { return wave_ok(wave_of(y, m)) && param_ok(param, y[m]) && y[m + 1] > 0.0; };
    const auto res = detail::damped_newton(F, Y, ok, tol, 50);
    if (res.x[m + 1] < 1e-6) throw ZeroFrequencyCollapse("solve_hopf: frequency collapsed to zero");
    if (!res.converged) throw NoConvergence("solve_hopf: Newton did not converge");
    HopfPoint h;
    h.wave = wave_of(res.x, m);
    h.beta_HB = res.x[m];
    h.omega_HB = res.x[m + 1];
    h.residual = res.residual;
    return h;
}

std::vector<LocusPoint> continue_grazing_locus(const GrazingPoint& start, const ModelParams& p,
                                               const std::string& secondary, double step, int steps,
                                               const std::string& primary) {
    std::vector<LocusPoint> out;
    ModelParams q = with(p, primary, start.beta_G);
    GrazingPoint g = start;
    out.push_back({get_param(q, secondary), g.beta_G, g.wave, g.T_G});
    for (int k = 0; k < steps; ++k) {
        set_param(q, secondary, get_param(q, secondary) + step);
        g = solve_grazing(g.wave, g.T_G, g.beta_G, q, primary);
        out.push_back({get_param(q, secondary), g.beta_G, g.wave, g.T_G});
    }
    return out;
}

std::vector<LocusPoint> continue_hopf_locus(const HopfPoint& start, const ModelParams& p,
                                            const std::string& secondary, double step, int steps,
                                            const std::string& primary) {
    std::vector<LocusPoint> out;
    ModelParams q = with(p, primary, start.beta_HB);
    HopfPoint h = start;
    out.push_back({get_param(q, secondary), h.beta_HB, h.wave, h.omega_HB});
    for (int k = 0; k < steps; ++k) {
        set_param(q, secondary, get_param(q, secondary) + step);
        h = solve_hopf(h.wave, h.beta_HB, h.omega_HB, q, primary);
        out.push_back({get_param(q, secondary), h.beta_HB, h.wave, h.omega_HB});
    }
    return out;
}

CoarseWave bootstrap_seed(const GrazingPoint& g, double* T_G_out) {
    std::vector<double> T = g.wave.T;
    T.push_back(0.5 * (g.wave.T.back() + g.T_G));
    if (T_G_out) *T_G_out = g.T_G;
    return CoarseWave::make(g.wave.c, std::move(T));
}

ScalingStudy grazing_scaling_study(const GrazingPoint& start, int m_max, const ModelParams& p) {
    ScalingStudy st;
    GrazingPoint g = start;
    auto push = [&](const GrazingPoint& gp) {
        st.rows.push_back({gp.wave.m, gp.beta_G, gp.wave.c, gp.wave.T.back(), gp.wave.width()});
        st.points.push_back(gp);
        st.last_m = gp.wave.m;
    };
    push(g);
    while (g.wave.m < m_max) {
        double TG = 0.0;
        const CoarseWave seed = bootstrap_seed(g, &TG);
        try {
            g = solve_grazing(seed, TG, g.beta_G, p);
        } catch (const NumericalError& e) {
            st.failure = std::string("m=") + std::to_string(seed.m) + ": " + e.what();
            break;
        }
        push(g);
    }
    // log-log slopes of c and T_m against m
    auto slope = [&](auto get) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(st.rows.size());
        for (const auto& r : st.rows) {
            if (r.m < 2) continue;
            const double lx = std::log(static_cast<double>(r.m)), ly = std::log(get(r));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double den = n * sxx - sx * sx;
        return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    };
    // Only rows with m >= 2 enter; recount n accordingly.
    std::vector<ScalingRow> kept;
    for (const auto& r : st.rows)
        if (r.m >= 2) kept.push_back(r);
    std::swap(kept, st.rows);
    if (st.rows.size() >= 2) {
        st.slope_c = slope([](const ScalingRow& r) { return r.c; });
        st.slope_T = slope([](const ScalingRow& r) { return r.T_m; });
    }
    std::swap(kept, st.rows);
    return st;
}

std::vector<GainSample> gain_curve(const CoarseWave& wave) {
    std::vector<GainSample> out;
    for (int i = 0; i + 1 < wave.m; ++i) out.push_back({wave.c * wave.T[i], 1.0 / (wave.T[i + 1] - wave.T[i])});
    return out;
}

}  // namespace spikewave
