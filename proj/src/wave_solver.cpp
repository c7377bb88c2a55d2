#include "spikewave/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "spikewave/errors.hpp"

namespace spikewave {

void SolveOptions::validate() const {
    if (!(newton_tol > 0.0)) throw ConfigError("solve options: newton_tol must be positive");
    if (validation_grid.count < 2) throw ConfigError("solve options: validation grid needs >= 2 points");
    if (!(threshold_margin >= 0.0)) throw ConfigError("solve options: threshold_margin must be >= 0");
    if (!(finite_diff_step > 0.0)) throw ConfigError("solve options: finite_diff_step must be positive");
    if (max_iter < 1) throw ConfigError("solve options: max_iter must be >= 1");
}

std::vector<double> threshold_residual(const CoarseWave& wave, const ModelParams& p) {
    std::vector<double> r(static_cast<std::size_t>(wave.m));
    for (int i = 0; i < wave.m; ++i) r[i] = profile_nu(wave.c * wave.T[i], wave, p) - 1.0;
    return r;
}

namespace {

double inf_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

bool admissible(const CoarseWave& w) {
    if (!(w.c > 0.0) || !std::isfinite(w.c)) return false;
    for (int j = 1; j < w.m; ++j)
        if (!(w.T[j] > w.T[j - 1]) || !std::isfinite(w.T[j])) return false;
    return true;
}

// Unknown vector (c, T_2..T_m).
CoarseWave from_unknowns(const Eigen::VectorXd& u) {
    std::vector<double> T(static_cast<std::size_t>(u.size()));
    T[0] = 0.0;
    for (Eigen::Index k = 1; k < u.size(); ++k) T[k] = u[k];
    return CoarseWave::make(u[0], std::move(T));
}

Eigen::VectorXd to_unknowns(const CoarseWave& w) {
    Eigen::VectorXd u(w.m);
    u[0] = w.c;
    for (int k = 1; k < w.m; ++k) u[k] = w.T[k];
    return u;
}

Eigen::VectorXd as_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double default_xi_min(const CoarseWave& w) { return -0.5 * w.width() - 5.0; }
double default_xi_max(const CoarseWave& w) { return 2.0 * w.width() + 5.0; }

// Golden-section maximisation of nu on [a, b].
std::pair<double, double> refine_max(const CoarseWave& w, const ModelParams& p, double a, double b) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = profile_nu(x1, w, p), f2 = profile_nu(x2, w, p);
    for (int it = 0; it < 80 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = profile_nu(x2, w, p);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = profile_nu(x1, w, p);
        }
    }
    return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

WaveRecord solve_wave(int m, const CoarseWave& guess, const ModelParams& p, const SolveOptions& opts) {
    opts.validate();
    if (guess.m != m) throw OrderViolation("solve_wave: guess has the wrong spike count");
    guess.validate();

    Eigen::VectorXd u = to_unknowns(guess);
    CoarseWave w = guess;
    std::vector<double> r = threshold_residual(w, p);
    double rn = inf_norm(r);

    int iter = 0;
    while (rn > opts.newton_tol) {
        if (++iter > opts.max_iter) throw NoConvergence("solve_wave: iteration cap reached");
        Eigen::MatrixXd J(m, m);
        for (int k = 0; k < m; ++k) {
            const double h = opts.finite_diff_step * std::max(1.0, std::abs(u[k]));
            Eigen::VectorXd up = u, um = u;
            up[k] += h;
            um[k] -= h;
            const auto rp = threshold_residual(from_unknowns(up), p);
            const auto rm = threshold_residual(from_unknowns(um), p);
            J.col(k) = (as_vec(rp) - as_vec(rm)) / (2.0 * h);
        }
        const Eigen::VectorXd du = J.fullPivLu().solve(-as_vec(r));
        if (!du.allFinite()) throw NoConvergence("solve_wave: singular Jacobian");

        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving, t *= 0.5) {
            const Eigen::VectorXd trial = u + t * du;
            const CoarseWave tw = from_unknowns(trial);
            if (!admissible(tw)) continue;
            const auto tr = threshold_residual(tw, p);
            const double tn = inf_norm(tr);
            // Accept any admissible full step; shorter steps must reduce the residual.
            if (halving == 0 || tn < rn) {
                u = trial;
                w = tw;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!admissible(from_unknowns(u + std::ldexp(1.0, -20) * du)))
                throw OrderViolation("solve_wave: iterate left the admissible cone");
            throw NoConvergence("solve_wave: damped step failed to reduce the residual");
        }
        if (!std::isfinite(rn)) throw NoConvergence("solve_wave: non-finite residual");
    }

    WaveRecord rec;
    rec.wave = w;
    rec.beta = p.beta;
    rec.residual = rn;
    rec.secondary_max = secondary_maximum(w, p);
    rec.validated = validate_subthreshold(w, p, opts) && rec.secondary_max.value < 1.0 - opts.threshold_margin;
    return rec;
}

bool validate_subthreshold(const CoarseWave& w, const ModelParams& p, const SolveOptions& opts) {
    double lo = opts.validation_grid.xi_min, hi = opts.validation_grid.xi_max;
    if (!(hi > lo)) {
        lo = default_xi_min(w);
        hi = default_xi_max(w);
    }
    const int N = opts.validation_grid.count;
    const double excl = 1e-6 * w.c;
    const double limit = 1.0 - opts.threshold_margin;
    std::vector<double> xs(N), vs(N);
    std::vector<bool> masked(N, false);
    for (int k = 0; k < N; ++k) {
        xs[k] = lo + (hi - lo) * k / (N - 1);
        vs[k] = profile_nu(xs[k], w, p);
        for (double Tj : w.T) {
            const double d = w.c * Tj - xs[k];
            if (d >= 0.0 && d < excl) masked[k] = true;
        }
        if (!masked[k] && !(vs[k] < limit)) return false;
    }
    // Refine interior local maxima so narrow peaks between grid points are caught.
    for (int k = 1; k + 1 < N; ++k) {
        if (masked[k - 1] || masked[k] || masked[k + 1]) continue;
        if (!(vs[k] >= vs[k - 1] && vs[k] >= vs[k + 1])) continue;
        bool spans_crossing = false;
        for (double Tj : w.T) {
            const double x = w.c * Tj;
            if (x > xs[k - 1] && x <= xs[k + 1]) spans_crossing = true;
        }
        if (spans_crossing) continue;
        if (!(refine_max(w, p, xs[k - 1], xs[k + 1]).second < limit)) return false;
    }
    return true;
}

SecondaryMax secondary_maximum(const CoarseWave& w, const ModelParams& p) {
    const double b = p.slowest_rate();
    const double lo = w.width();
    const double hi = lo + 10.0 / b;
    const int N = 2000;
    int best = 1;
    double bv = -std::numeric_limits<double>::infinity();
    std::vector<double> vs(N + 1);
    for (int k = 1; k <= N; ++k) {
        vs[k] = profile_nu(lo + (hi - lo) * k / N, w, p);
        if (vs[k] > bv) {
            bv = vs[k];
            best = k;
        }
    }
    if (best == N) return {hi, bv};
    const double a = lo + (hi - lo) * (best - 1) / N;
    const double c = lo + (hi - lo) * (best + 1) / N;
    const auto [x, v] = refine_max(w, p, a, c);
    return {x, v};
}

double compatibility_m1(double c, const ModelParams& p) {
    if (!(c > 0.0)) throw DomainError("compatibility_m1: c must be positive");
    if (p.generic) return profile_nu(0.0, CoarseWave::make(c, {0.0}), p) - 1.0;
    double g = 0.0;
    for (const auto& t : p.kernel_terms())
        g += t.amplitude * p.beta * c / ((t.rate * c + p.beta) * (t.rate * c + 1.0));
    return g - (1.0 - p.I);
}

std::vector<double> compatibility_roots(const ModelParams& p, double c_lo, double c_hi, int scan) {
    std::vector<double> roots;
    // Log-spaced scan: slow roots sit close to 0.
    const double r = std::log(c_hi / c_lo);
    double x0 = c_lo, f0 = compatibility_m1(x0, p);
    for (int k = 1; k <= scan; ++k) {
        const double x1 = c_lo * std::exp(r * k / scan);
        const double f1 = compatibility_m1(x1, p);
        if ((f0 < 0.0) != (f1 < 0.0)) {
            std::uintmax_t it = 200;
            auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); };
            const auto br = boost::math::tools::toms748_solve([&](double c) { return compatibility_m1(c, p); },
                                                              x0, x1, f0, f1, tol, it);
            roots.push_back(0.5 * (br.first + br.second));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

CoarseWave seed_from_events(const std::vector<double>& x, const std::vector<std::vector<double>>& tau) {
    const std::size_t n = x.size();
    if (n < 2 || tau.size() != n) throw InsufficientEvents("seed_from_events: need >= 2 neurons");
    const std::size_t m = tau[0].size();
    if (m == 0) throw InsufficientEvents("seed_from_events: no spikes per neuron");
    for (const auto& t : tau)
        if (t.size() != m) throw InsufficientEvents("seed_from_events: ragged spike counts");
    double xbar = 0.0;
    for (double v : x) xbar += v;
    xbar /= static_cast<double>(n);
    std::vector<double> tbar(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) tbar[j] += tau[i][j] / static_cast<double>(n);
    double sxx = 0.0, sxt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        for (std::size_t j = 0; j < m; ++j) sxt += (x[i] - xbar) * (tau[i][j] - tbar[j]);
    }
    if (!(sxx > 0.0)) throw InsufficientEvents("seed_from_events: degenerate positions");
    const double slope = sxt / (static_cast<double>(m) * sxx);
    if (slope == 0.0) throw InsufficientEvents("seed_from_events: standing pattern, no speed");
    std::vector<double> T(m);
    // Offsets of tau_j(x) = slope x + T_j, shifted so T_1 = 0. A negative
    // slope is a leftward wave; its reflection has the same offsets.
    for (std::size_t j = 0; j < m; ++j) T[j] = tbar[j] - slope * xbar;
    const double T0 = T[0];
    for (auto& t : T) t -= T0;
    auto w = CoarseWave::make(1.0 / std::abs(slope), std::move(T));
    w.validate();
    return w;
}

CoarseWave seed_from_simulation(const NetworkTrajectory& traj, int m) {
    if (m < 1) throw InsufficientEvents("seed_from_simulation: m must be >= 1");
    const int n = traj.n;
    if (n < 2) throw InsufficientEvents("seed_from_simulation: empty trajectory");
    // Last m firings of every neuron.
    std::vector<std::vector<double>> last(static_cast<std::size_t>(n));
    for (const auto& e : traj.events) last[e.neuron].push_back(e.time);
    std::vector<int> ready;
    for (int i = 0; i < n; ++i) {
        auto& v = last[i];
        if (static_cast<int>(v.size()) < m) continue;
        v.erase(v.begin(), v.end() - m);
        ready.push_back(i);
    }
    if (static_cast<int>(ready.size()) < 4) throw InsufficientEvents("seed_from_simulation: too few neurons fired m times");

    // Anchor: the neuron whose latest burst started last. The wave front is
    // there; the arc behind it holds complete bursts.
    int anchor = ready.front();
    for (int i : ready)
        if (last[i][0] > last[anchor][0]) anchor = i;
    const int probe = std::max(2, n / 200);
    auto burst_start = [&](int i) {
        const int k = ((i % n) + n) % n;
        return static_cast<int>(last[k].size()) == m ? last[k][0] : -std::numeric_limits<double>::infinity();
    };
    // Direction: earlier bursts lie behind the front.
    const int dir = burst_start(anchor - probe) > burst_start(anchor + probe) ? -1 : 1;
    const double dx = 2.0 * traj.L / n;
    std::vector<double> xs;
    std::vector<std::vector<double>> taus;
    const int span = n / 4;
    for (int k = 1; k <= span; ++k) {
        const int i = ((anchor + dir * k) % n + n) % n;
        if (static_cast<int>(last[i].size()) != m) break;
        // Stop when the burst pattern breaks (the arc reaches an older passage).
        if (!taus.empty() && !(last[i][0] < taus.back()[0])) break;
        xs.push_back(dir * k * dx);
        taus.push_back(last[i]);
    }
    if (xs.size() < 4) throw InsufficientEvents("seed_from_simulation: no coherent front");
    // Skip the few neurons closest to the front, whose bursts may be incomplete.
    const std::size_t skip = std::min<std::size_t>(xs.size() / 10, 20);
    xs.erase(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(skip));
    taus.erase(taus.begin(), taus.begin() + static_cast<std::ptrdiff_t>(skip));
    return seed_from_events(xs, taus);
}

CoarseWave seed_composite(const std::vector<CoarseWave>& waves, const std::vector<double>& gaps) {
    if (waves.empty()) throw OrderViolation("seed_composite: no groups");
    if (gaps.size() + 1 != waves.size()) throw OrderViolation("seed_composite: need one gap per group boundary");
    std::vector<double> T;
    double offset = 0.0;
    for (std::size_t g = 0; g < waves.size(); ++g) {
        waves[g].validate();
        if (g > 0) {
            if (!(gaps[g - 1] > 0.0)) throw OrderViolation("seed_composite: gaps must be positive");
            offset = T.back() + gaps[g - 1];
        }
        for (double t : waves[g].T) T.push_back(offset + t);
    }
    auto w = CoarseWave::make(waves.front().c, std::move(T));
    w.validate();
    return w;
}

}  // namespace spikewave
