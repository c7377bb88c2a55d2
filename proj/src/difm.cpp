#include "spikewave/difm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "spikewave/errors.hpp"
#include "spikewave/expconv.hpp"

namespace spikewave {

namespace {

// Response of v to a unit synaptic input: exp(-t) (exp((1-beta) t) - 1) / (1 - beta).
double syn_response(double t, double beta) { return std::exp(-t) * expconv::exprel_scaled(t, 1.0 - beta); }

double syn_response_sup(double beta) {
    // Maximiser t* = ln(beta) / (beta - 1), limit 1 at beta = 1.
    const double d = beta - 1.0;
    const double ts = std::abs(d) < 1e-6 ? 1.0 - 0.5 * d : std::log(beta) / d;
    return syn_response(ts, beta);
}

}  // namespace

InitialState homogeneous_state(const ModelParams& p, double v0, double s0) {
    if (!(v0 < 1.0)) throw ValidationError("initial voltage must be below threshold");
    InitialState st;
    st.v.assign(static_cast<std::size_t>(p.domain.n), v0);
    st.s.assign(static_cast<std::size_t>(p.domain.n), s0);
    return st;
}

InitialState uniform_random_state(const ModelParams& p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    InitialState st;
    st.s.assign(static_cast<std::size_t>(p.domain.n), 0.0);
    st.v.resize(static_cast<std::size_t>(p.domain.n));
    for (auto& v : st.v) v = U(rng);
    return st;
}

InitialState state_from_wave(const CoarseWave& wave, const ModelParams& p, std::vector<std::string>* warnings) {
    wave.validate();
    const int n = p.domain.n;
    const double L = p.domain.L;
    if (warnings && wave.width() > 0.5 * L) {
        std::ostringstream os;
        os << "wave width c T_m = " << wave.width() << " exceeds L / 2 = " << 0.5 * L;
        warnings->push_back(os.str());
    }
    InitialState st;
    st.v.resize(static_cast<std::size_t>(n));
    st.s.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = -L + 2.0 * L * i / n;
        st.v[i] = profile_nu(-x, wave, p);
        st.s[i] = profile_sigma(-x, wave, p);
        // A grid point sitting exactly on a crossing takes the reset value.
        if (st.v[i] >= 1.0) st.v[i] -= 1.0;
    }
    return st;
}

NeuronState propagate(NeuronState x, double drive, double beta, double dt) {
    const double e1 = std::exp(-dt);
    return {drive + (x.v - drive) * e1 + x.s * syn_response(dt, beta), x.s * std::exp(-beta * dt)};
}

std::optional<double> firing_time(NeuronState x, double drive, double beta, double horizon) {
    if (!(horizon > 0.0)) return std::nullopt;
    const double d = 1.0 - beta;
    // sign of dv/dt: q(t) = (drive - v0) + s0 (exp(d t) - E(t)), monotone in t.
    auto q = [&](double t) { return (drive - x.v) + x.s * (std::exp(d * t) - expconv::exprel_scaled(t, d)); };
    auto f = [&](double t) { return propagate(x, drive, beta, t).v - 1.0; };
    if (x.v >= 1.0) return 0.0;
    const double bound = std::max(x.v, drive) + std::max(x.s, 0.0) * syn_response_sup(beta);
    if (bound < 1.0) return std::nullopt;

    std::vector<double> pts{0.0};
    const double q0 = q(0.0), qH = q(horizon);
    if ((q0 > 0.0) != (qH > 0.0) && q0 != 0.0 && qH != 0.0) {
        std::uintmax_t it = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::max(1.0, a); };
        const auto br = boost::math::tools::toms748_solve(q, 0.0, horizon, q0, qH, tol, it);
        pts.push_back(0.5 * (br.first + br.second));
    }
    pts.push_back(horizon);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        const double fa = f(a), fb = f(b);
        if (fa < 0.0 && fb >= 0.0) {
            if (fb == 0.0) return b;
            std::uintmax_t it = 200;
            auto tol = [](double lo, double hi) { return hi - lo <= 1e-12 * 1e-2 * std::max(1.0, lo); };
            const auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
            if (it >= 200) throw IntegrationError("firing_time: bracketing failed");
            return br.second;
        }
        if (fa >= 0.0) return a;
    }
    return std::nullopt;
}

Network::Network(const ModelParams& p, const InitialState& init, double t0)
    : p_(p), n_(p.domain.n), L_(p.domain.L), t_(t0), v_(init.v), s_(init.s) {
    p_.validate();
    if (static_cast<int>(v_.size()) != n_ || static_cast<int>(s_.size()) != n_)
        throw ValidationError("initial state size does not match n");
    for (int i = 0; i < n_; ++i)
        if (!(v_[i] < 1.0)) throw ValidationError("initial voltages must be below threshold");
    wrow_.resize(static_cast<std::size_t>(n_));
    for (int d = 0; d < n_; ++d) wrow_[d] = kernel_w(2.0 * L_ * std::min(d, n_ - d) / n_, p_);
    stim_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) stim_[i] = p_.stimulus.d1 / std::cosh(p_.stimulus.d2 * position(i));
    count_.assign(static_cast<std::size_t>(n_), 0);
    gmax_ = syn_response_sup(p_.beta);
}

double Network::coupling(int l, int k) const { return wrow_[static_cast<std::size_t>(((l - k) % n_ + n_) % n_)]; }

double Network::drive(int i) const { return p_.I + (stimulus_on() ? stim_[i] : 0.0); }

void Network::advance_to(double t1) {
    const double dt = t1 - t_;
    if (dt <= 0.0) return;
    const double e1 = std::exp(-dt), eb = std::exp(-p_.beta * dt), g = syn_response(dt, p_.beta);
    const bool on = stimulus_on();
    for (int i = 0; i < n_; ++i) {
        const double D = p_.I + (on ? stim_[i] : 0.0);
        v_[i] = D + (v_[i] - D) * e1 + s_[i] * g;
        s_[i] *= eb;
    }
    t_ = t1;
}

std::optional<FiringEvent> Network::step_to_next_event(double t_stop) {
    while (t_ < t_stop) {
        double stop = t_stop;
        if (stimulus_on()) stop = std::min(stop, p_.stimulus.tau_ext);
        const double H = stop - t_;
        const bool on = stimulus_on();
        double best = H;
        int who = -1;
        for (int i = 0; i < n_; ++i) {
            const double D = p_.I + (on ? stim_[i] : 0.0);
            // Cheap rejection before the root search.
            if (std::max(v_[i], D) + std::max(s_[i], 0.0) * gmax_ < 1.0) continue;
            const auto ft = firing_time({v_[i], s_[i]}, D, p_.beta, std::min(H, who < 0 ? H : best + 1e-12));
            if (!ft) continue;
            if (who < 0 ? *ft <= best : *ft < best - 1e-12) {
                best = *ft;
                who = i;
            }
        }
        if (who >= 0) {
            advance_to(t_ + best);
            FiringEvent ev;
            ev.neuron = who;
            ev.time = t_;
            ev.ordinal = count_[who] + 1;
            return ev;
        }
        advance_to(stop);
    }
    return std::nullopt;
}

void Network::apply_reset(const FiringEvent& ev) {
    const int k = ev.neuron;
    v_[k] = 0.0;
    count_[k] = ev.ordinal;
    const double amp = 2.0 * L_ * p_.beta / n_;
    for (int l = 0; l < n_; ++l) s_[l] += amp * wrow_[static_cast<std::size_t>(((l - k) % n_ + n_) % n_)];
}

std::optional<double> levelset_position(const std::vector<double>& s, double L, double level) {
    const int n = static_cast<int>(s.size());
    std::optional<double> best;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        // Falling edge: s crosses the level downward going right.
        if (s[i] >= level && s[j] < level) {
            const double frac = (s[i] - level) / (s[i] - s[j]);
            const double x = -L + 2.0 * L * (i + frac) / n;
            const double xw = x >= L ? x - 2.0 * L : x;
            if (!best || xw > *best) best = xw;
        }
    }
    return best;
}

namespace {

void unwrap_into(std::vector<LevelsetSample>& out, double t, double z, double L) {
    if (!out.empty()) {
        const double prev = out.back().z;
        z += 2.0 * L * std::round((prev - z) / (2.0 * L));
    }
    out.push_back({t, z});
}

}  // namespace

NetworkTrajectory simulate(const InitialState& init, const ModelParams& p, const SimOptions& opts) {
    Network net(p, init, opts.t_start);
    NetworkTrajectory traj;
    traj.n = net.size();
    traj.L = p.domain.L;
    const double T = opts.t_start + opts.horizon;
    const bool sampling = opts.sample_dt > 0.0;
    long k = 0;
    int missed = 0;
    auto next_sample = [&]() { return sampling ? opts.t_start + k * opts.sample_dt : T; };
    auto take_sample = [&]() {
        if (opts.keep_snapshots) traj.samples.push_back({net.time(), net.v(), net.s()});
        if (const auto z = levelset_position(net.s(), traj.L, opts.levelset))
            unwrap_into(traj.levelset, net.time(), *z, traj.L);
        else if (++missed <= 5)
            traj.warnings.push_back("level " + std::to_string(opts.levelset) + " not crossed at t = " +
                                    std::to_string(net.time()));
    };
    if (sampling) {
        take_sample();
        ++k;
    }
    while (net.time() < T) {
        const double stop = std::min(next_sample(), T);
        if (auto ev = net.step_to_next_event(stop)) {
            net.apply_reset(*ev);
            traj.events.push_back(*ev);
            continue;
        }
        if (sampling && net.time() >= next_sample()) {
            take_sample();
            ++k;
        }
    }
    traj.speed_stats = speed_stats(traj.levelset);
    return traj;
}

std::vector<LevelsetSample> track_levelset(const NetworkTrajectory& traj, double level) {
    std::vector<LevelsetSample> out;
    for (const auto& snap : traj.samples)
        if (const auto z = levelset_position(snap.s, traj.L, level)) unwrap_into(out, snap.t, *z, traj.L);
    return out;
}

SpeedStats speed_stats(const std::vector<LevelsetSample>& z, double t_from, double t_to) {
    SpeedStats st;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        if (z[k].t < t_from || z[k + 1].t > t_to) continue;
        st.samples.push_back((z[k + 1].z - z[k].z) / (z[k + 1].t - z[k].t));
    }
    if (st.samples.empty()) return st;
    double sum = 0.0;
    st.c_min = st.c_max = st.samples[0];
    for (double c : st.samples) {
        sum += c;
        st.c_min = std::min(st.c_min, c);
        st.c_max = std::max(st.c_max, c);
    }
    st.c_bar = sum / static_cast<double>(st.samples.size());
    double var = 0.0;
    for (double c : st.samples) var += (c - st.c_bar) * (c - st.c_bar);
    st.sigma_c = st.samples.size() > 1 ? std::sqrt(var / static_cast<double>(st.samples.size() - 1)) : 0.0;
    return st;
}

SaltatoryFit fit_saltatory_amplitude(const std::vector<int>& n, const std::vector<SpeedStats>& stats) {
    SaltatoryFit fit;
    if (n.size() != stats.size()) throw ValidationError("fit_saltatory_amplitude: size mismatch");
    if (n.size() < 2) {
        fit.diagnostic = "insufficient n values";
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n.size(); ++k) {
        const double amp = stats[k].c_max - stats[k].c_min;
        fit.n.push_back(n[k]);
        fit.amplitude.push_back(amp);
        if (!(amp > 0.0)) {
            fit.diagnostic = "zero-variance speed samples";
            return fit;
        }
        // Non-stationary drift: halves of the record disagree beyond the oscillation.
        const auto& c = stats[k].samples;
        const std::size_t h = c.size() / 2;
        double m1 = 0, m2 = 0;
        for (std::size_t i = 0; i < h; ++i) m1 += c[i];
        for (std::size_t i = h; i < c.size(); ++i) m2 += c[i];
        m1 /= std::max<std::size_t>(h, 1);
        m2 /= std::max<std::size_t>(c.size() - h, 1);
        if (std::abs(m1 - m2) > 0.5 * amp) fit.diagnostic = "non-stationary speed record";
        const double lx = std::log(static_cast<double>(n[k])), ly = std::log(amp);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double N = static_cast<double>(n.size());
    fit.slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    fit.reliable = fit.diagnostic.empty();
    return fit;
}

int count_fronts(const NetworkTrajectory& traj, double t_from, double t_to, double burst_gap) {
    struct Burst {
        double start = 0.0, end = -1.0;
        int size = 0;
    };
    std::vector<Burst> open(static_cast<std::size_t>(traj.n));
    std::map<int, int> hist;
    auto close = [&](const Burst& b) {
        if (b.size > 0 && b.start >= t_from && b.end <= t_to) ++hist[b.size];
    };
    for (const auto& e : traj.events) {
        auto& b = open[e.neuron];
        if (b.size > 0 && e.time - b.end <= burst_gap) {
            b.end = e.time;
            ++b.size;
            continue;
        }
        close(b);
        b = {e.time, e.time, 1};
    }
    // A burst still open at the end of the record counts only if it has gone quiet.
    const double t_last = traj.events.empty() ? 0.0 : traj.events.back().time;
    for (const auto& b : open)
        if (b.size > 0 && t_last - b.end > burst_gap) close(b);
    int best = 0, freq = 0;
    for (const auto& [c, f] : hist)
        if (f > freq) {
            best = c;
            freq = f;
        }
    return best;
}

}  // namespace spikewave
