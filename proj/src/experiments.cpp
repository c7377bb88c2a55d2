#include "spikewave/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <Eigen/Core>
#include <boost/crc.hpp>
#include <boost/version.hpp>

#include "spikewave/continuation.hpp"
#include "spikewave/difm.hpp"
#include "spikewave/errors.hpp"
#include "spikewave/io.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/wave_solver.hpp"

#ifndef SPIKEWAVE_VERSION
#define SPIKEWAVE_VERSION "0.0.0"
#endif

namespace spikewave {

namespace {

struct KindName {
    ExperimentKind kind;
    const char* name;
};
constexpr KindName kKinds[] = {
    {ExperimentKind::fig2_bump, "fig2-bump"},
    {ExperimentKind::fig3_waves, "fig3-waves"},
    {ExperimentKind::fig4_profiles, "fig4-profiles"},
    {ExperimentKind::fig5_tw3_branch, "fig5-tw3-branch"},
    {ExperimentKind::fig6_nested, "fig6-nested"},
    {ExperimentKind::fig7_grazing, "fig7-grazing"},
    {ExperimentKind::fig8_bump_stats, "fig8-bump-stats"},
    {ExperimentKind::fig9_composite, "fig9-composite"},
    {ExperimentKind::figS1_excitatory, "figS1-excitatory"},
};

// Failures keep their class (and so their exit code) but name the stage.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.error_class(), name + ": " + e.what());
    }
}

class Writer {
public:
    explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    void put(const std::string& name, const std::string& text) {
        write_text(dir_ / name, text);
        files_.push_back({name, text.size(), crc32_of(text)});
    }
    void put_json(const std::string& name, const json& j) { put(name, j.dump(2) + "\n"); }

    const std::filesystem::path& dir() const { return dir_; }
    std::vector<BundleFile> files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<BundleFile> files_;
};

std::vector<double> spaced(int m, double dT) {
    std::vector<double> T;
    for (int j = 0; j < m; ++j) T.push_back(dT * j);
    return T;
}

// Natural-parameter stepping in beta; every intermediate solve must converge.
CoarseWave walk_beta(int m, CoarseWave w, ModelParams& p, double target, double max_step = 0.25) {
    while (std::abs(p.beta - target) > 1e-12) {
        p.beta += std::clamp(target - p.beta, -max_step, max_step);
        w = solve_wave(m, w, p).wave;
    }
    return w;
}

GrazingPoint tw3_grazing(ModelParams p) {
    const auto start = solve_wave(3, CoarseWave::make(0.3, spaced(3, 0.8)), p);
    ContinuationOptions o;
    o.direction = -1;
    o.step = 0.1;
    o.param_min = 0.5;
    o.track_stability = false;
    const auto br = continue_branch(start, p, o);
    for (const auto& e : br.events)
        if (e.kind == EventKind::grazing && e.refined) return {e.beta, e.wave, e.T_G, e.residual};
    throw NoConvergence("three-spike branch did not end at a refined grazing point");
}

// TW_m from the grazing chain, walked upward from its grazing point through
// the targets in increasing order; one wave per target.
std::vector<CoarseWave> chain_waves(int m, ModelParams p, std::vector<double> betas) {
    if (m < 4) throw ConfigError("the grazing chain needs m >= 4");
    std::sort(betas.begin(), betas.end());
    const auto g = tw3_grazing(p);
    const auto st = grazing_scaling_study(g, m, p);
    if (st.last_m < m) throw NoConvergence("grazing chain stopped at m = " + std::to_string(st.last_m));
    p.beta = st.points.back().beta_G;
    CoarseWave w = st.points.back().wave;
    std::vector<CoarseWave> out;
    for (double b : betas) {
        w = walk_beta(m, w, p, b, 0.05);
        out.push_back(w);
    }
    return out;
}

std::string tag(double x) {
    std::string s = format_double(x);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

json stats_json(const NetworkTrajectory& tr, double t_from, double t_to) {
    const auto st = speed_stats(tr.levelset, t_from, t_to);
    json j = st;
    j["fronts"] = count_fronts(tr, std::max(0.0, t_to - 20.0), t_to);
    j["events"] = tr.events.size();
    j["persistent"] = std::any_of(tr.events.begin(), tr.events.end(),
                                  [&](const FiringEvent& e) { return e.time > t_to - 20.0; });
    j["warnings"] = tr.warnings.size();
    return j;
}

// ---------------------------------------------------------------------------

json run_fig2(const ExperimentSpec& s, ModelParams p, Writer& out) {
    const double horizon = s.scale.horizon > 0 ? s.scale.horizon : 100.0;
    json runs = json::array();
    for (double beta : {1.0, 3.5}) {
        p.beta = beta;
        const auto tr = stage("simulate beta=" + format_double(beta),
                              [&] { return simulate(homogeneous_state(p), p, {.horizon = horizon}); });
        out.put("raster_beta" + tag(beta) + ".csv", raster_csv(tr));
        out.put("levelset_beta" + tag(beta) + ".csv", levelset_csv(tr));
        json r = stats_json(tr, 0.5 * horizon, horizon);
        r["beta"] = beta;
        runs.push_back(r);
    }
    return {{"runs", runs}};
}

json run_fig3(const ExperimentSpec& s, ModelParams p, Writer& out) {
    const double horizon = s.scale.horizon > 0 ? s.scale.horizon : 100.0;
    Csv table({"seed", "d1", "d2", "fronts", "c_bar", "sigma_c"});
    json runs = json::array();
    for (std::uint64_t seed = 1; seed <= 6; ++seed)
        for (auto [d1, d2] : {std::pair{0.4, 12.0}, std::pair{2.0, 10.0}}) {
            p.stimulus.d1 = d1;
            p.stimulus.d2 = d2;
            const auto tr = stage("simulate seed=" + std::to_string(seed),
                                  [&] { return simulate(uniform_random_state(p, seed), p, {.horizon = horizon}); });
            const auto st = speed_stats(tr.levelset, 0.5 * horizon, horizon);
            const int fronts = count_fronts(tr, horizon - 20.0, horizon);
            table.row({double(seed), d1, d2, double(fronts), st.c_bar, st.sigma_c});
            out.put("raster_seed" + std::to_string(seed) + "_d1_" + tag(d1) + ".csv", raster_csv(tr));
            runs.push_back({{"seed", seed}, {"d1", d1}, {"d2", d2}, {"fronts", fronts}, {"stats", st}});
        }
    out.put("runs.csv", table.str());
    return {{"runs", runs}};
}

json run_fig4(const ExperimentSpec& s, ModelParams p, Writer& out) {
    const int m_big = s.scale.m_max > 0 ? s.scale.m_max : 20;
    // Five-spike wave from a simulated guess at beta = 4.5.
    ModelParams sim = p;
    sim.domain = {1.0, 80};
    sim.stimulus.d1 = 0.4;
    sim.stimulus.d2 = 12.0;
    const auto w5 = stage("five-spike wave", [&] {
        const auto tr = simulate(uniform_random_state(sim, 2), sim, {.horizon = 100.0});
        return solve_wave(5, seed_from_simulation(tr, 5), p);
    });
    ModelParams q = p;
    q.beta = 7.7;
    const auto wbig = stage("large wave", [&] { return solve_wave(m_big, chain_waves(m_big, p, {7.7}).front(), q); });
    out.put("profile_tw5.csv", profile_csv(sample_profile(w5.wave, p, -0.5, 1.0, 1501)));
    out.put("profile_tw" + std::to_string(m_big) + ".csv", profile_csv(sample_profile(wbig.wave, q, -1.5, 2.0, 1501)));
    json rec5 = w5, recb = wbig;
    rec5["beta"] = p.beta;
    recb["beta"] = q.beta;
    out.put_json("waves.json", {{"tw5", rec5}, {"tw" + std::to_string(m_big), recb}});
    return {{"tw5_c", w5.wave.c}, {"large_m", m_big}, {"large_c", wbig.wave.c}, {"large_validated", wbig.validated}};
}

json run_fig5(const ExperimentSpec& s, ModelParams p, Writer& out) {
    ModelParams p10 = p;
    const auto w10 = stage("three-spike wave at beta 10", [&] {
        return walk_beta(3, solve_wave(3, CoarseWave::make(0.3, spaced(3, 0.8)), p10).wave, p10, 10.0);
    });
    const auto start = solve_wave(3, w10, p10);
    ContinuationOptions o;
    o.step = 0.1;
    o.step_max = 0.5;
    o.param_min = 0.5;
    o.param_max = 20.0;
    o.max_points = 300;
    o.grid.threads = s.threads;
    o.direction = -1;
    const auto down = stage("continuation down", [&] { return continue_branch(start, p10, o); });
    o.direction = 1;
    const auto up = stage("continuation up", [&] { return continue_branch(start, p10, o); });
    out.put("branch_down.csv", branch_csv(down));
    out.put("branch_up.csv", branch_csv(up));
    Branch all = up;
    all.events.insert(all.events.begin(), down.events.begin(), down.events.end());
    out.put("events.csv", branch_events_csv(all));
    out.put_json("events.json", all.events);

    // Simulations below the grazing point, between it and the first Hopf
    // point, and beyond.
    ModelParams sim = p;
    sim.domain.L = 3.0;
    sim.domain.n = s.scale.n > 0 ? s.scale.n : 500;
    sim.stimulus.d1 = 0.0;
    const double horizon = s.scale.horizon > 0 ? s.scale.horizon : 60.0;
    json runs = json::array();
    for (double beta : {2.17, 10.0, 16.0}) {
        ModelParams q = p;
        const auto w = stage("seed wave beta=" + format_double(beta), [&] {
            if (beta < 3.0) {
                const auto g = tw3_grazing(q);
                ModelParams r = q;
                r.beta = g.beta_G;
                return walk_beta(3, g.wave, r, beta, 0.01);
            }
            return walk_beta(3, solve_wave(3, CoarseWave::make(0.3, spaced(3, 0.8)), q).wave, q, beta);
        });
        sim.beta = beta;
        const auto tr = stage("simulate beta=" + format_double(beta),
                              [&] { return simulate(state_from_wave(w, sim), sim, {.horizon = horizon}); });
        out.put("raster_beta" + tag(beta) + ".csv", raster_csv(tr));
        json r = stats_json(tr, 0.5 * horizon, horizon);
        r["beta"] = beta;
        r["wave_c"] = w.c;
        runs.push_back(r);
    }
    int hopf = 0;
    for (const auto& e : up.events) hopf += e.kind == EventKind::hopf;
    return {{"termination_down", down.termination},
            {"termination_up", up.termination},
            {"hopf_events", hopf},
            {"simulations", runs}};
}

json run_fig6(const ExperimentSpec& s, ModelParams p, Writer& out) {
    const int m_max = s.scale.m_max > 0 ? s.scale.m_max : 6;
    Csv nested({"m", "c", "validated"});
    Csv events({"m", "kind", "beta", "c"});
    CoarseWave w = CoarseWave::make(0.5, {0.0});
    json speeds = json::array();
    for (int m = 1; m <= m_max; ++m) {
        if (m > 1) {
            auto T = w.T;
            T.push_back(T.back() + 0.75);
            w = CoarseWave::make(0.85 * w.c, T);
        }
        const auto rec = stage("TW_" + std::to_string(m), [&] { return solve_wave(m, w, p); });
        w = rec.wave;
        nested.row({double(m), rec.wave.c, rec.validated ? 1.0 : 0.0});
        speeds.push_back(rec.wave.c);
        ContinuationOptions o;
        o.step = 0.1;
        o.step_max = 0.5;
        o.param_min = 0.5;
        o.param_max = 20.0;
        o.max_points = 200;
        o.track_stability = false;
        for (int dir : {-1, 1}) {
            o.direction = dir;
            const auto br = stage("branch TW_" + std::to_string(m), [&] { return continue_branch(rec, p, o); });
            out.put("branch_m" + std::to_string(m) + (dir < 0 ? "_down" : "_up") + ".csv", branch_csv(br));
            for (const auto& e : br.events)
                events.row(std::vector<std::string>{std::to_string(m), to_string(e.kind), format_double(e.beta),
                                                    format_double(e.wave.c)});
        }
    }
    out.put("nested.csv", nested.str());
    out.put("events.csv", events.str());
    return {{"beta", p.beta}, {"speeds", speeds}};
}

json run_fig7(const ExperimentSpec& s, ModelParams p, Writer& out) {
    const int m_max = s.scale.m_max > 0 ? s.scale.m_max : 60;
    const auto g = stage("grazing of TW_3", [&] { return tw3_grazing(p); });
    const auto st = stage("grazing chain", [&] { return grazing_scaling_study(g, m_max, p); });
    out.put("scaling.csv", scaling_csv(st));
    out.put("gain.csv", gain_csv(gain_curve(st.points.back().wave)));
    out.put_json("scaling.json", st);
    return {{"last_m", st.last_m}, {"slope_c", st.slope_c}, {"slope_T", st.slope_T}, {"failure", st.failure}};
}

json run_fig8(const ExperimentSpec& s, ModelParams p, Writer& out) {
    const int m = s.scale.m_max > 0 ? s.scale.m_max : 30;
    const double horizon = s.scale.horizon > 0 ? s.scale.horizon : 200.0;
    p.domain.n = s.scale.n > 0 ? s.scale.n : 1000;
    p.stimulus.d1 = 0.0;
    Csv table({"beta", "c_bar", "sigma_c", "c_min", "c_max", "width"});
    const std::vector<double> betas{2.4, 3.0, 3.5};
    const auto waves = stage("TW_" + std::to_string(m), [&] { return chain_waves(m, p, betas); });
    json runs = json::array();
    for (std::size_t k = 0; k < betas.size(); ++k) {
        const double beta = betas[k];
        ModelParams q = p;
        q.beta = beta;
        const auto tr = stage("simulate beta=" + format_double(beta),
                              [&] { return simulate(state_from_wave(waves[k], q), q, {.horizon = horizon}); });
        const auto st = speed_stats(tr.levelset, 0.25 * horizon, horizon);
        table.row({beta, st.c_bar, st.sigma_c, st.c_min, st.c_max, st.c_max - st.c_min});
        out.put("levelset_beta" + tag(beta) + ".csv", levelset_csv(tr));
        runs.push_back({{"beta", beta}, {"wave_c", waves[k].c}, {"stats", st}});
    }
    out.put("stats.csv", table.str());
    return {{"m", m}, {"runs", runs}};
}

json run_fig9(const ExperimentSpec& s, ModelParams p, Writer& out) {
    (void)s;
    const double beta = 10.0;
    std::vector<CoarseWave> parts;
    for (int m : {3, 2, 1}) {
        ModelParams q = p;
        parts.push_back(stage("TW_" + std::to_string(m), [&] {
            return walk_beta(m, solve_wave(m, CoarseWave::make(0.3, spaced(m, 0.8)), q).wave, q, beta);
        }));
    }
    p.beta = beta;
    const auto rec = stage("composite", [&] { return solve_wave(6, seed_composite(parts, {3.0, 3.0}), p); });
    out.put("profile_composite.csv",
            profile_csv(sample_profile(rec.wave, p, -1.0, rec.wave.width() + 1.0, 2001)));
    ContinuationOptions o;
    o.step = 0.1;
    o.step_max = 0.5;
    o.param_min = 0.5;
    o.param_max = 20.0;
    o.max_points = 80;
    o.track_stability = false;
    for (int dir : {-1, 1}) {
        o.direction = dir;
        const auto br = stage("composite branch", [&] { return continue_branch(rec, p, o); });
        out.put(std::string("branch_composite_") + (dir < 0 ? "down" : "up") + ".csv", branch_csv(br));
    }
    Csv speeds({"wave", "c"});
    speeds.row(std::vector<std::string>{"TW_3", format_double(parts[0].c)});
    speeds.row(std::vector<std::string>{"TW_2", format_double(parts[1].c)});
    speeds.row(std::vector<std::string>{"TW_1", format_double(parts[2].c)});
    speeds.row(std::vector<std::string>{"composite", format_double(rec.wave.c)});
    out.put("speeds.csv", speeds.str());
    out.put_json("composite.json", rec);
    return {{"composite_c", rec.wave.c}, {"leading_c", parts[0].c}, {"validated", rec.validated}};
}

json run_figS1(const ExperimentSpec& s, ModelParams p, Writer& out) {
    Csv table({"m", "c_beta4", "end", "end_beta"});
    json rows = json::array();
    const int m_cap = s.scale.m_max > 0 ? s.scale.m_max : 16;
    for (int m : {1, 2, 4, 8, 16}) {
        if (m > m_cap) break;
        ModelParams q = p;
        WaveRecord start;
        double c4 = std::nan("");
        if (m == 1) {
            // No single-spike wave at beta = 4 for this kernel; start above its fold.
            q.beta = 8.0;
            start = stage("TW_1", [&] {
                const auto roots = compatibility_roots(q);
                if (roots.empty()) throw NoConvergence("no single-spike speed at beta 8");
                return solve_wave(1, CoarseWave::make(roots.back(), {0.0}), q);
            });
        } else {
            q.beta = 4.0;
            start = stage("TW_" + std::to_string(m),
                          [&] { return solve_wave(m, CoarseWave::make(1.0, spaced(m, 0.3)), q); });
            c4 = start.wave.c;
        }
        ContinuationOptions o;
        o.direction = -1;
        o.step = 0.1;
        o.step_max = 0.5;
        o.param_min = 0.5;
        o.param_max = 10.0;
        o.max_points = 120;
        o.track_stability = m <= 8;
        o.stability_every = 2;
        o.grid.threads = s.threads;
        const auto br = stage("branch TW_" + std::to_string(m), [&] { return continue_branch(start, q, o); });
        out.put("branch_beta_m" + std::to_string(m) + ".csv", branch_csv(br));
        std::string end = br.termination;
        double end_beta = std::nan("");
        for (const auto& e : br.events)
            if (e.kind == EventKind::fold || e.kind == EventKind::grazing) {
                end = to_string(e.kind);
                end_beta = e.beta;
                break;
            }
        table.row(std::vector<std::string>{std::to_string(m), format_double(c4), end, format_double(end_beta)});
        rows.push_back({{"m", m}, {"c_beta4", c4}, {"first_event", end}, {"event_beta", end_beta},
                        {"events", br.events.size()}});

        // Panel (b): continuation in I at beta = 4.
        if (m > 1) {
            ContinuationOptions oi = o;
            oi.param = "I";
            oi.param_min = 0.5;
            oi.param_max = 1.0;
            oi.track_stability = false;
            oi.max_points = 80;
            const auto bi = stage("I-branch TW_" + std::to_string(m), [&] { return continue_branch(start, q, oi); });
            out.put("branch_I_m" + std::to_string(m) + ".csv", branch_csv(bi));
        }
    }
    out.put("summary.csv", table.str());
    return {{"branches", rows}};
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::string hex32(std::uint32_t x) {
    std::ostringstream ss;
    ss << std::hex << std::setw(8) << std::setfill('0') << x;
    return ss.str();
}

}  // namespace

const char* to_string(ExperimentKind k) {
    for (const auto& e : kKinds)
        if (e.kind == k) return e.name;
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (const auto& e : kKinds)
        if (s == e.name) return e.kind;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

std::vector<std::string> experiment_kinds() {
    std::vector<std::string> out;
    for (const auto& e : kKinds) out.emplace_back(e.name);
    return out;
}

void ExperimentSpec::validate() const {
    if (scale.m_max < 0 || scale.m_max > kMaxSpikes)
        throw ConfigError("scale.m_max must lie in [0, " + std::to_string(kMaxSpikes) + "]");
    if (scale.n < 0 || scale.n > kMaxNeurons)
        throw ConfigError("scale.n must lie in [0, " + std::to_string(kMaxNeurons) + "]");
    if (!(scale.horizon >= 0.0) || scale.horizon > kMaxHorizon)
        throw ConfigError("scale.horizon must lie in [0, " + format_double(kMaxHorizon) + "]");
    if (kind == ExperimentKind::fig4_profiles && scale.m_max != 0 && scale.m_max < 4)
        throw ConfigError("fig4-profiles needs m_max >= 4");
    if (kind == ExperimentKind::fig8_bump_stats && scale.m_max != 0 && scale.m_max < 4)
        throw ConfigError("fig8-bump-stats needs m_max >= 4");
    if (threads < 1) throw ConfigError("threads must be positive");
    if (!overrides.is_object()) throw ConfigError("overrides must be a JSON object");
}

json spec_to_json(const ExperimentSpec& s) {
    return {{"kind", to_string(s.kind)},
            {"overrides", s.overrides},
            {"scale", {{"m_max", s.scale.m_max}, {"n", s.scale.n}, {"horizon", s.scale.horizon}}}};
}

ExperimentSpec spec_from_json(const json& j) {
    const json& e = j.contains("experiment") ? j.at("experiment") : j;
    ExperimentSpec s;
    try {
        s.kind = experiment_kind_from_string(e.at("kind").get<std::string>());
        if (e.contains("overrides")) s.overrides = e.at("overrides");
        if (e.contains("scale")) {
            const auto& sc = e.at("scale");
            if (sc.contains("m_max")) s.scale.m_max = sc.at("m_max").get<int>();
            if (sc.contains("n")) s.scale.n = sc.at("n").get<int>();
            if (sc.contains("horizon")) s.scale.horizon = sc.at("horizon").get<double>();
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("experiment spec: ") + ex.what());
    }
    s.validate();
    return s;
}

ModelParams experiment_params(const ExperimentSpec& s) {
    ModelParams p;
    switch (s.kind) {
        case ExperimentKind::fig2_bump:
            p.domain.n = 80;
            p.stimulus = {2.0, 10.0, 2.0};
            break;
        case ExperimentKind::fig3_waves:
            p.domain = {1.0, 80};
            break;
        case ExperimentKind::figS1_excitatory:
            p.a1 = 2.0;
            p.b1 = 5.0;
            p.a2 = 0.0;
            p.I = 0.82;
            break;
        default:
            break;
    }
    if (s.kind != ExperimentKind::fig2_bump && s.kind != ExperimentKind::fig3_waves) p.stimulus.d1 = 0.0;
    if (s.scale.n > 0) p.domain.n = s.scale.n;
    if (!s.overrides.empty()) apply_params_json(p, s.overrides.dump());
    p.validate();
    return p;
}

std::uint32_t crc32_of(const std::string& bytes) {
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

Bundle run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    const ModelParams p = experiment_params(spec);
    Writer out(out_dir);
    json config = json::parse(params_to_json_text(p));
    config["experiment"] = spec_to_json(spec);
    out.put_json("config.json", config);

    json summary;
    switch (spec.kind) {
        case ExperimentKind::fig2_bump: summary = run_fig2(spec, p, out); break;
        case ExperimentKind::fig3_waves: summary = run_fig3(spec, p, out); break;
        case ExperimentKind::fig4_profiles: summary = run_fig4(spec, p, out); break;
        case ExperimentKind::fig5_tw3_branch: summary = run_fig5(spec, p, out); break;
        case ExperimentKind::fig6_nested: summary = run_fig6(spec, p, out); break;
        case ExperimentKind::fig7_grazing: summary = run_fig7(spec, p, out); break;
        case ExperimentKind::fig8_bump_stats: summary = run_fig8(spec, p, out); break;
        case ExperimentKind::fig9_composite: summary = run_fig9(spec, p, out); break;
        case ExperimentKind::figS1_excitatory: summary = run_figS1(spec, p, out); break;
    }
    summary["kind"] = to_string(spec.kind);
    out.put_json("summary.json", summary);

    Bundle b{out.dir(), out.files(), summary};
    json files = json::array();
    for (const auto& f : b.files) files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"crc32", hex32(f.crc32)}});
    const json manifest = {
        {"kind", to_string(spec.kind)},
        {"version", SPIKEWAVE_VERSION},
        {"created_utc", utc_now()},
        {"libraries",
         {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"files", files}};
    write_text(out.dir() / "manifest.json", manifest.dump(2) + "\n");
    return b;
}

}  // namespace spikewave
