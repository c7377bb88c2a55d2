// spikewave: command-line front end. Exit codes: 0 success, 2 numerical
// failure, 3 validation failure, 4 configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikewave/continuation.hpp"
#include "spikewave/difm.hpp"
#include "spikewave/errors.hpp"
#include "spikewave/experiments.hpp"
#include "spikewave/io.hpp"
#include "spikewave/params.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/verify.hpp"
#include "spikewave/wave_solver.hpp"

namespace fs = std::filesystem;
using namespace spikewave;

namespace {

struct Global {
    std::string config;
    std::string out = ".";
    int threads = 1;
    bool seedless = false;
    std::vector<std::string> set;
};

ModelParams resolve_params(const Global& g) {
    ModelParams p = g.config.empty() ? ModelParams{} : load_params(g.config);
    for (const auto& a : g.set) apply_assignment(p, a);
    p.validate();
    return p;
}

fs::path out_path(const Global& g, const std::string& own, const std::string& fallback) {
    if (!own.empty()) return own;
    return fs::path(g.out) / fallback;
}

void emit(const fs::path& path, const std::string& text) {
    write_text(path, text);
    std::cout << path.string() << "\n";
}

// Two-column numeric CSV with a header line.
std::vector<std::pair<double, double>> read_pairs(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<std::pair<double, double>> out;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError(path.string() + ": expected two columns");
        try {
            out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ": malformed row '" + line + "'");
        }
    }
    return out;
}

std::string snapshots_csv(const NetworkTrajectory& tr, bool voltage) {
    std::vector<std::string> head{"t"};
    for (int i = 0; i < tr.n; ++i) head.push_back((voltage ? "v" : "s") + std::to_string(i));
    Csv csv(head);
    for (const auto& snap : tr.samples) {
        std::vector<double> row{snap.t};
        const auto& x = voltage ? snap.v : snap.s;
        row.insert(row.end(), x.begin(), x.end());
        csv.row(row);
    }
    return csv.str();
}

RootWindow window_from(double re_min, double re_max, double im_max, double real_sweep) {
    RootWindow w;
    w.re_min = re_min;
    w.re_max = re_max;
    w.im_max = im_max;
    w.real_sweep = real_sweep;
    return w;
}

// Section of the config layout holding a --set key.
std::string override_section(const std::string& key) {
    if (key == "d1" || key == "d2" || key == "tau_ext") return "stimulus";
    if (key == "L" || key == "n") return "domain";
    return "model";
}

int exit_code(ErrorClass c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-spike travelling waves of integrate-and-fire networks"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--config", g.config, "Parameter file (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads for root-finding grids")->check(CLI::Range(1, 256));
    app.add_flag("--seedless", g.seedless, "Refuse any randomly drawn initial state");
    app.add_option("--set", g.set, "Parameter assignment key=value (repeatable)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Event-driven simulation of the discrete network");
    std::string sim_init = "homogeneous", sim_wave, sim_state;
    double sim_horizon = 50.0, sim_dt = 0.1, sim_v0 = 0.5, sim_level = 0.1;
    std::uint64_t sim_seed = 1;
    bool sim_snapshots = false;
    sim->add_option("--init", sim_init, "homogeneous | random | wave | state")
        ->check(CLI::IsMember({"homogeneous", "random", "wave", "state"}));
    sim->add_option("--wave", sim_wave, "Wave record used by --init wave")->check(CLI::ExistingFile);
    sim->add_option("--state", sim_state, "CSV with columns v,s used by --init state")->check(CLI::ExistingFile);
    sim->add_option("--seed", sim_seed, "Seed for --init random");
    sim->add_option("--v0", sim_v0, "Voltage for --init homogeneous");
    sim->add_option("--horizon", sim_horizon, "Final time")->check(CLI::PositiveNumber);
    sim->add_option("--sample-dt", sim_dt, "Level-set and snapshot sampling interval");
    sim->add_option("--level", sim_level, "Level of the synaptic level set");
    sim->add_flag("--snapshots", sim_snapshots, "Write v and s snapshot matrices");

    // solve-wave
    auto* sw = app.add_subcommand("solve-wave", "Solve the coarse problem for TW_m");
    int sw_m = 0;
    std::optional<double> sw_beta, sw_c;
    std::vector<double> sw_T;
    std::string sw_guess, sw_out, sw_profile;
    sw->add_option("--m", sw_m, "Number of spikes")->required()->check(CLI::PositiveNumber);
    sw->add_option("--beta", sw_beta, "Synaptic rate");
    sw->add_option("--guess", sw_guess, "Initial guess (wave record)")->check(CLI::ExistingFile);
    sw->add_option("--c", sw_c, "Initial speed when no guess file is given");
    sw->add_option("--T", sw_T, "Initial firing offsets T_1..T_m (T_1 = 0)");
    sw->add_option("--out", sw_out, "Output file (default <out>/wave.json)");
    sw->add_option("--profile", sw_profile, "Also write the profile (xi, nu, sigma) to this CSV");

    // stability
    auto* stab = app.add_subcommand("stability", "Roots of the stability function in a window");
    std::string st_wave, st_out, st_grid;
    std::optional<double> st_beta;
    double st_re_min = 0.0, st_re_max = 0.0, st_im_max = 0.0, st_sweep = 0.0;
    int st_nre = 101, st_nim = 101;
    stab->add_option("--wave", st_wave, "Wave record")->required()->check(CLI::ExistingFile);
    stab->add_option("--beta", st_beta, "Synaptic rate (default: from the record)");
    stab->add_option("--re-min", st_re_min, "Window: smallest real part");
    stab->add_option("--re-max", st_re_max, "Window: largest real part");
    stab->add_option("--im-max", st_im_max, "Window: largest imaginary part");
    stab->add_option("--real-sweep", st_sweep, "Real-axis sweep limit (0 default, < 0 off)");
    stab->add_option("--n-re", st_nre, "Grid points along Re")->check(CLI::Range(3, 100000));
    stab->add_option("--n-im", st_nim, "Grid points along Im")->check(CLI::Range(3, 100000));
    stab->add_option("--out", st_out, "Output file (default <out>/stability.json)");
    stab->add_option("--e-grid", st_grid, "Also write E on the grid (re, im, ReE, ImE) to this CSV");

    // continue-branch
    auto* cb = app.add_subcommand("continue-branch", "Pseudo-arclength continuation of a wave branch");
    std::string cb_wave, cb_param = "beta";
    std::optional<double> cb_beta;
    ContinuationOptions cb_opts;
    bool cb_nostab = false;
    cb->add_option("--wave", cb_wave, "Starting wave record")->required()->check(CLI::ExistingFile);
    cb->add_option("--beta", cb_beta, "Synaptic rate at the start (default: from the record)");
    cb->add_option("--param", cb_param, "Continuation parameter");
    cb->add_option("--direction", cb_opts.direction, "Initial direction (+1 or -1)")->check(CLI::IsMember({-1, 1}));
    cb->add_option("--step", cb_opts.step, "Initial arclength step");
    cb->add_option("--step-max", cb_opts.step_max, "Largest arclength step");
    cb->add_option("--min", cb_opts.param_min, "Stop below this parameter value");
    cb->add_option("--max", cb_opts.param_max, "Stop above this parameter value");
    cb->add_option("--max-points", cb_opts.max_points, "Largest number of branch points");
    cb->add_option("--stability-every", cb_opts.stability_every, "Classify every k-th point (0: automatic)");
    cb->add_flag("--no-stability", cb_nostab, "Skip stability along the branch");

    // graze
    auto* gz = app.add_subcommand("graze", "Refine a grazing point");
    std::string gz_wave, gz_param = "beta";
    std::optional<double> gz_beta, gz_TG;
    gz->add_option("--wave", gz_wave, "Wave record near the grazing point")->required()->check(CLI::ExistingFile);
    gz->add_option("--beta", gz_beta, "Parameter guess (default: from the record)");
    gz->add_option("--T-G", gz_TG, "Tangency offset guess (default: secondary maximum)");
    gz->add_option("--param", gz_param, "Parameter solved for");

    // hopf
    auto* hb = app.add_subcommand("hopf", "Refine a Hopf point");
    std::string hb_wave, hb_param = "beta";
    std::optional<double> hb_beta, hb_omega;
    hb->add_option("--wave", hb_wave, "Wave record near the Hopf point")->required()->check(CLI::ExistingFile);
    hb->add_option("--beta", hb_beta, "Parameter guess (default: from the record)");
    hb->add_option("--omega", hb_omega, "Frequency guess (default: leading root)");
    hb->add_option("--param", hb_param, "Parameter solved for");

    // graze-scaling
    auto* gs = app.add_subcommand("graze-scaling", "Chain of grazing points TW_3 .. TW_m");
    std::string gs_start;
    int gs_m = 20;
    gs->add_option("--start", gs_start, "Grazing point JSON (default: computed for TW_3)")->check(CLI::ExistingFile);
    gs->add_option("--m-max", gs_m, "Largest m")->check(CLI::Range(4, kMaxSpikes * 4));

    // speed-stats
    auto* ss = app.add_subcommand("speed-stats", "Speed statistics of a level-set track");
    std::string ss_in;
    double ss_from = -1e300, ss_to = 1e300;
    ss->add_option("--levelset", ss_in, "CSV with columns t,z")->required()->check(CLI::ExistingFile);
    ss->add_option("--from", ss_from, "Start of the averaging window");
    ss->add_option("--to", ss_to, "End of the averaging window");

    // verify (hidden)
    auto* vf = app.add_subcommand("verify", "Run the oracle battery");
    vf->group("");
    int vf_n = 200;
    std::uint64_t vf_seed = 1;
    vf->add_option("--evaluations", vf_n, "Randomized closed-form evaluations");
    vf->add_option("--seed", vf_seed, "Seed for the randomized evaluations");

    // experiment
    auto* ex = app.add_subcommand("experiment", "Run a figure experiment into a bundle directory");
    std::string ex_kind, ex_spec;
    ExperimentScale ex_scale;
    ex->add_option("--kind", ex_kind, "Experiment kind")->check(CLI::IsMember(experiment_kinds()));
    ex->add_option("--spec", ex_spec, "Spec JSON or a bundle config.json")->check(CLI::ExistingFile);
    ex->add_option("--m-max", ex_scale.m_max, "Cap on the number of spikes");
    ex->add_option("--n", ex_scale.n, "Cap on the number of neurons");
    ex->add_option("--horizon", ex_scale.horizon, "Cap on the simulated time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code(ErrorClass::config);
    }

    try {
        if (g.seedless && sim->parsed() && sim_init == "random")
            throw ConfigError("--seedless forbids --init random");

        if (sim->parsed()) {
            const ModelParams p = resolve_params(g);
            InitialState init;
            std::vector<std::string> warnings;
            if (sim_init == "homogeneous") {
                init = homogeneous_state(p, sim_v0);
            } else if (sim_init == "random") {
                init = uniform_random_state(p, sim_seed);
            } else if (sim_init == "wave") {
                if (sim_wave.empty()) throw ConfigError("--init wave needs --wave");
                init = state_from_wave(load_wave(sim_wave), p, &warnings);
            } else {
                if (sim_state.empty()) throw ConfigError("--init state needs --state");
                for (const auto& [v, s] : read_pairs(sim_state)) {
                    init.v.push_back(v);
                    init.s.push_back(s);
                }
                if (int(init.v.size()) != p.domain.n)
                    throw ConfigError("state file has " + std::to_string(init.v.size()) + " rows, n = " +
                                      std::to_string(p.domain.n));
            }
            SimOptions so;
            so.horizon = sim_horizon;
            so.sample_dt = sim_dt;
            so.levelset = sim_level;
            so.keep_snapshots = sim_snapshots;
            auto tr = simulate(init, p, so);
            tr.warnings.insert(tr.warnings.begin(), warnings.begin(), warnings.end());
            Csv events({"t", "neuron", "ordinal"});
            for (const auto& e : tr.events) events.row({e.time, double(e.neuron), double(e.ordinal)});
            emit(fs::path(g.out) / "events.csv", events.str());
            emit(fs::path(g.out) / "levelset.csv", levelset_csv(tr));
            json st = tr.speed_stats;
            st["warnings"] = tr.warnings;
            emit(fs::path(g.out) / "speed_stats.json", st.dump(2) + "\n");
            if (sim_snapshots) {
                emit(fs::path(g.out) / "snapshots_v.csv", snapshots_csv(tr, true));
                emit(fs::path(g.out) / "snapshots_s.csv", snapshots_csv(tr, false));
            }
        } else if (sw->parsed()) {
            ModelParams p = resolve_params(g);
            if (sw_beta) p.beta = *sw_beta;
            CoarseWave guess;
            if (!sw_guess.empty()) {
                guess = load_wave(sw_guess);
            } else {
                if (sw_T.empty())
                    for (int j = 0; j < sw_m; ++j) sw_T.push_back(0.8 * j);
                guess = CoarseWave::make(sw_c.value_or(0.3), sw_T);
            }
            const auto rec = solve_wave(sw_m, guess, p);
            json j = rec;
            emit(out_path(g, sw_out, "wave.json"), j.dump(2) + "\n");
            if (!sw_profile.empty()) {
                const double W = rec.wave.width();
                emit(sw_profile, profile_csv(sample_profile(rec.wave, p, -0.5 * W - 2.0, 2.0 * W + 2.0, 2001)));
            }
            if (!rec.validated) throw ValidationError("wave violates the sub-threshold condition");
        } else if (stab->parsed()) {
            ModelParams p = resolve_params(g);
            const json rec = json::parse(read_text(st_wave));
            if (st_beta) p.beta = *st_beta;
            else if (rec.contains("beta")) p.beta = rec["beta"].get<double>();
            const auto wave = load_wave(st_wave);
            const auto win = window_from(st_re_min, st_re_max, st_im_max, st_sweep);
            RootGrid grid;
            grid.n_re = st_nre;
            grid.n_im = st_nim;
            grid.threads = g.threads;
            const auto rep = classify(wave, p, win, grid);
            json j = rep;
            emit(out_path(g, st_out, "stability.json"), j.dump(2) + "\n");
            if (!st_grid.empty()) emit(st_grid, e_grid_csv(sample_E(build_matrices(wave, p), win, grid)));
        } else if (cb->parsed()) {
            ModelParams p = resolve_params(g);
            const json rec = json::parse(read_text(cb_wave));
            if (cb_beta) set_param(p, cb_param, *cb_beta);
            else if (cb_param == "beta" && rec.contains("beta")) p.beta = rec["beta"].get<double>();
            cb_opts.param = cb_param;
            cb_opts.track_stability = !cb_nostab;
            cb_opts.grid.threads = g.threads;
            const auto wave = load_wave(cb_wave);
            const auto start = solve_wave(wave.m, wave, p);
            const auto br = continue_branch(start, p, cb_opts);
            emit(fs::path(g.out) / "branch.csv", branch_csv(br));
            json ev = {{"m", br.m}, {"param", br.param}, {"termination", br.termination}, {"events", br.events}};
            emit(fs::path(g.out) / "events.json", ev.dump(2) + "\n");
        } else if (gz->parsed()) {
            ModelParams p = resolve_params(g);
            const json rec = json::parse(read_text(gz_wave));
            const auto wave = load_wave(gz_wave);
            double guess = gz_beta ? *gz_beta : get_param(p, gz_param);
            if (!gz_beta && gz_param == "beta" && rec.contains("beta")) guess = rec["beta"].get<double>();
            ModelParams q = p;
            set_param(q, gz_param, guess);
            const double TG = gz_TG ? *gz_TG : secondary_maximum(wave, q).xi_max / wave.c;
            const auto gp = solve_grazing(wave, TG, guess, p, gz_param);
            json j = gp;
            j["param"] = gz_param;
            emit(fs::path(g.out) / "grazing.json", j.dump(2) + "\n");
        } else if (hb->parsed()) {
            ModelParams p = resolve_params(g);
            const json rec = json::parse(read_text(hb_wave));
            const auto wave = load_wave(hb_wave);
            double guess = hb_beta ? *hb_beta : get_param(p, hb_param);
            if (!hb_beta && hb_param == "beta" && rec.contains("beta")) guess = rec["beta"].get<double>();
            double omega = 0.0;
            if (hb_omega) {
                omega = *hb_omega;
            } else {
                ModelParams q = p;
                set_param(q, hb_param, guess);
                RootGrid grid;
                grid.threads = g.threads;
                const auto rep = classify(wave, q, {}, grid);
                if (!rep.leading) throw NoConvergence("no nontrivial root to take omega from; pass --omega");
                omega = std::abs(rep.leading->lambda.imag());
            }
            const auto hp = solve_hopf(wave, guess, omega, p, hb_param);
            json j = hp;
            j["param"] = hb_param;
            emit(fs::path(g.out) / "hopf.json", j.dump(2) + "\n");
        } else if (gs->parsed()) {
            const ModelParams p = resolve_params(g);
            GrazingPoint start;
            if (!gs_start.empty()) {
                const json j = json::parse(read_text(gs_start));
                start.beta_G = j.at("beta_G").get<double>();
                start.wave = j.at("wave").get<CoarseWave>();
                start.T_G = j.at("T_G").get<double>();
            } else {
                ModelParams q = p;
                const auto rec = solve_wave(3, CoarseWave::make(0.3, {0.0, 0.8, 1.6}), q);
                ContinuationOptions o;
                o.direction = -1;
                o.step = 0.1;
                o.param_min = 0.5;
                o.track_stability = false;
                const auto br = continue_branch(rec, q, o);
                bool found = false;
                for (const auto& e : br.events)
                    if (e.kind == EventKind::grazing && e.refined) {
                        start = {e.beta, e.wave, e.T_G, e.residual};
                        found = true;
                    }
                if (!found) throw NoConvergence("TW_3 branch did not end at a refined grazing point");
            }
            const auto st = grazing_scaling_study(start, gs_m, p);
            emit(fs::path(g.out) / "scaling.csv", scaling_csv(st));
            emit(fs::path(g.out) / "gain.csv", gain_csv(gain_curve(st.points.back().wave)));
            json j = st;
            emit(fs::path(g.out) / "scaling.json", j.dump(2) + "\n");
            if (st.last_m < gs_m) throw NoConvergence("chain stopped at m = " + std::to_string(st.last_m) + ": " + st.failure);
        } else if (ss->parsed()) {
            std::vector<LevelsetSample> z;
            for (const auto& [t, x] : read_pairs(ss_in)) z.push_back({t, x});
            json j = speed_stats(z, ss_from, ss_to);
            emit(fs::path(g.out) / "speed_stats.json", j.dump(2) + "\n");
        } else if (vf->parsed()) {
            oracles::BatteryOptions o;
            o.evaluations = vf_n;
            o.seed = vf_seed;
            bool ok = true;
            for (const auto& c : oracles::oracle_battery(o)) {
                std::printf("%-4s %-52s value %.3e  tol %.1e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                            c.tol);
                ok = ok && c.pass;
            }
            if (!ok) throw ValidationError("oracle battery failed");
        } else if (ex->parsed()) {
            ExperimentSpec spec;
            if (!ex_spec.empty()) {
                spec = spec_from_json(json::parse(read_text(ex_spec)));
            } else if (!ex_kind.empty()) {
                spec.kind = experiment_kind_from_string(ex_kind);
            } else {
                throw ConfigError("experiment needs --kind or --spec");
            }
            if (ex_scale.m_max) spec.scale.m_max = ex_scale.m_max;
            if (ex_scale.n) spec.scale.n = ex_scale.n;
            if (ex_scale.horizon > 0) spec.scale.horizon = ex_scale.horizon;
            if (!g.config.empty()) spec.overrides.merge_patch(json::parse(read_text(g.config)));
            for (const auto& a : g.set) {
                ModelParams probe;
                apply_assignment(probe, a);  // rejects unknown keys and non-numbers
                const std::string key = a.substr(0, a.find('='));
                const double value = std::stod(a.substr(a.find('=') + 1));
                spec.overrides[override_section(key)][key] = value;
            }
            spec.threads = g.threads;
            if (g.seedless && spec.kind == ExperimentKind::fig3_waves)
                throw ConfigError("--seedless forbids fig3-waves (random initial voltages)");
            const auto b = run_experiment(spec, g.out);
            for (const auto& f : b.files) std::cout << (b.dir / f.name).string() << "\n";
            std::cout << (b.dir / "manifest.json").string() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.error_class());
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorClass::config);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorClass::config);
    }
    return 0;
}
