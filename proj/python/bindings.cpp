// Thin bindings: records cross the boundary as JSON text and are decoded
// by the Python package. Library errors map onto NumericalError,
// ValidationError and ConfigError, all derived from SpikewaveError.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spikewave/continuation.hpp"
#include "spikewave/difm.hpp"
#include "spikewave/errors.hpp"
#include "spikewave/experiments.hpp"
#include "spikewave/io.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/verify.hpp"
#include "spikewave/wave_solver.hpp"

namespace py = pybind11;
using namespace spikewave;

namespace {

ModelParams params_of(const std::vector<std::string>& assignments) {
    ModelParams p;
    for (const auto& a : assignments) apply_assignment(p, a);
    p.validate();
    return p;
}

std::string solve(int m, double c, std::vector<double> T, const std::vector<std::string>& params) {
    const ModelParams p = params_of(params);
    json j = solve_wave(m, CoarseWave::make(c, std::move(T)), p);
    return j.dump();
}

std::string stability(double c, std::vector<double> T, const std::vector<std::string>& params, double re_min,
                      double re_max, double im_max, int n_re, int n_im, int threads) {
    const ModelParams p = params_of(params);
    RootWindow w;
    w.re_min = re_min;
    w.re_max = re_max;
    w.im_max = im_max;
    RootGrid g;
    g.n_re = n_re;
    g.n_im = n_im;
    g.threads = threads;
    json j = classify(CoarseWave::make(c, std::move(T)), p, w, g);
    return j.dump();
}

std::string branch(double c, std::vector<double> T, const std::vector<std::string>& params,
                   const std::string& param, int direction, double step, double param_min, double param_max,
                   int max_points, bool track_stability) {
    const ModelParams p = params_of(params);
    const auto w = CoarseWave::make(c, std::move(T));
    ContinuationOptions o;
    o.param = param;
    o.direction = direction;
    o.step = step;
    o.param_min = param_min;
    o.param_max = param_max;
    o.max_points = max_points;
    o.track_stability = track_stability;
    const auto br = continue_branch(solve_wave(w.m, w, p), p, o);
    json j = {{"m", br.m}, {"param", br.param}, {"termination", br.termination}, {"events", br.events},
              {"csv", branch_csv(br)}};
    return j.dump();
}

std::string simulate_network(const std::vector<std::string>& params, const std::string& init, std::uint64_t seed,
                             double v0, double horizon, double c, std::vector<double> T) {
    const ModelParams p = params_of(params);
    InitialState s;
    std::vector<std::string> warnings;
    if (init == "homogeneous") s = homogeneous_state(p, v0);
    else if (init == "random") s = uniform_random_state(p, seed);
    else if (init == "wave") s = state_from_wave(CoarseWave::make(c, std::move(T)), p, &warnings);
    else throw ConfigError("init must be homogeneous, random or wave");
    const auto tr = simulate(s, p, {.horizon = horizon});
    json ev = json::array(), ls = json::array();
    for (const auto& e : tr.events) ev.push_back({e.time, e.neuron, e.ordinal});
    for (const auto& z : tr.levelset) ls.push_back({z.t, z.z});
    warnings.insert(warnings.end(), tr.warnings.begin(), tr.warnings.end());
    json j = {{"n", tr.n}, {"L", tr.L}, {"events", ev}, {"levelset", ls},
              {"speed_stats", tr.speed_stats}, {"warnings", warnings}};
    return j.dump();
}

std::string experiment(const std::string& spec_json, const std::string& out_dir) {
    json j;
    try {
        j = json::parse(spec_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment spec: ") + e.what());
    }
    const auto spec = spec_from_json(j);
    return run_experiment(spec, out_dir).summary.dump();
}

std::string verify(int evaluations, std::uint64_t seed) {
    oracles::BatteryOptions o;
    o.evaluations = evaluations;
    o.seed = seed;
    json out = json::array();
    for (const auto& c : oracles::oracle_battery(o))
        out.push_back({{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"pass", c.pass}});
    return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-spike travelling waves of integrate-and-fire networks";
    auto& base = py::register_exception<Error>(m, "SpikewaveError");
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    m.def("solve_wave", &solve);
    m.def("stability", &stability);
    m.def("continue_branch", &branch);
    m.def("simulate", &simulate_network);
    m.def("run_experiment", &experiment);
    m.def("verify", &verify);
    m.def("experiment_kinds", &experiment_kinds);
}
