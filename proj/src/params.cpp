#include "spikewave/params.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spikewave/errors.hpp"

namespace spikewave {

using nlohmann::json;

std::vector<KernelTerm> ModelParams::kernel_terms() const {
    std::vector<KernelTerm> terms;
    if (a1 != 0.0) terms.push_back({a1, b1});
    if (a2 != 0.0) terms.push_back({-a2, b2});
    return terms;
}

double ModelParams::slowest_rate() const {
    if (generic) return generic->decay;
    double r = std::numeric_limits<double>::infinity();
    for (const auto& t : kernel_terms()) r = std::min(r, t.rate);
    return r;
}

double ModelParams::strip_eta() const {
    if (eta) return *eta;
    return slowest_rate() - 0.1;
}

void ModelParams::validate() const {
    auto bad = [](const std::string& msg) { throw ConfigError("invalid parameters: " + msg); };
    if (!(beta > 0.0)) bad("beta must be positive");
    if (!generic) {
        if (!(b1 > 0.0) || !(b2 > 0.0)) bad("kernel rates b1, b2 must be positive");
        if (a1 < 0.0 || a2 < 0.0) bad("kernel amplitudes must be non-negative");
        if (kernel_terms().empty()) bad("kernel has no active term");
    } else if (!(generic->decay > 0.0)) {
        bad("generic kernel decay must be positive");
    }
    if (domain.n < 1) bad("n must be at least 1");
    if (!(domain.L > 0.0)) bad("L must be positive");
    const double e = strip_eta();
    if (!(e > 0.0) || !(e < slowest_rate())) bad("eta must lie in (0, min kernel rate)");
    if (!std::isfinite(I)) bad("I must be finite");
}

double get_param(const ModelParams& p, const std::string& name) {
    if (name == "beta") return p.beta;
    if (name == "a1") return p.a1;
    if (name == "a2") return p.a2;
    if (name == "b1") return p.b1;
    if (name == "b2") return p.b2;
    if (name == "I") return p.I;
    throw ConfigError("unknown continuation parameter '" + name + "'");
}

void set_param(ModelParams& p, const std::string& name, double value) {
    if (name == "beta") p.beta = value;
    else if (name == "a1") p.a1 = value;
    else if (name == "a2") p.a2 = value;
    else if (name == "b1") p.b1 = value;
    else if (name == "b2") p.b2 = value;
    else if (name == "I") p.I = value;
    else throw ConfigError("unknown continuation parameter '" + name + "'");
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ModelParams params_from_json_text(const std::string& text) {
    ModelParams p;
    apply_params_json(p, text);
    return p;
}

void apply_params_json(ModelParams& p, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        if (j.contains("model")) {
            const auto& m = j["model"];
            read_opt(m, "beta", p.beta);
            read_opt(m, "a1", p.a1);
            read_opt(m, "a2", p.a2);
            read_opt(m, "b1", p.b1);
            read_opt(m, "b2", p.b2);
            read_opt(m, "I", p.I);
            if (m.contains("eta") && !m["eta"].is_null()) p.eta = m["eta"].get<double>();
        }
        if (j.contains("stimulus")) {
            const auto& s = j["stimulus"];
            read_opt(s, "d1", p.stimulus.d1);
            read_opt(s, "d2", p.stimulus.d2);
            read_opt(s, "tau_ext", p.stimulus.tau_ext);
        }
        if (j.contains("domain")) {
            const auto& d = j["domain"];
            read_opt(d, "L", p.domain.L);
            read_opt(d, "n", p.domain.n);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
    p.validate();
}

void apply_assignment(ModelParams& p, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string val = assignment.substr(eq + 1);
    double x = 0.0;
    try {
        std::size_t used = 0;
        x = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not a number: '" + val + "'");
    }
    if (key == "d1") p.stimulus.d1 = x;
    else if (key == "d2") p.stimulus.d2 = x;
    else if (key == "tau_ext") p.stimulus.tau_ext = x;
    else if (key == "L") p.domain.L = x;
    else if (key == "n") {
        if (x != std::floor(x)) throw ConfigError("n must be an integer");
        p.domain.n = static_cast<int>(x);
    } else if (key == "eta") p.eta = x;
    else set_param(p, key, x);
    p.validate();
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return params_from_json_text(ss.str());
}

std::string params_to_json_text(const ModelParams& p) {
    json j;
    j["model"] = {{"beta", p.beta}, {"a1", p.a1}, {"a2", p.a2}, {"b1", p.b1},
                  {"b2", p.b2},     {"I", p.I},   {"eta", p.strip_eta()}};
    j["stimulus"] = {{"d1", p.stimulus.d1}, {"d2", p.stimulus.d2}, {"tau_ext", p.stimulus.tau_ext}};
    j["domain"] = {{"L", p.domain.L}, {"n", p.domain.n}};
    return j.dump(2);
}

}  // namespace spikewave
