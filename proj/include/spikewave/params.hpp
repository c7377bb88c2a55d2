#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spikewave {

struct Stimulus {
    double d1 = 0.0;       // amplitude
    double d2 = 10.0;      // spatial rate
    double tau_ext = 2.0;  // duration of the transient drive
};

struct Domain {
    double L = 4.0;  // ring half-width
    int n = 1000;    // neuron count
};

// User-supplied coupling for kernels without closed forms. All integrals
// involving it are evaluated by adaptive quadrature.
struct GenericCoupling {
    std::function<double(double)> w;   // even connectivity kernel
    std::function<double(double)> p;   // post-synaptic potential, s >= 0
    std::function<double(double)> dp;  // derivative of p
    double decay = 1.0;                // |w(x)| <= K exp(-decay |x|)
};

// One exponential term A exp(-b |x|) of the connectivity kernel.
struct KernelTerm {
    double amplitude;
    double rate;
};

struct ModelParams {
    double beta = 4.5;
    double a1 = 11.0;
    double a2 = 7.0;
    double b1 = 5.0;
    double b2 = 3.5;
    double I = 0.9;
    std::optional<double> eta;  // defaults to slowest kernel rate - 0.1
    Stimulus stimulus;
    Domain domain;
    std::shared_ptr<const GenericCoupling> generic;

    // Active kernel terms; a zero amplitude drops its term.
    std::vector<KernelTerm> kernel_terms() const;
    double slowest_rate() const;
    double strip_eta() const;

    // Throws ConfigError on violated invariants.
    void validate() const;
};

// Dotted-path access used by continuation in a secondary parameter
// ("beta", "I", "a1", ...).
double get_param(const ModelParams& p, const std::string& name);
void set_param(ModelParams& p, const std::string& name, double value);

// JSON with optional sections model / stimulus / domain / numerics. Any
// missing field keeps its default.
ModelParams load_params(const std::string& path);
ModelParams params_from_json_text(const std::string& text);
// Patches p in place from the same JSON layout.
void apply_params_json(ModelParams& p, const std::string& text);
// "beta=6", "n=500", "d1=0.4", ...
void apply_assignment(ModelParams& p, const std::string& assignment);
std::string params_to_json_text(const ModelParams& p);

}  // namespace spikewave
