#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spikewave/params.hpp"
#include "spikewave/profile.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/wave_solver.hpp"

namespace spikewave {

struct ContinuationOptions {
    std::string param = "beta";
    double step = 0.05;
    double step_min = 1e-6;
    double step_max = 0.5;
    int direction = 1;  // sign of the initial parameter change
    int max_points = 200;
    double param_min = -std::numeric_limits<double>::infinity();
    double param_max = std::numeric_limits<double>::infinity();
    double tol = 1e-11;
    bool track_stability = true;
    // Stop once c * max(T_{i+1} - T_i) * slowest kernel rate exceeds this:
    // the wave has split into non-interacting groups.
    double decouple_rate = 25.0;
    int stability_every = 0;  // 0: 1 for m <= 10, 5 above
    RootWindow window;
    RootGrid grid;
};

struct BranchPoint {
    double beta = 0.0;  // value of the continuation parameter
    CoarseWave wave;
    std::optional<StabilityReport> stability;
    SecondaryMax secondary_max;
    bool validated = false;
    std::vector<double> tangent;  // (c, T_2..T_m, parameter), unit length
};

enum class EventKind { grazing, hopf, fold };
const char* to_string(EventKind k);

struct BranchEvent {
    EventKind kind;
    double beta = 0.0;
    CoarseWave wave;
    double T_G = 0.0;    // grazing only
    double omega = 0.0;  // hopf only
    double residual = 0.0;  // of the refined extended system
    bool refined = false;
};

struct Branch {
    int m = 0;
    std::string param = "beta";
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;
    std::string termination;  // grazing | max_points | param_bounds | corrector_failure | decoupled
};

Branch continue_branch(const WaveRecord& start, const ModelParams& p, const ContinuationOptions& opts = {});

struct GrazingPoint {
    double beta_G = 0.0;
    CoarseWave wave;
    double T_G = 0.0;
    double residual = 0.0;
};

struct HopfPoint {
    double beta_HB = 0.0;
    CoarseWave wave;
    double omega_HB = 0.0;
    double residual = 0.0;  // max of threshold residuals and |E(i omega)| / scale
};

// `param` names the parameter solved for alongside the wave (beta by default).
GrazingPoint solve_grazing(const CoarseWave& wave, double T_G, double beta, const ModelParams& p,
                           const std::string& param = "beta", double tol = 1e-11);
HopfPoint solve_hopf(const CoarseWave& wave, double beta, double omega, const ModelParams& p,
                     const std::string& param = "beta", double tol = 1e-11);

// Loci in a secondary parameter: step `secondary` by `step` for `steps`
// steps and re-solve the extended system each time.
struct LocusPoint {
    double secondary;
    double primary;
    CoarseWave wave;
    double extra;  // T_G or omega
};
std::vector<LocusPoint> continue_grazing_locus(const GrazingPoint& start, const ModelParams& p,
                                               const std::string& secondary, double step, int steps,
                                               const std::string& primary = "beta");
std::vector<LocusPoint> continue_hopf_locus(const HopfPoint& start, const ModelParams& p,
                                            const std::string& secondary, double step, int steps,
                                            const std::string& primary = "beta");

// Seed for the (m+1)-spike grazing point from an m-spike one.
CoarseWave bootstrap_seed(const GrazingPoint& g, double* T_G_out);

struct ScalingRow {
    int m;
    double beta_G;
    double c;
    double T_m;
    double width;  // c T_m
};
struct ScalingStudy {
    std::vector<ScalingRow> rows;
    std::vector<GrazingPoint> points;
    int last_m = 0;
    std::string failure;  // empty when the chain completed
    double slope_c = 0.0;  // log-log slopes against m
    double slope_T = 0.0;
};
ScalingStudy grazing_scaling_study(const GrazingPoint& start, int m_max, const ModelParams& p);

struct GainSample {
    double x;     // c T_i
    double rate;  // 1 / (T_{i+1} - T_i)
};
std::vector<GainSample> gain_curve(const CoarseWave& wave);

}  // namespace spikewave
