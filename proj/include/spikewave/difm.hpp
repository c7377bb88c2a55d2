#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spikewave/network.hpp"
#include "spikewave/params.hpp"
#include "spikewave/profile.hpp"

namespace spikewave {

struct InitialState {
    std::vector<double> v;
    std::vector<double> s;
};

// v_i = v0, s_i = s0 for all neurons.
InitialState homogeneous_state(const ModelParams& p, double v0 = 0.5, double s0 = 0.0);
// v_i ~ U(0, 1) i.i.d. from a 64-bit Mersenne twister, s_i = 0.
InitialState uniform_random_state(const ModelParams& p, std::uint64_t seed);
// v_i = nu(-x_i), s_i = sigma(-x_i). Appends a warning when the wave is
// wider than L / 2.
InitialState state_from_wave(const CoarseWave& wave, const ModelParams& p, std::vector<std::string>* warnings = nullptr);

// Exact propagation of one neuron over dt with constant drive.
struct NeuronState {
    double v;
    double s;
};
NeuronState propagate(NeuronState x, double drive, double beta, double dt);

// Earliest upcrossing of v = 1 in (0, horizon] for a single neuron, or
// nullopt. Time tolerance 1e-12.
std::optional<double> firing_time(NeuronState x, double drive, double beta, double horizon);

class Network {
public:
    Network(const ModelParams& p, const InitialState& init, double t0 = 0.0);

    double time() const { return t_; }
    int size() const { return n_; }
    const std::vector<double>& v() const { return v_; }
    const std::vector<double>& s() const { return s_; }
    double position(int i) const { return -L_ + 2.0 * L_ * i / n_; }
    double coupling(int l, int k) const;  // W_lk
    double drive(int i) const;            // at the current time

    // Advances to the earliest firing in (t, t_stop] and returns it, or
    // advances to t_stop and returns nullopt.
    std::optional<FiringEvent> step_to_next_event(double t_stop);
    void apply_reset(const FiringEvent& ev);
    // Propagates all neurons without events (caller guarantees none occur).
    void advance_to(double t);

private:
    ModelParams p_;
    int n_;
    double L_;
    double t_;
    std::vector<double> v_, s_;
    std::vector<double> wrow_;  // W as a function of index distance (circulant)
    std::vector<double> stim_;  // d1 / cosh(d2 x_i)
    std::vector<int> count_;
    double gmax_;               // sup_t of the synaptic response of v to unit s

    bool stimulus_on() const { return t_ < p_.stimulus.tau_ext && p_.stimulus.d1 != 0.0; }
};

struct SimOptions {
    double horizon = 50.0;
    double sample_dt = 0.1;        // <= 0 disables sampling
    bool keep_snapshots = false;
    double levelset = 0.1;
    double t_start = 0.0;
};

NetworkTrajectory simulate(const InitialState& init, const ModelParams& p, const SimOptions& opts);

// Rightmost ring location where the linearly interpolated s falls through level,
// or nullopt.
std::optional<double> levelset_position(const std::vector<double>& s, double L, double level);

// Level-set track from stored snapshots; samples where the level is not
// crossed are skipped. Positions are unwrapped across the ring.
std::vector<LevelsetSample> track_levelset(const NetworkTrajectory& traj, double level = 0.1);
SpeedStats speed_stats(const std::vector<LevelsetSample>& z, double t_from = -1e300, double t_to = 1e300);

struct SaltatoryFit {
    double slope = 0.0;
    std::vector<double> n;
    std::vector<double> amplitude;
    bool reliable = false;
    std::string diagnostic;
};
// Peak-to-peak oscillation of c_k against n, log-log slope.
SaltatoryFit fit_saltatory_amplitude(const std::vector<int>& n, const std::vector<SpeedStats>& stats);

// Spikes per passage: each neuron's firings are split into bursts at gaps
// longer than burst_gap; bursts lying inside [t_from, t_to] are counted and
// the most common size is returned (0 when there are none).
int count_fronts(const NetworkTrajectory& traj, double t_from, double t_to, double burst_gap = 2.0);

}  // namespace spikewave
