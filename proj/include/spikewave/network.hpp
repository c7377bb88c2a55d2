#pragma once

#include <string>
#include <vector>

namespace spikewave {

struct FiringEvent {
    int neuron = 0;
    double time = 0.0;
    int ordinal = 0;  // per-neuron firing count, starting at 1
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> v;
    std::vector<double> s;
};

struct SpeedStats {
    double c_bar = 0.0;
    double sigma_c = 0.0;
    double c_min = 0.0;
    double c_max = 0.0;
    std::vector<double> samples;
};

struct LevelsetSample {
    double t;
    double z;
};

struct NetworkTrajectory {
    int n = 0;
    double L = 0.0;
    std::vector<FiringEvent> events;
    std::vector<Snapshot> samples;
    std::vector<LevelsetSample> levelset;
    SpeedStats speed_stats;
    std::vector<std::string> warnings;

    // Neuron positions x_i = -L + (2L/n) i on the ring [-L, L).
    double position(int i) const { return -L + 2.0 * L * i / n; }
};

}  // namespace spikewave
