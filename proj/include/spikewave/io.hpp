#pragma once

// JSON and CSV serialization of the records produced by the solvers and the
// simulator. Doubles are written in shortest round-trip form so reruns are
// byte-identical.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spikewave/continuation.hpp"
#include "spikewave/difm.hpp"
#include "spikewave/stability.hpp"
#include "spikewave/wave_solver.hpp"

namespace spikewave {

using json = nlohmann::json;

void to_json(json& j, const CoarseWave& w);
void from_json(const json& j, CoarseWave& w);
void to_json(json& j, const SecondaryMax& s);
void to_json(json& j, const WaveRecord& r);
void to_json(json& j, const StabilityRoot& r);
void to_json(json& j, const StabilityReport& r);
void to_json(json& j, const BranchEvent& e);
void to_json(json& j, const GrazingPoint& g);
void to_json(json& j, const HopfPoint& h);
void to_json(json& j, const ScalingStudy& s);
void to_json(json& j, const SpeedStats& s);
void to_json(json& j, const SaltatoryFit& f);

// Reads a wave from a file holding either a bare {c, T} object or any
// record with a "wave" member.
CoarseWave load_wave(const std::filesystem::path& path);

std::string format_double(double x);

class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    Csv& row(const std::vector<double>& values);
    Csv& row(const std::vector<std::string>& cells);
    std::string str() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

// One row per point: parameter, c, validated, secondary maximum, leading
// root (NaN when not evaluated), classification, T_1..T_m.
std::string branch_csv(const Branch& b);
std::string branch_events_csv(const Branch& b);
std::string scaling_csv(const ScalingStudy& s);
std::string gain_csv(const std::vector<GainSample>& g);
std::string profile_csv(const std::vector<ProfileSample>& prof);
std::string roots_csv(const StabilityReport& r);
std::string e_grid_csv(const std::vector<EGridSample>& g);
std::string raster_csv(const NetworkTrajectory& tr);
std::string levelset_csv(const NetworkTrajectory& tr);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace spikewave
