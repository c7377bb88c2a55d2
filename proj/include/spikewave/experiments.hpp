#pragma once

// Drivers that reproduce the figure data sets at desk scale. Each run
// writes a bundle directory with the resolved configuration, CSV/JSON
// outputs and a manifest carrying CRC-32 checksums of every file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spikewave/params.hpp"

namespace spikewave {

enum class ExperimentKind {
    fig2_bump,
    fig3_waves,
    fig4_profiles,
    fig5_tw3_branch,
    fig6_nested,
    fig7_grazing,
    fig8_bump_stats,
    fig9_composite,
    figS1_excitatory,
};

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);
std::vector<std::string> experiment_kinds();

// Zero selects the experiment's own default.
struct ExperimentScale {
    int m_max = 0;
    int n = 0;
    double horizon = 0.0;
};

// Desk-scale ceilings, checked before any work starts.
inline constexpr int kMaxSpikes = 60;
inline constexpr int kMaxNeurons = 5000;
inline constexpr double kMaxHorizon = 2000.0;

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::fig5_tw3_branch;
    // Parameter patch in the config-file layout (model / stimulus / domain),
    // applied on top of the experiment's preset.
    nlohmann::json overrides = nlohmann::json::object();
    ExperimentScale scale;
    int threads = 1;

    // Throws ConfigError when a cap is exceeded or a field is malformed.
    void validate() const;
};

nlohmann::json spec_to_json(const ExperimentSpec& s);
// Accepts either the bare spec or a bundle config.json ({"experiment": ...}).
ExperimentSpec spec_from_json(const nlohmann::json& j);

// Preset parameters with the overrides applied.
ModelParams experiment_params(const ExperimentSpec& s);

struct BundleFile {
    std::string name;
    std::uintmax_t bytes = 0;
    std::uint32_t crc32 = 0;
};

struct Bundle {
    std::filesystem::path dir;
    std::vector<BundleFile> files;  // excludes manifest.json
    nlohmann::json summary;         // also written to summary.json
};

Bundle run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

std::uint32_t crc32_of(const std::string& bytes);

}  // namespace spikewave
