#include "spikewave/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spikewave/errors.hpp"

namespace spikewave {

namespace {

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

void to_json(json& j, const CoarseWave& w) { j = {{"m", w.m}, {"c", w.c}, {"T", w.T}}; }

void from_json(const json& j, CoarseWave& w) {
    try {
        w = CoarseWave::make(j.at("c").get<double>(), j.at("T").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("wave record: ") + e.what());
    }
    if (j.contains("m") && j["m"].get<int>() != w.m) throw ConfigError("wave record: m does not match T");
}

void to_json(json& j, const SecondaryMax& s) { j = {{"xi_max", s.xi_max}, {"value", s.value}}; }

void to_json(json& j, const WaveRecord& r) {
    j = {{"m", r.wave.m},
         {"c", r.wave.c},
         {"T", r.wave.T},
         {"beta", r.beta},
         {"residual", r.residual},
         {"validated", r.validated},
         {"secondary_max", r.secondary_max}};
}

void to_json(json& j, const StabilityRoot& r) {
    json phi = json::array();
    for (Eigen::Index i = 0; i < r.phi.size(); ++i) phi.push_back(complex_json(r.phi[i]));
    j = {{"lambda", complex_json(r.lambda)}, {"residual", r.residual}, {"phi", phi}};
}

void to_json(json& j, const StabilityReport& r) {
    j = {{"m", r.wave.m},
         {"c", r.wave.c},
         {"T", r.wave.T},
         {"beta", r.beta},
         {"classification", to_string(r.classification)},
         {"roots", r.roots},
         {"dropped", r.dropped}};
    j["leading"] = r.leading ? json(*r.leading) : json(nullptr);
}

void to_json(json& j, const BranchEvent& e) {
    j = {{"kind", to_string(e.kind)}, {"beta", e.beta},         {"wave", e.wave},
         {"residual", e.residual},    {"refined", e.refined}};
    if (e.kind == EventKind::grazing) j["T_G"] = e.T_G;
    if (e.kind == EventKind::hopf) j["omega"] = e.omega;
}

void to_json(json& j, const GrazingPoint& g) {
    j = {{"beta_G", g.beta_G}, {"wave", g.wave}, {"T_G", g.T_G}, {"residual", g.residual}};
}

void to_json(json& j, const HopfPoint& h) {
    j = {{"beta_HB", h.beta_HB}, {"wave", h.wave}, {"omega_HB", h.omega_HB}, {"residual", h.residual}};
}

void to_json(json& j, const ScalingStudy& s) {
    json rows = json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"m", r.m}, {"beta_G", r.beta_G}, {"c", r.c}, {"T_m", r.T_m}, {"width", r.width}});
    j = {{"rows", rows},
         {"last_m", s.last_m},
         {"failure", s.failure},
         {"slope_c", s.slope_c},
         {"slope_T", s.slope_T}};
}

void to_json(json& j, const SpeedStats& s) {
    j = {{"c_bar", s.c_bar}, {"sigma_c", s.sigma_c}, {"c_min", s.c_min}, {"c_max", s.c_max}, {"q", s.samples.size()}};
}

void to_json(json& j, const SaltatoryFit& f) {
    j = {{"slope", f.slope},
         {"n", f.n},
         {"amplitude", f.amplitude},
         {"reliable", f.reliable},
         {"diagnostic", f.diagnostic}};
}

CoarseWave load_wave(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse wave file " + path.string() + ": " + e.what());
    }
    const json& w = j.contains("wave") ? j["wave"] : j;
    return w.get<CoarseWave>();
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

Csv& Csv::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw ValidationError("csv: row width does not match header");
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) text_ += ',';
        text_ += cells[k];
    }
    text_ += '\n';
    return *this;
}

Csv& Csv::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    return row(cells);
}

std::string branch_csv(const Branch& b) {
    std::vector<std::string> head{b.param, "c", "validated", "secondary_max", "lead_re", "lead_im", "stability"};
    for (int j = 1; j <= b.m; ++j) head.push_back("T" + std::to_string(j));
    Csv csv(head);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& q : b.points) {
        std::vector<std::string> cells{format_double(q.beta), format_double(q.wave.c), q.validated ? "1" : "0",
                                       format_double(q.secondary_max.value)};
        const bool lead = q.stability && q.stability->leading;
        cells.push_back(format_double(lead ? q.stability->leading->lambda.real() : nan));
        cells.push_back(format_double(lead ? q.stability->leading->lambda.imag() : nan));
        cells.push_back(q.stability ? to_string(q.stability->classification) : "");
        for (double t : q.wave.T) cells.push_back(format_double(t));
        csv.row(cells);
    }
    return csv.str();
}

std::string branch_events_csv(const Branch& b) {
    Csv csv({"kind", b.param, "c", "T_G", "omega", "residual", "refined"});
    for (const auto& e : b.events)
        csv.row(std::vector<std::string>{to_string(e.kind), format_double(e.beta), format_double(e.wave.c),
                                         format_double(e.T_G), format_double(e.omega), format_double(e.residual),
                                         e.refined ? "1" : "0"});
    return csv.str();
}

std::string scaling_csv(const ScalingStudy& s) {
    Csv csv({"m", "beta_G", "c", "T_m", "width"});
    for (const auto& r : s.rows) csv.row({double(r.m), r.beta_G, r.c, r.T_m, r.width});
    return csv.str();
}

std::string gain_csv(const std::vector<GainSample>& g) {
    Csv csv({"x", "rate"});
    for (const auto& s : g) csv.row({s.x, s.rate});
    return csv.str();
}

std::string profile_csv(const std::vector<ProfileSample>& prof) {
    Csv csv({"xi", "nu", "sigma"});
    for (const auto& s : prof) csv.row({s.xi, s.nu, s.sigma});
    return csv.str();
}

std::string roots_csv(const StabilityReport& r) {
    Csv csv({"re", "im", "residual", "trivial"});
    for (const auto& q : r.roots)
        csv.row({q.lambda.real(), q.lambda.imag(), q.residual, is_trivial_root(q.lambda) ? 1.0 : 0.0});
    return csv.str();
}

std::string e_grid_csv(const std::vector<EGridSample>& g) {
    Csv csv({"re", "im", "ReE", "ImE"});
    for (const auto& s : g) csv.row({s.re, s.im, s.E.real(), s.E.imag()});
    return csv.str();
}

std::string raster_csv(const NetworkTrajectory& tr) {
    Csv csv({"t", "neuron", "x", "ordinal"});
    for (const auto& e : tr.events) csv.row({e.time, double(e.neuron), tr.position(e.neuron), double(e.ordinal)});
    return csv.str();
}

std::string levelset_csv(const NetworkTrajectory& tr) {
    Csv csv({"t", "z"});
    for (const auto& s : tr.levelset) csv.row({s.t, s.z});
    return csv.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace spikewave
