#pragma once

#include "tunnelkit/analysis.hpp"
#include "tunnelkit/error.hpp"
#include "tunnelkit/io.hpp"
#include "tunnelkit/profile.hpp"
#include "tunnelkit/scattering.hpp"
#include "tunnelkit/wavepacket.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tunnelkit {

inline constexpr const char* kVersion = "0.1.0";

enum class Task { transmission_scan, arrival_density, tunneling_time_scan, resonance_scan, decay_fit, regime_compare };

std::string to_string(Task t);

struct MomentumGrid {
    double k_min = 0;
    double k_max = 0;
    std::size_t n = 0;
    std::vector<double> points() const;
};

struct TunnelingScan {
    std::vector<double> V0;
    std::size_t n = 200;
    double f_lo = 0.01; // fractions of the tunneling momentum limit
    double f_hi = 0.99;
};

// A validated configuration. Every field path in errors is relative to the
// document root, e.g. "barrier.segments[0].w".
struct Scenario {
    std::string name;
    Task task = Task::arrival_density;
    PotentialProfile profile;
    std::optional<DoubleBarrier> double_barrier;
    std::optional<WavePacketSpec> packet;
    std::optional<DetectorSpec> detector;
    std::optional<TimeGrid> time_grid; // absolute times
    std::optional<MomentumGrid> k_grid;
    TunnelingScan tunneling;
    std::optional<std::pair<double, double>> resonance_window;
    FitMode fit_mode = FitMode::peaks;
    FitWindow fit_window;
    double rel_tol = 1e-8;
    Composition composition = Composition::scaled;
    unsigned threads = 0;
    nlohmann::json config;
    Warnings warnings; // raised while resolving the configuration
};

Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::filesystem::path& path);

struct RunResult {
    std::vector<std::filesystem::path> outputs; // CSVs, then the manifest
    Warnings warnings;
    nlohmann::json manifest;
};

// Runs the task, writes <name>*.csv and <name>_manifest.json into out_dir.
// threads > 0 overrides the configuration.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir, unsigned threads = 0);

// Direct quadrature against every regime formula that applies to the packet
// shape: columns t, P_direct, then P_<regime>, rel_<regime> per regime.
// Off-regime formulas are still evaluated, with a warning.
struct RegimeComparison {
    CsvTable pointwise{{}};
    CsvTable summary{{}}; // quantity, direct, formula for t0, dt, gamma
    nlohmann::json diagnostics;
};

RegimeComparison compare_regimes(const Scenario& scenario, Warnings* warnings, unsigned threads = 0);

} // namespace tunnelkit
