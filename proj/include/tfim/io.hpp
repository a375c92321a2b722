// io.hpp — configuration resolution, subcommand orchestration, and
// deterministic CSV/JSON emission.
//
// Every subcommand writes a UTF-8 CSV with a header row (values at 17
// significant digits, lossless round-trip) plus a JSON manifest sidecar named
// <out>.manifest.json. Reruns with equal manifests produce byte-identical
// CSV bodies.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfim/dynamics.hpp"

namespace tfim {

inline constexpr const char* kVersion = "0.1.0";

using KeyValues = std::map<std::string, std::string>;

// Flat "key = value" text; '#' starts a comment. Unknown keys are rejected at
// resolution time.
KeyValues read_config_file(const std::string& path);

struct ResolvedConfig {
    std::string subcommand;
    int n = 1000;
    double h0 = 10.0;
    double tau = 100.0;
    double alpha = 1e-2;
    double t_eff = 1.0;
    double omega_c = 10.0;
    EvolutionKind kind = EvolutionKind::Full;
    double dt_max = 1e-2;
    int jobs = 0;  // 0 = all hardware threads
    std::string out = "out.csv";
    // Subcommand-specific knobs.
    double h = 0.0;         // thermal / obc-thermal / relax
    double t_end = 2000.0;  // relax
    double tau_min = 10.0, tau_max = 1e4;
    int tau_pts_per_decade = 24;
    int series_points = 512;
    std::vector<double> alphas{1e-3, 1e-2};  // phase-diagram
    double t_lo = 0.25, t_hi = 5.0, t_tol = 0.05;

    AnnealConfig anneal_config() const;
};

// Flags override config-file values. Unknown key, non-numeric value, or a
// violated invariant raises ConfigError naming the key.
ResolvedConfig parse_config(const std::string& subcommand, const KeyValues& flags,
                            const std::optional<std::string>& config_path);

struct RunManifest {
    std::string subcommand;
    std::string version;
    KeyValues params;         // fully resolved, stringified at 17 digits
    double dt_effective = 0;  // step used after clamping/convergence (if any)
    int dt_halvings = 0;
    long rows = 0;
    double wall_time_s = 0;

    std::string to_json() const;
};

// Runs one subcommand end to end; writes <out> and <out>.manifest.json.
RunManifest run_subcommand(const ResolvedConfig& config);

// 17-significant-digit decimal formatting (round-trips any double).
std::string format17(double v);

// Write-then-rename so readers never observe partial files.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace tfim
