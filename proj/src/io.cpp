#include "tfim/io.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tfim/analysis.hpp"
#include "tfim/thermo.hpp"

namespace tfim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::string join17(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format17(v[i]);
    }
    return s;
}

}  // namespace

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw NumericalError("cannot open '" + tmp + "' for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw NumericalError("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

KeyValues read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config '" + path + "' line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

ResolvedConfig parse_config(const std::string& subcommand, const KeyValues& flags,
                            const std::optional<std::string>& config_path) {
    KeyValues merged;
    if (config_path) merged = read_config_file(*config_path);
    for (const auto& [key, value] : flags) merged[key] = value;

    ResolvedConfig cfg;
    cfg.subcommand = subcommand;
    for (const auto& [key, value] : merged) {
        if (key == "n") cfg.n = parse_int(key, value);
        else if (key == "h0") cfg.h0 = parse_double(key, value);
        else if (key == "tau") cfg.tau = parse_double(key, value);
        else if (key == "alpha") cfg.alpha = parse_double(key, value);
        else if (key == "t_eff") cfg.t_eff = parse_double(key, value);
        else if (key == "omega_c") cfg.omega_c = parse_double(key, value);
        else if (key == "kind") cfg.kind = evolution_kind_from_string(value);
        else if (key == "dt_max") cfg.dt_max = parse_double(key, value);
        else if (key == "jobs") cfg.jobs = parse_int(key, value);
        else if (key == "out") cfg.out = value;
        else if (key == "h") cfg.h = parse_double(key, value);
        else if (key == "t_end") cfg.t_end = parse_double(key, value);
        else if (key == "tau_min") cfg.tau_min = parse_double(key, value);
        else if (key == "tau_max") cfg.tau_max = parse_double(key, value);
        else if (key == "tau_pts_per_decade") cfg.tau_pts_per_decade = parse_int(key, value);
        else if (key == "series_points") cfg.series_points = parse_int(key, value);
        else if (key == "alphas") cfg.alphas = parse_double_list(key, value);
        else if (key == "t_lo") cfg.t_lo = parse_double(key, value);
        else if (key == "t_hi") cfg.t_hi = parse_double(key, value);
        else if (key == "t_tol") cfg.t_tol = parse_double(key, value);
        else throw ConfigError("unknown key '" + key + "'");
    }

    if (cfg.n < 2 || cfg.n % 2 != 0) {
        throw ConfigError("key 'n': chain size must be even and >= 2, got " +
                          std::to_string(cfg.n));
    }
    if (!(cfg.h0 > 1.0)) throw ConfigError("key 'h0': must exceed 1");
    if (!(cfg.tau > 0.0)) throw ConfigError("key 'tau': must be positive");
    if (!(cfg.alpha >= 0.0)) throw ConfigError("key 'alpha': must be >= 0");
    if (!(cfg.t_eff > 0.0)) throw ConfigError("key 't_eff': must be positive");
    if (!(cfg.omega_c > 0.0)) throw ConfigError("key 'omega_c': must be positive");
    if (!(cfg.dt_max > 0.0)) throw ConfigError("key 'dt_max': must be positive");
    if (cfg.jobs < 0) throw ConfigError("key 'jobs': must be >= 0");
    if (!(cfg.h >= 0.0)) throw ConfigError("key 'h': must be >= 0");
    if (!(cfg.t_end > 0.0)) throw ConfigError("key 't_end': must be positive");
    if (!(cfg.tau_min > 0.0) || !(cfg.tau_max > cfg.tau_min)) {
        throw ConfigError("keys 'tau_min'/'tau_max': need 0 < tau_min < tau_max");
    }
    if (cfg.tau_pts_per_decade < 1) {
        throw ConfigError("key 'tau_pts_per_decade': must be >= 1");
    }
    if (cfg.series_points < 2) throw ConfigError("key 'series_points': must be >= 2");
    for (double a : cfg.alphas) {
        if (!(a > 0.0)) throw ConfigError("key 'alphas': entries must be positive");
    }
    if (!(cfg.t_lo > 0.0) || !(cfg.t_hi > cfg.t_lo)) {
        throw ConfigError("keys 't_lo'/'t_hi': need 0 < t_lo < t_hi");
    }
    if (!(cfg.t_tol > 0.0)) throw ConfigError("key 't_tol': must be positive");
    if (cfg.out.empty()) throw ConfigError("key 'out': must not be empty");
    return cfg;
}

AnnealConfig ResolvedConfig::anneal_config() const {
    AnnealConfig ac{n, Schedule(h0, tau), BathSpec(alpha, omega_c, t_eff),
                    kind, IntegratorPolicy{}, jobs};
    ac.policy.dt_max = dt_max;
    return ac;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["version"] = version;
    nlohmann::ordered_json p;
    for (const auto& [key, value] : params) p[key] = value;
    j["params"] = p;
    j["dt_effective"] = dt_effective;
    j["dt_halvings"] = dt_halvings;
    j["rows"] = rows;
    j["wall_time_s"] = wall_time_s;
    return j.dump(2) + "\n";
}

namespace {

KeyValues manifest_params(const ResolvedConfig& cfg) {
    KeyValues p;
    p["n"] = std::to_string(cfg.n);
    p["h0"] = format17(cfg.h0);
    p["tau"] = format17(cfg.tau);
    p["alpha"] = format17(cfg.alpha);
    p["t_eff"] = format17(cfg.t_eff);
    p["omega_c"] = format17(cfg.omega_c);
    p["kind"] = to_string(cfg.kind);
    p["dt_max"] = format17(cfg.dt_max);
    p["jobs"] = std::to_string(cfg.jobs);
    p["out"] = cfg.out;
    p["h"] = format17(cfg.h);
    p["t_end"] = format17(cfg.t_end);
    p["tau_min"] = format17(cfg.tau_min);
    p["tau_max"] = format17(cfg.tau_max);
    p["tau_pts_per_decade"] = std::to_string(cfg.tau_pts_per_decade);
    p["series_points"] = std::to_string(cfg.series_points);
    p["alphas"] = join17(cfg.alphas);
    p["t_lo"] = format17(cfg.t_lo);
    p["t_hi"] = format17(cfg.t_hi);
    p["t_tol"] = format17(cfg.t_tol);
    return p;
}

struct CsvResult {
    std::string body;
    long rows = 0;
    double dt_effective = 0.0;
    int dt_halvings = 0;
    KeyValues extra;  // extra manifest annotations
};

CsvResult do_anneal(const ResolvedConfig& cfg) {
    const ChainSeries series = anneal_chain_series(cfg.anneal_config(), cfg.series_points);
    CsvResult r;
    r.body = "t,h,n_def,n_thermal_inst\n";
    for (const auto& pt : series.points) {
        const double inst = thermal_defects_full(pt.h, cfg.t_eff, cfg.n);
        r.body += format17(pt.t) + "," + format17(pt.h) + "," + format17(pt.n_def) +
                  "," + format17(inst) + "\n";
        ++r.rows;
    }
    r.dt_effective = series.dt;
    r.dt_halvings = series.dt_halvings;
    return r;
}

CsvResult do_sweep_tau(const ResolvedConfig& cfg) {
    const auto taus = log_grid(cfg.tau_min, cfg.tau_max, cfg.tau_pts_per_decade);
    const DefectCurve curve = sweep_tau(cfg.anneal_config(), taus);
    CsvResult r;
    r.body = "tau,n_def,kind\n";
    for (std::size_t i = 0; i < curve.tau.size(); ++i) {
        r.body += format17(curve.tau[i]) + "," + format17(curve.n_def[i]) + "," +
                  to_string(curve.kind) + "\n";
        ++r.rows;
    }
    return r;
}

CsvResult do_relax(const ResolvedConfig& cfg) {
    IntegratorPolicy policy;
    policy.dt_max = cfg.dt_max;
    const ChainSeries series =
        relax_chain(cfg.n, cfg.h, BathSpec(cfg.alpha, cfg.omega_c, cfg.t_eff),
                    cfg.t_end, policy, cfg.jobs, cfg.series_points);
    CsvResult r;
    r.body = "t,n_def\n";
    for (const auto& pt : series.points) {
        r.body += format17(pt.t) + "," + format17(pt.n_def) + "\n";
        ++r.rows;
    }
    r.dt_effective = series.dt;
    r.dt_halvings = series.dt_halvings;
    return r;
}

CsvResult do_thermal(const ResolvedConfig& cfg) {
    CsvResult r;
    r.body = "h,t_eff,n,n_def\n";
    r.body += format17(cfg.h) + "," + format17(cfg.t_eff) + "," +
              std::to_string(cfg.n) + "," +
              format17(thermal_defects_full(cfg.h, cfg.t_eff, cfg.n)) + "\n";
    r.rows = 1;
    return r;
}

CsvResult do_obc_thermal(const ResolvedConfig& cfg) {
    CsvResult r;
    r.body = "n,h,t_eff,n_def_obc\n";
    r.body += std::to_string(cfg.n) + "," + format17(cfg.h) + "," +
              format17(cfg.t_eff) + "," +
              format17(thermal_defects_obc(cfg.n, cfg.h, cfg.t_eff)) + "\n";
    r.rows = 1;
    return r;
}

const char* boundary_status_name(BoundaryStatus s) {
    switch (s) {
        case BoundaryStatus::Found: return "found";
        case BoundaryStatus::NoSignChange: return "no-sign-change";
        case BoundaryStatus::PossiblyBelowBracket: return "possibly-below-bracket";
    }
    return "?";
}

CsvResult do_phase_diagram(const ResolvedConfig& cfg) {
    OwpScan scan;
    scan.n_sites = cfg.n;
    scan.h0 = cfg.h0;
    scan.omega_c = cfg.omega_c;
    scan.taus = log_grid(cfg.tau_min, cfg.tau_max, cfg.tau_pts_per_decade);
    scan.policy.dt_max = cfg.dt_max;
    scan.jobs = cfg.jobs;
    CsvResult r;
    r.body = "alpha,T_up,T_low,T_low_resolution\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double alpha : cfg.alphas) {
        const PhaseBoundaryPoint pt =
            phase_boundary(scan, alpha, cfg.t_lo, cfg.t_hi, cfg.t_tol);
        const double t_up =
            pt.t_up.status == BoundaryStatus::Found ? pt.t_up.value : nan;
        const double t_low =
            pt.t_low.status == BoundaryStatus::Found ? pt.t_low.value : nan;
        r.body += format17(alpha) + "," + format17(t_up) + "," + format17(t_low) +
                  "," + format17(pt.t_low.resolution) + "\n";
        ++r.rows;
        r.extra["t_up_status@" + format17(alpha)] = boundary_status_name(pt.t_up.status);
        r.extra["t_low_status@" + format17(alpha)] =
            boundary_status_name(pt.t_low.status);
    }
    return r;
}

CsvResult do_additivity(const ResolvedConfig& cfg) {
    const auto taus = log_grid(cfg.tau_min, cfg.tau_max, cfg.tau_pts_per_decade);
    const auto points = additivity_gap(cfg.anneal_config(), taus);
    CsvResult r;
    r.body = "tau,n_full,n_coh,n_diss,n_sum,gap,rel_gap\n";
    for (const auto& pt : points) {
        const double sum = pt.n_coh + pt.n_diss;
        const double rel = pt.n_full != 0.0 ? pt.gap / pt.n_full : 0.0;
        r.body += format17(pt.tau) + "," + format17(pt.n_full) + "," +
                  format17(pt.n_coh) + "," + format17(pt.n_diss) + "," +
                  format17(sum) + "," + format17(pt.gap) + "," + format17(rel) + "\n";
        ++r.rows;
    }
    return r;
}

}  // namespace

RunManifest run_subcommand(const ResolvedConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    CsvResult csv;
    if (cfg.subcommand == "anneal") csv = do_anneal(cfg);
    else if (cfg.subcommand == "sweep-tau") csv = do_sweep_tau(cfg);
    else if (cfg.subcommand == "relax") csv = do_relax(cfg);
    else if (cfg.subcommand == "thermal") csv = do_thermal(cfg);
    else if (cfg.subcommand == "obc-thermal") csv = do_obc_thermal(cfg);
    else if (cfg.subcommand == "phase-diagram") csv = do_phase_diagram(cfg);
    else if (cfg.subcommand == "additivity") csv = do_additivity(cfg);
    else throw ConfigError("unknown subcommand '" + cfg.subcommand + "'");

    RunManifest manifest;
    manifest.subcommand = cfg.subcommand;
    manifest.version = kVersion;
    manifest.params = manifest_params(cfg);
    for (const auto& [key, value] : csv.extra) manifest.params[key] = value;
    manifest.dt_effective = csv.dt_effective;
    manifest.dt_halvings = csv.dt_halvings;
    manifest.rows = csv.rows;
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    atomic_write(cfg.out, csv.body);
    atomic_write(cfg.out + ".manifest.json", manifest.to_json());
    return manifest;
}

}  // namespace tfim
