// tfim-anneal — dissipative quantum annealing of a transverse-field Ising
// chain: coherent / dissipative / full Bloch-Redfield defect production,
// thermal baselines, and the optimal-working-point phase diagram.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tfim/io.hpp"

namespace {

struct SubArgs {
    tfim::KeyValues flags;
    std::optional<std::string> config_path;
};

void add_common_options(CLI::App* cmd, SubArgs& args) {
    cmd->set_help_flag("--help", "print this help message and exit");
    const auto capture = [&args](const std::string& key) {
        return [&args, key](const std::string& value) { args.flags[key] = value; };
    };
    cmd->add_option_function<std::string>("--n", capture("n"), "chain size (even)");
    cmd->add_option_function<std::string>("--h0", capture("h0"), "initial field");
    cmd->add_option_function<std::string>("--tau", capture("tau"), "annealing time");
    cmd->add_option_function<std::string>("--alpha", capture("alpha"),
                                          "system-bath coupling");
    cmd->add_option_function<std::string>("--t-eff", capture("t_eff"),
                                          "effective temperature (J/k_B)");
    cmd->add_option_function<std::string>("--omega-c", capture("omega_c"),
                                          "bath cutoff frequency");
    cmd->add_option_function<std::string>(
        "--kind", capture("kind"), "evolution: full|coherent|dissipative");
    cmd->add_option_function<std::string>("--dt-max", capture("dt_max"),
                                          "integrator step bound");
    cmd->add_option_function<std::string>("--jobs", capture("jobs"),
                                          "worker threads (0 = all cores)");
    cmd->add_option_function<std::string>("--out", capture("out"), "output CSV path");
    cmd->add_option_function<std::string>("--h", capture("h"), "static field");
    cmd->add_option_function<std::string>("--t-end", capture("t_end"),
                                          "relaxation end time");
    cmd->add_option_function<std::string>("--tau-min", capture("tau_min"),
                                          "sweep lower tau bound");
    cmd->add_option_function<std::string>("--tau-max", capture("tau_max"),
                                          "sweep upper tau bound");
    cmd->add_option_function<std::string>("--tau-pts-per-decade",
                                          capture("tau_pts_per_decade"),
                                          "sweep points per decade");
    cmd->add_option_function<std::string>("--series-points", capture("series_points"),
                                          "time-series sample count");
    cmd->add_option_function<std::string>("--alphas", capture("alphas"),
                                          "comma-separated coupling list");
    cmd->add_option_function<std::string>("--t-lo", capture("t_lo"),
                                          "temperature bracket lower edge");
    cmd->add_option_function<std::string>("--t-hi", capture("t_hi"),
                                          "temperature bracket upper edge");
    cmd->add_option_function<std::string>("--t-tol", capture("t_tol"),
                                          "temperature bisection tolerance");
    cmd->add_option("--config", args.config_path, "flat key = value config file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dissipative quantum annealing simulator for the "
                 "transverse-field Ising chain"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tfim::kVersion);

    const char* names[] = {"anneal",      "sweep-tau",     "relax",     "thermal",
                           "obc-thermal", "phase-diagram", "additivity"};
    const char* descriptions[] = {
        "one annealing run; n_def(t) time series with the instantaneous thermal curve",
        "final defect density vs annealing time",
        "static-field relaxation towards the thermal defect density",
        "equilibrium defect density at fixed field and temperature",
        "open-boundary exact finite-size thermal defect density",
        "T_up / T_low optimal-working-point boundaries per coupling",
        "full vs coherent+dissipative defect production per tau",
    };
    SubArgs args[7];
    for (int i = 0; i < 7; ++i) {
        add_common_options(app.add_subcommand(names[i], descriptions[i]), args[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (int i = 0; i < 7; ++i) {
            if (app.got_subcommand(names[i])) {
                const auto cfg =
                    tfim::parse_config(names[i], args[i].flags, args[i].config_path);
                const auto manifest = tfim::run_subcommand(cfg);
                std::printf("%s: wrote %ld row(s) to %s (%.2fs)\n", names[i],
                            manifest.rows, cfg.out.c_str(), manifest.wall_time_s);
                return 0;
            }
        }
        std::fprintf(stderr, "error: no subcommand\n");
        return 2;
    } catch (const tfim::ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const tfim::DomainError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const tfim::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
