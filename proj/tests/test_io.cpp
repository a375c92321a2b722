// Config resolution, CSV/manifest emission, determinism, CLI exit codes.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tfim/io.hpp"

using namespace tfim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path dir;

    TempDir() {
        dir = fs::temp_directory_path() /
              ("tfim_io_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("format17: lossless round trip") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-30, 30);
    for (int i = 0; i < 500; ++i) {
        const double v = mant(rng) * std::pow(10.0, expo(rng));
        const double back = std::strtod(format17(v).c_str(), nullptr);
        CHECK(std::memcmp(&v, &back, sizeof(double)) == 0);
    }
    CHECK(format17(0.5) == "0.5");
}

TEST_CASE("parse_config: defaults, precedence, and rejection") {
    TempDir tmp;
    const std::string cfg_path = tmp.path("run.cfg");
    {
        std::ofstream f(cfg_path);
        f << "# comment line\n"
          << "n = 512\n"
          << "alpha = 0.005   # inline comment\n"
          << "t_eff = 2\n";
    }

    SUBCASE("paper defaults with empty input") {
        const auto cfg = parse_config("anneal", {}, std::nullopt);
        CHECK(cfg.n == 1000);
        CHECK(cfg.h0 == 10.0);
        CHECK(cfg.omega_c == 10.0);
        CHECK(cfg.kind == EvolutionKind::Full);
    }
    SUBCASE("file values are picked up") {
        const auto cfg = parse_config("anneal", {}, cfg_path);
        CHECK(cfg.n == 512);
        CHECK(cfg.alpha == 0.005);
        CHECK(cfg.t_eff == 2.0);
    }
    SUBCASE("flags override the file") {
        const auto cfg = parse_config("anneal", {{"n", "256"}}, cfg_path);
        CHECK(cfg.n == 256);
        CHECK(cfg.alpha == 0.005);
    }
    SUBCASE("unknown key is named in the error") {
        try {
            parse_config("anneal", {{"n_sites", "64"}}, std::nullopt);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("n_sites") != std::string::npos);
        }
    }
    SUBCASE("invariant violations are rejected") {
        CHECK_THROWS_AS(parse_config("anneal", {{"t_eff", "0"}}, std::nullopt),
                        ConfigError);
        CHECK_THROWS_AS(parse_config("anneal", {{"n", "7"}}, std::nullopt),
                        ConfigError);
        CHECK_THROWS_AS(parse_config("anneal", {{"alpha", "abc"}}, std::nullopt),
                        ConfigError);
        CHECK_THROWS_AS(parse_config("anneal", {{"kind", "mixed"}}, std::nullopt),
                        ConfigError);
    }
}

TEST_CASE("run_subcommand: thermal CSV schema and byte-identical reruns") {
    TempDir tmp;
    auto cfg = parse_config(
        "thermal", {{"h", "0"}, {"t_eff", "1"}, {"out", tmp.path("t.csv")}},
        std::nullopt);
    const auto manifest = run_subcommand(cfg);
    CHECK(manifest.rows == 1);
    const std::string first = slurp(tmp.path("t.csv"));
    CHECK(first.substr(0, first.find('\n')) == "h,t_eff,n,n_def");
    CHECK(first.find("0.119202922022118") != std::string::npos);

    run_subcommand(cfg);
    CHECK(slurp(tmp.path("t.csv")) == first);

    const auto parsed = nlohmann::json::parse(slurp(tmp.path("t.csv.manifest.json")));
    CHECK(parsed["subcommand"] == "thermal");
    CHECK(parsed["version"] == kVersion);
    CHECK(parsed["rows"] == 1);
    CHECK(parsed["params"]["n"] == "1000");
}

TEST_CASE("run_subcommand: parallel and serial sweeps emit identical bytes") {
    TempDir tmp;
    KeyValues flags{{"n", "16"},      {"alpha", "0.01"},          {"t_eff", "1"},
                    {"tau_min", "1"}, {"tau_max", "10"},          {"tau_pts_per_decade", "8"},
                    {"jobs", "1"},    {"out", tmp.path("s1.csv")}};
    run_subcommand(parse_config("sweep-tau", flags, std::nullopt));
    flags["jobs"] = "8";
    flags["out"] = tmp.path("s8.csv");
    run_subcommand(parse_config("sweep-tau", flags, std::nullopt));
    CHECK(slurp(tmp.path("s1.csv")) == slurp(tmp.path("s8.csv")));

    const std::string body = slurp(tmp.path("s1.csv"));
    CHECK(body.substr(0, body.find('\n')) == "tau,n_def,kind");

    // tau column is strictly increasing.
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line);
    double prev = 0.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        const double tau = std::strtod(line.c_str(), nullptr);
        CHECK(tau > prev);
        prev = tau;
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("run_subcommand: anneal series schema") {
    TempDir tmp;
    auto cfg = parse_config("anneal",
                            {{"n", "16"},
                             {"tau", "5"},
                             {"alpha", "0.01"},
                             {"series_points", "16"},
                             {"out", tmp.path("a.csv")}},
                            std::nullopt);
    const auto manifest = run_subcommand(cfg);
    const std::string body = slurp(tmp.path("a.csv"));
    CHECK(body.substr(0, body.find('\n')) == "t,h,n_def,n_thermal_inst");
    CHECK(manifest.rows >= 3);
    CHECK(manifest.dt_effective > 0.0);

    // First row is t = 0 at h = h0; last row is t = tau at h = 0.
    std::istringstream lines(body);
    std::string line, last;
    std::getline(lines, line);
    std::getline(lines, line);
    CHECK(line.rfind("0,10,", 0) == 0);
    while (std::getline(lines, line)) {
        if (!line.empty()) last = line;
    }
    CHECK(last.rfind("5,0,", 0) == 0);
}

TEST_CASE("run_subcommand: obc-thermal single row") {
    TempDir tmp;
    auto cfg = parse_config(
        "obc-thermal",
        {{"n", "8"}, {"h", "1"}, {"t_eff", "1"}, {"out", tmp.path("o.csv")}},
        std::nullopt);
    run_subcommand(cfg);
    const std::string body = slurp(tmp.path("o.csv"));
    CHECK(body.substr(0, body.find('\n')) == "n,h,t_eff,n_def_obc");
    CHECK(body.find("0.22376685152881") != std::string::npos);
}

TEST_CASE("run_subcommand: relax series decays towards the thermal target") {
    TempDir tmp;
    auto cfg = parse_config("relax",
                            {{"n", "32"},
                             {"h", "0.5"},
                             {"alpha", "0.05"},
                             {"t_eff", "1"},
                             {"t_end", "400"},
                             {"series_points", "32"},
                             {"out", tmp.path("r.csv")}},
                            std::nullopt);
    run_subcommand(cfg);
    const std::string body = slurp(tmp.path("r.csv"));
    CHECK(body.substr(0, body.find('\n')) == "t,n_def");
    // Last row should sit near the equilibrium density for these parameters.
    const auto last_nl = body.find_last_of(',');
    const double final_n = std::strtod(body.c_str() + last_nl + 1, nullptr);
    CHECK(final_n == doctest::Approx(0.1485).epsilon(0.05));
}

TEST_CASE("run_subcommand: additivity columns are self-consistent") {
    TempDir tmp;
    auto cfg = parse_config("additivity",
                            {{"n", "16"},
                             {"alpha", "0.01"},
                             {"t_eff", "1"},
                             {"tau_min", "1"},
                             {"tau_max", "10"},
                             {"tau_pts_per_decade", "8"},
                             {"out", tmp.path("g.csv")}},
                            std::nullopt);
    const auto manifest = run_subcommand(cfg);
    CHECK(manifest.rows == 9);
    std::istringstream lines(slurp(tmp.path("g.csv")));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "tau,n_full,n_coh,n_diss,n_sum,gap,rel_gap");
    while (std::getline(lines, line)) {
        double v[7];
        std::stringstream row(line);
        std::string cell;
        for (double& x : v) {
            std::getline(row, cell, ',');
            x = std::strtod(cell.c_str(), nullptr);
        }
        CHECK(v[4] == doctest::Approx(v[2] + v[3]).epsilon(1e-12));
        CHECK(v[5] == doctest::Approx(v[1] - v[4]).epsilon(1e-9));
        CHECK(v[6] == doctest::Approx(v[5] / v[1]).epsilon(1e-9));
    }
}

TEST_CASE("run_subcommand: phase-diagram row ordering and T_low <= T_up") {
    TempDir tmp;
    auto cfg = parse_config("phase-diagram",
                            {{"n", "16"},
                             {"alphas", "0.1"},
                             {"t_lo", "0.4"},
                             {"t_hi", "5"},
                             {"t_tol", "0.25"},
                             {"tau_min", "1"},
                             {"tau_max", "50"},
                             {"tau_pts_per_decade", "8"},
                             {"out", tmp.path("p.csv")}},
                            std::nullopt);
    run_subcommand(cfg);
    std::istringstream lines(slurp(tmp.path("p.csv")));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "alpha,T_up,T_low,T_low_resolution");
    std::getline(lines, line);
    double v[4];
    std::stringstream row(line);
    std::string cell;
    for (double& x : v) {
        std::getline(row, cell, ',');
        x = std::strtod(cell.c_str(), nullptr);
    }
    CHECK(v[0] == 0.1);
    if (std::isfinite(v[1]) && std::isfinite(v[2])) {
        CHECK(v[2] <= v[1]);  // T_low <= T_up when both resolved
        CHECK(v[3] <= 0.25);
    }
}

TEST_CASE("atomic_write: no partial files, rename in place") {
    TempDir tmp;
    const std::string p = tmp.path("x.txt");
    atomic_write(p, "hello\n");
    CHECK(slurp(p) == "hello\n");
    atomic_write(p, "world\n");
    CHECK(slurp(p) == "world\n");
    CHECK(!fs::exists(p + ".tmp"));
}

#ifdef TFIM_CLI_PATH
TEST_CASE("cli: exit codes for success and usage errors") {
    TempDir tmp;
    const std::string cli = TFIM_CLI_PATH;
    const std::string out = tmp.path("cli.csv");
    const auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };
    CHECK(run("thermal --h 0 --t-eff 1 --out " + out) == 0);
    CHECK(run("thermal --t-eff 0 --out " + out) == 2);   // violated invariant
    CHECK(run("thermal --n 7 --out " + out) == 2);       // odd chain
    CHECK(run("bogus-subcommand") == 2);                 // parse error
    CHECK(run("sweep-tau --no-such-flag 1") == 2);
}
#endif
