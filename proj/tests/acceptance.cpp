// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Set TFIM_ACCEPT_FAST=1 for the reduced CI variant (smaller chains,
// coarser grids, and the tau = 1e5 plateau leg skipped).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "support/rkf45.hpp"
#include "tfim/analysis.hpp"
#include "tfim/ed.hpp"
#include "tfim/io.hpp"
#include "tfim/thermo.hpp"

using namespace tfim;

namespace {

constexpr double kPi = std::numbers::pi;

bool fast_mode() {
    const char* v = std::getenv("TFIM_ACCEPT_FAST");
    return v != nullptr && std::strcmp(v, "0") != 0;
}

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

}  // namespace

TEST_CASE("criterion 1: Kibble-Zurek scaling of the coherent dynamics") {
    const int n = fast_mode() ? 256 : 512;
    const int ppd = fast_mode() ? 12 : 24;
    AnnealConfig base{n, Schedule(10.0, 1.0), BathSpec(0.0, 10.0, 1.0),
                      EvolutionKind::CoherentOnly, IntegratorPolicy{}, 0};
    const auto curve = sweep_tau(base, log_grid(1e2, 1e4, ppd));
    const KzFit fit = kz_fit(curve, 1e2, 1e4);
    bool monotone = true;
    for (std::size_t i = 1; i < curve.n_def.size(); ++i) {
        if (curve.n_def[i] > curve.n_def[i - 1] * (1.0 + 1e-3)) monotone = false;
    }
    const bool ok = std::abs(fit.exponent + 0.5) <= 0.05 && monotone;
    report(1, ok,
           fmt("coherent N=%d fitted exponent %.4f +- %.4f over tau in [1e2, 1e4] "
               "(target -0.5 +- 0.05, %d points, curve %smonotone)",
               n, fit.exponent, fit.std_error, fit.n_points, monotone ? "" : "NOT "));
    CHECK(ok);
}

TEST_CASE("criterion 2: large-tau thermal plateau of the full evolution") {
    const double target = 0.5 * (1.0 - std::tanh(1.0));
    AnnealConfig cfg{256, Schedule(10.0, 1e4), BathSpec(1e-2, 10.0, 1.0),
                     EvolutionKind::Full, IntegratorPolicy{}, 0};
    const double n4 = anneal_chain(cfg).n_def;
    const double rel4 = std::abs(n4 - target) / target;
    bool ok = rel4 <= 0.10;
    std::string detail = fmt("tau=1e4 checkpoint n_def=%.6f (dev %.2f%% <= 10%%)",
                             n4, 100.0 * rel4);
    if (!fast_mode()) {
        cfg.schedule = Schedule(10.0, 1e5);
        const double n5 = anneal_chain(cfg).n_def;
        const double rel5 = std::abs(n5 - target) / target;
        ok = ok && rel5 <= 0.02;
        detail += fmt("; tau=1e5 n_def=%.6f (dev %.2f%% <= 2%%)", n5, 100.0 * rel5);
    } else {
        detail += "; tau=1e5 leg skipped (TFIM_ACCEPT_FAST)";
    }
    report(2, ok, detail + fmt(" vs (1 - tanh 1)/2 = %.6f", target));
    CHECK(ok);
}

TEST_CASE("criterion 3: OWP regime structure vs temperature") {
    const int n = fast_mode() ? 128 : 256;
    const std::vector<double> temps{5.0, 2.0, 1.0, 0.5, 0.2};
    std::vector<OwpKind> kinds;
    std::string seq;
    for (double t : temps) {
        OwpScan scan;
        scan.n_sites = n;
        // Colder baths thermalize later; extend the grid to keep the upturn
        // inside it.
        scan.taus = log_grid(3.0, t >= 1.0 ? 3e3 : 1e4, 8);
        scan.jobs = 0;
        const auto cls = classify_at(scan, 1e-2, t);
        kinds.push_back(cls.kind);
        seq += fmt("%sT=%g:%s", seq.empty() ? "" : " ", t, to_string(cls.kind));
    }
    const auto rank = [](OwpKind k) {
        return k == OwpKind::GlobalOwp ? 2 : (k == OwpKind::LocalOwp ? 1 : 0);
    };
    bool ordered = true;
    for (std::size_t i = 1; i < kinds.size(); ++i) {
        if (rank(kinds[i]) > rank(kinds[i - 1])) ordered = false;
    }
    bool has[3] = {false, false, false};
    for (OwpKind k : kinds) has[rank(k)] = true;
    const bool ok = ordered && has[0] && has[1] && has[2];
    report(3, ok,
           fmt("alpha=1e-2 N=%d scan [%s] %s", n, seq.c_str(),
               ok ? "shows the ordered global->local->monotonic transition"
                  : "does not show the ordered three-class transition"));
    CHECK(ok);
}

TEST_CASE("criterion 4: additivity holds at small tau and fails at large tau") {
    const int n = fast_mode() ? 128 : 256;
    AnnealConfig base{n, Schedule(10.0, 1.0), BathSpec(1e-2, 10.0, 1.0),
                      EvolutionKind::Full, IntegratorPolicy{}, 0};
    const std::vector<double> small{10.0, 31.6, 100.0};
    const std::vector<double> large{1e4, 2e4};
    const auto pts_small = additivity_gap(base, small);
    const auto pts_large = additivity_gap(base, large);
    bool ok = true;
    std::string detail = "rel gap:";
    for (const auto& p : pts_small) {
        const double rel = std::abs(p.gap) / p.n_full;
        ok = ok && rel <= 0.05;
        detail += fmt(" tau=%g:%.3f%%", p.tau, 100.0 * rel);
    }
    double prev = 0.0;
    for (const auto& p : pts_large) {
        const double rel = std::abs(p.gap) / p.n_full;
        ok = ok && rel > 0.10 && rel > prev;
        prev = rel;
        detail += fmt(" tau=%g:%.1f%%", p.tau, 100.0 * rel);
    }
    report(4, ok,
           detail + " (<= 5% for tau <= 1e2; > 10% and growing for tau >= 1e4)");
    CHECK(ok);
}

TEST_CASE("criterion 5: open-boundary thermodynamics equals exact diagonalization") {
    double worst = 0.0;
    for (int n : {2, 4, 6, 8}) {
        for (double h : {0.0, 0.5, 1.0, 2.0}) {
            for (double t : {0.5, 1.0, 5.0}) {
                const double a = thermal_defects_obc(n, h, t);
                const double b = ed_oracle_thermal(n, h, t, EdBoundary::ObcFull);
                worst = std::max(worst, std::abs(a - b));
            }
        }
    }
    const bool ok = worst <= 1e-10;
    report(5, ok,
           fmt("48 (N, h, T) points, worst |obc - ed| = %.2e (<= 1e-10)", worst));
    CHECK(ok);
}

TEST_CASE("criterion 6: restricted(T_b = 2T) equals full(T) to machine precision") {
    double worst = 0.0;
    int points = 0;
    for (int n : {4, 16}) {
        for (int ih = 0; ih < 10; ++ih) {
            for (double t : {0.3, 0.7, 1.0, 2.5, 6.0}) {
                const double h = 0.35 * ih;
                const double a = thermal_defects_full(h, t, n);
                const double b = thermal_defects_restricted(h, 2.0 * t, n);
                worst = std::max(worst, std::abs(a - b));
                ++points;
            }
        }
    }
    const bool ok = worst <= 1e-14;
    report(6, ok, fmt("%d grid points, worst |restricted - full| = %.2e (<= 1e-14)",
                      points, worst));
    CHECK(ok);
}

TEST_CASE("criterion 7: finite-size scaling of the thermal baselines") {
    bool ok = true;
    std::string detail;
    for (double h : {0.5, 1.0}) {
        const double limit = thermal_defects_full(h, 1.0, 8192);

        // OBC deviations fit c / N.
        std::vector<double> lx, ly;
        for (int n : {32, 64, 128, 256, 512}) {
            const double dev = std::abs(thermal_defects_obc(n, h, 1.0) - limit);
            lx.push_back(std::log(n));
            ly.push_back(std::log(dev));
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        const double slope = sxy / sxx;
        const bool obc_ok = std::abs(slope + 1.0) <= 0.1;

        // PBC deviations shrink faster than any power: doubling-N ratios fall.
        double prev_dev = std::abs(thermal_defects_full(h, 1.0, 2) - limit);
        double prev_ratio = 1.0;
        bool pbc_ok = true;
        for (int n : {4, 8, 16}) {
            const double dev = std::abs(thermal_defects_full(h, 1.0, n) - limit);
            const double ratio = dev / prev_dev;
            if (ratio >= 0.9 * prev_ratio) pbc_ok = false;
            prev_ratio = ratio;
            prev_dev = dev;
        }
        ok = ok && obc_ok && pbc_ok;
        detail += fmt("%sh=%g: obc slope %.3f (target -1 +- 0.1), pbc doubling "
                      "ratios %s",
                      detail.empty() ? "" : "; ", h, slope,
                      pbc_ok ? "decreasing" : "NOT decreasing");
    }
    report(7, ok, detail);
    CHECK(ok);
}

TEST_CASE("criterion 8: fixed-field relaxation plateaus at the thermal density") {
    // The slowest mode relaxes at gamma_R(k_1) ~ sin^2(k_1) ~ 3e-4, so the 1%
    // band is reached around t ~ 3e3 and held from there on.
    const int n = 256;
    const double t_end = 1e4;
    const double target = thermal_defects_full(0.5, 1.0, n);
    const ChainSeries series = relax_chain(n, 0.5, BathSpec(1e-2, 10.0, 1.0), t_end,
                                           IntegratorPolicy{}, 0, 128);
    bool ok = true;
    double worst = 0.0;
    for (const auto& pt : series.points) {
        if (pt.t < 0.5 * t_end) continue;
        const double rel = std::abs(pt.n_def - target) / target;
        worst = std::max(worst, rel);
        ok = ok && rel <= 0.01;
    }
    report(8, ok,
           fmt("relax(h=0.5, alpha=1e-2, T=1, N=%d): worst deviation %.3f%% from "
               "%.6f over t in [%g, %g] (<= 1%%)",
               n, 100.0 * worst, target, 0.5 * t_end, t_end));
    CHECK(ok);
}

TEST_CASE("criterion 9: T_up(alpha) is monotone with c / log(1/alpha) asymptotics") {
    const std::vector<double> alphas =
        fast_mode() ? std::vector<double>{1e-3, 1e-2, 1e-1}
                    : std::vector<double>{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    OwpScan scan;
    scan.n_sites = 96;
    scan.taus = log_grid(1.0, 2e3, 6);
    scan.jobs = 0;
    std::vector<double> t_ups;
    bool all_found = true;
    std::string detail;
    for (double alpha : alphas) {
        // T_up grows steeply with coupling (T_up(0.1) ~ 7), hence the wide
        // temperature bracket.
        const auto r = find_t_up(scan, alpha, 0.25, 12.0, 0.1);
        all_found = all_found && r.status == BoundaryStatus::Found;
        t_ups.push_back(r.value);
        detail += fmt("%salpha=%g:T_up=%.2f", detail.empty() ? "" : " ", alpha,
                      r.value);
    }
    bool monotone = all_found;
    for (std::size_t i = 1; i < t_ups.size(); ++i) {
        if (t_ups[i] <= t_ups[i - 1]) monotone = false;
    }
    // One-parameter form T_up = c / log(1/alpha). The logarithmic form is the
    // weak-coupling asymptote, so the fit is anchored on the smallest
    // couplings; residuals over the whole range are reported.
    const std::size_t n_fit = alphas.size() >= 5 ? 3 : 2;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n_fit; ++i) {
        const double x = 1.0 / std::log(1.0 / alphas[i]);
        num += t_ups[i] * x;
        den += x * x;
    }
    const double c = num / den;
    double asym_res = 0.0, full_res = 0.0;
    std::string residuals;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double fit_v = c / std::log(1.0 / alphas[i]);
        const double rel = std::abs(t_ups[i] - fit_v) / t_ups[i];
        if (i < n_fit) asym_res = std::max(asym_res, rel);
        full_res = std::max(full_res, rel);
        residuals += fmt("%s%+.0f%%", residuals.empty() ? "" : ",", 100.0 * rel);
    }
    const bool ok = all_found && monotone && std::isfinite(c) && asym_res < 0.25;
    report(9, ok,
           detail + fmt("; fit c=%.2f over the %zu smallest couplings "
                        "(asymptotic residual %.0f%%, full-range residuals [%s], "
                        "monotone %s)",
                        c, n_fit, 100.0 * asym_res, residuals.c_str(),
                        monotone ? "yes" : "no"));
    CHECK(ok);
}

TEST_CASE("criterion 10: numerics hygiene") {
    // (a) RK4 order against the adaptive reference.
    const Schedule sched(10.0, 10.0);
    const BathSpec bath(1e-2, 10.0, 1.0);
    const double k = kPi / 2;
    const auto rhs = [&](double t, const BlochState& r) {
        return rhs_full(r, k, sched.h_clamped(t), sched.h_dot(), bath);
    };
    testing::Rkf45Options opt;
    opt.tol = 1e-12;
    const BlochState ref =
        testing::rkf45_integrate(rhs, {-1.0, 0.0, 0.0}, 0.0, sched.tau, opt);
    const auto max_err = [&](double dt) {
        const BlochState r =
            detail::integrate_mode_fixed_dt(k, sched, bath, EvolutionKind::Full, dt);
        return std::max(
            {std::abs(r.x - ref.x), std::abs(r.y - ref.y), std::abs(r.z - ref.z)});
    };
    const double ratio = max_err(8e-3) / max_err(4e-3);
    const bool order_ok = ratio >= 16.0 * 0.7 && ratio <= 16.0 * 1.3;

    // (b) coherent norm drift.
    double drift = 0.0;
    for (double kk : {kPi / 7, kPi / 2, 2.9}) {
        const BlochState r = integrate_mode(kk, Schedule(10.0, 1e4), bath,
                                            EvolutionKind::CoherentOnly,
                                            IntegratorPolicy{});
        drift = std::max(drift, std::abs(r.norm() - 1.0));
    }
    const bool norm_ok = drift <= 1e-6;

    // (c) parallel/serial bit identity of emitted data.
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "tfim_acceptance_c10";
    fs::create_directories(dir);
    const auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    KeyValues flags{{"n", "32"},      {"alpha", "0.01"},
                    {"t_eff", "1"},   {"tau_min", "1"},
                    {"tau_max", "30"}, {"tau_pts_per_decade", "8"},
                    {"jobs", "1"},    {"out", (dir / "j1.csv").string()}};
    run_subcommand(parse_config("sweep-tau", flags, std::nullopt));
    flags["jobs"] = "8";
    flags["out"] = (dir / "j8.csv").string();
    run_subcommand(parse_config("sweep-tau", flags, std::nullopt));
    const bool bits_ok = slurp(dir / "j1.csv") == slurp(dir / "j8.csv");
    std::error_code ec;
    fs::remove_all(dir, ec);

    const bool ok = order_ok && norm_ok && bits_ok;
    report(10, ok,
           fmt("RK4 halving ratio %.1f (16 +- 30%%); coherent norm drift %.1e "
               "(<= 1e-6); jobs=1 vs jobs=8 output %s",
               ratio, drift, bits_ok ? "byte-identical" : "DIFFERS"));
    CHECK(ok);
}
