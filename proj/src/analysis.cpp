#include "tfim/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "tfim/thermo.hpp"

namespace tfim {

std::vector<double> log_grid(double lo, double hi, int pts_per_decade) {
    if (!(lo > 0.0) || !(hi > lo)) {
        throw ConfigError("log_grid: need 0 < lo < hi");
    }
    if (pts_per_decade < 1) throw ConfigError("log_grid: pts_per_decade must be >= 1");
    const double decades = std::log10(hi / lo);
    const int segments = std::max(1, static_cast<int>(std::lround(pts_per_decade * decades)));
    std::vector<double> grid;
    grid.reserve(segments + 1);
    for (int j = 0; j <= segments; ++j) {
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(j) / segments));
    }
    grid.back() = hi;
    return grid;
}

DefectCurve sweep_tau(const AnnealConfig& base, const std::vector<double>& taus) {
    if (taus.size() < 8) {
        throw ConfigError("sweep_tau: tau grid needs at least 8 points, got " +
                          std::to_string(taus.size()));
    }
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0) || (i > 0 && taus[i] <= taus[i - 1])) {
            throw ConfigError("sweep_tau: tau grid must be positive and ascending");
        }
    }
    DefectCurve curve;
    curve.tau = taus;
    curve.n_def.reserve(taus.size());
    curve.n_sites = base.n_sites;
    curve.alpha = base.bath.alpha;
    curve.t_eff = base.bath.t_eff;
    curve.kind = base.kind;
    for (double tau : taus) {
        AnnealConfig cfg = base;
        cfg.schedule = Schedule(base.schedule.h0, tau);
        curve.n_def.push_back(anneal_chain(cfg).n_def);
    }
    return curve;
}

const char* to_string(OwpKind kind) noexcept {
    switch (kind) {
        case OwpKind::GlobalOwp: return "global";
        case OwpKind::LocalOwp: return "local";
        case OwpKind::Monotonic: return "monotonic";
    }
    return "?";
}

OwpClassification classify_curve(const DefectCurve& curve, double n_plateau,
                                 double tol) {
    const std::size_t m = curve.tau.size();
    if (m < 3) throw ConfigError("classify_curve: need at least 3 points");

    OwpClassification out;
    out.n_plateau = n_plateau;

    // Suffix maxima so the rise-after condition is O(1) per candidate.
    std::vector<double> suffix_max(m, 0.0);
    suffix_max[m - 1] = curve.n_def[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
        suffix_max[i] = std::max(curve.n_def[i], suffix_max[i + 1]);
    }

    std::size_t best = m;  // sentinel
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const bool dip = curve.n_def[j] <= curve.n_def[j - 1] &&
                         curve.n_def[j] <= curve.n_def[j + 1];
        if (!dip) continue;
        if (suffix_max[j + 1] < curve.n_def[j] + tol) continue;  // flat tail
        if (best == m || curve.n_def[j] < curve.n_def[best]) best = j;
    }
    if (best == m) {
        out.kind = OwpKind::Monotonic;
        return out;
    }

    // Parabolic refinement through the three points in log tau (Newton form).
    const double x0 = std::log(curve.tau[best - 1]);
    const double x1 = std::log(curve.tau[best]);
    const double x2 = std::log(curve.tau[best + 1]);
    const double y0 = curve.n_def[best - 1];
    const double y1 = curve.n_def[best];
    const double y2 = curve.n_def[best + 1];
    double xv = x1;
    double yv = y1;
    const double s01 = (y1 - y0) / (x1 - x0);
    const double s12 = (y2 - y1) / (x2 - x1);
    const double a2 = (s12 - s01) / (x2 - x0);
    if (a2 > 0.0) {
        xv = std::clamp(0.5 * (x0 + x1) - 0.5 * s01 / a2, x0, x2);
        yv = y0 + s01 * (xv - x0) + a2 * (xv - x0) * (xv - x1);
        if (yv > y1) {
            xv = x1;
            yv = y1;
        }
    }
    out.tau_opt = std::exp(xv);
    out.n_opt = yv;
    out.kind = (yv < n_plateau - tol) ? OwpKind::GlobalOwp : OwpKind::LocalOwp;
    return out;
}

OwpClassification classify_at(const OwpScan& scan, double alpha, double t_eff) {
    AnnealConfig base{scan.n_sites,
                      Schedule(scan.h0, scan.taus.empty() ? 1.0 : scan.taus.front()),
                      BathSpec(alpha, scan.omega_c, t_eff),
                      EvolutionKind::Full,
                      scan.policy,
                      scan.jobs};
    const DefectCurve curve = sweep_tau(base, scan.taus);
    return classify_curve(curve, n_therm(t_eff), scan.classify_tol);
}

namespace detail {

BoundaryResult bisect_root(const std::function<double(double)>& f, double lo, double hi,
                           double tol) {
    if (!(hi > lo) || !(tol > 0.0)) throw ConfigError("bisect_root: bad bracket");
    BoundaryResult res;
    double flo = f(lo);
    double fhi = f(hi);
    res.evaluations = 2;
    if (flo == 0.0) flo = -0.0;  // treat exact zero as the low side
    if (flo * fhi > 0.0) {
        res.status = BoundaryStatus::NoSignChange;
        res.resolution = hi - lo;
        return res;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        ++res.evaluations;
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (fm * flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    res.status = BoundaryStatus::Found;
    res.value = 0.5 * (lo + hi);
    res.resolution = hi - lo;
    return res;
}

BoundaryResult bisect_existence(const std::function<bool(double)>& exists, double lo,
                                double hi, double tol) {
    if (!(hi > lo) || !(tol > 0.0)) throw ConfigError("bisect_existence: bad bracket");
    BoundaryResult res;
    const bool at_lo = exists(lo);
    const bool at_hi = exists(hi);
    res.evaluations = 2;
    if (at_lo) {
        res.status = BoundaryStatus::PossiblyBelowBracket;
        res.value = lo;
        res.resolution = hi - lo;
        return res;
    }
    if (!at_hi) {
        res.status = BoundaryStatus::NoSignChange;
        res.resolution = hi - lo;
        return res;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        ++res.evaluations;
        if (exists(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    res.status = BoundaryStatus::Found;
    res.value = 0.5 * (lo + hi);
    res.resolution = hi - lo;
    return res;
}

}  // namespace detail

BoundaryResult find_t_up(const OwpScan& scan, double alpha, double t_lo, double t_hi,
                         double t_tol) {
    const auto f = [&](double t) {
        const OwpClassification c = classify_at(scan, alpha, t);
        // No minimum at this resolution: the optimum sits at the plateau, the
        // no-global-OWP side of the boundary.
        const double n_opt = c.n_opt ? *c.n_opt : c.n_plateau + 1.0;
        return n_opt - n_therm(t);
    };
    return detail::bisect_root(f, t_lo, t_hi, t_tol);
}

BoundaryResult find_t_low(const OwpScan& scan, double alpha, double t_lo, double t_hi,
                          double t_tol) {
    const auto exists = [&](double t) {
        return classify_at(scan, alpha, t).kind != OwpKind::Monotonic;
    };
    return detail::bisect_existence(exists, t_lo, t_hi, t_tol);
}

PhaseBoundaryPoint phase_boundary(const OwpScan& scan, double alpha, double t_lo,
                                  double t_hi, double t_tol) {
    PhaseBoundaryPoint pt;
    pt.alpha = alpha;
    pt.t_up = find_t_up(scan, alpha, t_lo, t_hi, t_tol);
    pt.t_low = find_t_low(scan, alpha, t_lo, t_hi, t_tol);
    return pt;
}

KzFit kz_fit(const DefectCurve& curve, double tau_lo, double tau_hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.tau.size(); ++i) {
        if (curve.tau[i] < tau_lo || curve.tau[i] > tau_hi) continue;
        if (!(curve.n_def[i] > 0.0)) {
            throw DomainError("kz_fit: non-positive density inside the fit window");
        }
        xs.push_back(std::log(curve.tau[i]));
        ys.push_back(std::log(curve.n_def[i]));
    }
    const int m = static_cast<int>(xs.size());
    if (m < 3) throw ConfigError("kz_fit: fewer than 3 points in the window");
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < m; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (int i = 0; i < m; ++i) {
        const double r = ys[i] - my - slope * (xs[i] - mx);
        ss_res += r * r;
    }
    KzFit fit;
    fit.exponent = slope;
    fit.n_points = m;
    fit.std_error = (m > 2) ? std::sqrt(ss_res / ((m - 2) * sxx)) : 0.0;
    return fit;
}

std::vector<AdditivityPoint> additivity_gap(const AnnealConfig& base,
                                            const std::vector<double>& taus) {
    std::vector<AdditivityPoint> out;
    out.reserve(taus.size());
    for (double tau : taus) {
        AnnealConfig cfg = base;
        cfg.schedule = Schedule(base.schedule.h0, tau);
        cfg.kind = EvolutionKind::Full;
        const double n_full = anneal_chain(cfg).n_def;
        cfg.kind = EvolutionKind::CoherentOnly;
        const double n_coh = anneal_chain(cfg).n_def;
        cfg.kind = EvolutionKind::DissipativeOnly;
        const double n_diss = anneal_chain(cfg).n_def;
        out.push_back({tau, n_full, n_coh, n_diss, n_full - n_coh - n_diss});
    }
    return out;
}

}  // namespace tfim
