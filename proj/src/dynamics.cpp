#include "tfim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "tfim/parallel.hpp"

namespace tfim {

namespace {

// dt * (fastest resolved rate) stays below this for the fixed-step RK4 runs.
constexpr double kStabilityBudget = 0.2;
// Divergence guard. The weak-coupling master equation itself lets |r| overshoot
// the Bloch sphere by up to a few 1e-2 during fast sweeps (non-secular cross
// terms), so the guard only trips on genuine integrator blow-up.
constexpr double kBlowupTol = 0.25;
constexpr int kMaxHalvings = 8;
constexpr int kSubsampleModes = 16;

struct ModeConsts {
    double cos_k, sin_k, delta, delta_sq;

    static ModeConsts from(double k) noexcept {
        const double c = std::cos(k);
        const double s = std::sin(k);
        return {c, s, 2.0 * s, 4.0 * s * s};
    }
};

// Per-stage coefficients of the linear Bloch system
//   rx' = -g_r (rx - rbar) + (phi_dot + g_xz) rz
//   ry' = -(g_d + g_r/2) ry - two_lambda rz
//   rz' = -phi_dot rx - g_zx (rx - rbar) + two_lambda ry - (g_d - g_r/2) rz
// CoherentOnly leaves all gammas zero; DissipativeOnly leaves phi_dot and
// two_lambda zero.
struct StageCoeffs {
    double phi_dot = 0.0, two_lambda = 0.0;
    double g_r = 0.0, g_d = 0.0, g_zx = 0.0, g_xz = 0.0, rbar = 0.0;
};

template <EvolutionKind K>
inline StageCoeffs stage_coeffs(const ModeConsts& m, double h, double h_dot,
                                const detail::BathConsts& bc) noexcept {
    const double xi = 2.0 * (h - m.cos_k);
    const double eps_sq = xi * xi + m.delta_sq;
    const double inv = 1.0 / eps_sq;
    StageCoeffs c;
    if constexpr (K != EvolutionKind::DissipativeOnly) {
        c.phi_dot = 2.0 * h_dot * m.delta * inv;
        c.two_lambda = 2.0 * std::sqrt(eps_sq);
    }
    if constexpr (K != EvolutionKind::CoherentOnly) {
        if (bc.alpha > 0.0) {
            const double eps = (K == EvolutionKind::DissipativeOnly)
                                   ? std::sqrt(eps_sq)
                                   : 0.5 * c.two_lambda;
            const auto rr = detail::raw_rates(xi, m.delta, m.delta_sq, eps, inv, bc);
            c.g_r = rr.g_r;
            c.g_d = rr.g_phi + 0.5 * rr.g_r;
            c.g_zx = rr.g_zx;
            c.g_xz = rr.g_xz;
            c.rbar = rr.rbar;
        }
    }
    return c;
}

inline BlochState rhs_apply(const StageCoeffs& c, const BlochState& r) noexcept {
    BlochState d;
    d.x = -c.g_r * (r.x - c.rbar) + (c.phi_dot + c.g_xz) * r.z;
    d.y = -(c.g_d + 0.5 * c.g_r) * r.y - c.two_lambda * r.z;
    d.z = -c.phi_dot * r.x - c.g_zx * (r.x - c.rbar) + c.two_lambda * r.y -
          (c.g_d - 0.5 * c.g_r) * r.z;
    return d;
}

struct LinearField {
    double h0, inv_tau, h_dot;

    explicit LinearField(const Schedule& s) noexcept
        : h0(s.h0), inv_tau(1.0 / s.tau), h_dot(s.h_dot()) {}
    double at(double t) const noexcept {
        const double v = h0 * (1.0 - t * inv_tau);
        return v > 0.0 ? v : 0.0;
    }
};

struct StaticField {
    double h, h_dot = 0.0;

    double at(double) const noexcept { return h; }
};

struct StepGrid {
    double dt;
    long n_steps;
};

StepGrid make_grid(double duration, double fast_scale, double dt_max) {
    double dt = dt_max;
    if (fast_scale > 0.0) dt = std::min(dt, kStabilityBudget / fast_scale);
    long n = static_cast<long>(std::ceil(duration / dt - 1e-9));
    if (n < 1) n = 1;
    return {duration / n, n};
}

// Fastest rate the integrator must resolve over one mode's run: the 2 Lambda
// precession, the frame rotation phi_dot (dominant for fast quenches since it
// scales as h0/tau), and the rate magnitudes. eps is monotone on either side
// of h = cos k, so its extrema sit at the field endpoints (or at the crossing,
// where eps = delta).
double mode_fast_scale_anneal(double k, const Schedule& s, EvolutionKind kind,
                              const detail::BathConsts& bc) {
    const Dispersion at_h0 = dispersion(k, s.h0);
    const Dispersion at_end = dispersion(k, 0.0);
    double fast = 0.0;
    if (kind != EvolutionKind::DissipativeOnly) {
        const double eps_max = std::max(at_h0.eps, at_end.eps);
        const double eps_min =
            (std::cos(k) >= 0.0) ? at_h0.delta : std::min(at_h0.eps, at_end.eps);
        const double phidot_max = 2.0 * std::abs(s.h_dot()) * at_h0.delta /
                                  (eps_min * eps_min);
        // Frame rotation gets a 4x tighter budget than the precession: RK4
        // errors there move |r| off the sphere instead of just shifting phase.
        fast = std::max(2.0 * eps_max, 4.0 * phidot_max);
    }
    if (kind != EvolutionKind::CoherentOnly && bc.alpha > 0.0) {
        fast = std::max(fast, 2.0 * bc.c_deph);
    }
    return fast;
}

double mode_fast_scale_static(double k, double h, EvolutionKind kind,
                              const detail::BathConsts& bc) {
    double fast = 0.0;
    if (kind != EvolutionKind::DissipativeOnly) fast = 2.0 * dispersion(k, h).eps;
    if (kind != EvolutionKind::CoherentOnly && bc.alpha > 0.0) {
        fast = std::max(fast, 2.0 * bc.c_deph);
    }
    return fast;
}

template <EvolutionKind K, class Field>
BlochState integrate_core(const ModeConsts& m, double k, const Field& field,
                          const StepGrid& grid, const detail::BathConsts& bc,
                          const long* samp, const long* samp_end, BlochState* out) {
    BlochState r{-1.0, 0.0, 0.0};
    if (samp != samp_end && *samp == 0) {
        *out++ = r;
        ++samp;
    }
    const double dt = grid.dt;
    const double half = 0.5 * dt;
    const double sixth = dt / 6.0;
    constexpr double blowup_sq = (1.0 + kBlowupTol) * (1.0 + kBlowupTol);
    StageCoeffs c0 = stage_coeffs<K>(m, field.at(0.0), field.h_dot, bc);
    for (long i = 0; i < grid.n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const StageCoeffs ch = stage_coeffs<K>(m, field.at(t + half), field.h_dot, bc);
        const StageCoeffs ce = stage_coeffs<K>(m, field.at(t + dt), field.h_dot, bc);
        const BlochState k1 = rhs_apply(c0, r);
        const BlochState k2 =
            rhs_apply(ch, {r.x + half * k1.x, r.y + half * k1.y, r.z + half * k1.z});
        const BlochState k3 =
            rhs_apply(ch, {r.x + half * k2.x, r.y + half * k2.y, r.z + half * k2.z});
        const BlochState k4 =
            rhs_apply(ce, {r.x + dt * k3.x, r.y + dt * k3.y, r.z + dt * k3.z});
        r.x += sixth * (k1.x + 2.0 * (k2.x + k3.x) + k4.x);
        r.y += sixth * (k1.y + 2.0 * (k2.y + k3.y) + k4.y);
        r.z += sixth * (k1.z + 2.0 * (k2.z + k3.z) + k4.z);
        c0 = ce;
        if (r.x * r.x + r.y * r.y + r.z * r.z > blowup_sq) {
            throw NumericalError(
                "integrate_mode: |r| = " + std::to_string(r.norm()) + " exceeded 1 + " +
                std::to_string(kBlowupTol) + " at t = " + std::to_string(t + dt) +
                " (step " + std::to_string(i + 1) + " of " + std::to_string(grid.n_steps) +
                ", dt = " + std::to_string(dt) + ", k = " + std::to_string(k) + ")");
        }
        if (samp != samp_end && *samp == i + 1) {
            *out++ = r;
            ++samp;
        }
    }
    return r;
}

template <class Field>
BlochState dispatch_integrate(EvolutionKind kind, const ModeConsts& m, double k,
                              const Field& field, const StepGrid& grid,
                              const detail::BathConsts& bc, const long* samp,
                              const long* samp_end, BlochState* out) {
    switch (kind) {
        case EvolutionKind::Full:
            return integrate_core<EvolutionKind::Full>(m, k, field, grid, bc, samp,
                                                       samp_end, out);
        case EvolutionKind::CoherentOnly:
            return integrate_core<EvolutionKind::CoherentOnly>(m, k, field, grid, bc,
                                                               samp, samp_end, out);
        case EvolutionKind::DissipativeOnly:
            return integrate_core<EvolutionKind::DissipativeOnly>(m, k, field, grid, bc,
                                                                  samp, samp_end, out);
    }
    throw ConfigError("unknown evolution kind");
}

// ~n_samples log-spaced step indices in [0, n_steps], always containing both
// endpoints, strictly increasing.
std::vector<long> sample_indices(const StepGrid& grid, double duration, int n_samples) {
    std::vector<long> idx;
    idx.push_back(0);
    if (n_samples > 2) {
        const double t_lo = std::max(grid.dt, duration * 1e-4);
        const double lr = std::log(duration / t_lo);
        for (int j = 0; j < n_samples - 1; ++j) {
            const double t = t_lo * std::exp(lr * j / (n_samples - 2.0));
            long s = std::lround(t / grid.dt);
            s = std::clamp<long>(s, 1, grid.n_steps);
            if (s > idx.back()) idx.push_back(s);
        }
    }
    if (idx.back() != grid.n_steps) idx.push_back(grid.n_steps);
    return idx;
}

// Mean defect expectation of a subset of modes at the final time (diagnostic
// aggregate for the step convergence check).
template <class Field>
double subset_final_mean(const std::vector<ModeConsts>& mc, const std::vector<double>& ks,
                         const std::vector<int>& subset, EvolutionKind kind,
                         const Field& field, double duration, const StepGrid& grid,
                         const detail::BathConsts& bc) {
    double acc = 0.0;
    for (int mi : subset) {
        const BlochState r = dispatch_integrate(kind, mc[mi], ks[mi], field, grid, bc,
                                                nullptr, nullptr, nullptr);
        const double phi = rotated_frame(ks[mi], field.at(duration), field.h_dot).phi;
        acc += std::clamp(mode_defect_expectation(r, phi, ks[mi], kBlowupTol), 0.0, 2.0);
    }
    return acc / subset.size();
}

struct ChainCore {
    std::vector<double> expectation;  // per mode, clamped to [0, 2]
    std::vector<long> samples;        // step indices (empty when not sampling)
    std::vector<BlochState> states;   // mode-major sampled states
    StepGrid grid{0.0, 0};
    int halvings = 0;
};

template <class Field>
ChainCore run_chain(int n_sites, const Field& field, double duration, double fast_scale,
                    const BathSpec& bath, EvolutionKind kind,
                    const IntegratorPolicy& policy, int jobs, int n_samples) {
    if (policy.dt_max <= 0.0) throw ConfigError("IntegratorPolicy: dt_max must be > 0");
    if (policy.refine_factor < 2) {
        throw ConfigError("IntegratorPolicy: refine_factor must be >= 2");
    }
    const auto modes = k_grid(n_sites);
    const int m_count = static_cast<int>(modes.size());
    std::vector<ModeConsts> mc;
    std::vector<double> ks;
    mc.reserve(modes.size());
    ks.reserve(modes.size());
    for (const auto& km : modes) {
        mc.push_back(ModeConsts::from(km.k));
        ks.push_back(km.k);
    }
    const auto bc = detail::BathConsts::from(bath);

    ChainCore core;
    double dt_max = policy.dt_max;
    if (policy.convergence_tol > 0.0) {
        std::vector<int> subset;
        const int take = std::min(kSubsampleModes, m_count);
        for (int j = 0; j < take; ++j) {
            subset.push_back(static_cast<int>((2 * j + 1) * static_cast<long>(m_count) /
                                              (2 * take)));
        }
        for (;;) {
            const StepGrid coarse = make_grid(duration, fast_scale, dt_max);
            const StepGrid fine{coarse.dt / policy.refine_factor,
                                coarse.n_steps * policy.refine_factor};
            const double a =
                subset_final_mean(mc, ks, subset, kind, field, duration, coarse, bc);
            const double b =
                subset_final_mean(mc, ks, subset, kind, field, duration, fine, bc);
            if (std::abs(a - b) <= policy.convergence_tol * std::max(std::abs(b), 1e-12)) {
                break;
            }
            dt_max = coarse.dt / policy.refine_factor;
            if (++core.halvings > kMaxHalvings) {
                throw NumericalError(
                    "anneal_chain: step convergence check did not settle after " +
                    std::to_string(kMaxHalvings) + " refinements (dt_max = " +
                    std::to_string(dt_max) + ")");
            }
        }
    }
    core.grid = make_grid(duration, fast_scale, dt_max);

    if (n_samples > 0) core.samples = sample_indices(core.grid, duration, n_samples);
    const std::size_t s_count = core.samples.size();
    core.states.resize(s_count * modes.size());
    core.expectation.resize(modes.size());

    const long* samp = core.samples.data();
    const long* samp_end = samp + s_count;
    parallel_for(jobs, m_count, [&](int i) {
        BlochState* out = s_count ? core.states.data() + s_count * i : nullptr;
        const BlochState r = dispatch_integrate(kind, mc[i], ks[i], field, core.grid, bc,
                                                s_count ? samp : nullptr,
                                                s_count ? samp_end : nullptr, out);
        const double phi = rotated_frame(ks[i], field.at(duration), field.h_dot).phi;
        core.expectation[i] =
            std::clamp(mode_defect_expectation(r, phi, ks[i], kBlowupTol), 0.0, 2.0);
    });
    return core;
}

template <class Field>
ChainSeries series_from_core(const ChainCore& core, int n_sites, const Field& field,
                             const std::vector<double>& ks) {
    ChainSeries out;
    out.dt = core.grid.dt;
    out.dt_halvings = core.halvings;
    const std::size_t s_count = core.samples.size();
    std::vector<double> per_mode(ks.size());
    for (std::size_t j = 0; j < s_count; ++j) {
        const double t = static_cast<double>(core.samples[j]) * core.grid.dt;
        const double h = field.at(t);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const double phi = rotated_frame(ks[i], h, field.h_dot).phi;
            per_mode[i] = std::clamp(
                mode_defect_expectation(core.states[s_count * i + j], phi, ks[i],
                                        kBlowupTol),
                0.0, 2.0);
        }
        out.points.push_back({t, h, chain_defect_density(per_mode, n_sites)});
    }
    return out;
}

double chain_fast_scale_anneal(int n_sites, const Schedule& s, EvolutionKind kind,
                               const detail::BathConsts& bc) {
    double fast = 0.0;
    for (const auto& km : k_grid(n_sites)) {
        fast = std::max(fast, mode_fast_scale_anneal(km.k, s, kind, bc));
    }
    return fast;
}

double chain_fast_scale_static(int n_sites, double h, EvolutionKind kind,
                               const detail::BathConsts& bc) {
    double fast = 0.0;
    for (const auto& km : k_grid(n_sites)) {
        fast = std::max(fast, mode_fast_scale_static(km.k, h, kind, bc));
    }
    return fast;
}

}  // namespace

const char* to_string(EvolutionKind kind) noexcept {
    switch (kind) {
        case EvolutionKind::Full: return "full";
        case EvolutionKind::CoherentOnly: return "coherent";
        case EvolutionKind::DissipativeOnly: return "dissipative";
    }
    return "?";
}

EvolutionKind evolution_kind_from_string(const std::string& name) {
    if (name == "full") return EvolutionKind::Full;
    if (name == "coherent") return EvolutionKind::CoherentOnly;
    if (name == "dissipative") return EvolutionKind::DissipativeOnly;
    throw ConfigError("unknown evolution kind '" + name +
                      "' (expected full|coherent|dissipative)");
}

BlochState rhs_full(const BlochState& r, double k, double h, double h_dot,
                    const BathSpec& bath) {
    const auto c = stage_coeffs<EvolutionKind::Full>(ModeConsts::from(k), h, h_dot,
                                                     detail::BathConsts::from(bath));
    return rhs_apply(c, r);
}

BlochState rhs_coherent(const BlochState& r, double k, double h, double h_dot) {
    // Bath constants are never touched on the coherent path.
    const detail::BathConsts none{0.0, 1.0, 1.0, 0.0, 0.0};
    const auto c =
        stage_coeffs<EvolutionKind::CoherentOnly>(ModeConsts::from(k), h, h_dot, none);
    return rhs_apply(c, r);
}

BlochState rhs_dissipative(const BlochState& r, double k, double h,
                           const BathSpec& bath) {
    const auto c = stage_coeffs<EvolutionKind::DissipativeOnly>(
        ModeConsts::from(k), h, 0.0, detail::BathConsts::from(bath));
    return rhs_apply(c, r);
}

BlochState integrate_mode(double k, const Schedule& schedule, const BathSpec& bath,
                          EvolutionKind kind, const IntegratorPolicy& policy) {
    const auto bc = detail::BathConsts::from(bath);
    const StepGrid grid = make_grid(
        schedule.tau, mode_fast_scale_anneal(k, schedule, kind, bc), policy.dt_max);
    return dispatch_integrate(kind, ModeConsts::from(k), k, LinearField(schedule), grid,
                              bc, nullptr, nullptr, nullptr);
}

ModeTrajectory integrate_mode_sampled(double k, const Schedule& schedule,
                                      const BathSpec& bath, EvolutionKind kind,
                                      const IntegratorPolicy& policy, int n_samples) {
    const auto bc = detail::BathConsts::from(bath);
    const StepGrid grid = make_grid(
        schedule.tau, mode_fast_scale_anneal(k, schedule, kind, bc), policy.dt_max);
    const auto idx = sample_indices(grid, schedule.tau, n_samples);
    ModeTrajectory traj;
    traj.states.resize(idx.size());
    dispatch_integrate(kind, ModeConsts::from(k), k, LinearField(schedule), grid,
                       bc, idx.data(), idx.data() + idx.size(), traj.states.data());
    traj.times.reserve(idx.size());
    for (long s : idx) traj.times.push_back(static_cast<double>(s) * grid.dt);
    return traj;
}

ChainResult anneal_chain(const AnnealConfig& config) {
    const LinearField field(config.schedule);
    const double fast = chain_fast_scale_anneal(config.n_sites, config.schedule,
                                                config.kind,
                                                detail::BathConsts::from(config.bath));
    const ChainCore core = run_chain(config.n_sites, field, config.schedule.tau, fast,
                                     config.bath, config.kind, config.policy,
                                     config.jobs, 0);
    return {chain_defect_density(core.expectation, config.n_sites), core.grid.dt,
            core.halvings};
}

ChainSeries anneal_chain_series(const AnnealConfig& config, int n_samples) {
    if (n_samples < 2) throw ConfigError("anneal_chain_series: n_samples must be >= 2");
    const LinearField field(config.schedule);
    const double fast = chain_fast_scale_anneal(config.n_sites, config.schedule,
                                                config.kind,
                                                detail::BathConsts::from(config.bath));
    const ChainCore core = run_chain(config.n_sites, field, config.schedule.tau, fast,
                                     config.bath, config.kind, config.policy,
                                     config.jobs, n_samples);
    std::vector<double> ks;
    for (const auto& km : k_grid(config.n_sites)) ks.push_back(km.k);
    return series_from_core(core, config.n_sites, field, ks);
}

ChainSeries relax_chain(int n_sites, double h, const BathSpec& bath, double t_end,
                        const IntegratorPolicy& policy, int jobs, int n_samples) {
    if (!(h >= 0.0)) throw ConfigError("relax_chain: h must be >= 0");
    if (!(t_end > 0.0)) throw ConfigError("relax_chain: t_end must be > 0");
    if (n_samples < 2) throw ConfigError("relax_chain: n_samples must be >= 2");
    const StaticField field{h};
    const double fast = chain_fast_scale_static(n_sites, h, EvolutionKind::Full,
                                                detail::BathConsts::from(bath));
    const ChainCore core = run_chain(n_sites, field, t_end, fast, bath,
                                     EvolutionKind::Full, policy, jobs, n_samples);
    std::vector<double> ks;
    for (const auto& km : k_grid(n_sites)) ks.push_back(km.k);
    return series_from_core(core, n_sites, field, ks);
}

namespace detail {

BlochState integrate_mode_fixed_dt(double k, const Schedule& schedule,
                                   const BathSpec& bath, EvolutionKind kind, double dt) {
    if (!(dt > 0.0)) throw ConfigError("integrate_mode_fixed_dt: dt must be > 0");
    long n = static_cast<long>(std::ceil(schedule.tau / dt - 1e-9));
    if (n < 1) n = 1;
    const StepGrid grid{schedule.tau / n, n};
    return dispatch_integrate(kind, ModeConsts::from(k), k, LinearField(schedule), grid,
                              BathConsts::from(bath), nullptr, nullptr, nullptr);
}

}  // namespace detail

}  // namespace tfim
