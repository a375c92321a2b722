// dynamics.hpp — the three evolution laws (full Bloch-Redfield, coherent-only,
// dissipative-only) as rotated-frame Bloch ODEs, a fixed-step RK4 integrator,
// and per-mode / whole-chain annealing drivers.

#pragma once

#include <string>
#include <vector>

#include "tfim/bath.hpp"
#include "tfim/model.hpp"

namespace tfim {

enum class EvolutionKind { Full, CoherentOnly, DissipativeOnly };

const char* to_string(EvolutionKind kind) noexcept;
EvolutionKind evolution_kind_from_string(const std::string& name);

// Fixed-step integration policy. The actual step of a run is
// dt = min(dt_max, 0.2 / max_t(2 Lambda)) rounded so that ceil(tau/dt) steps
// land exactly on tau. The convergence check reruns a 16-mode subsample at
// dt / refine_factor and halves dt_max globally until the subsample chain
// density shifts by no more than convergence_tol (relative); 0 disables it.
struct IntegratorPolicy {
    double dt_max = 1e-2;
    int refine_factor = 2;
    double convergence_tol = 1e-4;
};

// Right-hand sides. rhs_full = rhs_coherent + rhs_dissipative componentwise.
BlochState rhs_full(const BlochState& r, double k, double h, double h_dot,
                    const BathSpec& bath);
BlochState rhs_coherent(const BlochState& r, double k, double h, double h_dot);
BlochState rhs_dissipative(const BlochState& r, double k, double h,
                           const BathSpec& bath);

// Classic RK4 over the annealing schedule from r = (-1, 0, 0) at t = 0 to
// t = tau; rates and phi_dot are evaluated at each stage time. Throws
// NumericalError with step/time diagnostics if |r| ever exceeds 1 + 1e-3.
BlochState integrate_mode(double k, const Schedule& schedule, const BathSpec& bath,
                          EvolutionKind kind, const IntegratorPolicy& policy);

struct ModeTrajectory {
    std::vector<double> times;
    std::vector<BlochState> states;
};
// As integrate_mode, also recording ~n_samples log-spaced states (snapped to
// step boundaries; always includes t = 0 and t = tau).
ModeTrajectory integrate_mode_sampled(double k, const Schedule& schedule,
                                      const BathSpec& bath, EvolutionKind kind,
                                      const IntegratorPolicy& policy, int n_samples);

struct AnnealConfig {
    int n_sites;
    Schedule schedule;
    BathSpec bath;
    EvolutionKind kind = EvolutionKind::Full;
    IntegratorPolicy policy{};
    int jobs = 1;  // worker threads for the mode map; 0 = hardware
};

struct ChainResult {
    double n_def;
    double dt;         // step actually used after clamping/convergence
    int dt_halvings;   // number of global halvings the convergence check took
};
// Integrates all N/2 modes independently and aggregates the final defect
// density. Deterministic: identical inputs give bit-identical outputs, and
// the result does not depend on jobs.
ChainResult anneal_chain(const AnnealConfig& config);

struct SeriesPoint {
    double t, h, n_def;
};
struct ChainSeries {
    std::vector<SeriesPoint> points;
    double dt;
    int dt_halvings;
};
// Like anneal_chain but returns n_def(t) at ~n_samples log-spaced times.
ChainSeries anneal_chain_series(const AnnealConfig& config, int n_samples = 512);

// Static-field relaxation from the ground state at field h: anneal dynamics
// with h_dot = 0, used to verify thermalization against the equilibrium
// defect density.
ChainSeries relax_chain(int n_sites, double h, const BathSpec& bath, double t_end,
                        const IntegratorPolicy& policy = {}, int jobs = 1,
                        int n_samples = 512);

namespace detail {
// Fixed-dt single-mode integration (no stability clamp); exposed so tests can
// drive the blow-up diagnostics and step-size studies directly.
BlochState integrate_mode_fixed_dt(double k, const Schedule& schedule,
                                   const BathSpec& bath, EvolutionKind kind,
                                   double dt);
}

}  // namespace tfim
