// analysis.hpp — turns raw sweeps into results: optimal-working-point
// classification of n_def(tau) curves, the T_up/T_low phase boundaries,
// Kibble-Zurek exponent fits, and the additivity-gap measurement.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tfim/dynamics.hpp"

namespace tfim {

// Log-spaced grid including both endpoints (pts_per_decade >= 1, hi > lo > 0).
std::vector<double> log_grid(double lo, double hi, int pts_per_decade);

// n_def vs tau samples of one parameter point.
struct DefectCurve {
    std::vector<double> tau;    // strictly increasing
    std::vector<double> n_def;  // in [0, 1]
    int n_sites = 0;
    double alpha = 0.0, t_eff = 0.0;
    EvolutionKind kind = EvolutionKind::Full;
};

// Runs anneal_chain at each grid point (>= 8 points, ascending).
DefectCurve sweep_tau(const AnnealConfig& base, const std::vector<double>& taus);

enum class OwpKind { GlobalOwp, LocalOwp, Monotonic };
const char* to_string(OwpKind kind) noexcept;

// GlobalOwp: an interior local minimum exists with n_opt < n_plateau - tol.
// LocalOwp:  a local minimum exists with n_opt >= n_plateau - tol.
// Monotonic: no interior local minimum at grid resolution.
struct OwpClassification {
    OwpKind kind = OwpKind::Monotonic;
    std::optional<double> tau_opt;
    std::optional<double> n_opt;
    double n_plateau = 0.0;
};

// Three-point discrete local-minimum detection with parabolic refinement in
// log tau. n_plateau must come from the analytic thermal plateau, not from
// the curve tail. The curve must rise by more than tol after a candidate
// minimum, which keeps converged flat tails from registering as minima.
OwpClassification classify_curve(const DefectCurve& curve, double n_plateau,
                                 double tol = 1e-3);

// Sweep recipe for one (alpha, T_eff) phase-diagram evaluation.
struct OwpScan {
    int n_sites = 128;
    double h0 = 10.0;
    double omega_c = 10.0;
    std::vector<double> taus;  // log grid, >= 8 points
    IntegratorPolicy policy{};
    int jobs = 1;
    double classify_tol = 1e-3;
};
OwpClassification classify_at(const OwpScan& scan, double alpha, double t_eff);

enum class BoundaryStatus { Found, NoSignChange, PossiblyBelowBracket };
struct BoundaryResult {
    BoundaryStatus status = BoundaryStatus::NoSignChange;
    double value = 0.0;       // boundary estimate when Found
    double resolution = 0.0;  // final bracket width
    int evaluations = 0;
};

// T_up: bisection root of n_opt(T) - n_therm(T) (curves with no minimum count
// as the no-global-OWP side). T_low: bisection on "a local minimum exists at
// grid resolution"; reports PossiblyBelowBracket when the minimum persists at
// the lower bracket edge.
BoundaryResult find_t_up(const OwpScan& scan, double alpha, double t_lo, double t_hi,
                         double t_tol);
BoundaryResult find_t_low(const OwpScan& scan, double alpha, double t_lo, double t_hi,
                          double t_tol);

// Both boundaries of one coupling; t_low <= t_up whenever both resolve.
struct PhaseBoundaryPoint {
    double alpha = 0.0;
    BoundaryResult t_up, t_low;
};
PhaseBoundaryPoint phase_boundary(const OwpScan& scan, double alpha, double t_lo,
                                  double t_hi, double t_tol);

// Least-squares slope of log n_def vs log tau over [tau_lo, tau_hi].
struct KzFit {
    double exponent = 0.0;
    double std_error = 0.0;
    int n_points = 0;
};
KzFit kz_fit(const DefectCurve& curve, double tau_lo, double tau_hi);

// Full vs coherent + dissipative defect production per tau.
struct AdditivityPoint {
    double tau, n_full, n_coh, n_diss, gap;  // gap = n_full - n_coh - n_diss
};
std::vector<AdditivityPoint> additivity_gap(const AnnealConfig& base,
                                            const std::vector<double>& taus);

namespace detail {
BoundaryResult bisect_root(const std::function<double(double)>& f, double lo, double hi,
                           double tol);
BoundaryResult bisect_existence(const std::function<bool(double)>& exists, double lo,
                                double hi, double tol);
}

}  // namespace tfim
