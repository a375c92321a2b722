// model.hpp — transverse-field Ising chain in momentum space: antiperiodic
// k-grid, single-mode dispersion, linear annealing schedule, rotating frame,
// and the kink (defect) density observable.
//
// Units: hbar = k_B = J = 1 throughout. Times are in hbar/J, temperatures in
// J/k_B, energies in J.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfim {

// Invalid run parameters (odd chain size, malformed config, bad key, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
// Numerical failure (integrator blow-up, eigensolver non-convergence, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One momentum mode of the even-parity fermion sector, k = pi(2n - 1)/N.
struct KMode {
    double k;
    int index;  // n = 1 .. N/2
};

// Antiperiodic momentum grid for an even chain of n_sites spins.
// Returns exactly n_sites/2 modes with k strictly increasing in (0, pi).
std::vector<KMode> k_grid(int n_sites);

// Mode dispersion at field h: xi = 2(h - cos k), delta = 2 sin k,
// eps = sqrt(xi^2 + delta^2). delta never depends on h.
struct Dispersion {
    double xi, delta, eps;
};
Dispersion dispersion(double k, double h);

// Linear annealing schedule h(t) = (1 - t/tau) h0. The quantum critical point
// h_c = 1 is crossed at t_c = (1 - 1/h0) tau.
struct Schedule {
    double h0;
    double tau;

    Schedule(double h0_, double tau_);

    double h(double t) const;  // DomainError outside [0, tau]
    // Unchecked variant for integrator stage times that may overshoot tau by
    // one rounding ulp.
    double h_clamped(double t) const noexcept {
        const double v = (1.0 - t / tau) * h0;
        return v > 0.0 ? v : 0.0;
    }
    double h_dot() const noexcept { return -h0 / tau; }
    double t_critical() const noexcept { return (1.0 - 1.0 / h0) * tau; }
};

// Rotated-frame Bloch vector of one mode. The annealing initial state is
// r = (-1, 0, 0), the exact rotated-frame ground state at any h0.
struct BlochState {
    double x = 0.0, y = 0.0, z = 0.0;

    double norm() const noexcept { return std::sqrt(x * x + y * y + z * z); }
};

// Frame rotation R = exp(i phi tau^y / 2) with phi = arctan(xi/delta), fixed
// by the invariant R^dag H R = eps tau^x. phi_dot is analytic:
// phi_dot = 2 h_dot delta / eps^2 (delta is time independent).
struct RotatedFrame {
    double phi, phi_dot;
};
RotatedFrame rotated_frame(double k, double h, double h_dot);

// Defect expectation of one mode: un-rotates r to the lab frame and evaluates
// <1 - tau^z cos k + tau^x sin k>. Result lies in [0, 2] for physical states;
// no clamping is applied here. Throws NumericalError if |r| > 1 + tol.
double mode_defect_expectation(const BlochState& r, double phi, double k,
                               double tol = 1e-3);

// Chain average (1/N) sum_k per_mode[k], summed in ascending-k order.
// per_mode.size() must equal n_sites/2.
double chain_defect_density(const std::vector<double>& per_mode, int n_sites);

}  // namespace tfim
