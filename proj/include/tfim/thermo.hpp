// thermo.hpp — equilibrium defect densities of the chain: momentum-space PBC
// formulas (pair-restricted and full counting), open-boundary quadratic-fermion
// thermodynamics, and the h = 0 thermal plateau n_therm(T).

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tfim/model.hpp"

namespace tfim {

// y_k = (delta sin k - xi cos k) / eps; |y_k| <= 1, and y_k = 1 at h = 0.
double y_factor(double k, double h);

// Thermal defect density of the pair-restricted sector equilibrated with a
// bath at temperature t_bath: (1/N) sum_k [1 - y_k tanh(eps_k / t_bath)].
double thermal_defects_restricted(double h, double t_bath, int n_sites);

// Full-counting thermal defect density at temperature t:
// (1/N) sum_k [1 - y_k tanh(eps_k / (2t))]. Identical to the restricted
// formula at t_bath = 2t.
double thermal_defects_full(double h, double t, int n_sites);

// Large-tau thermal plateau at h = 0: n_therm(T) = (1 - tanh(1/T)) / 2.
double n_therm(double t);

// thermal_defects_full evaluated along the schedule at the given times.
std::vector<double> instantaneous_thermal_curve(const Schedule& schedule, double t,
                                                int n_sites,
                                                const std::vector<double>& times);

// Bogoliubov amplitudes (u, v) = (eps + xi, delta) / sqrt(2 eps (eps + xi)),
// u^2 + v^2 = 1. Derivation intermediates; used by the exact-diagonalization
// cross-checks only.
struct BogoliubovMode {
    double u, v;
};
BogoliubovMode bogoliubov_mode(double k, double h);

// Positive-branch eigenmodes of the open-boundary quadratic fermion problem
// (N - 1 bonds, transverse field on all N sites). One eigenmode per row of
// g and h; a single-mode excitation costs 2 * energies[m]. Canonical:
// sum_i (g_mi g_m'i + h_mi h_m'i) = delta_mm'. The sign gauge is fixed by
// sum_i g_mi >= 0.
struct ObcSpectrum {
    Eigen::VectorXd energies;
    Eigen::MatrixXd g, h;
};
ObcSpectrum obc_diagonalize(int n_sites, double field);

// Open-boundary thermal defect density (per bond) at temperature t:
// 1/2 - (1/(N-1)) sum_m [A_m f(2 eps_m / t) + B_m f(-2 eps_m / t)] with
// f(x) = 1/(1 + e^x), A_m = sum_i g_mi (g_m,i+1 + h_m,i+1) and B_m likewise
// from h_mi.
double thermal_defects_obc(const ObcSpectrum& spectrum, int n_sites, double t);
double thermal_defects_obc(int n_sites, double field, double t);

// Fermi factor f(x) = 1 / (1 + e^x), overflow-safe.
double fermi_function(double x) noexcept;

}  // namespace tfim
