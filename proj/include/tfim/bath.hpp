// bath.hpp — Ohmic spectral density and the rotated-frame Bloch-Redfield rate
// constants of a driven two-level mode weakly coupled to a bosonic bath.
//
// Temperature convention: only the even-parity pair sector couples to the
// bath, so the chain equilibrates at the effective temperature
// T_eff = T_bath / 2. All public surfaces take T_eff; the internal bath
// inverse temperature is beta_b = 1 / (2 T_eff).

#pragma once

#include <cmath>
#include <numbers>

#include "tfim/model.hpp"

namespace tfim {

struct BathSpec {
    double alpha;    // dimensionless system-bath coupling strength
    double omega_c;  // spectral cutoff frequency (J/hbar)
    double t_eff;    // effective system temperature (J/k_B)

    BathSpec(double alpha_, double omega_c_, double t_eff_);

    double beta_b() const noexcept { return 1.0 / (2.0 * t_eff); }
};

// Ohmic spectral density J(omega) = 2 alpha omega exp(-omega/omega_c).
// DomainError for omega < 0.
double ohmic_spectral_density(double omega, const BathSpec& bath);

// The five time-dependent rate constants plus the instantaneous equilibrium
// target of r_x. gamma_d = gamma_phi + gamma_r/2 holds as an identity.
struct RateSet {
    double gamma_r;    // relaxation
    double gamma_phi;  // pure dephasing
    double gamma_d;    // decoherence
    double gamma_zx;   // z<-x cross rate
    double gamma_xz;   // x<-z cross rate
    double r_bar_x;    // -tanh(beta_b eps), in [-1, 0]
};
RateSet rates(double k, double h, const BathSpec& bath);

// Putative equilibrium value that r_x relaxes towards: -tanh(beta_b eps).
double equilibrium_rx(double eps, const BathSpec& bath);

namespace detail {

// Bath constants precomputed once per run for the integrator hot path.
struct BathConsts {
    double alpha, beta_b, omega_c;
    double c_deph;  // 8 pi alpha / beta_b
    double c_xz;    // 4 pi alpha / beta_b

    static BathConsts from(const BathSpec& b) noexcept {
        const double bb = b.beta_b();
        return {b.alpha, bb, b.omega_c, 8.0 * std::numbers::pi * b.alpha / bb,
                4.0 * std::numbers::pi * b.alpha / bb};
    }
};

struct RawRates {
    double g_r, g_phi, g_zx, g_xz, rbar;
};

// Rates at one (xi, delta) point. Trigonometry of the frame angle is carried
// algebraically: cos^2 phi = delta^2/eps^2, sin^2 phi = xi^2/eps^2,
// sin 2phi = 2 xi delta / eps^2. coth is series-guarded near zero so the
// gapless limit coth(beta_b L) J(2L) -> 4 alpha / beta_b stays finite.
inline RawRates raw_rates(double xi, double delta, double delta_sq, double eps,
                          double inv_eps_sq, const BathConsts& b) noexcept {
    const double x = b.beta_b * eps;
    // tanh and coth from one expm1: tanh x = -em/(2+em) with em = expm1(-2x).
    const double em = std::expm1(-2.0 * x);
    const double th = -em / (2.0 + em);
    const double coth = (x < 1e-4) ? 1.0 / x + x / 3.0 : (2.0 + em) / -em;
    const double j2l = 4.0 * b.alpha * eps * std::exp(-2.0 * eps / b.omega_c);
    const double base = 2.0 * std::numbers::pi * coth * j2l;
    const double sin_2phi = 2.0 * xi * delta * inv_eps_sq;
    RawRates r;
    r.g_r = base * (delta_sq * inv_eps_sq);
    r.g_phi = b.c_deph * (xi * xi * inv_eps_sq);
    r.g_zx = -0.5 * base * sin_2phi;
    r.g_xz = b.c_xz * sin_2phi;
    r.rbar = -th;
    return r;
}

}  // namespace detail
}  // namespace tfim
