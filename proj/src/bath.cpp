#include "tfim/bath.hpp"

namespace tfim {

BathSpec::BathSpec(double alpha_, double omega_c_, double t_eff_)
    : alpha(alpha_), omega_c(omega_c_), t_eff(t_eff_) {
    if (!(alpha >= 0.0)) {
        throw ConfigError("BathSpec: alpha must be >= 0, got " + std::to_string(alpha));
    }
    if (!(omega_c > 0.0)) {
        throw ConfigError("BathSpec: omega_c must be positive, got " +
                          std::to_string(omega_c));
    }
    if (!(t_eff > 0.0)) {
        throw ConfigError("BathSpec: t_eff must be positive, got " +
                          std::to_string(t_eff));
    }
}

double ohmic_spectral_density(double omega, const BathSpec& bath) {
    if (omega < 0.0) {
        throw DomainError("ohmic_spectral_density: omega must be >= 0, got " +
                          std::to_string(omega));
    }
    return 2.0 * bath.alpha * omega * std::exp(-omega / bath.omega_c);
}

RateSet rates(double k, double h, const BathSpec& bath) {
    const Dispersion d = dispersion(k, h);
    const double inv_eps_sq = 1.0 / (d.eps * d.eps);
    const auto rr = detail::raw_rates(d.xi, d.delta, d.delta * d.delta, d.eps,
                                      inv_eps_sq, detail::BathConsts::from(bath));
    RateSet rs;
    rs.gamma_r = rr.g_r;
    rs.gamma_phi = rr.g_phi;
    rs.gamma_d = rr.g_phi + 0.5 * rr.g_r;
    rs.gamma_zx = rr.g_zx;
    rs.gamma_xz = rr.g_xz;
    rs.r_bar_x = rr.rbar;
    return rs;
}

double equilibrium_rx(double eps, const BathSpec& bath) {
    return -std::tanh(bath.beta_b() * eps);
}

}  // namespace tfim
