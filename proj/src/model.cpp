#include "tfim/model.hpp"

#include <algorithm>
#include <numbers>

namespace tfim {

std::vector<KMode> k_grid(int n_sites) {
    if (n_sites < 2 || n_sites % 2 != 0) {
        throw ConfigError("k_grid: chain size must be even and >= 2, got " +
                          std::to_string(n_sites));
    }
    std::vector<KMode> modes;
    modes.reserve(static_cast<std::size_t>(n_sites / 2));
    for (int n = 1; n <= n_sites / 2; ++n) {
        modes.push_back({std::numbers::pi * (2.0 * n - 1.0) / n_sites, n});
    }
    return modes;
}

Dispersion dispersion(double k, double h) {
    const double xi = 2.0 * (h - std::cos(k));
    const double delta = 2.0 * std::sin(k);
    return {xi, delta, std::sqrt(xi * xi + delta * delta)};
}

Schedule::Schedule(double h0_, double tau_) : h0(h0_), tau(tau_) {
    if (!(h0 > 1.0)) {
        throw ConfigError("Schedule: h0 must exceed the critical field h_c = 1, got " +
                          std::to_string(h0));
    }
    if (!(tau > 0.0)) {
        throw ConfigError("Schedule: tau must be positive, got " + std::to_string(tau));
    }
}

double Schedule::h(double t) const {
    if (t < 0.0 || t > tau) {
        throw DomainError("Schedule::h: t = " + std::to_string(t) +
                          " outside [0, " + std::to_string(tau) + "]");
    }
    return h_clamped(t);
}

RotatedFrame rotated_frame(double k, double h, double h_dot) {
    const Dispersion d = dispersion(k, h);
    const double phi = std::atan2(d.xi, d.delta);  // delta > 0 on (0, pi)
    const double phi_dot = 2.0 * h_dot * d.delta / (d.eps * d.eps);
    return {phi, phi_dot};
}

double mode_defect_expectation(const BlochState& r, double phi, double k, double tol) {
    const double nrm = r.norm();
    if (nrm > 1.0 + tol) {
        throw NumericalError("mode_defect_expectation: |r| = " + std::to_string(nrm) +
                             " exceeds 1 + " + std::to_string(tol) + " at k = " +
                             std::to_string(k));
    }
    // Lab-frame components from the rotated frame: s = R r R^dag with
    // R = exp(i phi tau^y / 2).
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double sx = r.x * c - r.z * s;
    const double sz = r.z * c + r.x * s;
    return 1.0 - sz * std::cos(k) + sx * std::sin(k);
}

double chain_defect_density(const std::vector<double>& per_mode, int n_sites) {
    if (n_sites < 2 || n_sites % 2 != 0) {
        throw ConfigError("chain_defect_density: chain size must be even and >= 2");
    }
    if (per_mode.size() != static_cast<std::size_t>(n_sites / 2)) {
        throw ConfigError("chain_defect_density: expected " +
                          std::to_string(n_sites / 2) + " per-mode values, got " +
                          std::to_string(per_mode.size()));
    }
    double acc = 0.0;
    for (double v : per_mode) acc += v;
    return acc / n_sites;
}

}  // namespace tfim
