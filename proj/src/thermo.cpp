#include "tfim/thermo.hpp"

#include <cmath>

namespace tfim {

double y_factor(double k, double h) {
    const Dispersion d = dispersion(k, h);
    return (d.delta * std::sin(k) - d.xi * std::cos(k)) / d.eps;
}

double thermal_defects_restricted(double h, double t_bath, int n_sites) {
    if (!(t_bath > 0.0)) {
        throw ConfigError("thermal_defects_restricted: t_bath must be > 0");
    }
    const double beta_b = 1.0 / t_bath;
    double acc = 0.0;
    for (const auto& km : k_grid(n_sites)) {
        const Dispersion d = dispersion(km.k, h);
        acc += 1.0 - y_factor(km.k, h) * std::tanh(beta_b * d.eps);
    }
    return acc / n_sites;
}

double thermal_defects_full(double h, double t, int n_sites) {
    if (!(t > 0.0)) throw ConfigError("thermal_defects_full: t must be > 0");
    const double beta = 1.0 / t;
    double acc = 0.0;
    for (const auto& km : k_grid(n_sites)) {
        const Dispersion d = dispersion(km.k, h);
        acc += 1.0 - y_factor(km.k, h) * std::tanh(0.5 * beta * d.eps);
    }
    return acc / n_sites;
}

double n_therm(double t) {
    if (!(t > 0.0)) throw ConfigError("n_therm: t must be > 0");
    return 0.5 * (1.0 - std::tanh(1.0 / t));
}

std::vector<double> instantaneous_thermal_curve(const Schedule& schedule, double t,
                                                int n_sites,
                                                const std::vector<double>& times) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double ti : times) {
        out.push_back(thermal_defects_full(schedule.h(ti), t, n_sites));
    }
    return out;
}

BogoliubovMode bogoliubov_mode(double k, double h) {
    const Dispersion d = dispersion(k, h);
    const double s = d.eps + d.xi;  // > 0 on (0, pi) since delta > 0
    const double nrm = std::sqrt(2.0 * d.eps * s);
    return {s / nrm, d.delta / nrm};
}

double fermi_function(double x) noexcept {
    // 1 / (1 + e^x); e^x may overflow to inf for large x, which still yields 0.
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

ObcSpectrum obc_diagonalize(int n_sites, double field) {
    if (n_sites < 2) throw ConfigError("obc_diagonalize: n_sites must be >= 2");
    if (!(field >= 0.0)) throw ConfigError("obc_diagonalize: field must be >= 0");
    const int n = n_sites;

    // Quadratic form H = sum c^dag A c + (1/2)(c^dag B c^dag + h.c.) with
    // A_ii = 2h, A_i,i+1 = -1 (symmetric) and B_i,i+1 = -1 (antisymmetric).
    // C = A + B is upper bidiagonal; M = C^T C = (A - B)(A + B) is symmetric
    // positive semidefinite with eigenpairs (Lambda_m^2, phi_m). The partner
    // vectors follow from psi_m = phi_m (A - B) / Lambda_m, i.e. C phi / Lambda.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        C(i, i) = 2.0 * field;
        if (i + 1 < n) C(i, i + 1) = -2.0;
    }
    const Eigen::MatrixXd M = C.transpose() * C;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) {
        throw NumericalError("obc_diagonalize: eigensolver failed for N = " +
                             std::to_string(n) + ", h = " + std::to_string(field) +
                             " (|M| = " + std::to_string(M.norm()) + ")");
    }

    ObcSpectrum out;
    out.energies.resize(n);
    out.g.resize(n, n);
    out.h.resize(n, n);

    // A near-zero singular value (the h < 1 boundary mode, exact at h = 0)
    // makes C phi / Lambda ill-conditioned; those partners come from the
    // complementary problem C C^T psi = Lambda^2 psi instead.
    const double lambda_tol = 1e-9 * std::max(1.0, 2.0 * field + 2.0);
    std::vector<int> deferred;
    for (int m = 0; m < n; ++m) {
        const Eigen::VectorXd phi = es.eigenvectors().col(m);
        const Eigen::VectorXd w = C * phi;
        const double lambda = w.norm();
        out.energies(m) = 0.5 * lambda;  // two-level convention: levels +-eps_m
        if (lambda > lambda_tol) {
            const Eigen::VectorXd psi = w / lambda;
            out.g.row(m) = 0.5 * (phi + psi).transpose();
            out.h.row(m) = 0.5 * (phi - psi).transpose();
        } else {
            out.g.row(m) = 0.5 * phi.transpose();  // completed below
            out.h.row(m) = 0.5 * phi.transpose();
            deferred.push_back(m);
        }
    }
    if (!deferred.empty()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(C * C.transpose());
        if (es2.info() != Eigen::Success) {
            throw NumericalError("obc_diagonalize: partner eigensolver failed for N = " +
                                 std::to_string(n));
        }
        for (std::size_t j = 0; j < deferred.size(); ++j) {
            const int m = deferred[j];
            const Eigen::VectorXd phi = es.eigenvectors().col(m);
            const Eigen::VectorXd psi = es2.eigenvectors().col(static_cast<int>(j));
            out.g.row(m) = 0.5 * (phi + psi).transpose();
            out.h.row(m) = 0.5 * (phi - psi).transpose();
        }
    }
    for (int m = 0; m < n; ++m) {
        if (out.g.row(m).sum() < 0.0) {
            out.g.row(m) = -out.g.row(m);
            out.h.row(m) = -out.h.row(m);
        }
    }
    return out;
}

double thermal_defects_obc(const ObcSpectrum& spectrum, int n_sites, double t) {
    if (!(t > 0.0)) throw ConfigError("thermal_defects_obc: t must be > 0");
    const int n = n_sites;
    if (spectrum.g.rows() != n || spectrum.g.cols() != n) {
        throw ConfigError("thermal_defects_obc: spectrum size does not match n_sites");
    }
    const double beta = 1.0 / t;
    double acc = 0.0;
    for (int m = 0; m < n; ++m) {
        double a_m = 0.0, b_m = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const double gh = spectrum.g(m, i + 1) + spectrum.h(m, i + 1);
            a_m += spectrum.g(m, i) * gh;
            b_m += spectrum.h(m, i) * gh;
        }
        const double x = 2.0 * beta * spectrum.energies(m);
        acc += a_m * fermi_function(x) + b_m * fermi_function(-x);
    }
    return 0.5 - acc / (n - 1);
}

double thermal_defects_obc(int n_sites, double field, double t) {
    return thermal_defects_obc(obc_diagonalize(n_sites, field), n_sites, t);
}

}  // namespace tfim
