#include "tfim/ed.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace tfim {

namespace {

// Open chain H = -sum_{i<N-1} sx_i sx_{i+1} - h sum_i sz_i over the full
// 2^N space; defect density is per bond, (1/(2(N-1))) sum_i (1 - sx sx).
double obc_full_thermal(int n, double h, double temperature) {
    const int dim = 1 << n;
    Eigen::MatrixXd ham = Eigen::MatrixXd::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            diag -= h * ((s >> i) & 1 ? -1.0 : 1.0);
        }
        ham(s, s) = diag;
        for (int i = 0; i + 1 < n; ++i) {
            const int flipped = s ^ ((1 << i) | (1 << (i + 1)));
            ham(flipped, s) -= 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ham);
    if (es.info() != Eigen::Success) {
        throw NumericalError("ed_oracle_thermal: eigensolver failed (N = " +
                             std::to_string(n) + ")");
    }
    const Eigen::VectorXd& energies = es.eigenvalues();
    const Eigen::MatrixXd& vectors = es.eigenvectors();
    const double beta = 1.0 / temperature;
    const double e0 = energies(0);

    double z = 0.0;
    double acc = 0.0;
    for (int m = 0; m < dim; ++m) {
        const double w = std::exp(-beta * (energies(m) - e0));
        // <m| sum_i sx_i sx_{i+1} |m>
        double xx = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const int mask = (1 << i) | (1 << (i + 1));
            for (int s = 0; s < dim; ++s) {
                xx += vectors(s, m) * vectors(s ^ mask, m);
            }
        }
        acc += w * ((n - 1) - xx);
        z += w;
    }
    return acc / (2.0 * (n - 1) * z);
}

// Pairs-only sector: each k > 0 contributes an independent two-level system
// H_k = xi tau^z + delta tau^x in the {pair, vacuum} basis, Gibbs-weighted at
// the bath temperature.
double abc_restricted_thermal(int n, double h, double t_bath) {
    const double beta_b = 1.0 / t_bath;
    double acc = 0.0;
    for (const auto& km : k_grid(n)) {
        const Dispersion d = dispersion(km.k, h);
        Eigen::Matrix2d ham;
        ham << d.xi, d.delta, d.delta, -d.xi;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(ham);
        Eigen::Matrix2d ndef;
        ndef << 1.0 - std::cos(km.k), std::sin(km.k), std::sin(km.k),
            1.0 + std::cos(km.k);
        const double e0 = es.eigenvalues()(0);
        double z = 0.0;
        double val = 0.0;
        for (int m = 0; m < 2; ++m) {
            const double w = std::exp(-beta_b * (es.eigenvalues()(m) - e0));
            const Eigen::Vector2d v = es.eigenvectors().col(m);
            val += w * v.dot(ndef * v);
            z += w;
        }
        acc += val / z;
    }
    return acc / n;
}

}  // namespace

double ed_oracle_thermal(int n_sites, double field, double temperature,
                         EdBoundary boundary) {
    if (!(temperature > 0.0)) {
        throw ConfigError("ed_oracle_thermal: temperature must be > 0");
    }
    if (!(field >= 0.0)) throw ConfigError("ed_oracle_thermal: field must be >= 0");
    switch (boundary) {
        case EdBoundary::ObcFull:
            if (n_sites < 2 || n_sites > 12) {
                throw ConfigError(
                    "ed_oracle_thermal: ObcFull needs 2 <= n_sites <= 12, got " +
                    std::to_string(n_sites));
            }
            return obc_full_thermal(n_sites, field, temperature);
        case EdBoundary::AbcRestrictedPairs:
            return abc_restricted_thermal(n_sites, field, temperature);
    }
    throw ConfigError("ed_oracle_thermal: unknown boundary");
}

}  // namespace tfim
