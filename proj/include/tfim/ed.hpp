// ed.hpp — brute-force thermal defect densities from dense exact
// diagonalization. Independent of the closed-form thermo routes; serves as
// the reference oracle in the test suites.

#pragma once

#include "tfim/model.hpp"

namespace tfim {

enum class EdBoundary {
    // Full 2^N spin Hilbert space, open chain (N - 1 bonds), per-bond defect
    // density; temperature is the true temperature T.
    ObcFull,
    // Pairs-only momentum sectors on the antiperiodic grid; temperature is
    // the bath temperature T_b.
    AbcRestrictedPairs,
};

// ObcFull requires n_sites <= 12 (dense 2^N diagonalization).
double ed_oracle_thermal(int n_sites, double field, double temperature,
                         EdBoundary boundary);

}  // namespace tfim
