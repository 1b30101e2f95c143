#pragma once

// Random states for property checks.

#include <random>
#include <string>

#include "duality_lab/errors.hpp"
#include "duality_lab/fock.hpp"

namespace duality_lab {

template <class Rng>
ComplexMatrix random_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix g(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(r, c) = complex(re, im);
        }
    }
    return g;
}

/// G G^dagger / tr(G G^dagger) with i.i.d. complex Gaussian G (Ginibre ensemble).
/// Full rank with probability one.
template <class Rng>
TwoModeState random_mixed_state(FockCutoff cutoff, Rng& rng) {
    const ComplexMatrix g = random_gaussian_matrix(cutoff.dimension(), cutoff.dimension(), rng);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = (0.5 * (rho + rho.adjoint())).eval();
    return TwoModeState(cutoff, std::move(rho));
}

template <class Rng>
TwoModeState random_pure_state(FockCutoff cutoff, Rng& rng) {
    ComplexVector psi = random_gaussian_matrix(cutoff.dimension(), 1, rng).col(0);
    psi.normalize();
    return TwoModeState::pure(cutoff, psi);
}

/// Random pure state on span{|photons, 0>, |photons - 1, 1>, ..., |0, photons>}.
template <class Rng>
TwoModeState random_fixed_photon_state(FockCutoff cutoff, int photons, Rng& rng) {
    if (photons > cutoff.n_max()) {
        throw CutoffTooSmall("fixed photon number " + std::to_string(photons) + " exceeds cutoff " +
                             std::to_string(cutoff.n_max()));
    }
    const ComplexMatrix amps = random_gaussian_matrix(photons + 1, 1, rng);
    ComplexVector psi = ComplexVector::Zero(cutoff.dimension());
    for (int i = 0; i <= photons; ++i) psi(cutoff.index(i, photons - i)) = amps(i, 0);
    psi.normalize();
    return TwoModeState::pure(cutoff, psi);
}

}  // namespace duality_lab
