#pragma once

// Normally ordered kth-order moments of a two-mode state, evaluated directly
// on density-matrix elements with falling-factorial weights.

#include <algorithm>
#include <cmath>
#include <string>

#include "duality_lab/combinatorics.hpp"
#include "duality_lab/errors.hpp"
#include "duality_lab/fock.hpp"

namespace duality_lab {

enum class Mode { one = 1, two = 2 };

namespace detail {

inline void require_order(int k) {
    if (k < 1) throw OrderOutOfRange("correlation order must be >= 1, got " + std::to_string(k));
}

}  // namespace detail

/// <(a^dagger)^k a^k> for the chosen path. Only diagonal elements enter.
inline double auto_moment(const TwoModeState& state, Mode mode, int k) {
    detail::require_order(k);
    const FockCutoff cut = state.cutoff();
    const auto& rho = state.rho();
    double sum = 0.0;
    for (int n = k; n <= cut.n_max(); ++n) {
        const double weight = falling_factorial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
        double marginal = 0.0;
        for (int other = 0; other <= cut.n_max(); ++other) {
            const Eigen::Index idx = mode == Mode::one ? cut.index(n, other) : cut.index(other, n);
            marginal += rho(idx, idx).real();
        }
        sum += weight * marginal;
    }
    return sum;
}

/// <(a_1^dagger)^k a_2^k>, or <(a_2^dagger)^k a_1^k> when `created` is Mode::two.
///
/// (a_1^dagger)^k a_2^k maps |i, j> to sqrt(ff(i+k, k) ff(j, k)) |i+k, j-k>, so
/// only the coherences <i, j|rho|i+k, j-k> contribute.
inline complex cross_moment(const TwoModeState& state, int k, Mode created = Mode::one) {
    detail::require_order(k);
    const FockCutoff cut = state.cutoff();
    const int n = cut.n_max();
    const auto& rho = state.rho();
    complex sum{0.0, 0.0};
    for (int i = 0; i + k <= n; ++i) {
        const double raise = std::sqrt(falling_factorial(static_cast<std::uint64_t>(i + k), static_cast<std::uint64_t>(k)));
        for (int j = k; j <= n; ++j) {
            const double lower = std::sqrt(falling_factorial(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k)));
            if (created == Mode::one) {
                sum += raise * lower * rho(cut.index(i, j), cut.index(i + k, j - k));
            } else {
                // <(a_2^dagger)^k a_1^k>: mode roles swapped.
                sum += raise * lower * rho(cut.index(j, i), cut.index(j - k, i + k));
            }
        }
    }
    return sum;
}

/// <(a_1^dagger)^p (a_2^dagger)^q a_1^p a_2^q>, a diagonal joint factorial moment.
inline double joint_factorial_moment(const TwoModeState& state, int p, int q) {
    const FockCutoff cut = state.cutoff();
    double sum = 0.0;
    for (int i = p; i <= cut.n_max(); ++i) {
        for (int j = q; j <= cut.n_max(); ++j) {
            const Eigen::Index idx = cut.index(i, j);
            sum += falling_factorial(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(p)) *
                   falling_factorial(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(q)) *
                   state.rho()(idx, idx).real();
        }
    }
    return sum;
}

/// Numerator and denominator of the signed distinguishability evaluated as a
/// double sum over diagonal elements rho(p, p), rho(q, q) with binomial weights
/// C(i, k), where p indexes |i, j> and q indexes |j, i>.
///
/// The original indexing is 1-based with p = i*n + i + j + 1 and
/// q = j*n + i + j + 1 (n = n_max); both are shifted down by one here.
struct DiagonalFormulaTerms {
    double numerator = 0.0;
    double denominator = 0.0;
};

inline DiagonalFormulaTerms diagonal_formula_terms(const TwoModeState& state, int k) {
    detail::require_order(k);
    const int n = state.cutoff().n_max();
    const auto& rho = state.rho();
    DiagonalFormulaTerms terms;
    for (int i = k; i <= n; ++i) {
        const double weight = binomial(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        for (int j = 0; j <= n; ++j) {
            const Eigen::Index p = static_cast<Eigen::Index>(i) * n + i + j + 1 - 1;
            const Eigen::Index q = static_cast<Eigen::Index>(j) * n + i + j + 1 - 1;
            const double rho_pp = rho(p, p).real();
            const double rho_qq = rho(q, q).real();
            terms.numerator += (rho_pp - rho_qq) * weight;
            terms.denominator += (rho_pp + rho_qq) * weight;
        }
    }
    return terms;
}

/// Normalizations at or below this value mark an order as undefined:
/// 1e-12 relative to the larger first-order auto moment (at least 1).
inline double definedness_threshold(const TwoModeState& state) {
    const double largest = std::max(auto_moment(state, Mode::one, 1), auto_moment(state, Mode::two, 1));
    return 1e-12 * std::max(1.0, largest);
}

/// Signed kth-order distinguishability from the diagonal double sum. The
/// binomial weights differ from the falling factorials of auto_moment by k!,
/// which cancels in the ratio.
inline double distinguishability_diagonal_formula(const TwoModeState& state, int k) {
    const DiagonalFormulaTerms terms = diagonal_formula_terms(state, k);
    const double scale = falling_factorial(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(k));
    if (!(terms.denominator * scale > definedness_threshold(state))) {
        throw UndefinedOrder("order " + std::to_string(k) + " has vanishing normalization");
    }
    return terms.numerator / terms.denominator;
}

}  // namespace duality_lab
