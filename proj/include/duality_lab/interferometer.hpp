#pragma once

// Phase shifter on path 2 followed by a balanced beam splitter, with output
// modes c = (a_1 + a_2 e^{i phi}) / sqrt(2) and d = (a_1 - a_2 e^{i phi}) / sqrt(2).
//
// In the Schrodinger picture a_1^dagger -> (c^dagger + d^dagger) / sqrt(2) and
// a_2^dagger -> e^{i phi} (c^dagger - d^dagger) / sqrt(2). The splitter conserves
// total photon number, so the unitary is a direct sum of blocks U_N of size
// N + 1. Inside block N, column i is the input |i, N - i> and row p is the
// output |p, N - p> (p photons at detector c).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "duality_lab/errors.hpp"
#include "duality_lab/fock.hpp"

namespace duality_lab {

class BeamSplitterUnitary {
public:
    FockCutoff cutoff() const { return cutoff_; }
    double phi() const { return phi_; }
    /// Highest total photon number with a block: 2 n_max.
    int top_block() const { return static_cast<int>(blocks_.size()) - 1; }
    const ComplexMatrix& block(int total) const { return blocks_.at(static_cast<std::size_t>(total)); }

    /// The inverse transformation (c, d back to a_1, a_2).
    BeamSplitterUnitary adjoint() const {
        BeamSplitterUnitary inv = *this;
        for (auto& b : inv.blocks_) b = b.adjoint().eval();
        inv.inverse_ = !inverse_;
        return inv;
    }
    bool is_inverse() const { return inverse_; }

    /// Matrix on the (n_max+1)^2 truncated basis. Blocks with N <= n_max are
    /// complete there; blocks above n_max are cut by the per-mode cutoff, so the
    /// dense matrix is unitary only on total photon number <= n_max.
    ComplexMatrix dense() const {
        const FockCutoff cut = cutoff_;
        ComplexMatrix u = ComplexMatrix::Zero(cut.dimension(), cut.dimension());
        for (int total = 0; total <= top_block(); ++total) {
            const ComplexMatrix& b = blocks_[static_cast<std::size_t>(total)];
            for (int i = 0; i <= total; ++i) {
                if (!cut.holds(i, total - i)) continue;
                for (int p = 0; p <= total; ++p) {
                    if (!cut.holds(p, total - p)) continue;
                    u(cut.index(p, total - p), cut.index(i, total - i)) = b(p, i);
                }
            }
        }
        return u;
    }

private:
    friend BeamSplitterUnitary build_beam_splitter(FockCutoff cutoff, double phi);

    FockCutoff cutoff_;
    double phi_ = 0.0;
    bool inverse_ = false;
    std::vector<ComplexMatrix> blocks_;
};

namespace detail {

/// Applies (c^dagger + sign * d^dagger) * factor / sqrt(2) to a state with
/// `photons` photons, coefficients indexed by the c occupation.
inline ComplexVector apply_output_creation(const ComplexVector& v, complex factor, double sign) {
    const Eigen::Index photons = v.size() - 1;
    ComplexVector w = ComplexVector::Zero(v.size() + 1);
    const double half = 1.0 / std::sqrt(2.0);
    for (Eigen::Index p = 0; p <= photons; ++p) {
        const complex amp = v(p) * factor * half;
        w(p + 1) += amp * std::sqrt(static_cast<double>(p + 1));
        w(p) += sign * amp * std::sqrt(static_cast<double>(photons - p + 1));
    }
    return w;
}

inline ComplexMatrix splitter_block(int total, double phi) {
    ComplexMatrix block(total + 1, total + 1);
    const complex shift = std::polar(1.0, phi);
    for (int i = 0; i <= total; ++i) {
        ComplexVector v = ComplexVector::Ones(1);
        for (int t = 1; t <= i; ++t) v = apply_output_creation(v, 1.0, +1.0) / std::sqrt(static_cast<double>(t));
        for (int t = 1; t <= total - i; ++t) v = apply_output_creation(v, shift, -1.0) / std::sqrt(static_cast<double>(t));
        block.col(i) = v;
    }
    return block;
}

}  // namespace detail

inline BeamSplitterUnitary build_beam_splitter(FockCutoff cutoff, double phi) {
    BeamSplitterUnitary bs;
    bs.cutoff_ = cutoff;
    bs.phi_ = phi;
    bs.blocks_.reserve(static_cast<std::size_t>(2 * cutoff.n_max() + 1));
    for (int total = 0; total <= 2 * cutoff.n_max(); ++total) bs.blocks_.push_back(detail::splitter_block(total, phi));
    return bs;
}

namespace detail {

/// Amplitude-block indices of total photon number N that exist in `cut`.
inline std::vector<int> block_members(FockCutoff cut, int total) {
    std::vector<int> first;
    for (int i = std::max(0, total - cut.n_max()); i <= std::min(total, cut.n_max()); ++i) first.push_back(i);
    return first;
}

/// rho restricted to totals (N, M), embedded in the full (N+1) x (M+1) block.
inline ComplexMatrix extract_block(const TwoModeState& state, int row_total, int col_total) {
    const FockCutoff cut = state.cutoff();
    ComplexMatrix b = ComplexMatrix::Zero(row_total + 1, col_total + 1);
    for (int i : block_members(cut, row_total)) {
        for (int j : block_members(cut, col_total)) {
            b(i, j) = state.rho()(cut.index(i, row_total - i), cut.index(j, col_total - j));
        }
    }
    return b;
}

inline void check_cutoffs(const TwoModeState& state, const BeamSplitterUnitary& bs) {
    if (!(state.cutoff() == bs.cutoff())) {
        throw CutoffMismatch("state cutoff " + std::to_string(state.cutoff().n_max()) + " vs splitter cutoff " +
                             std::to_string(bs.cutoff().n_max()));
    }
}

/// Output cutoff large enough for every occupied photon-number block.
inline FockCutoff output_cutoff(const TwoModeState& state) {
    return FockCutoff(std::max(state.cutoff().n_max(), state.top_total_photons()));
}

}  // namespace detail

/// U rho U^dagger. The output can hold up to 2 n_max photons in one mode, so it
/// is returned at cutoff max(n_max, highest occupied total photon number).
inline TwoModeState transform(const TwoModeState& state, const BeamSplitterUnitary& bs) {
    detail::check_cutoffs(state, bs);
    const FockCutoff out_cut = detail::output_cutoff(state);
    const int top = state.top_total_photons();
    ComplexMatrix out = ComplexMatrix::Zero(out_cut.dimension(), out_cut.dimension());
    for (int row_total = 0; row_total <= top; ++row_total) {
        for (int col_total = 0; col_total <= top; ++col_total) {
            const ComplexMatrix b =
                bs.block(row_total) * detail::extract_block(state, row_total, col_total) * bs.block(col_total).adjoint();
            for (int p = 0; p <= row_total; ++p) {
                for (int q = 0; q <= col_total; ++q) {
                    out(out_cut.index(p, row_total - p), out_cut.index(q, col_total - q)) = b(p, q);
                }
            }
        }
    }
    return TwoModeState(out_cut, std::move(out), state.constructed_pure(), state.truncation_tail());
}

/// Joint detector probabilities P(n_c, n_d) after the splitter, from the
/// diagonal photon-number blocks only. Indexed [n_c][n_d] up to the output cutoff.
inline RealMatrix transformed_probabilities(const TwoModeState& state, const BeamSplitterUnitary& bs) {
    detail::check_cutoffs(state, bs);
    const FockCutoff out_cut = detail::output_cutoff(state);
    const int top = state.top_total_photons();
    RealMatrix probs = RealMatrix::Zero(out_cut.levels(), out_cut.levels());
    for (int total = 0; total <= top; ++total) {
        const ComplexMatrix& u = bs.block(total);
        const ComplexMatrix b = u * detail::extract_block(state, total, total) * u.adjoint();
        for (int p = 0; p <= total; ++p) probs(p, total - p) = b(p, p).real();
    }
    return probs;
}

}  // namespace duality_lab
