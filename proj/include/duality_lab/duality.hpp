#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "duality_lab/moments.hpp"

namespace duality_lab {

/// Relative tolerance on the Cauchy-Schwarz equality used to flag saturation.
inline constexpr double kSaturationTolerance = 1e-9;

struct DualityReport {
    int k = 0;
    bool defined = false;
    bool saturated = false;
    double denominator = 0.0;
    double auto1 = 0.0;
    double auto2 = 0.0;
    complex cross{0.0, 0.0};
    // Empty when the order is undefined.
    std::optional<double> distinguishability;
    std::optional<double> visibility;
    std::optional<double> sum;
    /// (auto1 - auto2) / denominator; positive when path 1 dominates.
    std::optional<double> signed_distinguishability;
};

namespace detail {

inline void require_defined(double denominator, double threshold, int k) {
    if (!(denominator > threshold)) {
        throw UndefinedOrder("order " + std::to_string(k) + " is undefined: normalization " +
                             std::to_string(denominator) + " <= " + std::to_string(threshold));
    }
}

}  // namespace detail

/// Normalization <(a_1^dagger)^k a_1^k> + <(a_2^dagger)^k a_2^k>.
inline double order_denominator(const TwoModeState& state, int k) {
    return auto_moment(state, Mode::one, k) + auto_moment(state, Mode::two, k);
}

inline bool order_defined(const TwoModeState& state, int k) {
    return order_denominator(state, k) > definedness_threshold(state);
}

inline double distinguishability(const TwoModeState& state, int k) {
    const double a1 = auto_moment(state, Mode::one, k);
    const double a2 = auto_moment(state, Mode::two, k);
    detail::require_defined(a1 + a2, definedness_threshold(state), k);
    return std::abs(a1 - a2) / (a1 + a2);
}

/// Phase-maximized coherence, using max over phi of
/// <(a_1^dagger)^k a_2^k e^{ik phi} + h.c.> = 2 |<(a_1^dagger)^k a_2^k>|.
inline double visibility(const TwoModeState& state, int k) {
    const double denominator = order_denominator(state, k);
    detail::require_defined(denominator, definedness_threshold(state), k);
    return 2.0 * std::abs(cross_moment(state, k)) / denominator;
}

inline DualityReport duality_at(const TwoModeState& state, int k, double threshold) {
    DualityReport report;
    report.k = k;
    report.auto1 = auto_moment(state, Mode::one, k);
    report.auto2 = auto_moment(state, Mode::two, k);
    report.cross = cross_moment(state, k);
    report.denominator = report.auto1 + report.auto2;
    report.defined = report.denominator > threshold;
    if (!report.defined) return report;

    const double signed_d = (report.auto1 - report.auto2) / report.denominator;
    const double v = 2.0 * std::abs(report.cross) / report.denominator;
    report.signed_distinguishability = signed_d;
    report.distinguishability = std::abs(signed_d);
    report.visibility = v;
    report.sum = signed_d * signed_d + v * v;

    // |cross|^2 = auto1 * auto2, scaled so the tolerance matches |sum - 1|:
    // sum - 1 = 4 (|cross|^2 - auto1 auto2) / denominator^2.
    const double defect = 4.0 * (std::norm(report.cross) - report.auto1 * report.auto2);
    report.saturated = std::abs(defect) <= kSaturationTolerance * report.denominator * report.denominator;
    return report;
}

inline DualityReport duality_at(const TwoModeState& state, int k) {
    detail::require_order(k);
    return duality_at(state, k, definedness_threshold(state));
}

/// One report per order 1..k_max.
inline std::vector<DualityReport> duality_report(const TwoModeState& state, int k_max) {
    if (k_max < 1) throw OrderOutOfRange("k_max must be >= 1, got " + std::to_string(k_max));
    const double threshold = definedness_threshold(state);
    std::vector<DualityReport> reports;
    reports.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) reports.push_back(duality_at(state, k, threshold));
    return reports;
}

/// Largest order with a non-vanishing normalization; 0 for the vacuum.
inline int max_defined_order(const TwoModeState& state) {
    const double threshold = definedness_threshold(state);
    for (int k = state.cutoff().n_max(); k >= 1; --k) {
        if (order_denominator(state, k) > threshold) return k;
    }
    return 0;
}

}  // namespace duality_lab
