#pragma once

// Detector statistics behind the closed interferometer, reconstruction of the
// kth-order visibility from phase-shifted detector sums/differences, and
// finite-shot photon-counting simulation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "duality_lab/combinatorics.hpp"
#include "duality_lab/duality.hpp"
#include "duality_lab/interferometer.hpp"
#include "duality_lab/moments.hpp"

namespace duality_lab {

// ---------------------------------------------------------------------------
// Exact detector statistics

struct DetectorStatistics {
    double r_plus = 0.0;   // <(c^dagger)^k c^k> + <(d^dagger)^k d^k>
    double r_minus = 0.0;  // <(c^dagger)^k c^k> - <(d^dagger)^k d^k>
};

inline DetectorStatistics statistics_from_probabilities(const RealMatrix& probs, int k) {
    DetectorStatistics s;
    for (Eigen::Index nc = 0; nc < probs.rows(); ++nc) {
        for (Eigen::Index nd = 0; nd < probs.cols(); ++nd) {
            const double p = probs(nc, nd);
            if (p == 0.0) continue;
            const double fc = falling_factorial(static_cast<std::uint64_t>(nc), static_cast<std::uint64_t>(k));
            const double fd = falling_factorial(static_cast<std::uint64_t>(nd), static_cast<std::uint64_t>(k));
            s.r_plus += p * (fc + fd);
            s.r_minus += p * (fc - fd);
        }
    }
    return s;
}

inline DetectorStatistics detector_statistics(const TwoModeState& state, int k, double phi) {
    detail::require_order(k);
    const BeamSplitterUnitary bs = build_beam_splitter(state.cutoff(), phi);
    return statistics_from_probabilities(transformed_probabilities(state, bs), k);
}

// ---------------------------------------------------------------------------
// Random streams

/// 64-bit finalizer from SplitMix64.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of sub-stream `stream` derived from a master seed. Shot batches and
/// phase nodes each draw from their own sub-stream, so results do not depend on
/// how work is scheduled.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// mt19937_64 with a fixed [0, 1) conversion, so draws are identical across
/// standard library implementations.
class ShotRng {
public:
    explicit ShotRng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

inline constexpr std::size_t kShotBatchSize = std::size_t{1} << 16;

/// Worker count for sampling: DUALITY_LAB_THREADS if set and positive, else the
/// hardware concurrency.
inline unsigned sampling_threads() {
    if (const char* env = std::getenv("DUALITY_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Shot sampling

struct Shot {
    std::uint32_t n_c = 0;
    std::uint32_t n_d = 0;
    friend bool operator==(const Shot&, const Shot&) = default;
};

struct ShotLog {
    double phi = 0.0;
    std::uint64_t seed = 0;
    int k_intent = 1;
    std::vector<Shot> shots;
};

/// Draws i.i.d. joint counts from the detector distribution at phase phi.
/// `threads` = 0 uses sampling_threads().
inline ShotLog sample_shots(const TwoModeState& state, double phi, std::size_t shots, std::uint64_t seed,
                            unsigned threads = 0) {
    const RealMatrix probs = transformed_probabilities(state, build_beam_splitter(state.cutoff(), phi));
    std::vector<Shot> outcomes;
    std::vector<double> cdf;
    double running = 0.0;
    for (Eigen::Index nc = 0; nc < probs.rows(); ++nc) {
        for (Eigen::Index nd = 0; nd < probs.cols(); ++nd) {
            const double p = std::max(0.0, probs(nc, nd));
            if (p == 0.0) continue;
            running += p;
            outcomes.push_back(Shot{static_cast<std::uint32_t>(nc), static_cast<std::uint32_t>(nd)});
            cdf.push_back(running);
        }
    }

    ShotLog log;
    log.phi = phi;
    log.seed = seed;
    log.shots.resize(shots);
    if (outcomes.empty()) return log;
    const double total = cdf.back();

    const std::size_t batches = (shots + kShotBatchSize - 1) / kShotBatchSize;
    auto run_batch = [&](std::size_t batch) {
        ShotRng rng(derive_seed(seed, batch));
        const std::size_t begin = batch * kShotBatchSize;
        const std::size_t end = std::min(shots, begin + kShotBatchSize);
        for (std::size_t s = begin; s < end; ++s) {
            const double target = rng.uniform() * total;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            if (it == cdf.end()) --it;
            log.shots[s] = outcomes[static_cast<std::size_t>(it - cdf.begin())];
        }
    };

    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? sampling_threads() : threads, batches));
    if (workers <= 1) {
        for (std::size_t b = 0; b < batches; ++b) run_batch(b);
        return log;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t b = w; b < batches; b += workers) run_batch(b);
        });
    }
    for (auto& t : pool) t.join();
    return log;
}

struct DetectorEstimate {
    double r_plus = 0.0;
    double r_minus = 0.0;
    double stderr_plus = 0.0;
    double stderr_minus = 0.0;
};

/// Sample means of ff(n_c, k) +/- ff(n_d, k) with standard errors
/// (sample standard deviation over sqrt(shots)).
inline DetectorEstimate estimate_statistics(const ShotLog& log, int k) {
    detail::require_order(k);
    if (log.shots.empty()) throw EmptyLog("shot log is empty");
    const auto n = static_cast<double>(log.shots.size());
    long double sum_p = 0.0L;
    long double sum_m = 0.0L;
    for (const Shot& s : log.shots) {
        const double fc = falling_factorial(s.n_c, static_cast<std::uint64_t>(k));
        const double fd = falling_factorial(s.n_d, static_cast<std::uint64_t>(k));
        sum_p += fc + fd;
        sum_m += fc - fd;
    }
    const double mean_p = static_cast<double>(sum_p / n);
    const double mean_m = static_cast<double>(sum_m / n);
    long double ss_p = 0.0L;
    long double ss_m = 0.0L;
    for (const Shot& s : log.shots) {
        const double fc = falling_factorial(s.n_c, static_cast<std::uint64_t>(k));
        const double fd = falling_factorial(s.n_d, static_cast<std::uint64_t>(k));
        const double dp = fc + fd - mean_p;
        const double dm = fc - fd - mean_m;
        ss_p += dp * dp;
        ss_m += dm * dm;
    }
    DetectorEstimate e;
    e.r_plus = mean_p;
    e.r_minus = mean_m;
    if (log.shots.size() > 1) {
        e.stderr_plus = std::sqrt(static_cast<double>(ss_p / (n - 1.0)) / n);
        e.stderr_minus = std::sqrt(static_cast<double>(ss_m / (n - 1.0)) / n);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Phase scans and visibility reconstruction

struct ExactSource {};
struct SampledSource {
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    /// Flag the result when the stderr of V_k exceeds this bound.
    std::optional<double> max_stderr;
};
using StatisticsSource = std::variant<ExactSource, SampledSource>;

struct PhaseScanEntry {
    double phi = 0.0;
    double r_plus = 0.0;
    double r_minus = 0.0;
    std::optional<double> stderr_plus;
    std::optional<double> stderr_minus;
};

struct PhaseScanRecord {
    int k = 1;
    std::vector<PhaseScanEntry> entries;
    StatisticsSource source;
};

namespace detail {

inline PhaseScanEntry measure_node(const TwoModeState& state, int k, double phi, const StatisticsSource& source,
                                   std::uint64_t node) {
    PhaseScanEntry entry;
    entry.phi = phi;
    if (const auto* sampled = std::get_if<SampledSource>(&source)) {
        if (sampled->shots < 1) throw MalformedSpec("sampled statistics need at least one shot");
        const ShotLog log = sample_shots(state, phi, sampled->shots, derive_seed(sampled->seed, node));
        const DetectorEstimate est = estimate_statistics(log, k);
        entry.r_plus = est.r_plus;
        entry.r_minus = est.r_minus;
        entry.stderr_plus = est.stderr_plus;
        entry.stderr_minus = est.stderr_minus;
    } else {
        const DetectorStatistics s = detector_statistics(state, k, phi);
        entry.r_plus = s.r_plus;
        entry.r_minus = s.r_minus;
    }
    return entry;
}

}  // namespace detail

/// Detector statistics over an explicit list of phases.
inline PhaseScanRecord phase_scan(const TwoModeState& state, int k, const std::vector<double>& phis,
                                  const StatisticsSource& source = ExactSource{}) {
    detail::require_order(k);
    PhaseScanRecord record;
    record.k = k;
    record.source = source;
    record.entries.reserve(phis.size());
    for (std::size_t i = 0; i < phis.size(); ++i) {
        record.entries.push_back(detail::measure_node(state, k, phis[i], source, i));
    }
    return record;
}

/// The phase nodes and signs of one quadrature: odd k combines R- at
/// phi + 2 m pi / k; even k combines (-1)^m R+ at phi + m pi / k; m = 0..k-1.
struct QuadratureNodes {
    std::vector<double> phases;
    std::vector<double> signs;
    bool uses_difference = true;
};

inline QuadratureNodes quadrature_nodes(int k, double phi) {
    detail::require_order(k);
    QuadratureNodes nodes;
    const double pi = std::numbers::pi;
    nodes.uses_difference = (k % 2) == 1;
    for (int m = 0; m < k; ++m) {
        if (nodes.uses_difference) {
            nodes.phases.push_back(phi + 2.0 * m * pi / k);
            nodes.signs.push_back(1.0);
        } else {
            nodes.phases.push_back(phi + m * pi / k);
            nodes.signs.push_back(m % 2 == 0 ? 1.0 : -1.0);
        }
    }
    return nodes;
}

/// 2^{k-1} / k
inline double harmonic_prefactor(int k) { return std::ldexp(1.0, k - 1) / k; }

/// <(a_1^dagger)^k a_2^k e^{ik phi} + h.c.> assembled from k exact detector
/// statistics.
inline double harmonic_combination(const TwoModeState& state, int k, double phi) {
    const QuadratureNodes nodes = quadrature_nodes(k, phi);
    double sum = 0.0;
    for (std::size_t m = 0; m < nodes.phases.size(); ++m) {
        const DetectorStatistics s = detector_statistics(state, k, nodes.phases[m]);
        sum += nodes.signs[m] * (nodes.uses_difference ? s.r_minus : s.r_plus);
    }
    return harmonic_prefactor(k) * sum;
}

struct ReconstructionResult {
    int k = 1;
    double phi_prime = 0.0;
    /// max over phi of |<(a_1^dagger)^k a_2^k e^{ik phi} + h.c.>|
    double unnormalized_max = 0.0;
    double visibility = 0.0;
    double denominator = 0.0;
    /// Quadratures at phi' and phi' - pi/(2k): 2 Re and 2 Im of the rotated coherence.
    double quadrature_real = 0.0;
    double quadrature_imag = 0.0;
    // Sampled mode only.
    std::optional<double> stderr;
    std::optional<double> stderr_unnormalized;
    bool insufficient_shots = false;
    PhaseScanRecord scan;
};

/// Reconstructs V_k from detector statistics at the 2k phase nodes
/// {phi'} grid and {phi' - pi/(2k)} grid, normalized by open-interferometer
/// auto moments.
inline ReconstructionResult reconstruct_visibility(const TwoModeState& state, int k, double phi_prime,
                                                   const StatisticsSource& source = ExactSource{}) {
    detail::require_order(k);
    const double denominator = order_denominator(state, k);
    detail::require_defined(denominator, definedness_threshold(state), k);

    const QuadratureNodes real_nodes = quadrature_nodes(k, phi_prime);
    const QuadratureNodes imag_nodes = quadrature_nodes(k, phi_prime - std::numbers::pi / (2.0 * k));
    std::vector<double> phis = real_nodes.phases;
    phis.insert(phis.end(), imag_nodes.phases.begin(), imag_nodes.phases.end());

    ReconstructionResult result;
    result.k = k;
    result.phi_prime = phi_prime;
    result.denominator = denominator;
    result.scan = phase_scan(state, k, phis, source);

    const double prefactor = harmonic_prefactor(k);
    double var_real = 0.0;
    double var_imag = 0.0;
    const auto ks = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i < phis.size(); ++i) {
        const PhaseScanEntry& e = result.scan.entries[i];
        const bool real_part = i < ks;
        const double sign = real_part ? real_nodes.signs[i] : imag_nodes.signs[i - ks];
        const double value = real_nodes.uses_difference ? e.r_minus : e.r_plus;
        const std::optional<double>& err = real_nodes.uses_difference ? e.stderr_minus : e.stderr_plus;
        (real_part ? result.quadrature_real : result.quadrature_imag) += prefactor * sign * value;
        if (err) (real_part ? var_real : var_imag) += prefactor * prefactor * (*err) * (*err);
    }
    result.unnormalized_max = std::hypot(result.quadrature_real, result.quadrature_imag);
    result.visibility = result.unnormalized_max / denominator;

    if (const auto* sampled = std::get_if<SampledSource>(&source)) {
        // Delta method through the square root; falls back to the larger
        // quadrature error at the origin where the gradient is undefined.
        double err_u = std::sqrt(std::max(var_real, var_imag));
        if (result.unnormalized_max > 0.0) {
            err_u = std::sqrt(result.quadrature_real * result.quadrature_real * var_real +
                              result.quadrature_imag * result.quadrature_imag * var_imag) /
                    result.unnormalized_max;
        }
        result.stderr_unnormalized = err_u;
        result.stderr = err_u / denominator;
        if (sampled->max_stderr && *result.stderr > *sampled->max_stderr) result.insufficient_shots = true;
    }
    return result;
}

}  // namespace duality_lab
