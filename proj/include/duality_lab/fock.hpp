#pragma once

// Two-mode states on a truncated Fock space.
//
// Basis ordering: |i_1 j_2> sits at index i * (n_max + 1) + j, 0-based and
// row-major, with i the photon number in path 1 and j in path 2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "duality_lab/errors.hpp"

namespace duality_lab {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

/// Maximum photon number per mode.
class FockCutoff {
public:
    FockCutoff() = default;
    explicit FockCutoff(int n_max) : n_max_(n_max) {
        if (n_max < 0) throw MalformedSpec("cutoff must be non-negative, got " + std::to_string(n_max));
    }

    int n_max() const { return n_max_; }
    int levels() const { return n_max_ + 1; }
    Eigen::Index dimension() const { return static_cast<Eigen::Index>(levels()) * levels(); }

    Eigen::Index index(int n1, int n2) const { return static_cast<Eigen::Index>(n1) * levels() + n2; }
    std::pair<int, int> occupation(Eigen::Index index) const {
        return {static_cast<int>(index / levels()), static_cast<int>(index % levels())};
    }
    bool holds(int n1, int n2) const { return n1 >= 0 && n2 >= 0 && n1 <= n_max_ && n2 <= n_max_; }

    friend bool operator==(FockCutoff a, FockCutoff b) { return a.n_max_ == b.n_max_; }

private:
    int n_max_ = 0;
};

/// Immutable density matrix of two bosonic modes.
class TwoModeState {
public:
    TwoModeState(FockCutoff cutoff, ComplexMatrix rho, bool constructed_pure = false, double truncation_tail = 0.0)
        : cutoff_(cutoff), rho_(std::move(rho)), pure_(constructed_pure), tail_(truncation_tail) {
        if (rho_.rows() != cutoff_.dimension() || rho_.cols() != cutoff_.dimension()) {
            throw MalformedSpec("density matrix is " + std::to_string(rho_.rows()) + "x" + std::to_string(rho_.cols()) +
                                ", cutoff " + std::to_string(cutoff_.n_max()) + " needs " +
                                std::to_string(cutoff_.dimension()));
        }
    }

    /// |psi><psi| for a normalized amplitude vector.
    static TwoModeState pure(FockCutoff cutoff, const ComplexVector& psi, double truncation_tail = 0.0) {
        return TwoModeState(cutoff, psi * psi.adjoint(), true, truncation_tail);
    }

    static TwoModeState fock(FockCutoff cutoff, int n1, int n2) {
        if (!cutoff.holds(n1, n2)) {
            throw CutoffTooSmall("|" + std::to_string(n1) + "," + std::to_string(n2) + "> does not fit in cutoff " +
                                 std::to_string(cutoff.n_max()));
        }
        ComplexVector psi = ComplexVector::Zero(cutoff.dimension());
        psi(cutoff.index(n1, n2)) = 1.0;
        return pure(cutoff, psi);
    }

    FockCutoff cutoff() const { return cutoff_; }
    const ComplexMatrix& rho() const { return rho_; }
    complex element(int i1, int j1, int i2, int j2) const { return rho_(cutoff_.index(i1, j1), cutoff_.index(i2, j2)); }
    bool constructed_pure() const { return pure_; }
    /// Probability mass discarded by truncation before renormalization.
    double truncation_tail() const { return tail_; }

    /// Same physical state embedded in a larger cutoff (zero padding).
    TwoModeState with_cutoff(FockCutoff larger) const {
        if (larger.n_max() < cutoff_.n_max()) {
            throw CutoffTooSmall("cannot embed cutoff " + std::to_string(cutoff_.n_max()) + " into " +
                                 std::to_string(larger.n_max()));
        }
        if (larger == cutoff_) return *this;
        ComplexMatrix out = ComplexMatrix::Zero(larger.dimension(), larger.dimension());
        const int l = cutoff_.levels();
        for (Eigen::Index r = 0; r < rho_.rows(); ++r) {
            for (Eigen::Index c = 0; c < rho_.cols(); ++c) {
                out(larger.index(static_cast<int>(r / l), static_cast<int>(r % l)),
                    larger.index(static_cast<int>(c / l), static_cast<int>(c % l))) = rho_(r, c);
            }
        }
        return TwoModeState(larger, std::move(out), pure_, tail_);
    }

    /// Largest total photon number carrying weight above `threshold`.
    int top_total_photons(double threshold = 0.0) const {
        int top = 0;
        for (Eigen::Index idx = 0; idx < rho_.rows(); ++idx) {
            if (std::abs(rho_(idx, idx)) > threshold) {
                auto [i, j] = cutoff_.occupation(idx);
                top = std::max(top, i + j);
            }
        }
        return top;
    }

private:
    FockCutoff cutoff_;
    ComplexMatrix rho_;
    bool pure_ = false;
    double tail_ = 0.0;
};

inline RealMatrix tensor_diagonal_probabilities(const TwoModeState& state) {
    const FockCutoff cut = state.cutoff();
    RealMatrix p(cut.levels(), cut.levels());
    for (int i = 0; i < cut.levels(); ++i) {
        for (int j = 0; j < cut.levels(); ++j) p(i, j) = state.rho()(cut.index(i, j), cut.index(i, j)).real();
    }
    return p;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-12;
    double min_eigenvalue = -1e-10;
};

struct ValidationReport {
    double hermiticity_defect = 0.0;
    double trace_defect = 0.0;
    double min_eigenvalue = 0.0;
    double truncation_tail = 0.0;
    bool hermitian = false;
    bool unit_trace = false;
    bool positive = false;

    bool passed() const { return hermitian && unit_trace && positive; }
};

/// Checks the density-matrix invariants. `tol` scales all three default bounds
/// (tol = 1 reproduces them exactly).
inline ValidationReport validate(const TwoModeState& state, double tol = 1.0) {
    if (!(tol > 0.0)) throw MalformedSpec("validation tolerance must be positive");
    const ValidationTolerances bounds;
    const ComplexMatrix& rho = state.rho();
    ValidationReport report;
    report.truncation_tail = state.truncation_tail();
    report.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    report.trace_defect = std::abs(rho.trace() - complex(1.0, 0.0));

    ComplexMatrix hermitian_part = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = solver.eigenvalues().minCoeff();

    report.hermitian = report.hermiticity_defect <= bounds.hermiticity * tol;
    report.unit_trace = report.trace_defect <= bounds.trace * tol;
    report.positive = report.min_eigenvalue >= bounds.min_eigenvalue * tol;
    return report;
}

// ---------------------------------------------------------------------------
// Declarative state descriptions

struct ExplicitCutoff {
    int n_max = 0;
};
struct AutoCutoff {
    double tail_epsilon = 1e-12;
};
using CutoffPolicy = std::variant<ExplicitCutoff, AutoCutoff>;

struct StateSpec;

struct FockSpec {
    int n1 = 0;
    int n2 = 0;
};
struct NoonSpec {
    int photons = 0;
    double relative_phase = 0.0;
};
struct CoherentSpec {
    complex alpha;
    complex beta;
};
struct ThermalSpec {
    double mean1 = 0.0;
    double mean2 = 0.0;
};
struct MixtureComponent {
    double weight = 0.0;
    std::shared_ptr<const StateSpec> spec;
};
struct MixtureSpec {
    std::vector<MixtureComponent> components;
};
struct RawSpec {
    ComplexMatrix matrix;
};

using StateKind = std::variant<FockSpec, NoonSpec, CoherentSpec, ThermalSpec, MixtureSpec, RawSpec>;

struct StateSpec {
    StateKind kind;
    /// Empty means the kind's natural default: the smallest cutoff holding a
    /// Fock/NOON state, auto(1e-12) for coherent/thermal, the matrix size for raw.
    std::optional<CutoffPolicy> cutoff;
};

namespace detail {

constexpr double kDefaultTailEpsilon = 1e-12;
constexpr double kWeightTolerance = 1e-12;

/// Smallest n with P(N > n) <= eps for a Poisson(mean) photon-number distribution.
inline int poisson_cutoff(double mean, double eps) {
    if (mean == 0.0) return 0;
    double term = std::exp(-mean);
    double cumulative = term;
    int n = 0;
    while (1.0 - cumulative > eps) {
        ++n;
        term *= mean / n;
        cumulative += term;
        // 1 - cumulative loses precision once the tail drops below ~1e-16; finish
        // with a direct tail sum instead.
        if (1.0 - cumulative < 1e-10) {
            while (true) {
                double tail = 0.0;
                double t = term;
                for (int m = n + 1; m < n + 400; ++m) {
                    t *= mean / m;
                    tail += t;
                    if (t < tail * 1e-17) break;
                }
                if (tail <= eps) return n;
                ++n;
                term *= mean / n;
            }
        }
    }
    return n;
}

/// Smallest n with P(N > n) <= eps for a Bose-Einstein (thermal) distribution.
inline int thermal_cutoff(double mean, double eps) {
    if (mean == 0.0) return 0;
    const double ratio = mean / (1.0 + mean);
    // P(N > n) = ratio^(n+1)
    int n = static_cast<int>(std::ceil(std::log(eps) / std::log(ratio))) - 1;
    n = std::max(n, 0);
    while (n > 0 && std::pow(ratio, n) <= eps) --n;
    while (std::pow(ratio, n + 1) > eps) ++n;
    return n;
}

inline int required_cutoff(const StateSpec& spec, double eps);

inline int natural_cutoff(const StateKind& kind, double eps) {
    struct Visitor {
        double eps;
        int operator()(const FockSpec& s) const { return std::max(s.n1, s.n2); }
        int operator()(const NoonSpec& s) const { return s.photons; }
        int operator()(const CoherentSpec& s) const {
            return std::max(poisson_cutoff(std::norm(s.alpha), eps), poisson_cutoff(std::norm(s.beta), eps));
        }
        int operator()(const ThermalSpec& s) const {
            return std::max(thermal_cutoff(s.mean1, eps), thermal_cutoff(s.mean2, eps));
        }
        int operator()(const MixtureSpec& s) const {
            int n = 0;
            for (const auto& c : s.components) n = std::max(n, required_cutoff(*c.spec, eps));
            return n;
        }
        int operator()(const RawSpec& s) const {
            const auto levels = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.matrix.rows()))));
            return levels - 1;
        }
    };
    return std::visit(Visitor{eps}, kind);
}

inline int required_cutoff(const StateSpec& spec, double eps) {
    if (spec.cutoff) {
        if (const auto* e = std::get_if<ExplicitCutoff>(&*spec.cutoff)) return e->n_max;
        return natural_cutoff(spec.kind, std::get<AutoCutoff>(*spec.cutoff).tail_epsilon);
    }
    return natural_cutoff(spec.kind, eps);
}

inline void check_spec(const StateSpec& spec) {
    if (spec.cutoff) {
        if (const auto* a = std::get_if<AutoCutoff>(&*spec.cutoff)) {
            if (!(a->tail_epsilon > 0.0 && a->tail_epsilon < 1.0)) {
                throw MalformedSpec("auto cutoff tail_epsilon must lie in (0, 1)");
            }
        } else if (std::get<ExplicitCutoff>(*spec.cutoff).n_max < 0) {
            throw MalformedSpec("explicit cutoff must be non-negative");
        }
    }
    struct Visitor {
        void operator()(const FockSpec& s) const {
            if (s.n1 < 0 || s.n2 < 0) throw MalformedSpec("Fock occupations must be non-negative");
        }
        void operator()(const NoonSpec& s) const {
            if (s.photons < 0) throw MalformedSpec("NOON photon number must be non-negative");
            if (!std::isfinite(s.relative_phase)) throw MalformedSpec("NOON phase must be finite");
        }
        void operator()(const CoherentSpec& s) const {
            if (!std::isfinite(std::abs(s.alpha)) || !std::isfinite(std::abs(s.beta))) {
                throw MalformedSpec("coherent amplitudes must be finite");
            }
        }
        void operator()(const ThermalSpec& s) const {
            if (!(s.mean1 >= 0.0) || !(s.mean2 >= 0.0) || !std::isfinite(s.mean1) || !std::isfinite(s.mean2)) {
                throw MalformedSpec("thermal mean photon numbers must be finite and non-negative");
            }
        }
        void operator()(const MixtureSpec& s) const {
            if (s.components.empty()) throw MalformedSpec("mixture needs at least one component");
            double total = 0.0;
            for (const auto& c : s.components) {
                if (!c.spec) throw MalformedSpec("mixture component without a state");
                if (!(c.weight >= 0.0)) throw MalformedSpec("mixture weights must be non-negative");
                total += c.weight;
                check_spec(*c.spec);
            }
            if (std::abs(total - 1.0) > kWeightTolerance) {
                throw MalformedSpec("mixture weights sum to " + std::to_string(total) + ", expected 1");
            }
        }
        void operator()(const RawSpec& s) const {
            const Eigen::Index d = s.matrix.rows();
            const auto levels = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(d))));
            if (d == 0 || s.matrix.cols() != d || levels * levels != d) {
                throw MalformedSpec("raw density matrix must be square with side (n_max+1)^2");
            }
        }
    };
    std::visit(Visitor{}, spec.kind);
}

inline void coherent_amplitudes(complex alpha, int n_max, ComplexVector& out) {
    out.resize(n_max + 1);
    complex amp = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
        out(n) = amp;
    }
}

inline void thermal_probabilities(double mean, int n_max, Eigen::VectorXd& out) {
    out.resize(n_max + 1);
    if (mean == 0.0) {
        out.setZero();
        out(0) = 1.0;
        return;
    }
    const double ratio = mean / (1.0 + mean);
    double p = 1.0 / (1.0 + mean);
    for (int n = 0; n <= n_max; ++n) {
        out(n) = p;
        p *= ratio;
    }
}

inline TwoModeState build_at(const StateKind& kind, FockCutoff cut);

inline TwoModeState build_at(const StateSpec& spec, FockCutoff cut) { return build_at(spec.kind, cut); }

inline TwoModeState build_at(const StateKind& kind, FockCutoff cut) {
    struct Visitor {
        FockCutoff cut;
        TwoModeState operator()(const FockSpec& s) const { return TwoModeState::fock(cut, s.n1, s.n2); }
        TwoModeState operator()(const NoonSpec& s) const {
            if (!cut.holds(s.photons, 0)) {
                throw CutoffTooSmall("NOON state with " + std::to_string(s.photons) + " photons needs cutoff >= " +
                                     std::to_string(s.photons));
            }
            ComplexVector psi = ComplexVector::Zero(cut.dimension());
            if (s.photons == 0) {
                psi(0) = 1.0;
            } else {
                const double norm = 1.0 / std::sqrt(2.0);
                psi(cut.index(s.photons, 0)) += norm;
                psi(cut.index(0, s.photons)) += norm * std::polar(1.0, s.relative_phase);
            }
            return TwoModeState::pure(cut, psi);
        }
        TwoModeState operator()(const CoherentSpec& s) const {
            ComplexVector a;
            ComplexVector b;
            coherent_amplitudes(s.alpha, cut.n_max(), a);
            coherent_amplitudes(s.beta, cut.n_max(), b);
            ComplexVector psi(cut.dimension());
            for (int i = 0; i <= cut.n_max(); ++i) {
                for (int j = 0; j <= cut.n_max(); ++j) psi(cut.index(i, j)) = a(i) * b(j);
            }
            const double kept = psi.squaredNorm();
            psi /= std::sqrt(kept);
            return TwoModeState::pure(cut, psi, std::max(0.0, 1.0 - kept));
        }
        TwoModeState operator()(const ThermalSpec& s) const {
            Eigen::VectorXd p1;
            Eigen::VectorXd p2;
            thermal_probabilities(s.mean1, cut.n_max(), p1);
            thermal_probabilities(s.mean2, cut.n_max(), p2);
            ComplexMatrix rho = ComplexMatrix::Zero(cut.dimension(), cut.dimension());
            double kept = 0.0;
            for (int i = 0; i <= cut.n_max(); ++i) {
                for (int j = 0; j <= cut.n_max(); ++j) {
                    rho(cut.index(i, j), cut.index(i, j)) = p1(i) * p2(j);
                    kept += p1(i) * p2(j);
                }
            }
            rho /= kept;
            return TwoModeState(cut, std::move(rho), false, std::max(0.0, 1.0 - kept));
        }
        TwoModeState operator()(const MixtureSpec& s) const {
            ComplexMatrix rho = ComplexMatrix::Zero(cut.dimension(), cut.dimension());
            double tail = 0.0;
            for (const auto& c : s.components) {
                TwoModeState part = build_at(*c.spec, cut);
                rho += c.weight * part.rho();
                tail += c.weight * part.truncation_tail();
            }
            return TwoModeState(cut, std::move(rho), false, tail);
        }
        TwoModeState operator()(const RawSpec& s) const {
            const int raw_cutoff = detail::natural_cutoff(StateKind{s}, 0.0);
            if (raw_cutoff > cut.n_max()) {
                throw CutoffTooSmall("raw matrix needs cutoff " + std::to_string(raw_cutoff));
            }
            return TwoModeState(FockCutoff(raw_cutoff), s.matrix).with_cutoff(cut);
        }
    };
    return std::visit(Visitor{cut}, kind);
}

}  // namespace detail

/// Realizes a declarative description as a density matrix. Coherent and thermal
/// states are renormalized after truncation; the discarded mass is kept as
/// `truncation_tail()`.
inline TwoModeState build_state(const StateSpec& spec) {
    detail::check_spec(spec);
    const int n_max = detail::required_cutoff(spec, detail::kDefaultTailEpsilon);
    return detail::build_at(spec, FockCutoff(n_max));
}

// Convenience constructors for specs.
inline StateSpec fock_spec(int n1, int n2, std::optional<int> n_max = std::nullopt) {
    StateSpec s{FockSpec{n1, n2}, std::nullopt};
    if (n_max) s.cutoff = ExplicitCutoff{*n_max};
    return s;
}
inline StateSpec noon_spec(int photons, double phase = 0.0, std::optional<int> n_max = std::nullopt) {
    StateSpec s{NoonSpec{photons, phase}, std::nullopt};
    if (n_max) s.cutoff = ExplicitCutoff{*n_max};
    return s;
}
inline StateSpec coherent_spec(complex alpha, complex beta, CutoffPolicy policy = AutoCutoff{}) {
    return StateSpec{CoherentSpec{alpha, beta}, policy};
}
inline StateSpec thermal_spec(double mean1, double mean2, CutoffPolicy policy = AutoCutoff{}) {
    return StateSpec{ThermalSpec{mean1, mean2}, policy};
}

}  // namespace duality_lab
