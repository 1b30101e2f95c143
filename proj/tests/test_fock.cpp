#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>

#include "duality_lab/fock.hpp"
#include "duality_lab/random_states.hpp"

using namespace duality_lab;
using Catch::Approx;

namespace {

/// P(N > n) for Poisson(mean), summed directly over the tail.
double poisson_tail(double mean, int n) {
    long double term = std::exp(-static_cast<long double>(mean));
    for (int m = 1; m <= n + 1; ++m) term *= mean / m;
    long double tail = 0.0L;
    for (int m = n + 1; m < n + 500; ++m) {
        tail += term;
        term *= mean / (m + 1);
    }
    return static_cast<double>(tail);
}

}  // namespace

TEST_CASE("FockCutoff indexing is row-major", "[fock]") {
    const FockCutoff cut(3);
    CHECK(cut.dimension() == 16);
    CHECK(cut.index(1, 0) == 4);
    CHECK(cut.index(2, 3) == 11);
    CHECK(cut.occupation(11) == std::pair{2, 3});
    CHECK_THROWS_AS(FockCutoff(-1), MalformedSpec);
}

TEST_CASE("build_state: Fock basis state", "[fock]") {
    const TwoModeState s = build_state(fock_spec(1, 0, 1));
    REQUIRE(s.rho().rows() == 4);
    CHECK(s.rho()(2, 2) == complex(1.0, 0.0));
    CHECK(s.rho().cwiseAbs().sum() == 1.0);
    CHECK(validate(s).passed());
    CHECK(s.constructed_pure());
}

TEST_CASE("build_state: NOON state has four entries of 1/2", "[fock]") {
    const TwoModeState s = build_state(noon_spec(2, 0.0, 2));
    const FockCutoff cut = s.cutoff();
    const Eigen::Index a = cut.index(2, 0);
    const Eigen::Index b = cut.index(0, 2);
    for (auto r : {a, b}) {
        for (auto c : {a, b}) CHECK(std::abs(s.rho()(r, c) - 0.5) < 1e-15);
    }
    CHECK(s.rho().cwiseAbs().sum() == Approx(2.0).epsilon(1e-15));
}

TEST_CASE("build_state: explicit cutoff too small", "[fock]") {
    CHECK_THROWS_AS(build_state(fock_spec(3, 0, 2)), CutoffTooSmall);
    CHECK_THROWS_AS(build_state(noon_spec(3, 0.0, 2)), CutoffTooSmall);
}

TEST_CASE("build_state: coherent auto cutoff follows the Poisson tail", "[fock]") {
    // Oracle: smallest n with P(N > n) <= 1e-12 for mean 1 is 14
    // (tails 6.4e-11, 4.5e-12, 3.0e-13 at n = 12, 13, 14).
    CHECK(poisson_tail(1.0, 12) > 1e-12);
    CHECK(poisson_tail(1.0, 13) > 1e-12);
    CHECK(poisson_tail(1.0, 14) <= 1e-12);

    const TwoModeState s = build_state(coherent_spec({1.0, 0.0}, {1.0, 0.0}, AutoCutoff{1e-12}));
    CHECK(s.cutoff().n_max() == 14);
    CHECK(std::abs(s.rho().trace().real() - 1.0) < 1e-14);
    // Pre-normalization mass lost in two modes.
    CHECK(s.truncation_tail() == Approx(1.0 - (1.0 - poisson_tail(1.0, 14)) * (1.0 - poisson_tail(1.0, 14))).margin(1e-15));
    CHECK(validate(s).passed());

    for (double mean : {0.3, 2.25, 5.0}) {
        const int n = detail::poisson_cutoff(mean, 1e-12);
        CHECK(poisson_tail(mean, n) <= 1e-12);
        CHECK(poisson_tail(mean, n - 1) > 1e-12);
    }
}

TEST_CASE("tensor_diagonal_probabilities", "[fock]") {
    SECTION("basis state") {
        const RealMatrix p = tensor_diagonal_probabilities(build_state(fock_spec(1, 0, 1)));
        CHECK(p(1, 0) == 1.0);
        CHECK(p.sum() == 1.0);
    }
    SECTION("NOON") {
        const RealMatrix p = tensor_diagonal_probabilities(build_state(noon_spec(2)));
        CHECK(p(2, 0) == Approx(0.5));
        CHECK(p(0, 2) == Approx(0.5));
        CHECK(p.sum() == Approx(1.0).epsilon(1e-15));
    }
    SECTION("coherent matches renormalized Poisson product") {
        const TwoModeState s = build_state(coherent_spec({1.0, 0.0}, {1.0, 0.0}));
        const RealMatrix p = tensor_diagonal_probabilities(s);
        const int n = s.cutoff().n_max();
        double norm = 0.0;
        RealMatrix expected(n + 1, n + 1);
        double fi = 1.0;
        for (int i = 0; i <= n; ++i) {
            if (i > 0) fi *= i;
            double fj = 1.0;
            for (int j = 0; j <= n; ++j) {
                if (j > 0) fj *= j;
                expected(i, j) = std::exp(-2.0) / (fi * fj);
                norm += expected(i, j);
            }
        }
        expected /= norm;
        CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("validate reports defects", "[fock]") {
    SECTION("trace 0.5 fails with defect 0.5") {
        const FockCutoff cut(1);
        ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
        rho(2, 2) = 0.5;
        const ValidationReport r = validate(TwoModeState(cut, rho));
        CHECK_FALSE(r.passed());
        CHECK_FALSE(r.unit_trace);
        CHECK(r.trace_defect == Approx(0.5));
        CHECK(r.hermitian);
        CHECK(r.positive);
    }
    SECTION("non-Hermitian and negative") {
        const FockCutoff cut(1);
        ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
        rho(0, 0) = 1.5;
        rho(1, 1) = -0.5;
        rho(0, 1) = complex(0.0, 0.1);
        const ValidationReport r = validate(TwoModeState(cut, rho));
        CHECK_FALSE(r.hermitian);
        CHECK_FALSE(r.positive);
        CHECK(r.min_eigenvalue < -0.4);
    }
    SECTION("Ginibre states pass") {
        std::mt19937_64 rng(7);
        for (int n = 0; n <= 4; ++n) {
            for (int trial = 0; trial < 20; ++trial) CHECK(validate(random_mixed_state(FockCutoff(n), rng)).passed());
        }
    }
    CHECK_THROWS_AS(validate(build_state(fock_spec(0, 0)), 0.0), MalformedSpec);
}

TEST_CASE("build_state: spec validation", "[fock]") {
    auto component = [](double w, StateSpec s) { return MixtureComponent{w, std::make_shared<const StateSpec>(s)}; };

    StateSpec bad_weights{MixtureSpec{{component(0.6, fock_spec(1, 0)), component(0.6, fock_spec(0, 1))}}, std::nullopt};
    CHECK_THROWS_AS(build_state(bad_weights), MalformedSpec);

    StateSpec negative_weight{MixtureSpec{{component(1.5, fock_spec(1, 0)), component(-0.5, fock_spec(0, 1))}}, std::nullopt};
    CHECK_THROWS_AS(build_state(negative_weight), MalformedSpec);

    CHECK_THROWS_AS(build_state(thermal_spec(-1.0, 0.5)), MalformedSpec);
    CHECK_THROWS_AS(build_state(coherent_spec({1.0, 0.0}, {0.0, 0.0}, AutoCutoff{0.0})), MalformedSpec);
    CHECK_THROWS_AS(build_state(coherent_spec({1.0, 0.0}, {0.0, 0.0}, AutoCutoff{1.0})), MalformedSpec);

    StateSpec raw_bad{RawSpec{ComplexMatrix::Identity(3, 3)}, std::nullopt};
    CHECK_THROWS_AS(build_state(raw_bad), MalformedSpec);
}

TEST_CASE("build_state: mixture is the weighted sum of components", "[fock][property]") {
    auto component = [](double w, StateSpec s) { return MixtureComponent{w, std::make_shared<const StateSpec>(s)}; };
    StateSpec mix{MixtureSpec{{component(0.25, fock_spec(2, 0)), component(0.5, noon_spec(1, 0.4)),
                               component(0.25, coherent_spec({0.3, 0.1}, {0.0, -0.2}))}},
                  ExplicitCutoff{3}};
    const TwoModeState s = build_state(mix);
    const FockCutoff cut(3);
    const ComplexMatrix expected = 0.25 * build_state(fock_spec(2, 0, 3)).rho() +
                                   0.5 * build_state(noon_spec(1, 0.4, 3)).rho() +
                                   0.25 * build_state(coherent_spec({0.3, 0.1}, {0.0, -0.2}, ExplicitCutoff{3})).rho();
    CHECK((s.rho() - expected).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(validate(s).passed());
}

TEST_CASE("build_state: thermal state is diagonal with geometric marginals", "[fock]") {
    const TwoModeState s = build_state(thermal_spec(0.5, 0.0));
    CHECK(validate(s).passed());
    const RealMatrix p = tensor_diagonal_probabilities(s);
    CHECK(p(1, 0) / p(0, 0) == Approx(0.5 / 1.5));
    CHECK(p.col(1).sum() == 0.0);
    const double ratio = 0.5 / 1.5;
    CHECK(std::pow(ratio, s.cutoff().n_max() + 1) <= 1e-12);
    CHECK(std::pow(ratio, s.cutoff().n_max()) > 1e-12);
}

TEST_CASE("global phase leaves diagonal probabilities unchanged", "[fock][property]") {
    for (double theta : {0.0, 0.7, 2.1, -1.3}) {
        const complex phase = std::polar(1.0, theta);
        const RealMatrix p0 = tensor_diagonal_probabilities(build_state(coherent_spec({0.8, 0.2}, {-0.4, 0.5})));
        const RealMatrix p1 =
            tensor_diagonal_probabilities(build_state(coherent_spec(phase * complex(0.8, 0.2), phase * complex(-0.4, 0.5))));
        CHECK((p0 - p1).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("every built state validates", "[fock][property]") {
    auto component = [](double w, StateSpec s) { return MixtureComponent{w, std::make_shared<const StateSpec>(s)}; };
    const std::vector<StateSpec> specs = {
        fock_spec(0, 0),
        fock_spec(3, 2),
        noon_spec(4, 1.1),
        coherent_spec({1.2, -0.3}, {0.0, 0.9}),
        thermal_spec(0.7, 1.3),
        StateSpec{MixtureSpec{{component(0.3, fock_spec(1, 1)), component(0.7, noon_spec(2, 0.5))}}, std::nullopt},
    };
    for (const auto& spec : specs) CHECK(validate(build_state(spec)).passed());
}

TEST_CASE("with_cutoff embeds without changing the state", "[fock]") {
    const TwoModeState s = build_state(noon_spec(2, 0.3));
    const TwoModeState big = s.with_cutoff(FockCutoff(4));
    CHECK(big.element(2, 0, 0, 2) == s.element(2, 0, 0, 2));
    CHECK(big.rho().cwiseAbs().sum() == Approx(s.rho().cwiseAbs().sum()));
    CHECK_THROWS_AS(big.with_cutoff(FockCutoff(3)), CutoffTooSmall);
    CHECK(s.top_total_photons() == 2);
}
