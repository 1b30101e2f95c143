#include <catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "duality_lab/io.hpp"

using namespace duality_lab;
using Catch::Approx;

namespace {

StateSpec parse(const std::string& text) {
    std::istringstream in(text);
    return io::parse_state_spec(in);
}

}  // namespace

TEST_CASE("state spec JSON: every kind", "[io]") {
    SECTION("fock") {
        const TwoModeState s = build_state(parse(R"({"kind":"fock","n1":1,"n2":0,"cutoff":{"mode":"explicit","value":1}})"));
        CHECK(s.cutoff().n_max() == 1);
        CHECK(s.rho()(2, 2) == complex(1.0, 0.0));
    }
    SECTION("noon with phase") {
        const TwoModeState s = build_state(parse(R"({"kind":"noon","N":2,"relative_phase":1.5})"));
        CHECK(s.cutoff().n_max() == 2);
        CHECK(std::arg(s.element(0, 2, 2, 0)) == Approx(1.5));
    }
    SECTION("coherent with complex amplitudes") {
        const StateSpec spec = parse(R"({"kind":"coherent","alpha":{"re":1,"im":0},"beta":{"re":0,"im":1},
                                          "cutoff":{"mode":"auto","value":1e-12}})");
        const auto& c = std::get<CoherentSpec>(spec.kind);
        CHECK(c.alpha == complex(1.0, 0.0));
        CHECK(c.beta == complex(0.0, 1.0));
        CHECK(std::get<AutoCutoff>(*spec.cutoff).tail_epsilon == 1e-12);
        CHECK(build_state(spec).cutoff().n_max() == 14);
    }
    SECTION("thermal") {
        const StateSpec spec = parse(R"({"kind":"thermal","mean1":0.5,"mean2":0.25})");
        CHECK(std::get<ThermalSpec>(spec.kind).mean2 == 0.25);
        CHECK(validate(build_state(spec)).passed());
    }
    SECTION("mixture") {
        const TwoModeState s = build_state(parse(R"({"kind":"mixture","components":[
            {"weight":0.5,"state":{"kind":"fock","n1":2,"n2":0}},
            {"weight":0.5,"state":{"kind":"fock","n1":0,"n2":1}}],
            "cutoff":{"mode":"explicit","value":2}})"));
        const RealMatrix p = tensor_diagonal_probabilities(s);
        CHECK(p(2, 0) == 0.5);
        CHECK(p(0, 1) == 0.5);
    }
    SECTION("raw matrix in basis order") {
        const TwoModeState s = build_state(parse(R"({"kind":"raw","matrix":[
            [{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0.5,"im":0},{"re":0,"im":0.5},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0,"im":-0.5},{"re":0.5,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}]]})"));
        CHECK(s.cutoff().n_max() == 1);
        CHECK(s.element(0, 1, 1, 0) == complex(0.0, 0.5));
        CHECK(validate(s).passed());
    }
}

TEST_CASE("state spec JSON: errors", "[io]") {
    CHECK_THROWS_AS(parse("{not json"), ParseError);
    CHECK_THROWS_AS(parse(R"({"kind":"squeezed"})"), ParseError);
    CHECK_THROWS_AS(parse(R"({"kind":"fock","n1":1})"), ParseError);
    CHECK_THROWS_AS(parse(R"({"kind":"fock","n1":1.5,"n2":0})"), ParseError);
    CHECK_THROWS_AS(parse(R"({"kind":"fock","n1":1,"n2":0,"cutoff":{"mode":"guess","value":3}})"), ParseError);
    CHECK_THROWS_AS(build_state(parse(R"({"kind":"fock","n1":3,"n2":0,"cutoff":{"mode":"explicit","value":2}})")),
                    CutoffTooSmall);
    CHECK_THROWS_AS(build_state(parse(R"({"kind":"thermal","mean1":-0.5,"mean2":0})")), MalformedSpec);
    CHECK_THROWS_AS(build_state(parse(R"({"kind":"mixture","components":[
        {"weight":0.7,"state":{"kind":"fock","n1":1,"n2":0}}]})")),
                    MalformedSpec);
    CHECK_THROWS_AS(parse(R"({"kind":"raw","matrix":[[1,0],[0]]})"), MalformedSpec);
    CHECK_THROWS_AS(io::load_state_spec("/nonexistent/state.json"), ParseError);
}

TEST_CASE("duality report JSON uses null for undefined orders", "[io]") {
    const auto reports = duality_report(build_state(fock_spec(1, 1)), 2);
    const auto j = io::to_json(reports);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["defined"] == true);
    CHECK(j[0]["D_k"].get<double>() == 0.0);
    CHECK(j[1]["defined"] == false);
    CHECK(j[1]["D_k"].is_null());
    CHECK(j[1]["V_k"].is_null());
    CHECK(j[1]["sum"].is_null());
    CHECK(j[1]["denominator"].get<double>() == 0.0);
}

TEST_CASE("shot log CSV layout and round trip", "[io]") {
    ShotLog log;
    log.phi = 0.1;
    log.seed = 18446744073709551615ULL;
    log.k_intent = 2;
    log.shots = {Shot{0, 0}, Shot{2, 1}, Shot{0, 3}};
    std::ostringstream out;
    io::write_shot_log(out, log);
    CHECK(out.str() ==
          "# seed=18446744073709551615 shots=3 k_intent=2\n"
          "phi,n_c,n_d\n"
          "0.10000000000000001,0,0\n"
          "0.10000000000000001,2,1\n"
          "0.10000000000000001,0,3\n");

    std::istringstream in(out.str());
    const ShotLog back = io::read_shot_log(in);
    CHECK(back.phi == log.phi);
    CHECK(back.seed == log.seed);
    CHECK(back.k_intent == 2);
    CHECK(back.shots == log.shots);

    std::istringstream truncated("# seed=1 shots=5 k_intent=1\nphi,n_c,n_d\n0,1,0\n");
    CHECK_THROWS_AS(io::read_shot_log(truncated), ParseError);
    std::istringstream headerless("phi,n_c,n_d\n0,1,0\n");
    CHECK_THROWS_AS(io::read_shot_log(headerless), ParseError);
}

TEST_CASE("sampled estimates survive the CSV round trip", "[io][property]") {
    const TwoModeState noon = build_state(noon_spec(2));
    ShotLog log = sample_shots(noon, 0.7, 50'000, 3);
    log.k_intent = 2;
    std::stringstream buffer;
    io::write_shot_log(buffer, log);
    const ShotLog back = io::read_shot_log(buffer);
    for (int k = 1; k <= 3; ++k) {
        const DetectorEstimate a = estimate_statistics(log, k);
        const DetectorEstimate b = estimate_statistics(back, k);
        CHECK(std::abs(a.r_plus - b.r_plus) <= 1e-12);
        CHECK(std::abs(a.r_minus - b.r_minus) <= 1e-12);
        CHECK(std::abs(a.stderr_plus - b.stderr_plus) <= 1e-12);
        CHECK(std::abs(a.stderr_minus - b.stderr_minus) <= 1e-12);
    }
}

TEST_CASE("phase scan CSV", "[io]") {
    const PhaseScanRecord exact = phase_scan(build_state(fock_spec(1, 0)), 1, {0.0, 1.0});
    std::stringstream text;
    io::write_phase_scan(text, exact);
    std::string header;
    std::getline(text, header);
    CHECK(header == "k,phi,r_plus,r_minus,stderr_plus,stderr_minus");
    std::string row;
    std::getline(text, row);
    CHECK(row.substr(row.size() - 2) == ",,");
    text.clear();
    text.seekg(0);
    const PhaseScanRecord exact_back = io::read_phase_scan(text);
    REQUIRE(exact_back.entries.size() == 2);
    CHECK(exact_back.entries[1].r_plus == exact.entries[1].r_plus);
    CHECK(exact_back.entries[1].r_minus == exact.entries[1].r_minus);
    CHECK_FALSE(exact_back.entries[1].stderr_plus.has_value());
    CHECK(std::holds_alternative<ExactSource>(exact_back.source));

    const PhaseScanRecord sampled =
        phase_scan(build_state(noon_spec(2)), 2, {0.0, 0.5}, SampledSource{1000, 4, std::nullopt});
    std::stringstream buffer;
    io::write_phase_scan(buffer, sampled);
    const PhaseScanRecord back = io::read_phase_scan(buffer);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.k == 2);
    CHECK(back.entries[1].phi == 0.5);
    CHECK(back.entries[1].r_plus == sampled.entries[1].r_plus);
    CHECK(*back.entries[1].stderr_minus == *sampled.entries[1].stderr_minus);
    CHECK(std::holds_alternative<SampledSource>(back.source));
}
