#pragma once

// Command-line front end: analyze, scan, reconstruct and sample.
//
// Exit codes: 0 success, 1 I/O or spec error, 2 duality inequality violated,
// 3 exact reconstruction mismatch, 4 undefined order.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "duality_lab/duality.hpp"
#include "duality_lab/errors.hpp"
#include "duality_lab/fock.hpp"
#include "duality_lab/io.hpp"
#include "duality_lab/measurement.hpp"

namespace duality_lab::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kInequalityViolation = 2,
    kReconstructionMismatch = 3,
    kUndefinedOrder = 4,
};

inline constexpr double kInequalityTolerance = 1e-10;
inline constexpr double kReconstructionTolerance = 1e-9;

enum class Command { analyze, scan, reconstruct, sample };
enum class Format { json, csv };

struct RunConfig {
    Command command = Command::analyze;
    std::string state_path;
    std::optional<int> k;
    std::optional<int> k_max;
    double phi = 0.0;
    double phi_prime = 0.0;
    std::string grid = "0:2pi:64";
    std::optional<std::size_t> shots;
    std::uint64_t seed = 0;
    std::string output_path;
    std::optional<Format> format;
};

/// A number, optionally in units of pi: "1.5", "pi", "2pi", "2*pi", "pi/4", "-3pi/2".
inline double parse_angle(const std::string& text) {
    const auto pos = text.find("pi");
    if (pos == std::string::npos) {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw ParseError("bad number: " + text);
        return v;
    }
    std::string coeff = text.substr(0, pos);
    if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
    double factor = 1.0;
    if (coeff == "-") {
        factor = -1.0;
    } else if (!coeff.empty() && coeff != "+") {
        std::size_t used = 0;
        factor = std::stod(coeff, &used);
        if (used != coeff.size()) throw ParseError("bad angle: " + text);
    }
    std::string rest = text.substr(pos + 2);
    double divisor = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/') throw ParseError("bad angle: " + text);
        rest.erase(0, 1);
        std::size_t used = 0;
        divisor = std::stod(rest, &used);
        if (used != rest.size() || divisor == 0.0) throw ParseError("bad angle: " + text);
    }
    return factor * std::numbers::pi / divisor;
}

/// "start:stop:count" -> count nodes start + i (stop - start) / count, stop excluded.
inline std::vector<double> parse_grid(const std::string& text) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw ParseError("grid must be start:stop:count");
    double start = 0.0;
    double stop = 0.0;
    long count = 0;
    try {
        start = parse_angle(text.substr(0, a));
        stop = parse_angle(text.substr(a + 1, b - a - 1));
        std::size_t used = 0;
        const std::string count_text = text.substr(b + 1);
        count = std::stol(count_text, &used);
        if (used != count_text.size()) throw ParseError("bad grid count");
    } catch (const std::logic_error&) {
        throw ParseError("grid must be start:stop:count, got " + text);
    }
    if (count < 1) throw ParseError("grid count must be positive");
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) nodes.push_back(start + static_cast<double>(i) * (stop - start) / static_cast<double>(count));
    return nodes;
}

namespace detail {

inline std::string csv_optional(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

inline int analyze(const RunConfig& cfg, const TwoModeState& state, std::ostream& out) {
    const int k_max = cfg.k_max.value_or(std::max(1, max_defined_order(state)));
    const auto reports = duality_report(state, k_max);
    bool violated = false;
    for (const auto& r : reports) {
        if (r.defined && *r.sum > 1.0 + kInequalityTolerance) violated = true;
    }
    if (cfg.format.value_or(Format::json) == Format::json) {
        out << io::to_json(reports).dump(2) << '\n';
    } else {
        out << "k,defined,D_k,V_k,sum,saturated,denominator\n";
        for (const auto& r : reports) {
            out << r.k << ',' << (r.defined ? "true" : "false") << ',' << csv_optional(r.distinguishability) << ','
                << csv_optional(r.visibility) << ',' << csv_optional(r.sum) << ',' << (r.saturated ? "true" : "false")
                << ',' << io::format_double(r.denominator) << '\n';
        }
    }
    return violated ? kInequalityViolation : kOk;
}

inline int scan(const RunConfig& cfg, const TwoModeState& state, std::ostream& out) {
    StatisticsSource source = ExactSource{};
    if (cfg.shots) source = SampledSource{*cfg.shots, cfg.seed, std::nullopt};
    const PhaseScanRecord record = phase_scan(state, cfg.k.value_or(1), parse_grid(cfg.grid), source);
    if (cfg.format.value_or(Format::csv) == Format::csv) {
        io::write_phase_scan(out, record);
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& e : record.entries) {
            rows.push_back({{"phi", e.phi},
                            {"r_plus", e.r_plus},
                            {"r_minus", e.r_minus},
                            {"stderr_plus", e.stderr_plus ? nlohmann::json(*e.stderr_plus) : nlohmann::json(nullptr)},
                            {"stderr_minus", e.stderr_minus ? nlohmann::json(*e.stderr_minus) : nlohmann::json(nullptr)}});
        }
        out << nlohmann::json{{"k", record.k}, {"entries", rows}}.dump(2) << '\n';
    }
    return kOk;
}

inline int reconstruct(const RunConfig& cfg, const TwoModeState& state, std::ostream& out) {
    const int k = cfg.k.value_or(1);
    StatisticsSource source = ExactSource{};
    if (cfg.shots) source = SampledSource{*cfg.shots, cfg.seed, std::nullopt};
    const double direct = visibility(state, k);
    const ReconstructionResult result = reconstruct_visibility(state, k, cfg.phi_prime, source);
    const double difference = std::abs(result.visibility - direct);
    const bool exact = std::holds_alternative<ExactSource>(source);

    if (cfg.format.value_or(Format::json) == Format::json) {
        nlohmann::json j{{"k", k},
                         {"phi_prime", cfg.phi_prime},
                         {"source", exact ? "exact" : "sampled"},
                         {"direct_V_k", direct},
                         {"reconstructed_V_k", result.visibility},
                         {"unnormalized_max", result.unnormalized_max},
                         {"absolute_difference", difference},
                         {"stderr", result.stderr ? nlohmann::json(*result.stderr) : nlohmann::json(nullptr)}};
        if (!exact) {
            j["shots_per_node"] = *cfg.shots;
            j["seed"] = cfg.seed;
            j["within_5_stderr"] = difference <= 5.0 * result.stderr.value_or(0.0);
        }
        out << j.dump(2) << '\n';
    } else {
        out << "k,phi_prime,direct_V_k,reconstructed_V_k,absolute_difference,stderr\n";
        out << k << ',' << io::format_double(cfg.phi_prime) << ',' << io::format_double(direct) << ','
            << io::format_double(result.visibility) << ',' << io::format_double(difference) << ','
            << csv_optional(result.stderr) << '\n';
    }
    return exact && difference > kReconstructionTolerance ? kReconstructionMismatch : kOk;
}

inline int sample(const RunConfig& cfg, const TwoModeState& state, std::ostream& out) {
    if (!cfg.shots || *cfg.shots < 1) throw MalformedSpec("sample needs --shots >= 1");
    ShotLog log = sample_shots(state, cfg.phi, *cfg.shots, cfg.seed);
    log.k_intent = cfg.k.value_or(1);
    io::write_shot_log(out, log);
    return kOk;
}

}  // namespace detail

/// Runs one command. Output is buffered and written only when the command
/// produced a result.
inline int execute(const RunConfig& cfg, std::ostream& err) {
    std::ostringstream buffer;
    int code = kOk;
    try {
        if (cfg.k && *cfg.k < 1) throw OrderOutOfRange("--k must be >= 1");
        if (cfg.k_max && *cfg.k_max < 1) throw OrderOutOfRange("--k-max must be >= 1");
        const TwoModeState state = build_state(io::load_state_spec(cfg.state_path));
        switch (cfg.command) {
            case Command::analyze: code = detail::analyze(cfg, state, buffer); break;
            case Command::scan: code = detail::scan(cfg, state, buffer); break;
            case Command::reconstruct: code = detail::reconstruct(cfg, state, buffer); break;
            case Command::sample: code = detail::sample(cfg, state, buffer); break;
        }
    } catch (const UndefinedOrder& e) {
        err << "error: " << e.what() << '\n';
        return kUndefinedOrder;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    if (cfg.output_path.empty() || cfg.output_path == "-") {
        std::cout << buffer.str();
    } else {
        std::ofstream file(cfg.output_path, std::ios::binary);
        if (!file || !(file << buffer.str()) || !file.flush()) {
            err << "error: cannot write " << cfg.output_path << '\n';
            return kInputError;
        }
    }
    if (code == kInequalityViolation) err << "error: duality inequality violated beyond tolerance\n";
    if (code == kReconstructionMismatch) err << "error: reconstructed visibility differs from direct value\n";
    return code;
}

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"Higher-order wave-particle duality analysis for two-mode photonic states"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string format;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--state", cfg.state_path, "State spec JSON file")->required();
        sub->add_option("--out", cfg.output_path, "Output file (default stdout)");
        sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* analyze = app.add_subcommand("analyze", "Duality report for orders 1..k_max");
    add_common(analyze);
    analyze->add_option("--k-max", cfg.k_max, "Highest order (default: highest defined order)");

    CLI::App* scan = app.add_subcommand("scan", "Exact detector statistics over a phase grid");
    add_common(scan);
    scan->add_option("--k", cfg.k, "Correlation order (default 1)");
    scan->add_option("--grid", cfg.grid, "start:stop:count, stop excluded; angles accept 'pi' (default 0:2pi:64)");
    scan->add_option("--shots", cfg.shots, "Sample this many shots per node instead of exact values");
    scan->add_option("--seed", cfg.seed, "RNG seed for sampled scans");

    CLI::App* reconstruct = app.add_subcommand("reconstruct", "Compare reconstructed and direct visibility");
    add_common(reconstruct);
    reconstruct->add_option("--k", cfg.k, "Correlation order")->required();
    reconstruct->add_option("--phi-prime", cfg.phi_prime, "Reference phase of the node grid");
    reconstruct->add_option("--shots", cfg.shots, "Shots per phase node (sampled mode)");
    reconstruct->add_option("--seed", cfg.seed, "RNG seed");

    CLI::App* sample = app.add_subcommand("sample", "Monte-Carlo photon counts at one phase");
    add_common(sample);
    sample->add_option("--phi", cfg.phi, "Phase shift on path 2");
    sample->add_option("--shots", cfg.shots, "Number of shots")->required();
    sample->add_option("--seed", cfg.seed, "RNG seed");
    sample->add_option("--k", cfg.k, "Order the log is intended for (recorded in the header)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, err);
        return kInputError;
    }

    if (analyze->parsed()) cfg.command = Command::analyze;
    if (scan->parsed()) cfg.command = Command::scan;
    if (reconstruct->parsed()) cfg.command = Command::reconstruct;
    if (sample->parsed()) cfg.command = Command::sample;
    if (format == "json") cfg.format = Format::json;
    if (format == "csv") cfg.format = Format::csv;
    return execute(cfg, err);
}

}  // namespace duality_lab::cli
