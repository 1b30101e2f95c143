#pragma once

// File formats: StateSpec JSON documents, DualityReport JSON, ShotLog and
// PhaseScanRecord CSV tables.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "duality_lab/duality.hpp"
#include "duality_lab/errors.hpp"
#include "duality_lab/fock.hpp"
#include "duality_lab/measurement.hpp"

namespace duality_lab::io {

using json = nlohmann::json;

/// Shortest text that round-trips a double exactly.
inline std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// StateSpec

namespace detail {

inline const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field \"") + name + "\"");
    return *it;
}

inline double number(const json& j, const char* what) {
    if (!j.is_number()) throw ParseError(std::string("field \"") + what + "\" must be a number");
    return j.get<double>();
}

inline int integer(const json& j, const char* what) {
    if (!j.is_number_integer()) throw ParseError(std::string("field \"") + what + "\" must be an integer");
    return j.get<int>();
}

/// {"re": x, "im": y}, or a bare real number.
inline complex complex_number(const json& j, const char* what) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_object()) throw ParseError(std::string("field \"") + what + "\" must be a complex object");
    const double re = j.contains("re") ? number(j["re"], what) : 0.0;
    const double im = j.contains("im") ? number(j["im"], what) : 0.0;
    return {re, im};
}

inline json complex_json(complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace detail

inline StateSpec parse_state_spec(const json& j) {
    using detail::field;
    if (!j.is_object()) throw ParseError("state spec must be a JSON object");
    const auto kind_it = j.find("kind");
    if (kind_it == j.end() || !kind_it->is_string()) throw ParseError("state spec needs a string \"kind\"");
    const std::string kind = kind_it->get<std::string>();

    StateSpec spec;
    if (kind == "fock") {
        spec.kind = FockSpec{detail::integer(field(j, "n1"), "n1"), detail::integer(field(j, "n2"), "n2")};
    } else if (kind == "noon") {
        const json& n = j.contains("N") ? j["N"] : field(j, "photons");
        const double phase = j.contains("relative_phase") ? detail::number(j["relative_phase"], "relative_phase") : 0.0;
        spec.kind = NoonSpec{detail::integer(n, "N"), phase};
    } else if (kind == "coherent") {
        spec.kind = CoherentSpec{detail::complex_number(field(j, "alpha"), "alpha"),
                                 detail::complex_number(field(j, "beta"), "beta")};
    } else if (kind == "thermal") {
        spec.kind = ThermalSpec{detail::number(field(j, "mean1"), "mean1"), detail::number(field(j, "mean2"), "mean2")};
    } else if (kind == "mixture") {
        const json& comps = field(j, "components");
        if (!comps.is_array()) throw ParseError("mixture \"components\" must be an array");
        MixtureSpec mix;
        for (const json& c : comps) {
            MixtureComponent part;
            part.weight = detail::number(field(c, "weight"), "weight");
            part.spec = std::make_shared<const StateSpec>(parse_state_spec(field(c, "state")));
            mix.components.push_back(std::move(part));
        }
        spec.kind = std::move(mix);
    } else if (kind == "raw") {
        const json& rows = field(j, "matrix");
        if (!rows.is_array() || rows.empty()) throw ParseError("raw \"matrix\" must be a non-empty array of rows");
        const auto d = static_cast<Eigen::Index>(rows.size());
        ComplexMatrix m(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            const json& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
                throw MalformedSpec("raw matrix must be square");
            }
            for (Eigen::Index c = 0; c < d; ++c) m(r, c) = detail::complex_number(row[static_cast<std::size_t>(c)], "matrix");
        }
        spec.kind = RawSpec{std::move(m)};
    } else {
        throw ParseError("unknown state kind \"" + kind + "\"");
    }

    if (auto it = j.find("cutoff"); it != j.end() && !it->is_null()) {
        const json& cut = *it;
        const std::string mode = field(cut, "mode").get<std::string>();
        if (mode == "explicit") {
            spec.cutoff = ExplicitCutoff{detail::integer(field(cut, "value"), "cutoff.value")};
        } else if (mode == "auto") {
            spec.cutoff = AutoCutoff{cut.contains("value") ? detail::number(cut["value"], "cutoff.value") : 1e-12};
        } else {
            throw ParseError("cutoff mode must be \"explicit\" or \"auto\"");
        }
    }
    return spec;
}

inline StateSpec parse_state_spec(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        return parse_state_spec(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid state spec: ") + e.what());
    }
}

inline StateSpec load_state_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open state file " + path);
    return parse_state_spec(in);
}

// ---------------------------------------------------------------------------
// DualityReport

inline json to_json(const DualityReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return json{{"k", r.k},
                {"defined", r.defined},
                {"D_k", opt(r.distinguishability)},
                {"V_k", opt(r.visibility)},
                {"sum", opt(r.sum)},
                {"saturated", r.saturated},
                {"denominator", r.denominator},
                {"signed_D_k", opt(r.signed_distinguishability)},
                {"auto1", r.auto1},
                {"auto2", r.auto2},
                {"cross", detail::complex_json(r.cross)}};
}

inline json to_json(const std::vector<DualityReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr;
}

// ---------------------------------------------------------------------------
// ShotLog CSV: "# seed=<u64> shots=<n> k_intent=<k>", then "phi,n_c,n_d" rows.

inline void write_shot_log(std::ostream& out, const ShotLog& log) {
    out << "# seed=" << log.seed << " shots=" << log.shots.size() << " k_intent=" << log.k_intent << '\n';
    out << "phi,n_c,n_d\n";
    const std::string phi = format_double(log.phi);
    for (const Shot& s : log.shots) out << phi << ',' << s.n_c << ',' << s.n_d << '\n';
}

inline ShotLog read_shot_log(std::istream& in) {
    ShotLog log;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError("shot log must start with a '# seed=' line");
    unsigned long long seed = 0;
    unsigned long long shots = 0;
    int k_intent = 1;
    if (std::sscanf(line.c_str(), "# seed=%llu shots=%llu k_intent=%d", &seed, &shots, &k_intent) != 3) {
        throw ParseError("malformed shot log comment line: " + line);
    }
    log.seed = seed;
    log.k_intent = k_intent;
    if (!std::getline(in, line) || line != "phi,n_c,n_d") throw ParseError("expected header phi,n_c,n_d");
    log.shots.reserve(shots);
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double phi = 0.0;
        unsigned nc = 0;
        unsigned nd = 0;
        if (std::sscanf(line.c_str(), "%lf,%u,%u", &phi, &nc, &nd) != 3) throw ParseError("malformed shot row: " + line);
        if (first) {
            log.phi = phi;
            first = false;
        }
        log.shots.push_back(Shot{nc, nd});
    }
    if (log.shots.size() != shots) {
        throw ParseError("shot log declares " + std::to_string(shots) + " shots but has " +
                         std::to_string(log.shots.size()));
    }
    return log;
}

// ---------------------------------------------------------------------------
// PhaseScanRecord CSV

inline void write_phase_scan(std::ostream& out, const PhaseScanRecord& record) {
    out << "k,phi,r_plus,r_minus,stderr_plus,stderr_minus\n";
    for (const PhaseScanEntry& e : record.entries) {
        out << record.k << ',' << format_double(e.phi) << ',' << format_double(e.r_plus) << ','
            << format_double(e.r_minus) << ',';
        if (e.stderr_plus) out << format_double(*e.stderr_plus);
        out << ',';
        if (e.stderr_minus) out << format_double(*e.stderr_minus);
        out << '\n';
    }
}

inline PhaseScanRecord read_phase_scan(std::istream& in) {
    PhaseScanRecord record;
    std::string line;
    if (!std::getline(in, line) || line != "k,phi,r_plus,r_minus,stderr_plus,stderr_minus") {
        throw ParseError("expected phase scan header");
    }
    bool sampled = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() == 4) cells.emplace_back();
        if (cells.size() == 5) cells.emplace_back();
        if (cells.size() != 6) throw ParseError("malformed phase scan row: " + line);
        try {
            record.k = std::stoi(cells[0]);
            PhaseScanEntry e;
            e.phi = std::stod(cells[1]);
            e.r_plus = std::stod(cells[2]);
            e.r_minus = std::stod(cells[3]);
            if (!cells[4].empty()) e.stderr_plus = std::stod(cells[4]);
            if (!cells[5].empty()) e.stderr_minus = std::stod(cells[5]);
            sampled = sampled || e.stderr_plus.has_value();
            record.entries.push_back(e);
        } catch (const std::exception&) {
            throw ParseError("malformed phase scan row: " + line);
        }
    }
    if (sampled) record.source = SampledSource{};
    return record;
}

}  // namespace duality_lab::io
