#ifndef JLW_IO_HPP
#define JLW_IO_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jlw/decompose.hpp"
#include "jlw/model.hpp"
#include "jlw/rational.hpp"
#include "jlw/simulate.hpp"
#include "jlw/verify.hpp"

namespace jlw {

/// Malformed input file: the message names the offending field.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/**
 * Rationals in files are strings ("3/10", "0.3", "2") or integer JSON
 * numbers. Decimal JSON numbers are rejected: they would silently round
 * before reaching the exact-arithmetic core.
 */
inline Rational rational_field(const nlohmann::json& value, const std::string& field) {
    if (value.is_string()) {
        try {
            return parse_rational(value.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ParseError("field '" + field + "': " + e.what());
        }
    }
    if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
    if (value.is_number_unsigned()) return Rational(value.get<std::uint64_t>());
    if (value.is_number_float())
        throw ParseError("field '" + field +
                         "' must be a rational string or integer; decimal floats lose exactness");
    throw ParseError("field '" + field + "' must be a rational string or integer");
}

inline const nlohmann::json& require_field(const nlohmann::json& obj, const std::string& field,
                                           const std::string& prefix = "") {
    const auto it = obj.find(field);
    if (it == obj.end()) throw ParseError("missing field '" + prefix + field + "'");
    return *it;
}

}  // namespace detail

// ============================================================================
// Instance files
// ============================================================================

/**
 * Parses an instance from its JSON form:
 *   {"stations": N,
 *    "neighbourhoods": [{"members": [1-based ints], "rate": rational}, ...],
 *    "service_rates": [rational per station],
 *    "weights": [rational per station]}
 * Structural problems raise ParseError naming the field; semantic problems
 * (bad rates, disconnection) are left to validate().
 */
inline Instance parse_instance(const nlohmann::json& root) {
    if (!root.is_object()) throw ParseError("instance file must hold a JSON object");
    Instance inst;
    {
        const auto& stations = detail::require_field(root, "stations");
        if (!stations.is_number_integer() && !stations.is_number_unsigned())
            throw ParseError("field 'stations' must be an integer");
        const std::int64_t n = stations.get<std::int64_t>();
        if (n <= 0 || n > 1'000'000) throw ParseError("field 'stations' must be a positive station count");
        inst.stations = static_cast<int>(n);
    }
    {
        const auto& nbs = detail::require_field(root, "neighbourhoods");
        if (!nbs.is_array()) throw ParseError("field 'neighbourhoods' must be an array");
        for (std::size_t i = 0; i < nbs.size(); ++i) {
            const std::string prefix = "neighbourhoods[" + std::to_string(i) + "].";
            const auto& nb = nbs[i];
            if (!nb.is_object()) throw ParseError("field 'neighbourhoods[" + std::to_string(i) + "]' must be an object");
            Neighbourhood out;
            const auto& members = detail::require_field(nb, "members", prefix);
            if (!members.is_array())
                throw ParseError("field '" + prefix + "members' must be an array of station numbers");
            for (const auto& m : members) {
                if (!m.is_number_integer() && !m.is_number_unsigned())
                    throw ParseError("field '" + prefix + "members' must hold integers");
                const std::int64_t station = m.get<std::int64_t>();
                if (station < 1)
                    throw ParseError("field '" + prefix + "members' must hold 1-based station numbers");
                out.members.push_back(static_cast<int>(station - 1));
            }
            out.rate = detail::rational_field(detail::require_field(nb, "rate", prefix), prefix + "rate");
            inst.neighbourhoods.push_back(std::move(out));
        }
    }
    const auto rational_vector = [&root](const std::string& field) {
        const auto& arr = detail::require_field(root, field);
        if (!arr.is_array()) throw ParseError("field '" + field + "' must be an array");
        std::vector<Rational> out;
        for (std::size_t j = 0; j < arr.size(); ++j)
            out.push_back(detail::rational_field(arr[j], field + "[" + std::to_string(j) + "]"));
        return out;
    };
    inst.service_rates = rational_vector("service_rates");
    inst.weights = rational_vector("weights");
    return inst;
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        return parse_instance(root);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json root;
    root["stations"] = inst.stations;
    nlohmann::json nbs = nlohmann::json::array();
    for (const Neighbourhood& nb : inst.neighbourhoods) {
        nlohmann::json entry;
        nlohmann::json members = nlohmann::json::array();
        for (int j : nb.members) members.push_back(j + 1);
        entry["members"] = std::move(members);
        entry["rate"] = format_rational(nb.rate);
        nbs.push_back(std::move(entry));
    }
    root["neighbourhoods"] = std::move(nbs);
    nlohmann::json mus = nlohmann::json::array(), ws = nlohmann::json::array();
    for (const Rational& mu : inst.service_rates) mus.push_back(format_rational(mu));
    for (const Rational& w : inst.weights) ws.push_back(format_rational(w));
    root["service_rates"] = std::move(mus);
    root["weights"] = std::move(ws);
    return root;
}

// ============================================================================
// Reports
// ============================================================================

namespace detail {

inline nlohmann::json clusters_to_json(const std::vector<Cluster>& clusters) {
    nlohmann::json out = nlohmann::json::array();
    for (const Cluster& c : clusters) {
        nlohmann::json members = nlohmann::json::array();
        for (int j : c) members.push_back(j + 1);
        out.push_back(std::move(members));
    }
    return out;
}

}  // namespace detail

/// Clusters (1-based), exact drift-rate fractions, witness routing matrix,
/// and the canonical neighbourhoods the witness rows refer to.
inline nlohmann::json decomposition_report(const Instance& instance, const Decomposition& dec) {
    const Instance canon = canonicalize(instance);
    nlohmann::json root;
    root["clusters"] = detail::clusters_to_json(dec.clusters);
    nlohmann::json values = nlohmann::json::array();
    for (const Rational& v : dec.values) values.push_back(format_rational(v));
    root["values"] = std::move(values);
    nlohmann::json witness = nlohmann::json::array();
    for (const auto& row : dec.witness.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const Rational& p : row) r.push_back(format_rational(p));
        witness.push_back(std::move(r));
    }
    root["witness"] = std::move(witness);
    nlohmann::json nbs = nlohmann::json::array();
    for (const Neighbourhood& nb : canon.neighbourhoods) {
        nlohmann::json entry;
        nlohmann::json members = nlohmann::json::array();
        for (int j : nb.members) members.push_back(j + 1);
        entry["members"] = std::move(members);
        entry["rate"] = format_rational(nb.rate);
        nbs.push_back(std::move(entry));
    }
    root["neighbourhoods"] = std::move(nbs);
    return root;
}

inline nlohmann::json bonded_report(const Decomposition& dec,
                                    const std::vector<std::vector<Cluster>>& bonds) {
    nlohmann::json root;
    root["clusters"] = detail::clusters_to_json(dec.clusters);
    nlohmann::json per_cluster = nlohmann::json::array();
    for (const auto& comps : bonds) per_cluster.push_back(detail::clusters_to_json(comps));
    root["bonded_components"] = std::move(per_cluster);
    return root;
}

inline nlohmann::json verdict_to_json(const Verdict& v) {
    nlohmann::json root;
    root["experiment"] = v.experiment;
    root["claim"] = v.claim;
    root["statistic"] = v.statistic;
    root["threshold"] = v.threshold;
    root["pass"] = v.pass;
    root["seed"] = v.seed;
    root["replicas"] = v.replicas;
    root["details"] = v.details;
    return root;
}

// ============================================================================
// Trajectory export
// ============================================================================

/// CSV of the sampled path: step, uniformized time, one column per station.
inline std::string trajectory_csv(const Trajectory& trajectory, int stations) {
    std::ostringstream out;
    out.precision(17);
    out << "step,time";
    for (int j = 1; j <= stations; ++j) out << ",station_" << j;
    out << "\n";
    for (std::size_t s = 0; s < trajectory.steps.size(); ++s) {
        out << trajectory.steps[s] << ","
            << static_cast<double>(trajectory.steps[s]) / trajectory.alpha;
        for (const std::int64_t x : trajectory.states[s]) out << "," << x;
        out << "\n";
    }
    return out.str();
}

inline nlohmann::json trajectory_counters(const Trajectory& trajectory) {
    nlohmann::json root;
    root["horizon"] = trajectory.horizon;
    root["cadence"] = trajectory.cadence;
    root["seed"] = trajectory.seed;
    root["alpha"] = trajectory.alpha;
    root["arrivals_by_stream"] = trajectory.arrivals_by_stream;
    root["arrivals_by_station"] = trajectory.arrivals_by_station;
    root["departures_by_station"] = trajectory.departures_by_station;
    root["idles_by_station"] = trajectory.idles_by_station;
    root["final_state"] = trajectory.final_state;
    return root;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

/// Reports are always serialized the same way (sorted keys, two-space
/// indent, trailing newline) so equal runs produce byte-identical files.
inline std::string render_report(const nlohmann::json& root) { return root.dump(2) + "\n"; }

}  // namespace jlw

#endif  // JLW_IO_HPP
