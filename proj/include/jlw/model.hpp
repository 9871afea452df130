#ifndef JLW_MODEL_HPP
#define JLW_MODEL_HPP

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jlw/rational.hpp"

namespace jlw {

/// Sorted set of station indices (0-based internally; file formats are 1-based).
using Cluster = std::vector<int>;

/**
 * One arrival stream: a set of admissible stations and a Poisson rate.
 * `members` is kept sorted and duplicate-free in canonical instances.
 */
struct Neighbourhood {
    std::vector<int> members;
    Rational rate;
};

/**
 * A service network: `stations` exponential servers with rates
 * `service_rates`, positive comparison weights `weights`, and Poisson arrival
 * streams restricted to neighbourhoods. Arrivals are routed among the members
 * of their neighbourhood, by a static policy or by joining the station with
 * the least weighted occupancy.
 */
struct Instance {
    int stations = 0;
    std::vector<Neighbourhood> neighbourhoods;
    std::vector<Rational> service_rates;
    std::vector<Rational> weights;
};

/**
 * Static routing policy: one probability row per neighbourhood, with support
 * inside the neighbourhood's members. Rows are indexed in the order of the
 * (canonical) instance's neighbourhoods and have one column per station.
 */
struct StaticPolicy {
    std::vector<std::vector<Rational>> rows;
};

// ============================================================================
// Validation and canonical form
// ============================================================================

/**
 * Structural and semantic checks. Returns a human-readable violation list
 * (empty means valid). Station numbers in messages are 1-based.
 */
inline std::vector<std::string> validate(const Instance& instance) {
    std::vector<std::string> violations;
    if (instance.stations <= 0) {
        violations.push_back("stations must be positive");
        return violations;
    }
    const int n = instance.stations;
    if (static_cast<int>(instance.service_rates.size()) != n)
        violations.push_back("service rate count does not match station count");
    if (static_cast<int>(instance.weights.size()) != n)
        violations.push_back("weight count does not match station count");
    for (std::size_t j = 0; j < instance.service_rates.size(); ++j)
        if (instance.service_rates[j] <= 0)
            violations.push_back("service rate for station " + std::to_string(j + 1) + " must be positive");
    for (std::size_t j = 0; j < instance.weights.size(); ++j)
        if (instance.weights[j] <= 0)
            violations.push_back("weight for station " + std::to_string(j + 1) + " must be positive");

    bool any_positive = false;
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (std::size_t i = 0; i < instance.neighbourhoods.size(); ++i) {
        const Neighbourhood& nb = instance.neighbourhoods[i];
        const std::string label = "neighbourhood " + std::to_string(i + 1);
        if (nb.rate < 0) violations.push_back(label + " has a negative arrival rate");
        if (nb.members.empty()) {
            violations.push_back(label + " is empty");
            continue;
        }
        bool in_range = true;
        for (int j : nb.members)
            if (j < 0 || j >= n) {
                violations.push_back(label + " references a station out of range");
                in_range = false;
                break;
            }
        if (!in_range) continue;
        std::vector<int> sorted = nb.members;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            violations.push_back(label + " lists a station twice");
        if (nb.rate > 0) {
            any_positive = true;
            for (int j : nb.members) covered[static_cast<std::size_t>(j)] = true;
        }
    }
    if (!any_positive) violations.push_back("no positive arrival stream");
    for (int j = 0; j < n; ++j)
        if (any_positive && !covered[static_cast<std::size_t>(j)])
            violations.push_back("graph not connected (station " + std::to_string(j + 1) + " isolated)");
    return violations;
}

/**
 * Canonical form: members sorted and unique, duplicate neighbourhood sets
 * merged with summed rates, zero-rate streams dropped, neighbourhoods in
 * lexicographic member order. All decomposition and simulation entry points
 * operate on canonical instances.
 */
inline Instance canonicalize(const Instance& instance) {
    Instance out;
    out.stations = instance.stations;
    out.service_rates = instance.service_rates;
    out.weights = instance.weights;
    std::map<std::vector<int>, Rational> merged;
    for (const Neighbourhood& nb : instance.neighbourhoods) {
        std::vector<int> key = nb.members;
        std::sort(key.begin(), key.end());
        key.erase(std::unique(key.begin(), key.end()), key.end());
        merged[key] += nb.rate;
    }
    for (auto& [members, rate] : merged)
        if (rate > 0) out.neighbourhoods.push_back({members, rate});
    return out;
}

inline bool is_canonical(const Instance& instance) {
    for (const Neighbourhood& nb : instance.neighbourhoods) {
        if (nb.rate <= 0) return false;
        if (!std::is_sorted(nb.members.begin(), nb.members.end())) return false;
        if (std::adjacent_find(nb.members.begin(), nb.members.end()) != nb.members.end()) return false;
    }
    for (std::size_t i = 1; i < instance.neighbourhoods.size(); ++i)
        if (!(instance.neighbourhoods[i - 1].members < instance.neighbourhoods[i].members)) return false;
    return true;
}

/// Uniformization constant: the total event rate with every station busy.
inline Rational total_event_rate(const Instance& instance) {
    Rational alpha = 0;
    for (const Neighbourhood& nb : instance.neighbourhoods) alpha += nb.rate;
    for (const Rational& mu : instance.service_rates) alpha += mu;
    return alpha;
}

// ============================================================================
// Static policies
// ============================================================================

/// Checks shape, non-negativity, support inside members, exact row sums of 1.
inline std::vector<std::string> validate_policy(const Instance& instance, const StaticPolicy& policy) {
    std::vector<std::string> violations;
    if (policy.rows.size() != instance.neighbourhoods.size()) {
        violations.push_back("policy row count does not match neighbourhood count");
        return violations;
    }
    for (std::size_t i = 0; i < policy.rows.size(); ++i) {
        const auto& row = policy.rows[i];
        const std::string label = "policy row " + std::to_string(i + 1);
        if (row.size() != static_cast<std::size_t>(instance.stations)) {
            violations.push_back(label + " has the wrong number of stations");
            continue;
        }
        Rational sum = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] < 0) violations.push_back(label + " has a negative probability");
            if (row[j] > 0) {
                const auto& members = instance.neighbourhoods[i].members;
                if (!std::binary_search(members.begin(), members.end(), static_cast<int>(j)))
                    violations.push_back(label + " routes outside its neighbourhood");
            }
            sum += row[j];
        }
        if (sum != 1) violations.push_back(label + " does not sum to 1");
    }
    return violations;
}

/**
 * Mean drift of every station under a static policy:
 *   V(j) = sum_i rate_i * pi(i)_j - service_rate_j.
 * Throws std::invalid_argument on dimension mismatches.
 */
inline std::vector<Rational> static_drift(const Instance& instance, const StaticPolicy& policy) {
    if (policy.rows.size() != instance.neighbourhoods.size())
        throw std::invalid_argument("policy row count does not match neighbourhood count");
    std::vector<Rational> drift(static_cast<std::size_t>(instance.stations));
    for (int j = 0; j < instance.stations; ++j) drift[static_cast<std::size_t>(j)] = -instance.service_rates[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < policy.rows.size(); ++i) {
        if (policy.rows[i].size() != static_cast<std::size_t>(instance.stations))
            throw std::invalid_argument("policy row " + std::to_string(i + 1) + " has the wrong number of stations");
        for (int j = 0; j < instance.stations; ++j)
            drift[static_cast<std::size_t>(j)] += instance.neighbourhoods[i].rate * policy.rows[i][static_cast<std::size_t>(j)];
    }
    return drift;
}

/// Drift of a single station; the index is range-checked.
inline Rational static_drift(const Instance& instance, const StaticPolicy& policy, int station) {
    if (station < 0 || station >= instance.stations)
        throw std::invalid_argument("station index out of range");
    return static_drift(instance, policy)[static_cast<std::size_t>(station)];
}

/**
 * Bipartite support graph of a policy: edges (neighbourhood, station) where a
 * positive-rate stream routes positive probability. The policy must validate.
 */
inline std::vector<std::pair<int, int>> policy_graph(const Instance& instance, const StaticPolicy& policy) {
    const auto violations = validate_policy(instance, policy);
    if (!violations.empty()) throw std::invalid_argument("invalid policy: " + violations.front());
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < policy.rows.size(); ++i) {
        if (instance.neighbourhoods[i].rate <= 0) continue;
        for (int j = 0; j < instance.stations; ++j)
            if (policy.rows[i][static_cast<std::size_t>(j)] > 0) edges.emplace_back(static_cast<int>(i), j);
    }
    return edges;
}

}  // namespace jlw

#endif  // JLW_MODEL_HPP
