#ifndef JLW_DECOMPOSE_HPP
#define JLW_DECOMPOSE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "jlw/lp.hpp"
#include "jlw/model.hpp"
#include "jlw/rational.hpp"

namespace jlw {

// ============================================================================
// Reduction onto a retained station set
// ============================================================================

/**
 * The system seen by a retained set D: arrival streams are intersected with
 * D, empty intersections are dropped, identical intersections are merged with
 * summed rates. Stations keep their original indices.
 */
struct ReducedSystem {
    Instance base;                          // canonical source instance
    Cluster retained;                       // D, sorted
    std::vector<Neighbourhood> streams;     // merged streams, members inside D, lex order
};

inline ReducedSystem reduce(const Instance& instance, const Cluster& retained) {
    Instance canon = canonicalize(instance);
    Cluster d = retained;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (int j : d)
        if (j < 0 || j >= canon.stations) throw std::invalid_argument("retained set references a station out of range");
    std::map<std::vector<int>, Rational> merged;
    for (const Neighbourhood& nb : canon.neighbourhoods) {
        std::vector<int> inside;
        std::set_intersection(nb.members.begin(), nb.members.end(), d.begin(), d.end(), std::back_inserter(inside));
        if (!inside.empty()) merged[inside] += nb.rate;
    }
    ReducedSystem out;
    out.base = std::move(canon);
    out.retained = std::move(d);
    for (auto& [members, rate] : merged) out.streams.push_back({members, rate});
    return out;
}

namespace detail {

inline bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline void require_inside_retained(const ReducedSystem& reduced, const Cluster& cluster) {
    if (cluster.empty()) throw std::invalid_argument("cluster must be non-empty");
    if (!std::is_sorted(cluster.begin(), cluster.end())) throw std::invalid_argument("cluster must be sorted");
    if (!subset_of(cluster, reduced.retained)) throw std::invalid_argument("cluster is not inside the retained set");
}

}  // namespace detail

// ============================================================================
// Per-subset drift scores
// ============================================================================

/**
 * Average-drift score of C inside the reduced system: every merged stream
 * supported inside C is sent to its least-weight member, and the weighted
 * drift total is averaged over |C|.
 */
inline Rational restricted_drift(const ReducedSystem& reduced, const Cluster& cluster) {
    detail::require_inside_retained(reduced, cluster);
    Rational total = 0;
    for (const Neighbourhood& s : reduced.streams) {
        if (!detail::subset_of(s.members, cluster)) continue;
        Rational min_w = reduced.base.weights[static_cast<std::size_t>(s.members.front())];
        for (int j : s.members) min_w = std::min(min_w, reduced.base.weights[static_cast<std::size_t>(j)]);
        total += s.rate * min_w;
    }
    for (int j : cluster) total -= reduced.base.weights[static_cast<std::size_t>(j)] * reduced.base.service_rates[static_cast<std::size_t>(j)];
    return total / Rational(static_cast<int>(cluster.size()));
}

/**
 * Equalized-drift score of C inside the reduced system: the level at which
 * every weighted drift in C can sit when the streams inside C are shared out,
 * by conservation of arrival mass:
 *   (inflow(C) - sum_C service) / sum_C 1/w.
 */
inline Rational harmonic_drift(const ReducedSystem& reduced, const Cluster& cluster) {
    detail::require_inside_retained(reduced, cluster);
    Rational inflow = 0;
    for (const Neighbourhood& s : reduced.streams)
        if (detail::subset_of(s.members, cluster)) inflow += s.rate;
    Rational inverse_weight = 0;
    for (int j : cluster) {
        inflow -= reduced.base.service_rates[static_cast<std::size_t>(j)];
        inverse_weight += Rational(1) / reduced.base.weights[static_cast<std::size_t>(j)];
    }
    return inflow / inverse_weight;
}

// ============================================================================
// Minimax level and pinned cluster, by exact linear programming
// ============================================================================

/// Equality requirement "every station of `cluster` holds weighted drift `value`".
struct DriftConstraint {
    Cluster cluster;
    Rational value;
};

namespace detail {

/// Variable layout for routing LPs: one column per (stream, member) pair.
struct RoutingVars {
    std::vector<int> offset;  // per stream
    int total = 0;
};

inline RoutingVars layout(const std::vector<Neighbourhood>& streams) {
    RoutingVars v;
    v.offset.reserve(streams.size());
    for (const Neighbourhood& s : streams) {
        v.offset.push_back(v.total);
        v.total += static_cast<int>(s.members.size());
    }
    return v;
}

/// Adds rate_s * w_j * p_{s,j} coefficients of station j into `coeffs`.
inline void add_weighted_inflow(std::vector<Rational>& coeffs, const std::vector<Neighbourhood>& streams,
                                const RoutingVars& vars, const std::vector<Rational>& weights, int station) {
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& members = streams[s].members;
        for (std::size_t m = 0; m < members.size(); ++m)
            if (members[m] == station)
                coeffs[static_cast<std::size_t>(vars.offset[s]) + m] += streams[s].rate * weights[static_cast<std::size_t>(station)];
    }
}

inline void add_simplex_rows(LinearProgram& lp, const std::vector<Neighbourhood>& streams, const RoutingVars& vars) {
    for (std::size_t s = 0; s < streams.size(); ++s) {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(lp.vars), Rational(0));
        for (std::size_t m = 0; m < streams[s].members.size(); ++m)
            row.coeffs[static_cast<std::size_t>(vars.offset[s]) + m] = 1;
        row.relation = Relation::equal;
        row.rhs = 1;
        lp.rows.push_back(std::move(row));
    }
}

inline Cluster unconstrained_stations(const ReducedSystem& reduced, const std::vector<DriftConstraint>& constraints) {
    Cluster held;
    for (const DriftConstraint& c : constraints) {
        require_inside_retained(reduced, c.cluster);
        held.insert(held.end(), c.cluster.begin(), c.cluster.end());
    }
    std::sort(held.begin(), held.end());
    if (std::adjacent_find(held.begin(), held.end()) != held.end())
        throw std::invalid_argument("constrained clusters must be disjoint");
    Cluster free;
    std::set_difference(reduced.retained.begin(), reduced.retained.end(), held.begin(), held.end(),
                        std::back_inserter(free));
    return free;
}

/// Common constraint block: simplex rows plus the pinned-level equalities.
inline LinearProgram base_program(const ReducedSystem& reduced, const RoutingVars& vars,
                                  const std::vector<DriftConstraint>& constraints, int extra_vars) {
    LinearProgram lp;
    lp.vars = vars.total + extra_vars;
    lp.objective.assign(static_cast<std::size_t>(lp.vars), Rational(0));
    add_simplex_rows(lp, reduced.streams, vars);
    const auto& w = reduced.base.weights;
    const auto& mu = reduced.base.service_rates;
    for (const DriftConstraint& c : constraints)
        for (int j : c.cluster) {
            LinearProgram::Row row;
            row.coeffs.assign(static_cast<std::size_t>(lp.vars), Rational(0));
            add_weighted_inflow(row.coeffs, reduced.streams, vars, w, j);
            row.relation = Relation::equal;
            row.rhs = c.value + w[static_cast<std::size_t>(j)] * mu[static_cast<std::size_t>(j)];
            lp.rows.push_back(std::move(row));
        }
    return lp;
}

}  // namespace detail

/**
 * Least achievable maximum weighted drift over the unconstrained stations of
 * the reduced system, among routings that hold every constrained cluster at
 * its recorded level. Throws std::invalid_argument when no station is left
 * unconstrained; throws std::runtime_error if the constraints are infeasible.
 */
inline Rational minimax_value(const ReducedSystem& reduced, const std::vector<DriftConstraint>& constraints) {
    const Cluster free = detail::unconstrained_stations(reduced, constraints);
    if (free.empty()) throw std::invalid_argument("no unconstrained station");
    const auto vars = detail::layout(reduced.streams);
    LinearProgram lp = detail::base_program(reduced, vars, constraints, 2);
    const int t_pos = vars.total, t_neg = vars.total + 1;
    lp.objective[static_cast<std::size_t>(t_pos)] = 1;
    lp.objective[static_cast<std::size_t>(t_neg)] = -1;
    const auto& w = reduced.base.weights;
    const auto& mu = reduced.base.service_rates;
    for (int j : free) {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(lp.vars), Rational(0));
        detail::add_weighted_inflow(row.coeffs, reduced.streams, vars, w, j);
        row.coeffs[static_cast<std::size_t>(t_pos)] = -1;
        row.coeffs[static_cast<std::size_t>(t_neg)] = 1;
        row.relation = Relation::less_equal;
        row.rhs = w[static_cast<std::size_t>(j)] * mu[static_cast<std::size_t>(j)];
        lp.rows.push_back(std::move(row));
    }
    const LpSolution solution = solve(lp);
    if (solution.status != LpStatus::optimal)
        throw std::runtime_error("minimax level program is not solvable under the given constraints");
    return solution.value;
}

/**
 * Stations that every level-optimal routing holds exactly at `level`: station
 * j is pinned when minimizing its own weighted drift subject to "no
 * unconstrained station exceeds `level`" still yields `level`. Exact.
 */
inline Cluster pin_cluster(const ReducedSystem& reduced, const std::vector<DriftConstraint>& constraints,
                           const Rational& level) {
    const Cluster free = detail::unconstrained_stations(reduced, constraints);
    const auto vars = detail::layout(reduced.streams);
    const auto& w = reduced.base.weights;
    const auto& mu = reduced.base.service_rates;
    LinearProgram base = detail::base_program(reduced, vars, constraints, 0);
    for (int j : free) {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(base.vars), Rational(0));
        detail::add_weighted_inflow(row.coeffs, reduced.streams, vars, w, j);
        row.relation = Relation::less_equal;
        row.rhs = level + w[static_cast<std::size_t>(j)] * mu[static_cast<std::size_t>(j)];
        base.rows.push_back(std::move(row));
    }
    Cluster pinned;
    for (int j : free) {
        LinearProgram lp = base;
        lp.objective.assign(static_cast<std::size_t>(lp.vars), Rational(0));
        detail::add_weighted_inflow(lp.objective, reduced.streams, vars, w, j);
        const LpSolution solution = solve(lp);
        if (solution.status != LpStatus::optimal)
            throw std::runtime_error("pinning program is not solvable under the given constraints");
        const Rational least = solution.value - w[static_cast<std::size_t>(j)] * mu[static_cast<std::size_t>(j)];
        if (least == level) pinned.push_back(j);
    }
    return pinned;
}

// ============================================================================
// Hierarchical decomposition
// ============================================================================

/**
 * Full hierarchy: disjoint clusters covering every station, strictly
 * decreasing equalized drift levels, and a witness routing that realizes all
 * levels simultaneously. Witness rows follow canonical neighbourhood order.
 */
struct Decomposition {
    std::vector<Cluster> clusters;
    std::vector<Rational> values;
    StaticPolicy witness;
};

inline StaticPolicy synthesize_witness(const Instance& instance, const std::vector<Cluster>& clusters,
                                       const std::vector<Rational>& values);

namespace detail {

inline Instance canonical_valid(const Instance& instance) {
    Instance canon = canonicalize(instance);
    const auto violations = validate(canon);
    if (!violations.empty()) throw std::invalid_argument("invalid instance: " + violations.front());
    return canon;
}

inline Cluster all_stations(const Instance& instance) {
    Cluster all(static_cast<std::size_t>(instance.stations));
    std::iota(all.begin(), all.end(), 0);
    return all;
}

}  // namespace detail

/**
 * Iterated minimax construction: level, pinned cluster, remove, repeat. The
 * equality constraints of earlier stages stay in force, so each stage
 * optimizes only over routings that hold the finished clusters at their
 * levels.
 */
inline Decomposition decompose(const Instance& instance) {
    const Instance canon = detail::canonical_valid(instance);
    const ReducedSystem reduced = reduce(canon, detail::all_stations(canon));
    std::vector<DriftConstraint> constraints;
    Decomposition out;
    Cluster remaining = reduced.retained;
    while (!remaining.empty()) {
        const Rational level = minimax_value(reduced, constraints);
        const Cluster cluster = pin_cluster(reduced, constraints, level);
        if (cluster.empty()) throw std::logic_error("stage pinned no station");
        if (!out.values.empty() && !(level < out.values.back()))
            throw std::logic_error("stage levels must strictly decrease");
        Cluster rest;
        std::set_difference(remaining.begin(), remaining.end(), cluster.begin(), cluster.end(),
                            std::back_inserter(rest));
        remaining = std::move(rest);
        constraints.push_back({cluster, level});
        out.clusters.push_back(constraints.back().cluster);
        out.values.push_back(level);
    }
    out.witness = synthesize_witness(canon, out.clusters, out.values);
    return out;
}

/**
 * Independent construction by exhaustive search: each stage scores every
 * non-empty subset of the remaining stations with harmonic_drift on the
 * stage's reduction and takes the union of the maximizers. The union is
 * verified to attain the maximum (it must; violation is reported as a logic
 * error). Limited to 20 stations.
 */
inline Decomposition brute_force_decompose(const Instance& instance) {
    const Instance canon = detail::canonical_valid(instance);
    if (canon.stations > 20)
        throw std::invalid_argument("instance too large for exhaustive decomposition (limit 20 stations)");
    Decomposition out;
    Cluster remaining = detail::all_stations(canon);
    while (!remaining.empty()) {
        const ReducedSystem reduced = reduce(canon, remaining);
        const int d = static_cast<int>(remaining.size());
        // Bitmask positions index into `remaining`; streams become masks.
        std::vector<std::uint32_t> stream_mask(reduced.streams.size(), 0);
        std::vector<int> position(static_cast<std::size_t>(canon.stations), -1);
        for (int p = 0; p < d; ++p) position[static_cast<std::size_t>(remaining[static_cast<std::size_t>(p)])] = p;
        for (std::size_t s = 0; s < reduced.streams.size(); ++s)
            for (int j : reduced.streams[s].members)
                stream_mask[s] |= std::uint32_t{1} << position[static_cast<std::size_t>(j)];
        bool have_best = false;
        Rational best;
        std::uint32_t best_union = 0;
        for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << d); ++mask) {
            Rational inflow = 0;
            for (std::size_t s = 0; s < reduced.streams.size(); ++s)
                if ((stream_mask[s] & ~mask) == 0) inflow += reduced.streams[s].rate;
            Rational inverse_weight = 0;
            for (int p = 0; p < d; ++p)
                if (mask & (std::uint32_t{1} << p)) {
                    const auto j = static_cast<std::size_t>(remaining[static_cast<std::size_t>(p)]);
                    inflow -= canon.service_rates[j];
                    inverse_weight += Rational(1) / canon.weights[j];
                }
            const Rational score = inflow / inverse_weight;
            if (!have_best || score > best) {
                have_best = true;
                best = score;
                best_union = mask;
            } else if (score == best) {
                best_union |= mask;
            }
        }
        Cluster cluster;
        for (int p = 0; p < d; ++p)
            if (best_union & (std::uint32_t{1} << p)) cluster.push_back(remaining[static_cast<std::size_t>(p)]);
        if (harmonic_drift(reduced, cluster) != best)
            throw std::logic_error("union of stage maximizers fails to attain the stage maximum");
        if (!out.values.empty() && !(best < out.values.back()))
            throw std::logic_error("stage levels must strictly decrease");
        Cluster rest;
        std::set_difference(remaining.begin(), remaining.end(), cluster.begin(), cluster.end(),
                            std::back_inserter(rest));
        remaining = std::move(rest);
        out.clusters.push_back(std::move(cluster));
        out.values.push_back(best);
    }
    out.witness = synthesize_witness(canon, out.clusters, out.values);
    return out;
}

// ============================================================================
// Witness synthesis and bonded sub-clusters
// ============================================================================

namespace detail {

/// Stage data for one cluster: the streams committed to it and their sources.
struct Tier {
    std::vector<Neighbourhood> streams;          // merged, members inside the cluster
    std::vector<std::vector<int>> sources;       // canonical neighbourhood indices per stream
};

/**
 * Assigns every canonical neighbourhood to the first stage whose cluster
 * absorbs what remains of it, then merges per stage. A neighbourhood's mass
 * is confined to that stage's cluster; this is forced by the level equalities
 * and fixes the block structure of every level-faithful routing.
 */
inline std::vector<Tier> build_tiers(const Instance& canon, const std::vector<Cluster>& clusters) {
    std::vector<Cluster> suffix(clusters.size());  // suffix[k] = union of clusters k..K-1
    Cluster acc;
    for (std::size_t k = clusters.size(); k-- > 0;) {
        Cluster merged;
        std::set_union(acc.begin(), acc.end(), clusters[k].begin(), clusters[k].end(), std::back_inserter(merged));
        acc = std::move(merged);
        suffix[k] = acc;
    }
    std::vector<Tier> tiers(clusters.size());
    for (std::size_t i = 0; i < canon.neighbourhoods.size(); ++i) {
        const auto& members = canon.neighbourhoods[i].members;
        bool placed = false;
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            std::vector<int> inside;
            std::set_intersection(members.begin(), members.end(), suffix[k].begin(), suffix[k].end(),
                                  std::back_inserter(inside));
            if (inside.empty() || !subset_of(inside, clusters[k])) continue;
            Tier& tier = tiers[k];
            auto it = std::find_if(tier.streams.begin(), tier.streams.end(),
                                   [&inside](const Neighbourhood& s) { return s.members == inside; });
            if (it == tier.streams.end()) {
                tier.streams.push_back({inside, canon.neighbourhoods[i].rate});
                tier.sources.push_back({static_cast<int>(i)});
            } else {
                it->rate += canon.neighbourhoods[i].rate;
                tier.sources[static_cast<std::size_t>(it - tier.streams.begin())].push_back(static_cast<int>(i));
            }
            placed = true;
            break;
        }
        if (!placed) throw std::invalid_argument("clusters do not absorb every neighbourhood");
    }
    for (Tier& tier : tiers) {
        // lex order of merged members, for deterministic programs
        std::vector<std::size_t> order(tier.streams.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&tier](std::size_t a, std::size_t b) {
            return tier.streams[a].members < tier.streams[b].members;
        });
        Tier sorted;
        for (std::size_t idx : order) {
            sorted.streams.push_back(std::move(tier.streams[idx]));
            sorted.sources.push_back(std::move(tier.sources[idx]));
        }
        tier = std::move(sorted);
    }
    return tiers;
}

/// Equality block of one stage: stream rows sum to 1, every cluster station
/// sits exactly at the stage level.
inline LinearProgram tier_program(const Instance& canon, const Tier& tier, const Cluster& cluster,
                                  const Rational& level, const RoutingVars& vars) {
    LinearProgram lp;
    lp.vars = vars.total;
    lp.objective.assign(static_cast<std::size_t>(lp.vars), Rational(0));
    add_simplex_rows(lp, tier.streams, vars);
    for (int j : cluster) {
        LinearProgram::Row row;
        row.coeffs.assign(static_cast<std::size_t>(lp.vars), Rational(0));
        add_weighted_inflow(row.coeffs, tier.streams, vars, canon.weights, j);
        row.relation = Relation::equal;
        row.rhs = level + canon.weights[static_cast<std::size_t>(j)] * canon.service_rates[static_cast<std::size_t>(j)];
        lp.rows.push_back(std::move(row));
    }
    return lp;
}

inline void check_partition(const Instance& canon, const std::vector<Cluster>& clusters,
                            const std::vector<Rational>& values) {
    if (clusters.size() != values.size()) throw std::invalid_argument("cluster and value counts differ");
    if (clusters.empty()) throw std::invalid_argument("no clusters");
    std::vector<int> seen;
    for (const Cluster& c : clusters) {
        if (c.empty() || !std::is_sorted(c.begin(), c.end())) throw std::invalid_argument("clusters must be sorted and non-empty");
        seen.insert(seen.end(), c.begin(), c.end());
    }
    std::sort(seen.begin(), seen.end());
    if (seen != all_stations(canon)) throw std::invalid_argument("clusters must partition the stations");
}

}  // namespace detail

/**
 * A routing that holds every station of cluster k exactly at level k, for all
 * k at once. Stream mass descends to the first cluster that absorbs it; the
 * within-cluster split is the deterministic vertex of an exact feasibility
 * program. Throws std::runtime_error if no routing exists (cannot happen for
 * decompose output).
 */
inline StaticPolicy synthesize_witness(const Instance& instance, const std::vector<Cluster>& clusters,
                                       const std::vector<Rational>& values) {
    const Instance canon = detail::canonical_valid(instance);
    detail::check_partition(canon, clusters, values);
    const auto tiers = detail::build_tiers(canon, clusters);
    StaticPolicy policy;
    policy.rows.assign(canon.neighbourhoods.size(),
                       std::vector<Rational>(static_cast<std::size_t>(canon.stations), Rational(0)));
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const detail::Tier& tier = tiers[k];
        const auto vars = detail::layout(tier.streams);
        LinearProgram lp = detail::tier_program(canon, tier, clusters[k], values[k], vars);
        const LpSolution solution = solve(lp);
        if (solution.status != LpStatus::optimal)
            throw std::runtime_error("no feasible witness at level " + format_rational(values[k]));
        for (std::size_t s = 0; s < tier.streams.size(); ++s)
            for (std::size_t m = 0; m < tier.streams[s].members.size(); ++m) {
                const Rational& p = solution.x[static_cast<std::size_t>(vars.offset[s]) + m];
                for (int source : tier.sources[s])
                    policy.rows[static_cast<std::size_t>(source)][static_cast<std::size_t>(tier.streams[s].members[m])] = p;
            }
    }
    return policy;
}

/**
 * Maximal groups of stations, inside each cluster, that some level-faithful
 * routing ties together through shared streams. An edge (stream, station) is
 * kept when its routing probability can be made positive subject to the
 * stage's level equalities; since the feasible set is convex, one routing
 * realizes every kept edge at once, and connectivity through kept edges is
 * exactly the bonded relation.
 */
inline std::vector<std::vector<Cluster>> bonded_components(const Instance& instance,
                                                           const Decomposition& decomposition) {
    const Instance canon = detail::canonical_valid(instance);
    detail::check_partition(canon, decomposition.clusters, decomposition.values);
    const auto tiers = detail::build_tiers(canon, decomposition.clusters);
    std::vector<std::vector<Cluster>> out;
    for (std::size_t k = 0; k < decomposition.clusters.size(); ++k) {
        const Cluster& cluster = decomposition.clusters[k];
        const detail::Tier& tier = tiers[k];
        const auto vars = detail::layout(tier.streams);
        const LinearProgram base = detail::tier_program(canon, tier, cluster, decomposition.values[k], vars);
        // parent pointers over the cluster's stations
        std::vector<int> parent(cluster.size());
        std::iota(parent.begin(), parent.end(), 0);
        const auto find = [&parent](int a) {
            while (parent[static_cast<std::size_t>(a)] != a) {
                parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                a = parent[static_cast<std::size_t>(a)];
            }
            return a;
        };
        const auto station_slot = [&cluster](int j) {
            return static_cast<int>(std::lower_bound(cluster.begin(), cluster.end(), j) - cluster.begin());
        };
        for (std::size_t s = 0; s < tier.streams.size(); ++s) {
            int hook = -1;
            for (std::size_t m = 0; m < tier.streams[s].members.size(); ++m) {
                LinearProgram lp = base;
                lp.objective[static_cast<std::size_t>(vars.offset[s]) + m] = -1;  // maximize the edge
                const LpSolution solution = solve(lp);
                if (solution.status != LpStatus::optimal)
                    throw std::runtime_error("bonded-edge program is not solvable");
                if (solution.value < 0) {  // edge can carry mass
                    const int slot = station_slot(tier.streams[s].members[m]);
                    if (hook < 0)
                        hook = slot;
                    else
                        parent[static_cast<std::size_t>(find(slot))] = find(hook);
                }
            }
        }
        std::map<int, Cluster> groups;
        for (std::size_t p = 0; p < cluster.size(); ++p) groups[find(static_cast<int>(p))].push_back(cluster[p]);
        std::vector<Cluster> components;
        for (auto& [root, stations] : groups) components.push_back(std::move(stations));
        std::sort(components.begin(), components.end());
        out.push_back(std::move(components));
    }
    return out;
}

}  // namespace jlw

#endif  // JLW_DECOMPOSE_HPP
