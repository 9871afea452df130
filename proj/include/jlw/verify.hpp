#ifndef JLW_VERIFY_HPP
#define JLW_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jlw/decompose.hpp"
#include "jlw/model.hpp"
#include "jlw/random.hpp"
#include "jlw/rational.hpp"
#include "jlw/simulate.hpp"

namespace jlw {

// ============================================================================
// Verdicts
// ============================================================================

/**
 * Outcome of one verification experiment. Every check reduces to the single
 * comparison `pass == (statistic <= threshold)`; the raw per-replica numbers
 * land in `details` so thresholds can be re-tuned without re-simulation.
 * Verdicts are reproducible bit-for-bit from (instance, seed, parameters).
 */
struct Verdict {
    std::string experiment;
    std::string claim;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    int replicas = 0;
    nlohmann::json details;
};

namespace detail {

/// Sentinel statistic for structural failures (insufficient data, wrong
/// direction of growth); large but finite so reports stay valid JSON.
inline constexpr double kFailSentinel = 1e9;

inline Verdict finish(Verdict v) {
    v.pass = v.statistic <= v.threshold;
    return v;
}

/// Common integer factor L with scaled weight s_j = L * w_j.
inline std::int64_t weight_scale(const Instance& inst, const std::vector<std::int64_t>& scaled) {
    const Rational unit = Rational(scaled.front()) / inst.weights.front();
    return round_to_int64(unit);
}

inline std::vector<int> station_cluster(const Instance& inst, const std::vector<Cluster>& clusters) {
    std::vector<int> of(static_cast<std::size_t>(inst.stations), -1);
    for (std::size_t k = 0; k < clusters.size(); ++k)
        for (int j : clusters[k]) of[static_cast<std::size_t>(j)] = static_cast<int>(k);
    return of;
}

/// Fast strict cluster ordering via the integer-rescaled weights.
inline bool clustered_scaled(const std::vector<std::int64_t>& state, const std::vector<Cluster>& clusters,
                             const std::vector<std::int64_t>& scaled) {
    for (std::size_t k = 0; k + 1 < clusters.size(); ++k) {
        std::int64_t low = std::numeric_limits<std::int64_t>::max();
        for (int j : clusters[k])
            low = std::min(low, scaled[static_cast<std::size_t>(j)] * state[static_cast<std::size_t>(j)]);
        std::int64_t high = std::numeric_limits<std::int64_t>::min();
        for (int j : clusters[k + 1])
            high = std::max(high, scaled[static_cast<std::size_t>(j)] * state[static_cast<std::size_t>(j)]);
        if (low <= high) return false;
    }
    return true;
}

/// Runs one job per replica on its own thread and collects results in replica
/// order, so the aggregate never depends on scheduling.
template <typename Job>
auto per_replica(int replicas, Job job) {
    using Result = decltype(job(0));
    std::vector<std::future<Result>> futures;
    futures.reserve(static_cast<std::size_t>(replicas));
    for (int r = 0; r < replicas; ++r)
        futures.push_back(std::async(std::launch::async, job, r));
    std::vector<Result> out;
    out.reserve(static_cast<std::size_t>(replicas));
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

inline void require_positive_replicas(int replicas) {
    if (replicas <= 0) throw std::invalid_argument("replica count must be positive");
}

}  // namespace detail

// ============================================================================
// Cross-checked decomposition
// ============================================================================

/**
 * Decomposes via the level-by-level optimization and, when exhaustive search
 * is affordable, re-derives the result by subset enumeration. Disagreement is
 * a library bug and aborts with a diagnostic rather than letting dynamic
 * experiments consume a wrong hierarchy.
 */
inline Decomposition agreed_decomposition(const Instance& instance) {
    Decomposition dec = decompose(instance);
    const Instance canon = canonicalize(instance);
    if (canon.stations <= 16) {
        const Decomposition brute = brute_force_decompose(instance);
        if (dec.clusters != brute.clusters || dec.values != brute.values) {
            std::ostringstream oss;
            oss << "decomposition cross-check failed: optimization path found " << dec.clusters.size()
                << " clusters (";
            for (const Rational& v : dec.values) oss << " " << format_rational(v);
            oss << " ), enumeration found " << brute.clusters.size() << " clusters (";
            for (const Rational& v : brute.values) oss << " " << format_rational(v);
            oss << " )";
            throw std::runtime_error(oss.str());
        }
    }
    return dec;
}

// ============================================================================
// Speeds
// ============================================================================

/**
 * Long-run speed check for the unreflected walk under least-weighted routing
 * from the zero state: every station j in cluster k must satisfy
 * |w_j xi_j(n) * alpha / n - V_k| < n^(-epsilon) at the final step and at the
 * last ten sampled steps (each sample judged at its own step count). A
 * replica passes a station when all its sampled checks hold; the verdict
 * passes when every station passes in at least `min_passing` replicas
 * (default: all of them).
 */
inline Verdict check_speeds(const Instance& instance, const Decomposition& dec, std::uint64_t horizon,
                            double epsilon, int replicas, std::uint64_t seed, int min_passing = -1) {
    detail::require_positive_replicas(replicas);
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw std::invalid_argument("epsilon must lie strictly between 0 and 1/2");
    if (horizon == 0) throw std::invalid_argument("degenerate horizon: no steps");
    if (min_passing < 0) min_passing = replicas;
    if (min_passing > replicas) throw std::invalid_argument("min_passing exceeds replica count");
    const Instance canon = canonicalize(instance);
    const double tolerance_final = std::pow(static_cast<double>(horizon), -epsilon);
    for (std::size_t k = 0; k + 1 < dec.values.size(); ++k) {
        const double gap = to_double(dec.values[k] - dec.values[k + 1]);
        if (!(tolerance_final < gap / 2))
            throw std::invalid_argument(
                "degenerate horizon: tolerance does not separate adjacent cluster speeds");
    }
    const auto cluster_of = detail::station_cluster(canon, dec.clusters);
    std::vector<double> target(static_cast<std::size_t>(canon.stations));
    std::vector<double> weight(static_cast<std::size_t>(canon.stations));
    for (int j = 0; j < canon.stations; ++j) {
        target[static_cast<std::size_t>(j)] = to_double(dec.values[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(j)])]);
        weight[static_cast<std::size_t>(j)] = to_double(canon.weights[static_cast<std::size_t>(j)]);
    }

    struct ReplicaOutcome {
        std::vector<bool> station_ok;
        std::vector<double> final_speed;
    };
    const auto outcomes = detail::per_replica(replicas, [&](int r) {
        SimConfig cfg;
        cfg.instance = canon;
        cfg.kind = ProcessKind::walk;
        cfg.horizon = horizon;
        cfg.seed = SplitMix64::derive(seed, static_cast<std::uint64_t>(r));
        const Trajectory traj = run(cfg);
        ReplicaOutcome out;
        out.station_ok.assign(static_cast<std::size_t>(canon.stations), true);
        out.final_speed.assign(static_cast<std::size_t>(canon.stations), 0.0);
        const std::size_t samples = traj.steps.size();
        const std::size_t first = samples > 10 ? samples - 10 : 0;
        for (std::size_t s = first; s < samples; ++s) {
            const std::uint64_t n = traj.steps[s];
            if (n == 0) continue;
            const double tol = std::pow(static_cast<double>(n), -epsilon);
            for (int j = 0; j < canon.stations; ++j) {
                const double speed = weight[static_cast<std::size_t>(j)] *
                                     static_cast<double>(traj.states[s][static_cast<std::size_t>(j)]) *
                                     traj.alpha / static_cast<double>(n);
                if (s + 1 == samples) out.final_speed[static_cast<std::size_t>(j)] = speed;
                if (!(std::abs(speed - target[static_cast<std::size_t>(j)]) < tol))
                    out.station_ok[static_cast<std::size_t>(j)] = false;
            }
        }
        return out;
    });

    std::vector<int> passing(static_cast<std::size_t>(canon.stations), 0);
    for (const auto& out : outcomes)
        for (int j = 0; j < canon.stations; ++j)
            if (out.station_ok[static_cast<std::size_t>(j)]) passing[static_cast<std::size_t>(j)] += 1;
    int worst_failures = 0;
    for (int j = 0; j < canon.stations; ++j)
        worst_failures = std::max(worst_failures, replicas - passing[static_cast<std::size_t>(j)]);

    Verdict v;
    v.experiment = "speeds";
    v.claim = "weighted walk components travel at their cluster's drift rate";
    v.statistic = static_cast<double>(worst_failures);
    v.threshold = static_cast<double>(replicas - min_passing);
    v.seed = seed;
    v.replicas = replicas;
    v.details["criterion"] =
        "statistic = max over stations of failing replica count; threshold = allowed failures";
    v.details["horizon"] = horizon;
    v.details["epsilon"] = epsilon;
    v.details["final_tolerance"] = tolerance_final;
    v.details["min_passing"] = min_passing;
    v.details["targets"] = target;
    v.details["passing_replicas_by_station"] = passing;
    {
        nlohmann::json speeds = nlohmann::json::array();
        for (const auto& out : outcomes) speeds.push_back(out.final_speed);
        v.details["final_speeds"] = std::move(speeds);
    }
    return detail::finish(std::move(v));
}

// ============================================================================
// Separation
// ============================================================================

/**
 * Starts the walk anti-ordered (later clusters above earlier ones) and checks
 * that every sampled state in the final fifth of each replica is properly
 * clustered: the hierarchy asserts itself and then persists.
 */
inline Verdict check_separation(const Instance& instance, const Decomposition& dec, std::uint64_t horizon,
                                int replicas, std::uint64_t seed,
                                std::vector<std::int64_t> initial = {}) {
    detail::require_positive_replicas(replicas);
    if (dec.clusters.size() < 2)
        throw std::invalid_argument("separation requires at least two clusters");
    if (horizon == 0) throw std::invalid_argument("degenerate horizon: no steps");
    const Instance canon = canonicalize(instance);
    const auto cluster_of = detail::station_cluster(canon, dec.clusters);
    if (initial.empty()) {
        initial.resize(static_cast<std::size_t>(canon.stations));
        for (int j = 0; j < canon.stations; ++j) {
            const int level = cluster_of[static_cast<std::size_t>(j)] + 1;
            initial[static_cast<std::size_t>(j)] =
                round_to_int64(Rational(10 * level) / canon.weights[static_cast<std::size_t>(j)]);
        }
    }

    struct ReplicaOutcome {
        double miss_fraction = 0.0;
        std::uint64_t settled_step = 0;
    };
    const std::uint64_t tail_start = horizon - horizon / 5;
    const auto outcomes = detail::per_replica(replicas, [&](int r) {
        SimConfig cfg;
        cfg.instance = canon;
        cfg.kind = ProcessKind::walk;
        cfg.initial = initial;
        cfg.horizon = horizon;
        cfg.seed = SplitMix64::derive(seed, static_cast<std::uint64_t>(r));
        const Trajectory traj = run(cfg);
        ReplicaOutcome out;
        std::uint64_t tail_total = 0, tail_missed = 0;
        std::uint64_t settled = 0;
        bool settled_known = false;
        for (std::size_t s = traj.steps.size(); s-- > 0;) {
            const bool ok = properly_clustered(traj.states[s], dec.clusters, canon.weights);
            if (!settled_known && !ok) {
                settled = s + 1 < traj.steps.size() ? traj.steps[s + 1] : traj.steps[s];
                settled_known = true;
            }
            if (traj.steps[s] >= tail_start) {
                tail_total += 1;
                if (!ok) tail_missed += 1;
            }
        }
        out.miss_fraction =
            tail_total == 0 ? 1.0 : static_cast<double>(tail_missed) / static_cast<double>(tail_total);
        out.settled_step = settled;
        return out;
    });

    double worst = 0.0;
    for (const auto& out : outcomes) worst = std::max(worst, out.miss_fraction);
    Verdict v;
    v.experiment = "separation";
    v.claim = "weighted occupancies order themselves by cluster and stay ordered";
    v.statistic = worst;
    v.threshold = 0.0;
    v.seed = seed;
    v.replicas = replicas;
    v.details["criterion"] =
        "statistic = max over replicas of the fraction of final-fifth samples not properly clustered";
    v.details["horizon"] = horizon;
    v.details["initial"] = initial;
    {
        nlohmann::json misses = nlohmann::json::array(), settled = nlohmann::json::array();
        for (const auto& out : outcomes) {
            misses.push_back(out.miss_fraction);
            settled.push_back(out.settled_step);
        }
        v.details["miss_fractions"] = std::move(misses);
        v.details["first_step_always_clustered_after"] = std::move(settled);
    }
    return detail::finish(std::move(v));
}

// ============================================================================
// Shape recurrence
// ============================================================================

namespace detail {

struct ShapeTarget {
    Cluster members;
    bool tight = false;  // bonded component of size >= 2; else diffusive control
    std::string label;
};

/// Per-target, per-replica tracking of the spread statistic
/// D(n) = max_{j,l} |w_j x_j - w_l x_l| (kept in integer-rescaled units).
struct ShapeTracker {
    // tight mode
    std::uint64_t outside_since = 0;
    bool outside = false;
    std::vector<std::uint64_t> returns_first, returns_last;
    std::uint64_t above_radius_first = 0, above_radius_last = 0;
    std::uint64_t above_double = 0, above_quad = 0;
    // diffusive mode
    std::vector<double> checkpoint_spread;
};

inline std::int64_t spread_of(const std::vector<std::int64_t>& state, const Cluster& members,
                              const std::vector<std::int64_t>& scaled) {
    std::int64_t low = std::numeric_limits<std::int64_t>::max();
    std::int64_t high = std::numeric_limits<std::int64_t>::min();
    for (int j : members) {
        const std::int64_t v = scaled[static_cast<std::size_t>(j)] * state[static_cast<std::size_t>(j)];
        low = std::min(low, v);
        high = std::max(high, v);
    }
    return high - low;
}

inline double mean_of(const std::vector<std::uint64_t>& xs) {
    if (xs.empty()) return 0.0;
    double total = 0.0;
    for (std::uint64_t x : xs) total += static_cast<double>(x);
    return total / static_cast<double>(xs.size());
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

}  // namespace detail

/**
 * Shape recurrence within clusters. Bonded components with two or more
 * stations must look tight: excursions of the weighted spread above the
 * radius end quickly (mean return time stable between trajectory halves, at
 * least ten completed excursions per half) and the fraction of time above the
 * radius does not grow between halves. Multi-station clusters whose bonded
 * components are all singletons are the diffusive control: their mean spread
 * must grow like sqrt(n) (log-log slope within 0.35..0.65). All per-target
 * conditions are folded into one normalized statistic with threshold 1.
 */
inline Verdict check_shape_recurrence(const Instance& instance, const Decomposition& dec,
                                      const std::vector<std::vector<Cluster>>& bonds, std::uint64_t horizon,
                                      std::int64_t radius, int replicas, std::uint64_t seed) {
    detail::require_positive_replicas(replicas);
    if (radius <= 0) throw std::invalid_argument("radius must be positive");
    if (horizon < 2) throw std::invalid_argument("degenerate horizon: no steps");
    const Instance canon = canonicalize(instance);
    if (bonds.size() != dec.clusters.size())
        throw std::invalid_argument("bonded components do not match the decomposition");

    std::vector<detail::ShapeTarget> targets;
    for (std::size_t k = 0; k < dec.clusters.size(); ++k) {
        bool all_singletons = true;
        for (const Cluster& comp : bonds[k])
            if (comp.size() >= 2) {
                detail::ShapeTarget t;
                t.members = comp;
                t.tight = true;
                std::ostringstream label;
                label << "bonded component {";
                for (std::size_t m = 0; m < comp.size(); ++m)
                    label << (m ? "," : "") << comp[m] + 1;
                label << "} of cluster " << k + 1;
                t.label = label.str();
                targets.push_back(std::move(t));
                all_singletons = false;
            }
        if (all_singletons && dec.clusters[k].size() >= 2) {
            detail::ShapeTarget t;
            t.members = dec.clusters[k];
            t.tight = false;
            std::ostringstream label;
            label << "unbonded cluster " << k + 1;
            t.label = label.str();
            targets.push_back(std::move(t));
        }
    }
    if (targets.empty())
        throw std::invalid_argument("no qualifying component: every cluster is a single station");

    const auto scaled = scaled_integer_weights(canon.weights);
    const std::int64_t scale = detail::weight_scale(canon, scaled);
    const std::int64_t radius_scaled = radius * scale;

    // Geometric checkpoints horizon/2^7 .. horizon for the diffusive fit.
    std::vector<std::uint64_t> checkpoints;
    for (int m = 7; m >= 0; --m) {
        const std::uint64_t n = horizon >> m;
        if (n == 0) continue;
        if (checkpoints.empty() || checkpoints.back() != n) checkpoints.push_back(n);
    }

    const auto replica_trackers = detail::per_replica(replicas, [&](int r) {
        JumpProcess process(canon, ProcessKind::walk, std::nullopt);
        std::vector<std::int64_t> state(static_cast<std::size_t>(canon.stations), 0);
        SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(r)));
        std::vector<detail::ShapeTracker> trackers(targets.size());
        const std::uint64_t half = horizon / 2;
        std::size_t next_checkpoint = 0;
        for (std::uint64_t n = 1; n <= horizon; ++n) {
            process.step(state, rng);
            const bool record_checkpoint =
                next_checkpoint < checkpoints.size() && n == checkpoints[next_checkpoint];
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const std::int64_t spread = detail::spread_of(state, targets[t].members, scaled);
                detail::ShapeTracker& tr = trackers[t];
                if (targets[t].tight) {
                    const bool second_half = n > half;
                    if (spread > radius_scaled) {
                        (second_half ? tr.above_radius_last : tr.above_radius_first) += 1;
                        if (spread > 2 * radius_scaled) tr.above_double += 1;
                        if (spread > 4 * radius_scaled) tr.above_quad += 1;
                        if (!tr.outside) {
                            tr.outside = true;
                            tr.outside_since = n;
                        }
                    } else if (tr.outside) {
                        tr.outside = false;
                        (second_half ? tr.returns_last : tr.returns_first)
                            .push_back(n - tr.outside_since + 1);
                    }
                } else if (record_checkpoint) {
                    tr.checkpoint_spread.push_back(static_cast<double>(spread));
                }
            }
            if (record_checkpoint) next_checkpoint += 1;
        }
        return trackers;
    });

    Verdict v;
    v.experiment = "shape";
    v.claim = "bonded sub-clusters keep a tight shape; unbonded equal-speed clusters spread diffusively";
    v.threshold = 1.0;
    v.seed = seed;
    v.replicas = replicas;
    v.details["criterion"] =
        "statistic = max over targets of normalized shape conditions (return-time drift / 0.5, "
        "occupation-growth ratio, |slope - 0.5| / 0.15); threshold 1";
    v.details["horizon"] = horizon;
    v.details["radius"] = radius;
    nlohmann::json target_details = nlohmann::json::array();
    double statistic = 0.0;

    for (std::size_t t = 0; t < targets.size(); ++t) {
        nlohmann::json entry;
        entry["target"] = targets[t].label;
        entry["kind"] = targets[t].tight ? "tight" : "diffusive";
        double target_stat = 0.0;
        if (targets[t].tight) {
            nlohmann::json per_replica_json = nlohmann::json::array();
            const std::uint64_t half = horizon / 2;
            for (int r = 0; r < replicas; ++r) {
                const detail::ShapeTracker& tr = replica_trackers[static_cast<std::size_t>(r)][t];
                const double mean_first = detail::mean_of(tr.returns_first);
                const double mean_last = detail::mean_of(tr.returns_last);
                const double frac_first = static_cast<double>(tr.above_radius_first) / static_cast<double>(half);
                const double frac_last =
                    static_cast<double>(tr.above_radius_last) / static_cast<double>(horizon - half);
                double rep_stat = 0.0;
                if (tr.returns_first.size() < 10 || tr.returns_last.size() < 10)
                    rep_stat = detail::kFailSentinel;  // too few excursions to judge stability
                else
                    rep_stat = std::abs(mean_last / mean_first - 1.0) / 0.5;
                rep_stat = std::max(rep_stat, frac_last / (1.5 * frac_first + 0.02));
                const std::uint64_t above_radius = tr.above_radius_first + tr.above_radius_last;
                if (!(above_radius >= tr.above_double && tr.above_double >= tr.above_quad))
                    rep_stat = detail::kFailSentinel;
                nlohmann::json rj;
                rj["excursions_first_half"] = tr.returns_first.size();
                rj["excursions_last_half"] = tr.returns_last.size();
                rj["mean_return_first_half"] = mean_first;
                rj["mean_return_last_half"] = mean_last;
                rj["fraction_above_radius_first_half"] = frac_first;
                rj["fraction_above_radius_last_half"] = frac_last;
                rj["steps_above_radius"] = above_radius;
                rj["steps_above_twice_radius"] = tr.above_double;
                rj["steps_above_four_times_radius"] = tr.above_quad;
                per_replica_json.push_back(std::move(rj));
                target_stat = std::max(target_stat, rep_stat);
            }
            entry["per_replica"] = std::move(per_replica_json);
        } else {
            // Average the spread across replicas at each checkpoint, then fit.
            std::vector<double> xs, ys;
            for (std::size_t c = 0; c < checkpoints.size(); ++c) {
                double total = 0.0;
                bool complete = true;
                for (int r = 0; r < replicas; ++r) {
                    const auto& cp = replica_trackers[static_cast<std::size_t>(r)][t].checkpoint_spread;
                    if (c >= cp.size()) {
                        complete = false;
                        break;
                    }
                    total += cp[c];
                }
                if (!complete) continue;
                const double mean = total / static_cast<double>(replicas);
                if (mean > 0.0) {
                    xs.push_back(static_cast<double>(checkpoints[c]));
                    ys.push_back(mean);
                }
            }
            if (xs.size() < 4) {
                target_stat = detail::kFailSentinel;
                entry["note"] = "insufficient positive checkpoints for a growth fit";
            } else {
                const double slope = detail::log_log_slope(xs, ys);
                target_stat = std::abs(slope - 0.5) / 0.15;
                entry["growth_exponent"] = slope;
                entry["checkpoint_steps"] = xs;
                entry["checkpoint_mean_spread"] = ys;
            }
        }
        entry["normalized_statistic"] = target_stat;
        statistic = std::max(statistic, target_stat);
        target_details.push_back(std::move(entry));
    }
    v.statistic = statistic;
    v.details["targets"] = std::move(target_details);
    return detail::finish(std::move(v));
}

// ============================================================================
// Stability
// ============================================================================

/**
 * Stability proxies for the reflected queue under least-weighted routing from
 * the empty state. When the top drift rate is negative (simulation cannot
 * certify positive recurrence, so this is an explicit proxy): the total queue
 * must empty at least `min_returns` times per replica and the mean total
 * queue over the final half must sit within 25% of the mean over the second
 * quarter. When it is positive: the weighted total over the first cluster
 * must grow linearly, with per-step slope at least
 * |C_1| * V_1 / (2 * max weight * alpha) in every replica.
 */
inline Verdict check_stability(const Instance& instance, const Decomposition& dec, std::uint64_t horizon,
                               int replicas, std::uint64_t seed, std::uint64_t min_returns = 10) {
    detail::require_positive_replicas(replicas);
    if (horizon < 4) throw std::invalid_argument("degenerate horizon: no steps");
    const Rational v1 = dec.values.front();
    if (v1 == 0)
        throw std::invalid_argument("top drift rate is exactly zero: the critical case is out of scope");
    const Instance canon = canonicalize(instance);
    const bool stable_side = v1 < 0;
    const Cluster& top = dec.clusters.front();
    const auto scaled = scaled_integer_weights(canon.weights);
    const std::int64_t scale = detail::weight_scale(canon, scaled);

    Rational max_weight = canon.weights.front();
    for (const Rational& w : canon.weights)
        if (w > max_weight) max_weight = w;
    const Rational alpha = total_event_rate(canon);
    const double required_slope =
        stable_side ? 0.0
                    : to_double(Rational(static_cast<int>(top.size())) * v1 / (2 * max_weight * alpha));

    struct ReplicaOutcome {
        std::uint64_t returns = 0;
        double mean_q2 = 0.0, mean_final_half = 0.0;
        double slope = 0.0;  // per-step growth of the weighted top-cluster total
    };
    const auto outcomes = detail::per_replica(replicas, [&](int r) {
        JumpProcess process(canon, ProcessKind::queue, std::nullopt);
        std::vector<std::int64_t> state(static_cast<std::size_t>(canon.stations), 0);
        SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(r)));
        ReplicaOutcome out;
        std::int64_t total = 0;
        unsigned __int128 sum_q2 = 0, sum_final = 0;
        const std::uint64_t q2_begin = horizon / 4, half_begin = horizon / 2;
        for (std::uint64_t n = 1; n <= horizon; ++n) {
            const Event event = process.step(state, rng);
            if (event.kind == Event::Kind::arrival)
                total += 1;
            else if (event.kind == Event::Kind::departure) {
                total -= 1;
                if (total == 0) out.returns += 1;
            }
            if (n > q2_begin && n <= half_begin) sum_q2 += static_cast<unsigned __int128>(total);
            if (n > half_begin) sum_final += static_cast<unsigned __int128>(total);
        }
        out.mean_q2 = static_cast<double>(sum_q2) / static_cast<double>(half_begin - q2_begin);
        out.mean_final_half = static_cast<double>(sum_final) / static_cast<double>(horizon - half_begin);
        std::int64_t weighted_top = 0;
        for (int j : top)
            weighted_top += scaled[static_cast<std::size_t>(j)] * state[static_cast<std::size_t>(j)];
        out.slope = static_cast<double>(weighted_top) / static_cast<double>(scale) /
                    static_cast<double>(horizon);
        return out;
    });

    double statistic = 0.0;
    for (const auto& out : outcomes) {
        if (stable_side) {
            double rep_stat;
            if (out.returns < min_returns)
                rep_stat = detail::kFailSentinel;  // queue failed to empty repeatedly
            else if (out.mean_q2 <= 0.0)
                rep_stat = detail::kFailSentinel;
            else
                rep_stat = std::abs(out.mean_final_half / out.mean_q2 - 1.0) / 0.25;
            statistic = std::max(statistic, rep_stat);
        } else {
            const double rep_stat =
                out.slope > 0.0 ? required_slope / out.slope : detail::kFailSentinel;
            statistic = std::max(statistic, rep_stat);
        }
    }

    Verdict v;
    v.experiment = "stability";
    v.claim = stable_side
                  ? "negative top drift keeps the queue returning to empty with a settled mean"
                  : "positive top drift forces linear growth of the first cluster's weighted total";
    v.statistic = statistic;
    v.threshold = 1.0;
    v.seed = seed;
    v.replicas = replicas;
    v.details["criterion"] =
        stable_side
            ? "statistic = max over replicas of |final-half mean / second-quarter mean - 1| / 0.25, "
              "with a sentinel when the queue empties fewer than min_returns times"
            : "statistic = max over replicas of required slope / observed slope";
    v.details["horizon"] = horizon;
    v.details["top_drift_rate"] = format_rational(v1);
    if (stable_side) {
        v.details["min_returns"] = min_returns;
        nlohmann::json returns = nlohmann::json::array(), q2 = nlohmann::json::array(),
                       final_half = nlohmann::json::array();
        for (const auto& out : outcomes) {
            returns.push_back(out.returns);
            q2.push_back(out.mean_q2);
            final_half.push_back(out.mean_final_half);
        }
        v.details["returns_to_empty"] = std::move(returns);
        v.details["mean_second_quarter"] = std::move(q2);
        v.details["mean_final_half"] = std::move(final_half);
    } else {
        v.details["required_slope_per_step"] = required_slope;
        nlohmann::json slopes = nlohmann::json::array();
        for (const auto& out : outcomes) slopes.push_back(out.slope);
        v.details["slopes_per_step"] = std::move(slopes);
    }
    return detail::finish(std::move(v));
}

// ============================================================================
// Weight invariance
// ============================================================================

/**
 * Recomputes the decomposition under each supplied weight vector and checks
 * that the sign of the top drift rate never changes (exact rational signs).
 */
inline Verdict check_weight_invariance(const Instance& instance,
                                       const std::vector<std::vector<Rational>>& weight_vectors) {
    if (weight_vectors.size() < 2)
        throw std::invalid_argument("weight invariance needs at least two weight vectors");
    const Instance canon = canonicalize(instance);
    for (const auto& weights : weight_vectors) {
        if (weights.size() != static_cast<std::size_t>(canon.stations))
            throw std::invalid_argument("weight vector length does not match station count");
        for (const Rational& w : weights)
            if (w <= 0) throw std::invalid_argument("weights must be positive");
    }
    std::vector<int> signs;
    nlohmann::json per_vector = nlohmann::json::array();
    for (const auto& weights : weight_vectors) {
        Instance variant = canon;
        variant.weights = weights;
        const Decomposition dec = decompose(variant);
        const Rational& v1 = dec.values.front();
        const int sign = v1 > 0 ? 1 : (v1 < 0 ? -1 : 0);
        signs.push_back(sign);
        nlohmann::json entry;
        nlohmann::json ws = nlohmann::json::array();
        for (const Rational& w : weights) ws.push_back(format_rational(w));
        entry["weights"] = std::move(ws);
        entry["top_drift_rate"] = format_rational(v1);
        entry["sign"] = sign;
        per_vector.push_back(std::move(entry));
    }
    const int distinct =
        static_cast<int>(std::set<int>(signs.begin(), signs.end()).size());

    Verdict v;
    v.experiment = "weights";
    v.claim = "the sign of the top drift rate does not depend on the weight vector";
    v.statistic = static_cast<double>(distinct - 1);
    v.threshold = 0.0;
    v.seed = 0;
    v.replicas = static_cast<int>(weight_vectors.size());
    v.details["criterion"] = "statistic = number of distinct signs minus one (exact)";
    v.details["per_vector"] = std::move(per_vector);
    v.details["deterministic"] = true;
    return detail::finish(std::move(v));
}

// ============================================================================
// Dispersion
// ============================================================================

namespace detail {

struct Welford {
    std::uint64_t n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x) {
        n += 1;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double standard_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

struct DispersionCluster {
    std::size_t index = 0;          // position in the decomposition
    Cluster members;
    Rational gamma;                 // sum of 1/w_j over the cluster
    std::vector<double> a;          // per-station gamma * w_j
    std::vector<double> c;          // per-station (gamma * w_j - 1) / 2
    std::vector<double> lever;      // per-station (gamma * w_j - 1), for bounds
    Rational witness_constant;      // exact per-step mean under the witness
};

}  // namespace detail

/**
 * Dispersion growth of F(x) = (1/4) sum_{l,r in C} (w_l x_l - w_r x_r)^2 /
 * (w_l w_r) per multi-station cluster, measured over properly clustered
 * steps of the unreflected walk started well separated. Under the witness
 * policy the per-step mean increment has the exact closed form
 * (1/(2 alpha)) sum_j alpha_j (gamma w_j - 1) with alpha_j the station's total
 * event intensity; the Monte-Carlo mean must match it within four standard
 * errors. Under least-weighted routing the increment mean must not exceed the
 * state-dependent version of the same expression by more than four standard
 * errors (one-sided).
 */
inline Verdict check_dispersion(const Instance& instance, const Decomposition& dec,
                                const StaticPolicy& witness, std::uint64_t horizon, std::uint64_t seed,
                                std::uint64_t min_clustered_steps = 1000) {
    if (horizon == 0) throw std::invalid_argument("degenerate horizon: no steps");
    const Instance canon = canonicalize(instance);
    {
        const auto policy_violations = validate_policy(canon, witness);
        if (!policy_violations.empty())
            throw std::invalid_argument("invalid witness policy: " + policy_violations.front());
    }
    const auto scaled = scaled_integer_weights(canon.weights);
    const auto cluster_of = detail::station_cluster(canon, dec.clusters);
    const Rational alpha = total_event_rate(canon);
    const double alpha_d = to_double(alpha);

    std::vector<detail::DispersionCluster> tracked;
    for (std::size_t k = 0; k < dec.clusters.size(); ++k) {
        if (dec.clusters[k].size() < 2) continue;
        detail::DispersionCluster dc;
        dc.index = k;
        dc.members = dec.clusters[k];
        dc.gamma = 0;
        for (int j : dc.members) dc.gamma += 1 / canon.weights[static_cast<std::size_t>(j)];
        dc.a.assign(static_cast<std::size_t>(canon.stations), 0.0);
        dc.c.assign(static_cast<std::size_t>(canon.stations), 0.0);
        dc.lever.assign(static_cast<std::size_t>(canon.stations), 0.0);
        Rational constant = 0;
        for (int j : dc.members) {
            const Rational gw = dc.gamma * canon.weights[static_cast<std::size_t>(j)];
            dc.a[static_cast<std::size_t>(j)] = to_double(gw);
            dc.c[static_cast<std::size_t>(j)] = to_double((gw - 1) / 2);
            dc.lever[static_cast<std::size_t>(j)] = to_double(gw - 1);
            Rational inflow = canon.service_rates[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < canon.neighbourhoods.size(); ++i)
                inflow += canon.neighbourhoods[i].rate * witness.rows[i][static_cast<std::size_t>(j)];
            constant += inflow * (gw - 1);
        }
        dc.witness_constant = constant / (2 * alpha);
        tracked.push_back(std::move(dc));
    }

    Verdict v;
    v.experiment = "dispersion";
    v.claim =
        "dispersion grows at the witness policy's closed-form rate, and never faster under "
        "least-weighted routing";
    v.threshold = 4.0;
    v.seed = seed;
    v.replicas = 1;
    v.details["criterion"] =
        "statistic = max over multi-station clusters of |witness z-score| and the positive part of "
        "the routing-bound z-score; threshold 4";
    v.details["horizon"] = horizon;

    if (tracked.empty()) {
        v.statistic = 0.0;
        v.details["note"] = "all clusters are single stations: the dispersion functional is identically zero";
        return detail::finish(std::move(v));
    }

    // Well separated start: weighted height ~64 per hierarchy level.
    const std::size_t levels = dec.clusters.size();
    std::vector<std::int64_t> initial(static_cast<std::size_t>(canon.stations), 0);
    for (int j = 0; j < canon.stations; ++j) {
        const std::size_t k = static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(j)]);
        initial[static_cast<std::size_t>(j)] = round_to_int64(
            Rational(static_cast<std::uint64_t>(64 * (levels - 1 - k))) / canon.weights[static_cast<std::size_t>(j)]);
    }

    const std::vector<double> lambda_d = [&] {
        std::vector<double> out;
        for (const Neighbourhood& nb : canon.neighbourhoods) out.push_back(to_double(nb.rate));
        return out;
    }();

    struct PhaseResult {
        std::vector<detail::Welford> stats;  // one per tracked cluster
        std::uint64_t clustered_steps = 0;
    };
    // phase 0: witness policy, phase 1: least-weighted routing with the
    // state-dependent bound subtracted per step.
    const auto run_phase = [&](int phase) {
        JumpProcess process(canon, ProcessKind::walk,
                            phase == 0 ? std::optional<StaticPolicy>(witness) : std::nullopt);
        std::vector<std::int64_t> state = initial;
        SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(phase)));
        PhaseResult result;
        result.stats.assign(tracked.size(), detail::Welford{});
        std::vector<std::int64_t> cluster_sum(tracked.size(), 0);
        for (std::size_t t = 0; t < tracked.size(); ++t)
            for (int j : tracked[t].members)
                cluster_sum[t] += state[static_cast<std::size_t>(j)];
        std::vector<double> bound(tracked.size(), 0.0);
        std::vector<double> increment(tracked.size(), 0.0);
        for (std::uint64_t n = 1; n <= horizon; ++n) {
            const bool clustered = detail::clustered_scaled(state, dec.clusters, scaled);
            if (clustered) {
                result.clustered_steps += 1;
                if (phase == 1) {
                    // Routing bound at the pre-step state: alpha_j(x) collects
                    // service plus the arrival intensity of streams whose
                    // least-weighted candidate set contains j.
                    for (std::size_t t = 0; t < tracked.size(); ++t) bound[t] = 0.0;
                    for (std::size_t i = 0; i < canon.neighbourhoods.size(); ++i) {
                        const auto cands = process.candidates(state, static_cast<int>(i));
                        const double share = lambda_d[i] / static_cast<double>(cands.size());
                        for (int j : cands) {
                            const int k = cluster_of[static_cast<std::size_t>(j)];
                            for (std::size_t t = 0; t < tracked.size(); ++t)
                                if (tracked[t].index == static_cast<std::size_t>(k))
                                    bound[t] += share * tracked[t].lever[static_cast<std::size_t>(j)];
                        }
                    }
                    for (std::size_t t = 0; t < tracked.size(); ++t) {
                        for (int j : tracked[t].members)
                            bound[t] += to_double(canon.service_rates[static_cast<std::size_t>(j)]) *
                                        tracked[t].lever[static_cast<std::size_t>(j)];
                        bound[t] /= 2.0 * alpha_d;
                    }
                }
            }
            const Event event = process.step(state, rng);
            const int j = event.station;
            const int delta = event.kind == Event::Kind::arrival ? 1 : -1;
            std::fill(increment.begin(), increment.end(), 0.0);
            for (std::size_t t = 0; t < tracked.size(); ++t) {
                if (tracked[t].index == static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(j)])) {
                    cluster_sum[t] += delta;
                    const double x_prev =
                        static_cast<double>(state[static_cast<std::size_t>(j)] - delta);
                    const double sum_prev = static_cast<double>(cluster_sum[t] - delta);
                    increment[t] =
                        delta * (tracked[t].a[static_cast<std::size_t>(j)] * x_prev - sum_prev) +
                        tracked[t].c[static_cast<std::size_t>(j)];
                }
            }
            if (clustered)
                for (std::size_t t = 0; t < tracked.size(); ++t)
                    result.stats[t].add(phase == 0 ? increment[t] : increment[t] - bound[t]);
        }
        return result;
    };
    const PhaseResult witness_phase = run_phase(0);
    const PhaseResult routing_phase = run_phase(1);

    double statistic = 0.0;
    nlohmann::json clusters_json = nlohmann::json::array();
    for (std::size_t t = 0; t < tracked.size(); ++t) {
        nlohmann::json entry;
        entry["cluster"] = tracked[t].index + 1;
        const double closed = to_double(tracked[t].witness_constant);
        const detail::Welford& ws = witness_phase.stats[t];
        const detail::Welford& rs = routing_phase.stats[t];
        double witness_z, routing_z;
        if (ws.n < min_clustered_steps)
            witness_z = detail::kFailSentinel;
        else if (ws.standard_error() == 0.0)
            witness_z = ws.mean == closed ? 0.0 : detail::kFailSentinel;
        else
            witness_z = std::abs(ws.mean - closed) / ws.standard_error();
        if (rs.n < min_clustered_steps)
            routing_z = detail::kFailSentinel;
        else if (rs.standard_error() == 0.0)
            routing_z = rs.mean <= 0.0 ? 0.0 : detail::kFailSentinel;
        else
            routing_z = rs.mean / rs.standard_error();  // one-sided: only excess counts
        entry["witness_closed_form"] = closed;
        entry["witness_mean"] = ws.mean;
        entry["witness_standard_error"] = ws.standard_error();
        entry["witness_samples"] = ws.n;
        entry["witness_z"] = witness_z;
        entry["routing_mean_excess"] = rs.mean;
        entry["routing_standard_error"] = rs.standard_error();
        entry["routing_samples"] = rs.n;
        entry["routing_z"] = routing_z;
        statistic = std::max(statistic, witness_z);
        statistic = std::max(statistic, std::max(routing_z, 0.0));
        clusters_json.push_back(std::move(entry));
    }
    v.statistic = statistic;
    v.details["clusters"] = std::move(clusters_json);
    v.details["witness_clustered_steps"] = witness_phase.clustered_steps;
    v.details["routing_clustered_steps"] = routing_phase.clustered_steps;
    v.details["min_clustered_steps"] = min_clustered_steps;
    return detail::finish(std::move(v));
}

}  // namespace jlw

#endif  // JLW_VERIFY_HPP
