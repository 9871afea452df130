#ifndef JLW_SIMULATE_HPP
#define JLW_SIMULATE_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jlw/model.hpp"
#include "jlw/random.hpp"
#include "jlw/rational.hpp"

namespace jlw {

// ============================================================================
// Uniformized jump chain
// ============================================================================

/// queue: occupancies reflect at zero (a departure from an empty station is
/// an idle tick). walk: departures always decrement, states range over all
/// integers.
enum class ProcessKind { queue, walk };

struct Event {
    enum class Kind { arrival, departure, idle };
    Kind kind = Kind::idle;
    int stream = -1;   // arriving neighbourhood, arrivals only
    int station = -1;  // affected station (-1 until an arrival is routed)
};

struct SimConfig {
    Instance instance;                  // must be canonical
    ProcessKind kind = ProcessKind::queue;
    std::optional<StaticPolicy> policy; // absent: join the least weighted occupancy
    std::vector<std::int64_t> initial;  // empty: all zeros
    std::uint64_t horizon = 0;          // number of jump-chain steps
    std::uint64_t seed = 0;
    std::uint64_t cadence = 0;          // sampling stride; 0: ceil(horizon / 10000)
};

struct Trajectory {
    std::vector<std::uint64_t> steps;                 // sampled step indices
    std::vector<std::vector<std::int64_t>> states;    // one state per sample
    std::vector<std::int64_t> final_state;
    std::uint64_t horizon = 0, cadence = 0, seed = 0;
    double alpha = 0.0;                               // uniformization rate; time = steps / alpha
    std::vector<std::uint64_t> arrivals_by_stream;
    std::vector<std::uint64_t> arrivals_by_station;
    std::vector<std::uint64_t> departures_by_station;
    std::vector<std::uint64_t> idles_by_station;
};

// ============================================================================
// Routing primitives
// ============================================================================

/// Stations of `members` minimizing scaled_weight[j] * state[j]; exact
/// integer comparisons, so ties are genuine ties.
inline std::vector<int> jlw_candidates(const std::vector<std::int64_t>& state,
                                       const std::vector<std::int64_t>& scaled_weights,
                                       const std::vector<int>& members) {
    std::vector<int> out;
    __int128 best = 0;
    for (int j : members) {
        const __int128 v = static_cast<__int128>(scaled_weights[static_cast<std::size_t>(j)]) *
                           static_cast<__int128>(state[static_cast<std::size_t>(j)]);
        if (out.empty() || v < best) {
            best = v;
            out.assign(1, j);
        } else if (v == best) {
            out.push_back(j);
        }
    }
    return out;
}

/// Join-the-least-weighted-occupancy choice with a uniform tie draw.
inline int jlw_route(const std::vector<std::int64_t>& state, const std::vector<Rational>& weights,
                     const std::vector<int>& members, SplitMix64& rng) {
    if (members.empty()) throw std::invalid_argument("empty neighbourhood");
    const auto scaled = scaled_integer_weights(weights);
    const auto cands = jlw_candidates(state, scaled, members);
    if (cands.size() == 1) return cands.front();
    return cands[rng.next_below(static_cast<std::uint32_t>(cands.size()))];
}

// ============================================================================
// Engine
// ============================================================================

/**
 * Precomputed uniformized stepper. Event selection runs at the constant rate
 * alpha = total_event_rate (exact rates converted to floating point once);
 * routing comparisons stay exact through integer-rescaled weights.
 */
class JumpProcess {
public:
    JumpProcess(Instance canonical, ProcessKind kind, std::optional<StaticPolicy> policy)
        : inst_(std::move(canonical)), kind_(kind) {
        if (!is_canonical(inst_)) throw std::invalid_argument("instance must be canonical");
        const auto violations = validate(inst_);
        if (!violations.empty()) throw std::invalid_argument("invalid instance: " + violations.front());
        alpha_ = total_event_rate(inst_);
        alpha_d_ = to_double(alpha_);
        scaled_w_ = scaled_integer_weights(inst_.weights);
        const std::size_t streams = inst_.neighbourhoods.size();
        cum_.reserve(streams + static_cast<std::size_t>(inst_.stations));
        double acc = 0.0;
        for (const Neighbourhood& nb : inst_.neighbourhoods) {
            acc += to_double(nb.rate) / alpha_d_;
            cum_.push_back(acc);
        }
        for (const Rational& mu : inst_.service_rates) {
            acc += to_double(mu) / alpha_d_;
            cum_.push_back(acc);
        }
        cum_.back() = 1.0;
        if (policy) {
            const auto policy_violations = validate_policy(inst_, *policy);
            if (!policy_violations.empty())
                throw std::invalid_argument("invalid policy: " + policy_violations.front());
            for (std::size_t i = 0; i < streams; ++i) {
                std::vector<double> cdf;
                double row_acc = 0.0;
                for (int j : inst_.neighbourhoods[i].members) {
                    row_acc += to_double(policy->rows[i][static_cast<std::size_t>(j)]);
                    cdf.push_back(row_acc);
                }
                cdf.back() = 1.0;
                policy_cdf_.push_back(std::move(cdf));
            }
        }
    }

    const Instance& instance() const { return inst_; }
    ProcessKind kind() const { return kind_; }
    const Rational& alpha() const { return alpha_; }
    double alpha_double() const { return alpha_d_; }
    const std::vector<std::int64_t>& scaled_weights() const { return scaled_w_; }
    bool least_weighted() const { return policy_cdf_.empty(); }

    std::vector<int> candidates(const std::vector<std::int64_t>& state, int stream) const {
        return jlw_candidates(state, scaled_w_, inst_.neighbourhoods[static_cast<std::size_t>(stream)].members);
    }

    /// Draws the next event kind; arrivals come back unrouted (station -1).
    Event select(SplitMix64& rng) const {
        const double u = rng.next_unit();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        const std::size_t idx = std::min(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
        const std::size_t streams = inst_.neighbourhoods.size();
        Event event;
        if (idx < streams) {
            event.kind = Event::Kind::arrival;
            event.stream = static_cast<int>(idx);
        } else {
            event.kind = Event::Kind::departure;
            event.station = static_cast<int>(idx - streams);
        }
        return event;
    }

    int route(const std::vector<std::int64_t>& state, int stream, SplitMix64& rng) const {
        if (least_weighted()) {
            const auto cands = candidates(state, stream);
            if (cands.size() == 1) return cands.front();
            return cands[rng.next_below(static_cast<std::uint32_t>(cands.size()))];
        }
        const auto& cdf = policy_cdf_[static_cast<std::size_t>(stream)];
        const double u = rng.next_unit();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t m = std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        return inst_.neighbourhoods[static_cast<std::size_t>(stream)].members[m];
    }

    /// One uniformized step: select, route arrivals, apply the jump.
    Event step(std::vector<std::int64_t>& state, SplitMix64& rng) const {
        Event event = select(rng);
        if (event.kind == Event::Kind::arrival) {
            event.station = route(state, event.stream, rng);
            state[static_cast<std::size_t>(event.station)] += 1;
        } else {
            auto& x = state[static_cast<std::size_t>(event.station)];
            if (kind_ == ProcessKind::walk || x > 0)
                x -= 1;
            else
                event.kind = Event::Kind::idle;
        }
        return event;
    }

private:
    Instance inst_;
    ProcessKind kind_;
    Rational alpha_;
    double alpha_d_ = 0.0;
    std::vector<std::int64_t> scaled_w_;
    std::vector<double> cum_;
    std::vector<std::vector<double>> policy_cdf_;
};

namespace detail {

inline std::uint64_t effective_cadence(std::uint64_t horizon, std::uint64_t cadence) {
    if (cadence > 0) return cadence;
    if (horizon == 0) return 1;
    return horizon / 10000 + (horizon % 10000 != 0 ? 1 : 0);
}

inline std::vector<std::int64_t> initial_state(const SimConfig& config) {
    if (config.initial.empty()) return std::vector<std::int64_t>(static_cast<std::size_t>(config.instance.stations), 0);
    if (config.initial.size() != static_cast<std::size_t>(config.instance.stations))
        throw std::invalid_argument("initial state length does not match station count");
    if (config.kind == ProcessKind::queue)
        for (std::int64_t v : config.initial)
            if (v < 0) throw std::invalid_argument("queue initial state must be non-negative");
    return config.initial;
}

inline void count_event(Trajectory& trajectory, const Event& event) {
    switch (event.kind) {
        case Event::Kind::arrival:
            trajectory.arrivals_by_stream[static_cast<std::size_t>(event.stream)] += 1;
            trajectory.arrivals_by_station[static_cast<std::size_t>(event.station)] += 1;
            break;
        case Event::Kind::departure:
            trajectory.departures_by_station[static_cast<std::size_t>(event.station)] += 1;
            break;
        case Event::Kind::idle:
            trajectory.idles_by_station[static_cast<std::size_t>(event.station)] += 1;
            break;
    }
}

inline Trajectory make_trajectory(const SimConfig& config, const JumpProcess& process, std::uint64_t cadence) {
    Trajectory t;
    t.horizon = config.horizon;
    t.cadence = cadence;
    t.seed = config.seed;
    t.alpha = process.alpha_double();
    const auto stations = static_cast<std::size_t>(config.instance.stations);
    t.arrivals_by_stream.assign(config.instance.neighbourhoods.size(), 0);
    t.arrivals_by_station.assign(stations, 0);
    t.departures_by_station.assign(stations, 0);
    t.idles_by_station.assign(stations, 0);
    return t;
}

}  // namespace detail

/// Simulates the jump chain for `horizon` steps. Identical configs produce
/// identical trajectories. Samples land at steps 0, cadence, 2*cadence, ...,
/// and always at the final step.
inline Trajectory run(const SimConfig& config) {
    const JumpProcess process(config.instance, config.kind, config.policy);
    const std::uint64_t cadence = detail::effective_cadence(config.horizon, config.cadence);
    Trajectory trajectory = detail::make_trajectory(config, process, cadence);
    std::vector<std::int64_t> state = detail::initial_state(config);
    SplitMix64 rng(config.seed);
    trajectory.steps.push_back(0);
    trajectory.states.push_back(state);
    for (std::uint64_t n = 1; n <= config.horizon; ++n) {
        detail::count_event(trajectory, process.step(state, rng));
        if (n % cadence == 0 || n == config.horizon) {
            trajectory.steps.push_back(n);
            trajectory.states.push_back(state);
        }
    }
    trajectory.final_state = std::move(state);
    return trajectory;
}

// ============================================================================
// Monotone coupling
// ============================================================================

/**
 * Per-neighbourhood thinning probabilities (per uniformized step). `extra`
 * feeds additional arrivals to the upper walk only; `drop` makes the lower
 * walk skip shared arrivals. Either vector may be empty (no thinning).
 */
struct CouplingSpec {
    std::vector<double> extra;
    std::vector<double> drop;
};

struct CouplingResult {
    Trajectory lower, middle, upper;
    std::uint64_t extra_arrivals = 0;
    std::uint64_t dropped_arrivals = 0;
    std::uint64_t order_violations = 0;  // steps where lower <= middle <= upper failed
};

/**
 * Three walks on one event stream under least-weighted routing. A shared
 * arrival is routed in the lower walk first; a dominating walk whose
 * occupancy at the chosen station equals the dominated walk's is forced to
 * the same station. That forcing preserves the componentwise order
 * lower <= middle <= upper at every step, which coupled_run re-checks and
 * counts. Departures apply to all three walks.
 */
inline CouplingResult coupled_run(const SimConfig& config, const CouplingSpec& spec) {
    if (config.kind != ProcessKind::walk)
        throw std::invalid_argument("coupled runs are defined for the walk kind");
    if (config.policy) throw std::invalid_argument("coupled runs use least-weighted routing");
    const JumpProcess process(config.instance, config.kind, std::nullopt);
    const std::size_t streams = config.instance.neighbourhoods.size();
    const auto check_thinning = [&](const std::vector<double>& p, const char* label) {
        if (!p.empty() && p.size() != streams)
            throw std::invalid_argument(std::string(label) + " thinning length does not match neighbourhood count");
        for (double v : p)
            if (v < 0.0 || v > 1.0) throw std::invalid_argument(std::string(label) + " thinning must lie in [0, 1]");
    };
    check_thinning(spec.extra, "extra");
    check_thinning(spec.drop, "drop");

    const std::uint64_t cadence = detail::effective_cadence(config.horizon, config.cadence);
    CouplingResult result;
    result.lower = detail::make_trajectory(config, process, cadence);
    result.middle = detail::make_trajectory(config, process, cadence);
    result.upper = detail::make_trajectory(config, process, cadence);

    std::vector<std::int64_t> lower = detail::initial_state(config);
    std::vector<std::int64_t> middle = lower, upper = lower;
    SplitMix64 rng(config.seed);

    const auto sample = [&](std::uint64_t n) {
        result.lower.steps.push_back(n);
        result.lower.states.push_back(lower);
        result.middle.steps.push_back(n);
        result.middle.states.push_back(middle);
        result.upper.steps.push_back(n);
        result.upper.states.push_back(upper);
    };
    const auto pick = [&](const std::vector<std::int64_t>& state, int stream) {
        const auto cands = process.candidates(state, stream);
        if (cands.size() == 1) return cands.front();
        return cands[rng.next_below(static_cast<std::uint32_t>(cands.size()))];
    };
    const auto arrive = [](Trajectory& t, std::vector<std::int64_t>& state, int stream, int station) {
        state[static_cast<std::size_t>(station)] += 1;
        t.arrivals_by_stream[static_cast<std::size_t>(stream)] += 1;
        t.arrivals_by_station[static_cast<std::size_t>(station)] += 1;
    };

    sample(0);
    for (std::uint64_t n = 1; n <= config.horizon; ++n) {
        const Event event = process.select(rng);
        if (event.kind == Event::Kind::arrival) {
            const int i = event.stream;
            const bool dropped = !spec.drop.empty() && spec.drop[static_cast<std::size_t>(i)] > 0.0 &&
                                 rng.next_unit() < spec.drop[static_cast<std::size_t>(i)];
            int forced = -1;
            if (!dropped) {
                const int j_lower = pick(lower, i);
                // Equal occupancy before the jump: the dominating walk must
                // follow, or the order would break at j_lower.
                if (middle[static_cast<std::size_t>(j_lower)] == lower[static_cast<std::size_t>(j_lower)])
                    forced = j_lower;
                arrive(result.lower, lower, i, j_lower);
            } else {
                result.dropped_arrivals += 1;
            }
            const int j_middle = forced >= 0 ? forced : pick(middle, i);
            const bool force_upper =
                upper[static_cast<std::size_t>(j_middle)] == middle[static_cast<std::size_t>(j_middle)];
            arrive(result.middle, middle, i, j_middle);
            const int j_upper = force_upper ? j_middle : pick(upper, i);
            arrive(result.upper, upper, i, j_upper);
        } else {
            const auto j = static_cast<std::size_t>(event.station);
            lower[j] -= 1;
            middle[j] -= 1;
            upper[j] -= 1;
            result.lower.departures_by_station[j] += 1;
            result.middle.departures_by_station[j] += 1;
            result.upper.departures_by_station[j] += 1;
        }
        if (!spec.extra.empty())
            for (std::size_t i = 0; i < streams; ++i)
                if (spec.extra[i] > 0.0 && rng.next_unit() < spec.extra[i]) {
                    const int j = pick(upper, static_cast<int>(i));
                    arrive(result.upper, upper, static_cast<int>(i), j);
                    result.extra_arrivals += 1;
                }
        bool ordered = true;
        for (std::size_t j = 0; j < lower.size(); ++j)
            if (lower[j] > middle[j] || middle[j] > upper[j]) {
                ordered = false;
                break;
            }
        if (!ordered) result.order_violations += 1;
        if (n % cadence == 0 || n == config.horizon) sample(n);
    }
    result.lower.final_state = std::move(lower);
    result.middle.final_state = std::move(middle);
    result.upper.final_state = std::move(upper);
    return result;
}

// ============================================================================
// Shape statistics
// ============================================================================

/// Quadratic dispersion of weighted occupancies over a cluster:
///   (1/4) sum_{l,r in C} (w_l x_l - w_r x_r)^2 / (w_l w_r).  Exact.
inline Rational shape_statistic(const std::vector<std::int64_t>& state, const Cluster& cluster,
                                const std::vector<Rational>& weights) {
    Rational total = 0;
    for (int l : cluster)
        for (int r : cluster) {
            const Rational d = weights[static_cast<std::size_t>(l)] * state[static_cast<std::size_t>(l)] -
                               weights[static_cast<std::size_t>(r)] * state[static_cast<std::size_t>(r)];
            total += d * d / (weights[static_cast<std::size_t>(l)] * weights[static_cast<std::size_t>(r)]);
        }
    return total / 4;
}

/// True when every station of an earlier cluster carries strictly larger
/// weighted occupancy than every station of every later cluster.
inline bool properly_clustered(const std::vector<std::int64_t>& state, const std::vector<Cluster>& clusters,
                               const std::vector<Rational>& weights) {
    const auto weighted = [&](int j) {
        return Rational(weights[static_cast<std::size_t>(j)] * state[static_cast<std::size_t>(j)]);
    };
    for (std::size_t k = 0; k + 1 < clusters.size(); ++k) {
        Rational low = weighted(clusters[k].front());
        for (int j : clusters[k]) {
            const Rational v = weighted(j);
            if (v < low) low = v;
        }
        Rational high = weighted(clusters[k + 1].front());
        for (int j : clusters[k + 1]) {
            const Rational v = weighted(j);
            if (v > high) high = v;
        }
        if (!(low > high)) return false;
    }
    return true;
}

}  // namespace jlw

#endif  // JLW_SIMULATE_HPP
