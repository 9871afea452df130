// Tests for the uniformized jump-chain engine: routing primitives, the queue
// and walk processes, determinism, empirical drift and event frequencies,
// the three-walk monotone coupling, and the exact shape statistics.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "jlw/decompose.hpp"
#include "jlw/model.hpp"
#include "jlw/random.hpp"
#include "jlw/rational.hpp"
#include "jlw/simulate.hpp"
#include "support.hpp"

using jlw::Cluster;
using jlw::Instance;
using jlw::ProcessKind;
using jlw::Rational;
using jlw::SimConfig;
using jlw::Trajectory;

namespace {

std::vector<Rational> unit_weights(int n) { return std::vector<Rational>(static_cast<std::size_t>(n), Rational(1)); }

SimConfig base_config(const Instance& inst, ProcessKind kind, std::uint64_t horizon, std::uint64_t seed) {
    SimConfig config;
    config.instance = jlw::canonicalize(inst);
    config.kind = kind;
    config.horizon = horizon;
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("least-weighted routing picks exact minimizers") {
    const std::vector<int> both = {0, 1};

    SECTION("unique minimizer") {
        const auto scaled = jlw::scaled_integer_weights(unit_weights(2));
        CHECK(jlw::jlw_candidates({3, 1}, scaled, both) == std::vector<int>{1});
        // Negative occupancies are legal for the walk.
        CHECK(jlw::jlw_candidates({-5, 3}, scaled, both) == std::vector<int>{0});
    }

    SECTION("weighted comparison, not raw occupancy") {
        const auto scaled = jlw::scaled_integer_weights({Rational(1), Rational(2)});
        // 1*3 > 2*1: the higher-occupancy station wins on weight.
        CHECK(jlw::jlw_candidates({3, 1}, scaled, both) == std::vector<int>{1});
        // 1*2 == 2*1 is a genuine tie.
        CHECK(jlw::jlw_candidates({2, 1}, scaled, both) == (std::vector<int>{0, 1}));
    }

    SECTION("ties break uniformly") {
        jlw::SplitMix64 rng(7);
        const std::vector<Rational> w = {Rational(1), Rational(2)};
        int first = 0;
        const int draws = 2000;
        for (int i = 0; i < draws; ++i)
            if (jlw::jlw_route({2, 1}, w, both, rng) == 0) ++first;
        // Binomial(2000, 1/2): 5 sigma is about 112.
        CHECK(first > 1000 - 115);
        CHECK(first < 1000 + 115);
    }

    SECTION("restricted membership") {
        const auto scaled = jlw::scaled_integer_weights(unit_weights(3));
        CHECK(jlw::jlw_candidates({5, 9, 0}, scaled, {0, 1}) == std::vector<int>{0});
    }
}

TEST_CASE("queue reflects at zero, walk does not") {
    // Service dominates arrivals, so the walk dives and the queue idles.
    const Instance inst = support::mm1("1", "2");

    SimConfig config = base_config(inst, ProcessKind::queue, 10000, 11);
    const Trajectory queue = jlw::run(config);
    for (const auto& s : queue.states) CHECK(s[0] >= 0);
    CHECK(queue.final_state[0] >= 0);
    CHECK(queue.idles_by_station[0] > 0);
    CHECK(queue.arrivals_by_station[0] + queue.departures_by_station[0] +
              queue.idles_by_station[0] ==
          queue.horizon);

    config.kind = ProcessKind::walk;
    const Trajectory walk = jlw::run(config);
    CHECK(walk.final_state[0] < 0);
    CHECK(walk.idles_by_station[0] == 0);
    CHECK(walk.arrivals_by_station[0] + walk.departures_by_station[0] == walk.horizon);
}

TEST_CASE("zero horizon yields only the initial sample") {
    SimConfig config = base_config(support::symmetric_two(), ProcessKind::queue, 0, 1);
    config.initial = {4, 2};
    const Trajectory t = jlw::run(config);
    CHECK(t.steps == std::vector<std::uint64_t>{0});
    REQUIRE(t.states.size() == 1);
    CHECK(t.states[0] == (std::vector<std::int64_t>{4, 2}));
    CHECK(t.final_state == (std::vector<std::int64_t>{4, 2}));
}

TEST_CASE("runs are reproducible from the seed") {
    SimConfig config = base_config(support::golden_three_station(), ProcessKind::walk, 20000, 99);
    const Trajectory a = jlw::run(config);
    const Trajectory b = jlw::run(config);
    CHECK(a.steps == b.steps);
    CHECK(a.states == b.states);
    CHECK(a.final_state == b.final_state);
    CHECK(a.arrivals_by_stream == b.arrivals_by_stream);
    CHECK(a.arrivals_by_station == b.arrivals_by_station);
    CHECK(a.departures_by_station == b.departures_by_station);

    config.seed = 100;
    const Trajectory c = jlw::run(config);
    CHECK(a.final_state != c.final_state);
}

TEST_CASE("sampling cadence controls the recorded steps") {
    SimConfig config = base_config(support::symmetric_two(), ProcessKind::walk, 1000, 5);
    config.cadence = 300;
    const Trajectory t = jlw::run(config);
    CHECK(t.steps == (std::vector<std::uint64_t>{0, 300, 600, 900, 1000}));
    CHECK(t.cadence == 300);
    // Default cadence keeps roughly 10k samples.
    config.cadence = 0;
    const Trajectory d = jlw::run(config);
    CHECK(d.cadence == 1);  // ceil(1000 / 10000) clamps to 1
    CHECK(d.steps.size() == 1001);
}

TEST_CASE("static routing produces the exact mean drift") {
    const Instance canon = jlw::canonicalize(support::two_station_weighted());
    const jlw::Decomposition dec = jlw::decompose(canon);

    SimConfig config = base_config(canon, ProcessKind::walk, 1000000, 424242);
    config.policy = dec.witness;
    const Trajectory t = jlw::run(config);

    const std::vector<Rational> drifts = jlw::static_drift(canon, dec.witness);
    const double alpha = jlw::to_double(jlw::total_event_rate(canon));
    const double n = static_cast<double>(config.horizon);
    // Increments are i.i.d. under a static policy with per-step variance
    // below 1, so 5*sqrt(n) is a >5-sigma envelope.
    const double tolerance = 5.0 * std::sqrt(n);
    for (int j = 0; j < canon.stations; ++j) {
        const double expected = n * jlw::to_double(drifts[static_cast<std::size_t>(j)]) / alpha;
        CHECK(std::abs(static_cast<double>(t.final_state[static_cast<std::size_t>(j)]) - expected) <=
              tolerance);
    }
}

TEST_CASE("event frequencies match the uniformized rates") {
    const Instance canon = jlw::canonicalize(support::golden_three_station());
    SimConfig config = base_config(canon, ProcessKind::walk, 100000, 2024);
    const Trajectory t = jlw::run(config);

    const double alpha = jlw::to_double(jlw::total_event_rate(canon));
    const double n = static_cast<double>(config.horizon);
    const auto check_count = [&](std::uint64_t count, const Rational& rate) {
        const double p = jlw::to_double(rate) / alpha;
        const double sigma = std::sqrt(n * p * (1.0 - p));
        CHECK(std::abs(static_cast<double>(count) - n * p) <= 4.5 * sigma);
    };
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < canon.neighbourhoods.size(); ++i) {
        check_count(t.arrivals_by_stream[i], canon.neighbourhoods[i].rate);
        total += t.arrivals_by_stream[i];
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(canon.stations); ++j) {
        check_count(t.departures_by_station[j], canon.service_rates[j]);
        total += t.departures_by_station[j];
    }
    CHECK(total == config.horizon);
}

TEST_CASE("coupling with no thinning runs three identical walks") {
    SimConfig config = base_config(support::golden_three_station(), ProcessKind::walk, 20000, 8);
    const jlw::CouplingResult r = jlw::coupled_run(config, {});
    CHECK(r.extra_arrivals == 0);
    CHECK(r.dropped_arrivals == 0);
    CHECK(r.order_violations == 0);
    CHECK(r.lower.states == r.middle.states);
    CHECK(r.middle.states == r.upper.states);
    CHECK(r.lower.final_state == r.upper.final_state);
}

TEST_CASE("thinned couplings preserve the componentwise order") {
    const Instance golden = support::golden_three_station();
    const Instance pair = support::two_station_weighted();
    for (const Instance* raw : {&golden, &pair}) {
        SimConfig config = base_config(*raw, ProcessKind::walk, 50000, 31);
        const std::size_t streams = config.instance.neighbourhoods.size();
        jlw::CouplingSpec spec;
        spec.extra.assign(streams, 0.3);
        spec.drop.assign(streams, 0.3);
        const jlw::CouplingResult r = jlw::coupled_run(config, spec);
        INFO("stations " << config.instance.stations);
        CHECK(r.order_violations == 0);
        CHECK(r.extra_arrivals > 0);
        CHECK(r.dropped_arrivals > 0);
        for (int j = 0; j < config.instance.stations; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            CHECK(r.lower.final_state[ju] <= r.middle.final_state[ju]);
            CHECK(r.middle.final_state[ju] <= r.upper.final_state[ju]);
        }
    }
}

TEST_CASE("single-station coupling separates by exactly the thinned arrivals") {
    SimConfig config = base_config(support::mm1("1", "1"), ProcessKind::walk, 40000, 17);
    jlw::CouplingSpec spec;
    spec.extra = {0.5};
    spec.drop = {0.25};
    const jlw::CouplingResult r = jlw::coupled_run(config, spec);
    CHECK(r.order_violations == 0);
    CHECK(r.upper.final_state[0] - r.middle.final_state[0] ==
          static_cast<std::int64_t>(r.extra_arrivals));
    CHECK(r.middle.final_state[0] - r.lower.final_state[0] ==
          static_cast<std::int64_t>(r.dropped_arrivals));
}

TEST_CASE("coupling rejects invalid configurations") {
    SimConfig config = base_config(support::mm1("1", "1"), ProcessKind::walk, 10, 1);

    SECTION("queue kind") {
        config.kind = ProcessKind::queue;
        CHECK_THROWS_AS(jlw::coupled_run(config, {}), std::invalid_argument);
    }
    SECTION("static policy") {
        jlw::StaticPolicy policy;
        policy.rows = {{Rational(1)}};
        config.policy = policy;
        CHECK_THROWS_AS(jlw::coupled_run(config, {}), std::invalid_argument);
    }
    SECTION("malformed thinning vectors") {
        jlw::CouplingSpec spec;
        spec.extra = {0.5, 0.5};  // wrong length
        CHECK_THROWS_AS(jlw::coupled_run(config, spec), std::invalid_argument);
        spec.extra = {1.5};  // outside [0, 1]
        CHECK_THROWS_AS(jlw::coupled_run(config, spec), std::invalid_argument);
    }
}

TEST_CASE("shape statistic measures weighted spread exactly") {
    const Cluster both = {0, 1};

    CHECK(jlw::shape_statistic({7, 7}, both, unit_weights(2)) == Rational(0));
    CHECK(jlw::shape_statistic({3, 1}, both, unit_weights(2)) == Rational(2));

    // Adding c/w_j to every station shifts all weighted occupancies equally.
    const std::vector<Rational> w = {Rational(1), Rational(2)};
    CHECK(jlw::shape_statistic({3, 1}, both, w) == jlw::shape_statistic({13, 6}, both, w));

    // Three stations, unit weights, occupancies 0/2/4: pairwise squares sum
    // to 2*(4 + 16 + 4) = 48, so the statistic is 12.
    CHECK(jlw::shape_statistic({0, 2, 4}, {0, 1, 2}, unit_weights(3)) == Rational(12));
}

TEST_CASE("proper clustering is a strict chain condition") {
    const std::vector<Cluster> two = {{0}, {1, 2}};
    const auto w = unit_weights(3);

    CHECK(jlw::properly_clustered({5, 1, 2}, two, w));
    CHECK_FALSE(jlw::properly_clustered({2, 1, 2}, two, w));  // ties break strictness
    CHECK_FALSE(jlw::properly_clustered({1, 3, 0}, two, w));

    // Weights decide the comparison.
    const std::vector<Rational> wv = {Rational(1), Rational(3), Rational(1)};
    CHECK_FALSE(jlw::properly_clustered({5, 2, 2}, two, wv));  // 5 < 6
    CHECK(jlw::properly_clustered({7, 2, 2}, two, wv));

    // A single cluster imposes no constraint.
    CHECK(jlw::properly_clustered({-4, 9}, {{0, 1}}, unit_weights(2)));
}
