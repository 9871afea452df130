#include <algorithm>

#include <catch2/catch_amalgamated.hpp>

#include "jlw/model.hpp"
#include "jlw/random.hpp"
#include "support.hpp"

using jlw::Instance;
using jlw::Rational;
using jlw::StaticPolicy;

namespace {

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
    return std::any_of(violations.begin(), violations.end(), [&](const std::string& v) {
        return v.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("minimal single-station instance is valid", "[model]") {
    const Instance inst = support::mm1("1", "1");
    CHECK(jlw::validate(inst).empty());
}

TEST_CASE("validation names each broken invariant", "[model]") {
    SECTION("isolated station") {
        const Instance inst = support::make_instance(2, {{{1}, "1"}}, {"1", "1"}, {"1", "1"});
        const auto violations = jlw::validate(inst);
        REQUIRE_FALSE(violations.empty());
        CHECK(mentions(violations, "graph not connected"));
        CHECK(mentions(violations, "station 2"));
    }
    SECTION("no positive arrival stream") {
        const Instance inst = support::make_instance(2, {{{1, 2}, "0"}}, {"1", "1"}, {"1", "1"});
        CHECK(mentions(jlw::validate(inst), "no positive arrival stream"));
    }
    SECTION("negative arrival rate") {
        const Instance inst = support::make_instance(1, {{{1}, "-1"}}, {"1"}, {"1"});
        CHECK(mentions(jlw::validate(inst), "negative arrival rate"));
    }
    SECTION("non-positive service rate") {
        const Instance inst = support::make_instance(1, {{{1}, "1"}}, {"0"}, {"1"});
        CHECK(mentions(jlw::validate(inst), "service rate"));
    }
    SECTION("non-positive weight") {
        const Instance inst = support::make_instance(1, {{{1}, "1"}}, {"1"}, {"-2"});
        CHECK(mentions(jlw::validate(inst), "weight"));
    }
    SECTION("empty neighbourhood") {
        Instance inst = support::mm1("1", "1");
        inst.neighbourhoods.push_back({{}, Rational(1)});
        CHECK(mentions(jlw::validate(inst), "empty"));
    }
    SECTION("member out of range") {
        const Instance inst = support::make_instance(1, {{{1, 2}, "1"}}, {"1"}, {"1"});
        CHECK(mentions(jlw::validate(inst), "out of range"));
    }
    SECTION("duplicate member") {
        const Instance inst = support::make_instance(2, {{{1, 1}, "1"}, {{2}, "1"}}, {"1", "1"},
                                                     {"1", "1"});
        CHECK(mentions(jlw::validate(inst), "twice"));
    }
    SECTION("dimension mismatches") {
        Instance inst = support::mm1("1", "1");
        inst.service_rates.push_back(Rational(1));
        CHECK(mentions(jlw::validate(inst), "service rate count"));
    }
}

TEST_CASE("canonicalization merges duplicate neighbourhoods and drops zero rates", "[model]") {
    const Instance inst = support::make_instance(
        2, {{{2, 1}, "1/2"}, {{1, 2}, "1/3"}, {{1}, "0"}, {{2}, "1"}}, {"1", "1"}, {"1", "1"});
    const Instance canon = jlw::canonicalize(inst);
    REQUIRE(canon.neighbourhoods.size() == 2);
    // lexicographic member order: {1,2} before {2}
    CHECK(canon.neighbourhoods[0].members == std::vector<int>{0, 1});
    CHECK(canon.neighbourhoods[0].rate == Rational(5, 6));
    CHECK(canon.neighbourhoods[1].members == std::vector<int>{1});
    CHECK(canon.neighbourhoods[1].rate == Rational(1));
    CHECK(jlw::is_canonical(canon));
    CHECK_FALSE(jlw::is_canonical(inst));
    // canonicalization is idempotent and preserves the total event rate
    CHECK(jlw::canonicalize(canon).neighbourhoods.size() == 2);
    CHECK(jlw::total_event_rate(canon) == jlw::total_event_rate(jlw::canonicalize(canon)));
    CHECK(jlw::total_event_rate(canon) == Rational(5, 6) + 1 + 2);
}

TEST_CASE("policy validation enforces the routing simplex", "[model]") {
    const Instance canon = jlw::canonicalize(support::two_station_weighted());
    StaticPolicy good;
    good.rows = {{Rational(5, 9), Rational(4, 9)}};
    CHECK(jlw::validate_policy(canon, good).empty());

    StaticPolicy bad_sum;
    bad_sum.rows = {{Rational(1, 2), Rational(1, 3)}};
    CHECK_FALSE(jlw::validate_policy(canon, bad_sum).empty());

    StaticPolicy negative;
    negative.rows = {{Rational(3, 2), Rational(-1, 2)}};
    CHECK_FALSE(jlw::validate_policy(canon, negative).empty());

    StaticPolicy wrong_rows;
    wrong_rows.rows = {};
    CHECK_FALSE(jlw::validate_policy(canon, wrong_rows).empty());

    // mass outside the neighbourhood
    const Instance golden = jlw::canonicalize(support::golden_three_station());
    StaticPolicy outside;
    outside.rows = {{Rational(1), Rational(0), Rational(0)},
                    {Rational(1), Rational(0), Rational(0)},
                    {Rational(1), Rational(0), Rational(0)}};
    CHECK_FALSE(jlw::validate_policy(golden, outside).empty());
}

TEST_CASE("static drift matches hand arithmetic", "[model]") {
    const Instance canon = jlw::canonicalize(support::two_station_weighted());
    StaticPolicy policy;
    policy.rows = {{Rational(5, 9), Rational(4, 9)}};
    CHECK(jlw::static_drift(canon, policy, 0) == Rational(2, 3));
    CHECK(jlw::static_drift(canon, policy, 1) == Rational(1, 3));
    CHECK_THROWS_AS(jlw::static_drift(canon, policy, 2), std::invalid_argument);
}

TEST_CASE("drift sums to total arrivals minus total service for any policy", "[model]") {
    jlw::SplitMix64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const Instance canon = jlw::canonicalize(support::random_instance(rng));
        const StaticPolicy policy = support::random_policy(canon, rng);
        Rational total(0);
        for (int j = 0; j < canon.stations; ++j) total += jlw::static_drift(canon, policy, j);
        Rational expected(0);
        for (const auto& nb : canon.neighbourhoods) expected += nb.rate;
        for (const auto& mu : canon.service_rates) expected -= mu;
        CHECK(total == expected);
    }
}

TEST_CASE("drift is affine in the policy", "[model]") {
    jlw::SplitMix64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const Instance canon = jlw::canonicalize(support::random_instance(rng));
        const StaticPolicy a = support::random_policy(canon, rng);
        const StaticPolicy b = support::random_policy(canon, rng);
        const Rational theta(static_cast<int>(rng.next_below(11)), 10);
        StaticPolicy mix;
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            std::vector<Rational> row;
            for (std::size_t j = 0; j < a.rows[i].size(); ++j)
                row.push_back(theta * a.rows[i][j] + (1 - theta) * b.rows[i][j]);
            mix.rows.push_back(std::move(row));
        }
        for (int j = 0; j < canon.stations; ++j)
            CHECK(jlw::static_drift(canon, mix, j) ==
                  theta * jlw::static_drift(canon, a, j) +
                      (1 - theta) * jlw::static_drift(canon, b, j));
    }
}

TEST_CASE("policy graph lists exactly the positive routing edges", "[model]") {
    const Instance canon = jlw::canonicalize(support::two_station_weighted());
    StaticPolicy point;
    point.rows = {{Rational(1), Rational(0)}};
    CHECK(jlw::policy_graph(canon, point) == std::vector<std::pair<int, int>>{{0, 0}});
    StaticPolicy split;
    split.rows = {{Rational(1, 2), Rational(1, 2)}};
    CHECK(jlw::policy_graph(canon, split) == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}});
    StaticPolicy invalid;
    invalid.rows = {{Rational(0), Rational(0)}};
    CHECK_THROWS_AS(jlw::policy_graph(canon, invalid), std::invalid_argument);
}
