#ifndef JLW_TESTS_SUPPORT_HPP
#define JLW_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "jlw/model.hpp"
#include "jlw/random.hpp"
#include "jlw/rational.hpp"

namespace support {

struct StreamSpec {
    std::vector<int> members;  // 1-based, matching the file format
    std::string rate;
};

/// Compact instance builder for tests; members are 1-based like input files.
inline jlw::Instance make_instance(int stations, const std::vector<StreamSpec>& streams,
                                   const std::vector<std::string>& service_rates,
                                   const std::vector<std::string>& weights) {
    jlw::Instance inst;
    inst.stations = stations;
    for (const StreamSpec& s : streams) {
        jlw::Neighbourhood nb;
        for (int m : s.members) nb.members.push_back(m - 1);
        nb.rate = jlw::parse_rational(s.rate);
        inst.neighbourhoods.push_back(std::move(nb));
    }
    for (const std::string& mu : service_rates) inst.service_rates.push_back(jlw::parse_rational(mu));
    for (const std::string& w : weights) inst.weights.push_back(jlw::parse_rational(w));
    return inst;
}

// Named instances reused across suites. Values cited in the tests were frozen
// from an independent enumeration before the library existed.

/// One shared neighbourhood, lambda=3, mu=(1,1), w=(1,2): single cluster
/// {1,2} with drift rate 2/3 and unique witness (5/9, 4/9).
inline jlw::Instance two_station_weighted() {
    return make_instance(2, {{{1, 2}, "3"}}, {"1", "1"}, {"1", "2"});
}

/// Three stations, streams {1}:2, {1,2}:1, {2,3}:1, unit services and
/// weights: clusters {1} at rate 1 and {2,3} at rate 0; identity witness;
/// bonded components [[1]] and [[2],[3]].
inline jlw::Instance golden_three_station() {
    return make_instance(3, {{{1}, "2"}, {{1, 2}, "1"}, {{2, 3}, "1"}}, {"1", "1", "1"},
                         {"1", "1", "1"});
}

/// Two stations sharing one symmetric neighbourhood; single bonded cluster.
inline jlw::Instance symmetric_two() {
    return make_instance(2, {{{1, 2}, "1"}}, {"1", "1"}, {"1", "1"});
}

/// Two isolated stations with equal drift rates: one cluster, singleton
/// bonded components, diffusive relative spread.
inline jlw::Instance unbonded_pair() {
    return make_instance(2, {{{1}, "1"}, {{2}, "1"}}, {"2", "2"}, {"1", "1"});
}

inline jlw::Instance mm1(const std::string& lambda, const std::string& mu) {
    return make_instance(1, {{{1}, lambda}}, {mu}, {"1"});
}

// ============================================================================
// Random generation (seeded, exact rational data)
// ============================================================================

/// Uniform rate in {k/10 : 1 <= k <= 30}.
inline jlw::Rational random_rate(jlw::SplitMix64& rng) {
    return jlw::Rational(1 + static_cast<int>(rng.next_below(30)), 10);
}

inline jlw::Rational random_weight(jlw::SplitMix64& rng) {
    static const char* kChoices[] = {"1", "1/2", "2", "3"};
    return jlw::parse_rational(kChoices[rng.next_below(4)]);
}

inline std::vector<jlw::Rational> random_weight_vector(int stations, jlw::SplitMix64& rng) {
    std::vector<jlw::Rational> out;
    for (int j = 0; j < stations; ++j) out.push_back(random_weight(rng));
    return out;
}

/**
 * Random valid instance with 1..max_stations stations: a few random streams,
 * then singleton streams covering any station still unreachable so that
 * validation passes. All data exact rationals from the test grids.
 */
inline jlw::Instance random_instance(jlw::SplitMix64& rng, int max_stations = 8) {
    jlw::Instance inst;
    inst.stations = 1 + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(max_stations)));
    const int streams = 1 + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(inst.stations + 2)));
    std::vector<bool> covered(static_cast<std::size_t>(inst.stations), false);
    for (int i = 0; i < streams; ++i) {
        jlw::Neighbourhood nb;
        for (int j = 0; j < inst.stations; ++j)
            if (rng.next_below(3) == 0) nb.members.push_back(j);
        if (nb.members.empty())
            nb.members.push_back(static_cast<int>(rng.next_below(static_cast<std::uint32_t>(inst.stations))));
        nb.rate = random_rate(rng);
        for (int j : nb.members) covered[static_cast<std::size_t>(j)] = true;
        inst.neighbourhoods.push_back(std::move(nb));
    }
    for (int j = 0; j < inst.stations; ++j)
        if (!covered[static_cast<std::size_t>(j)]) {
            jlw::Neighbourhood nb;
            nb.members.push_back(j);
            nb.rate = random_rate(rng);
            inst.neighbourhoods.push_back(std::move(nb));
        }
    for (int j = 0; j < inst.stations; ++j) {
        inst.service_rates.push_back(random_rate(rng));
        inst.weights.push_back(random_weight(rng));
    }
    return inst;
}

/// Random exact static policy for a canonical instance: integer masses
/// 0..9 per member (at least one positive), normalized exactly.
inline jlw::StaticPolicy random_policy(const jlw::Instance& canonical, jlw::SplitMix64& rng) {
    jlw::StaticPolicy policy;
    for (const jlw::Neighbourhood& nb : canonical.neighbourhoods) {
        std::vector<jlw::Rational> row(static_cast<std::size_t>(canonical.stations), jlw::Rational(0));
        std::vector<int> masses;
        int total = 0;
        for (std::size_t m = 0; m < nb.members.size(); ++m) {
            const int mass = static_cast<int>(rng.next_below(10));
            masses.push_back(mass);
            total += mass;
        }
        if (total == 0) {
            masses[rng.next_below(static_cast<std::uint32_t>(nb.members.size()))] = 1;
            total = 1;
        }
        for (std::size_t m = 0; m < nb.members.size(); ++m)
            row[static_cast<std::size_t>(nb.members[m])] = jlw::Rational(masses[m], total);
        policy.rows.push_back(std::move(row));
    }
    return policy;
}

}  // namespace support

#endif  // JLW_TESTS_SUPPORT_HPP
