// Tests for file parsing and report serialization: exact-rational JSON
// instances, precise error messages naming the offending field, report
// structure against a frozen expected file, and trajectory export.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "jlw/decompose.hpp"
#include "jlw/io.hpp"
#include "jlw/model.hpp"
#include "jlw/simulate.hpp"
#include "support.hpp"

using jlw::Instance;
using jlw::ParseError;
using jlw::Rational;
using nlohmann::json;

#ifndef JLW_FIXTURE_DIR
#error "JLW_FIXTURE_DIR must point at the test fixture directory"
#endif

namespace {

std::string fixture(const std::string& name) { return std::string(JLW_FIXTURE_DIR) + "/" + name; }

json load_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return json::parse(in);
}

void check_message(const std::function<void()>& thrower, const std::string& needle) {
    try {
        thrower();
        FAIL("expected a parse error mentioning '" << needle << "'");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

}  // namespace

TEST_CASE("instances parse from exact-rational JSON") {
    const json root = {
        {"stations", 2},
        {"neighbourhoods", {{{"members", {1, 2}}, {"rate", "3"}}}},
        {"service_rates", {"1", "1"}},
        {"weights", {"1", "2"}},
    };
    const Instance inst = jlw::parse_instance(root);
    const Instance expected = support::two_station_weighted();
    CHECK(inst.stations == expected.stations);
    REQUIRE(inst.neighbourhoods.size() == 1);
    CHECK(inst.neighbourhoods[0].members == (std::vector<int>{0, 1}));
    CHECK(inst.neighbourhoods[0].rate == Rational(3));
    CHECK(inst.weights[1] == Rational(2));

    SECTION("integer JSON rates are accepted") {
        json alt = root;
        alt["neighbourhoods"][0]["rate"] = 3;
        CHECK(jlw::parse_instance(alt).neighbourhoods[0].rate == Rational(3));
    }
}

TEST_CASE("parse errors name the offending field") {
    json good = {
        {"stations", 2},
        {"neighbourhoods", {{{"members", {1, 2}}, {"rate", "3"}}}},
        {"service_rates", {"1", "1"}},
        {"weights", {"1", "2"}},
    };
    CHECK_NOTHROW(jlw::parse_instance(good));

    SECTION("missing top-level fields") {
        json broken = good;
        broken.erase("stations");
        check_message([&] { jlw::parse_instance(broken); }, "missing field 'stations'");
        broken = good;
        broken.erase("weights");
        check_message([&] { jlw::parse_instance(broken); }, "missing field 'weights'");
    }

    SECTION("decimal floats are rejected to preserve exactness") {
        json broken = good;
        broken["neighbourhoods"][0]["rate"] = 0.3;
        check_message([&] { jlw::parse_instance(broken); }, "neighbourhoods[0].rate");
        check_message([&] { jlw::parse_instance(broken); }, "decimal floats lose exactness");
        broken = good;
        broken["weights"][1] = 1.5;
        check_message([&] { jlw::parse_instance(broken); }, "weights[1]");
    }

    SECTION("malformed rational strings carry the parser's reason") {
        json broken = good;
        broken["service_rates"][0] = "1/0";
        check_message([&] { jlw::parse_instance(broken); }, "service_rates[0]");
    }

    SECTION("station numbers are 1-based positives") {
        json broken = good;
        broken["neighbourhoods"][0]["members"] = {0, 1};
        check_message([&] { jlw::parse_instance(broken); }, "1-based");
        broken["neighbourhoods"][0]["members"] = "all";
        check_message([&] { jlw::parse_instance(broken); }, "neighbourhoods[0].members");
    }

    SECTION("station count bounds") {
        json broken = good;
        broken["stations"] = 0;
        check_message([&] { jlw::parse_instance(broken); }, "stations");
        broken["stations"] = 3.5;
        check_message([&] { jlw::parse_instance(broken); }, "integer");
    }

    SECTION("non-object root") {
        check_message([] { jlw::parse_instance(json::array()); }, "JSON object");
    }
}

TEST_CASE("file loading wraps errors with the path") {
    check_message([] { jlw::load_instance("/nonexistent/nowhere.json"); }, "/nonexistent/nowhere.json");

    const Instance golden = jlw::load_instance(fixture("golden_three_station.json"));
    const Instance expected = support::golden_three_station();
    CHECK(golden.stations == expected.stations);
    REQUIRE(golden.neighbourhoods.size() == expected.neighbourhoods.size());
    for (std::size_t i = 0; i < expected.neighbourhoods.size(); ++i) {
        CHECK(golden.neighbourhoods[i].members == expected.neighbourhoods[i].members);
        CHECK(golden.neighbourhoods[i].rate == expected.neighbourhoods[i].rate);
    }
    CHECK(golden.service_rates == expected.service_rates);
    CHECK(golden.weights == expected.weights);
}

TEST_CASE("instances round-trip through serialization") {
    const Instance canon = jlw::canonicalize(support::two_station_weighted());
    const Instance back = jlw::parse_instance(jlw::instance_to_json(canon));
    CHECK(back.stations == canon.stations);
    REQUIRE(back.neighbourhoods.size() == canon.neighbourhoods.size());
    for (std::size_t i = 0; i < canon.neighbourhoods.size(); ++i) {
        CHECK(back.neighbourhoods[i].members == canon.neighbourhoods[i].members);
        CHECK(back.neighbourhoods[i].rate == canon.neighbourhoods[i].rate);
    }
    CHECK(back.service_rates == canon.service_rates);
    CHECK(back.weights == canon.weights);
}

TEST_CASE("decomposition report matches the frozen expectation file") {
    const Instance golden = support::golden_three_station();
    const jlw::Decomposition dec = jlw::decompose(golden);
    const json report = jlw::decomposition_report(golden, dec);
    const json expected = load_json(fixture("golden_three_station.expected.json"));

    CHECK(report["clusters"] == expected["clusters"]);
    CHECK(report["values"] == expected["values"]);
    CHECK(report["witness"] == expected["witness"]);

    const json bonded = jlw::bonded_report(dec, jlw::bonded_components(golden, dec));
    CHECK(bonded["clusters"] == expected["clusters"]);
    CHECK(bonded["bonded_components"] == expected["bonded_components"]);
}

TEST_CASE("verdict serialization echoes every field") {
    jlw::Verdict v;
    v.experiment = "demo";
    v.claim = "a demonstration claim";
    v.statistic = 0.25;
    v.threshold = 1.0;
    v.pass = true;
    v.seed = 42;
    v.replicas = 3;
    v.details["extra"] = "kept";
    const json root = jlw::verdict_to_json(v);
    CHECK(root["experiment"] == "demo");
    CHECK(root["statistic"].get<double>() == 0.25);
    CHECK(root["pass"].get<bool>());
    CHECK(root["seed"].get<std::uint64_t>() == 42);
    CHECK(root["details"]["extra"] == "kept");
}

TEST_CASE("trajectory export carries one row per sample") {
    jlw::SimConfig config;
    config.instance = jlw::canonicalize(support::symmetric_two());
    config.kind = jlw::ProcessKind::walk;
    config.horizon = 10;
    config.cadence = 5;
    config.seed = 3;
    const jlw::Trajectory t = jlw::run(config);

    const std::string csv = jlw::trajectory_csv(t, config.instance.stations);
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "step,time,station_1,station_2");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(rows == 3);  // steps 0, 5, 10

    const json counters = jlw::trajectory_counters(t);
    CHECK(counters["horizon"].get<std::uint64_t>() == 10);
    CHECK(counters["final_state"].size() == 2);
    std::uint64_t events = 0;
    for (const auto& c : counters["arrivals_by_stream"]) events += c.get<std::uint64_t>();
    for (const auto& c : counters["departures_by_station"]) events += c.get<std::uint64_t>();
    CHECK(events == 10);
}

TEST_CASE("reports render deterministically with sorted keys") {
    json a;
    a["zeta"] = 1;
    a["alpha"] = 2;
    json b;
    b["alpha"] = 2;
    b["zeta"] = 1;
    const std::string ra = jlw::render_report(a);
    CHECK(ra == jlw::render_report(b));
    CHECK(ra.back() == '\n');
    CHECK(ra.find("\"alpha\"") < ra.find("\"zeta\""));
}
