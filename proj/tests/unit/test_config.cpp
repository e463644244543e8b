#include "dopplerline/config.hpp"
#include "dopplerline/errors.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>

using namespace dopplerline;
using Catch::Matchers::WithinRel;

TEST_CASE("every builtin scenario survives a JSON round trip") {
    for (const Scenario& s : builtin_catalog()) {
        INFO(s.name);
        const std::string text = scenario_to_json(s);
        const Scenario back = scenario_from_json(text);
        CHECK(scenario_to_json(back) == text);
        CHECK(config_hash(back) == config_hash(s));
        CHECK(enumerate_runs(back).size() == enumerate_runs(s).size());
        CHECK_NOTHROW(back.validate());
    }
}

TEST_CASE("the hash ignores where and how a scenario runs") {
    Scenario a = builtin_scenario("fig2");
    Scenario b = a;
    b.output_dir = "elsewhere";
    b.jobs = 3;
    b.write_files = false;
    CHECK(config_hash(a) == config_hash(b));
    b.sweep.delays.back() += 1e-9;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hash_hex(0x1234).size() == 16);
}

TEST_CASE("unit strings, axes and staircase pulses in config files") {
    const Scenario s = scenario_from_json(R"({
        // comments are allowed
        "name": "mini",
        "line": {"tau_p": "40ns", "z0": "50ohm", "length": "0.24m", "i_star": "6.15mA", "i_crit": "2.5mA", "n_cells": 800},
        "wp": {"carrier": "4GHz", "tau": "15ns"},
        "cp": {"type": "staircase", "levels": ["0.5mA", "1mA"], "step": "4ns", "ramp": "0.2ns"},
        "sweep": {"delays": {"start": "0ns", "stop": "20ns", "count": 5}},
        "ddc": [{"fixed": 0}],
        "analyses": ["phase_shift"]
    })");
    CHECK(s.name == "mini");
    CHECK(s.line.n_cells == 800);
    CHECK_THAT(s.line.propagation_time(), WithinRel(40e-9, 1e-12));
    CHECK_THAT(s.wp.carrier_hz(), WithinRel(4e9, 1e-12));
    CHECK(s.sweep.delays.size() == 5);
    CHECK_THAT(s.sweep.delays[1], WithinRel(5e-9, 1e-12));
    REQUIRE(s.cp);
    CHECK_THAT(s.cp->peak_current(), WithinRel(1e-3, 1e-12));
    CHECK_THAT(s.cp->duration(), WithinRel(8.2e-9, 1e-2));
}

TEST_CASE("malformed configs are validation errors") {
    CHECK_THROWS_AS(scenario_from_json("{"), ValidationError);
    CHECK_THROWS_AS(scenario_from_json("[]"), ValidationError);
    CHECK_THROWS_AS(scenario_from_json(R"({"wp": {"tau": "15 furlongs"}})"), ValidationError);
    CHECK_THROWS_AS(scenario_from_json(R"({"cp": {"type": "triangle"}})"), ValidationError);
    CHECK_THROWS_AS(scenario_from_json(R"({"analyses": ["astrology"]})"), ValidationError);
    CHECK_THROWS_AS(scenario_from_json(R"({"ddc": [{"nothing": 1}]})"), ValidationError);
}

TEST_CASE("config files on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "dopplerline_config_test";
    std::filesystem::create_directories(dir);
    const Scenario s = builtin_scenario("fig4");
    save_scenario(s, dir / "fig4.json");
    CHECK(config_hash(load_scenario(dir / "fig4.json")) == config_hash(s));
    CHECK_THROWS_AS(load_scenario(dir / "missing.json"), IoError);
    std::filesystem::remove_all(dir);
}
