#include "dopplerline/errors.hpp"
#include "dopplerline/experiments.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <numbers>

using namespace dopplerline;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// A short, coarse device keeps these runs around a second.
Scenario small_scenario() {
    Scenario s;
    s.name = "small";
    s.line = line_from_delay(10e-9, 50.0, 0.06, 6.15e-3, 2.5e-3, 0.0, NonlinearityModel::KineticInductance, 800);
    s.wp.omega_in = 2.0 * std::numbers::pi * 4e9;
    s.wp.tau_wp = 6e-9;
    ControlPulseSpec cp;
    cp.shape = RectPulse{1.5e-3, 40e-9};
    cp.delay = 2e-9;
    s.cp = cp;
    s.sweep.delays = {5e-9};
    s.ddc = {FreqSweep{linspace(3.8e9, 4.1e9, 61)}, FixedFd{0.0}};
    s.analyses = {AnalysisTag::GlobalShift, AnalysisTag::PhaseShift};
    s.jobs = 1;
    s.write_files = false;
    return s;
}

}  // namespace

TEST_CASE("linspace and hashing helpers") {
    CHECK(linspace(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("runs are enumerated over amplitudes, envelopes and delays") {
    Scenario s = small_scenario();
    s.sweep.delays = {1e-9, 2e-9, 3e-9};
    s.sweep.cp_amplitudes = {0.5e-3, 1e-3};
    s.sweep.envelopes = {RectangularEnvelope{}, GaussianEnvelope{1e-9}};
    s.reference_runs = true;
    const auto runs = enumerate_runs(s);
    CHECK(runs.size() == 2 * 2 * 3 + 2 * 3);
    for (std::size_t k = 0; k < runs.size(); ++k) CHECK(runs[k].index == k);
    CHECK(runs.back().reference);
    CHECK_FALSE(runs.back().cp_amplitude);
    CHECK(runs.front().id() == "r000_d1ns_a0.5mA_e0");
}

TEST_CASE("a delay places the packet centre relative to the rising front") {
    Scenario s = small_scenario();
    for (double d : {-8e-9, 0.0, 5e-9, 12e-9}) {
        RunCoordinates c;
        c.delay = d;
        const auto [wp, cp] = realise_run(s, c);
        REQUIRE(cp);
        CHECK(wp.delay >= 0.0);
        CHECK(cp->delay >= 0.0);
        const double centre_entry = wp.delay + 0.5 * wp.tau_wp;
        const double rise_mid = cp->delay + 0.1e-9;
        CHECK_THAT(centre_entry + s.line.propagation_time() - rise_mid, WithinAbs(d, 1e-15));
    }
    RunCoordinates ref;
    ref.delay = 5e-9;
    ref.reference = true;
    CHECK_FALSE(realise_run(s, ref).second);
}

TEST_CASE("scenario validation catches inconsistent setups") {
    Scenario s = small_scenario();
    s.analyses.push_back(AnalysisTag::AmplitudeFit);
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_scenario();
    s.sweep.cp_amplitudes = {1e-3, 2.6e-3};
    CHECK_THROWS_AS(s.validate(), CriticalCurrentExceeded);
    s = small_scenario();
    s.ddc = {FixedFd{0.0}};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_scenario();
    s.cp.reset();
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_scenario();
    s.ddc = {FixedFd{0.5e9}};
    s.analyses = {AnalysisTag::PhaseShift};
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("a red-only run is measured consistently by both estimators") {
    Scenario s = small_scenario();
    const ScenarioResult r = run_scenario(s);
    REQUIRE(r.runs.size() == 1);
    const RunResult& run = r.runs.front();
    CHECK(run.condition == Condition::RedOnly);
    REQUIRE(run.global_shift_hz);
    REQUIRE(run.phase_shift_hz);
    CHECK(run.oracle_centre_hz < 0.0);
    CHECK_THAT(*run.global_shift_hz, WithinRel(run.oracle_centre_hz, 0.05));
    CHECK_THAT(*run.phase_shift_hz, WithinRel(run.oracle_centre_hz, 0.05));
}

TEST_CASE("the output tree holds per-run and scenario files") {
    Scenario s = small_scenario();
    s.write_files = true;
    s.output_dir = std::filesystem::temp_directory_path() / "dopplerline_tree_test";
    std::filesystem::remove_all(s.output_dir);
    const ScenarioResult r = run_scenario(s);
    const auto run_dir = r.directory / r.runs.front().coord.id();
    for (const char* f : {"ports.csv", "map.csv", "fits.txt", "provenance.txt", "iq_4000MHz.csv"})
        CHECK(std::filesystem::exists(run_dir / f));
    for (const char* f : {"summary.csv", "provenance.txt", "fits.txt"}) CHECK(std::filesystem::exists(r.directory / f));
    std::filesystem::remove_all(s.output_dir);
}

TEST_CASE("run errors name the failing run") {
    Scenario s = small_scenario();
    s.duration = 1e-9;  // shorter than tau_p, rejected by the solver
    try {
        run_scenario(s);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK_THAT(std::string(e.what()), ContainsSubstring("run r000"));
    }
}

TEST_CASE("builtin catalog") {
    const auto cat = builtin_catalog();
    std::vector<std::string> names;
    for (const auto& s : cat) {
        names.push_back(s.name);
        CHECK_NOTHROW(s.validate());
        CHECK_FALSE(s.description.empty());
    }
    CHECK(names == std::vector<std::string>{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "edf2", "edf3"});
    CHECK(enumerate_runs(builtin_scenario("fig3")).size() == 70);
    CHECK_THROWS_AS(builtin_scenario("fig9"), ValidationError);
}
