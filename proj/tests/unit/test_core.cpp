#include "dopplerline/core.hpp"
#include "dopplerline/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace dopplerline;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("default device reproduces its delay, impedance and velocity") {
    const LineSpec line = default_line();
    CHECK_THAT(line.propagation_time(), WithinRel(40e-9, 1e-12));
    CHECK_THAT(line.impedance(), WithinRel(50.0, 1e-12));
    CHECK_THAT(line.velocity(), WithinRel(0.24 / 40e-9, 1e-12));
    CHECK_THAT(line.dx() / line.velocity(), WithinRel(6.25e-12, 1e-9));
    CHECK_NOTHROW(line.validate());
}

TEST_CASE("line invariants are enforced") {
    LineSpec line = default_line();
    line.i_crit = line.i_star * 1.1;
    CHECK_THROWS_AS(line.validate(), ValidationError);
    line = default_line();
    line.n_cells = 0;
    CHECK_THROWS_AS(line.validate(), ValidationError);
    line = default_line();
    line.c = -1.0;
    CHECK_THROWS_AS(line.validate(), ValidationError);
}

TEST_CASE("waveform interpolates linearly and is zero outside its support") {
    const Waveform w(10.0, 1.0, {0.0, 1.0, 4.0});
    CHECK_THAT(w.at(1.05), WithinAbs(0.5, 1e-12));
    CHECK_THAT(w.at(1.15), WithinAbs(2.5, 1e-12));
    CHECK(w.at(0.5) == 0.0);
    CHECK(w.at(2.0) == 0.0);
    CHECK_THAT(w.end_time(), WithinRel(1.3, 1e-12));
    CHECK(w.peak_abs() == 4.0);
}

TEST_CASE("resampling preserves a slow signal") {
    std::vector<double> s(1000);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::sin(2e-3 * static_cast<double>(k));
    const Waveform w(1.0, 0.0, s);
    const Waveform r = w.resampled(3.0);
    CHECK(r.size() == 3000);
    for (std::size_t k = 3; k < r.size() - 3; k += 97) CHECK_THAT(r[k], WithinAbs(std::sin(2e-3 * r.time(k)), 1e-5));
}

TEST_CASE("packet and pulse specs validate against the device") {
    const LineSpec line = default_line();
    WavePacketSpec wp;
    wp.omega_in = 2.0 * M_PI * 4e9;
    wp.tau_wp = 15e-9;
    CHECK_NOTHROW(wp.validate(line));
    CHECK_THAT(wp.carrier_hz(), WithinRel(4e9, 1e-12));
    wp.tau_wp = 0.0;
    CHECK_THROWS_AS(wp.validate(line), ValidationError);

    ControlPulseSpec cp;
    cp.shape = RectPulse{1.62e-3, 30e-9};
    CHECK_NOTHROW(cp.validate(line));
    CHECK(cp.peak_current() == 1.62e-3);
    CHECK_THAT(cp.duration(), WithinRel(30e-9, 1e-12));
    cp.shape = RectPulse{2.6e-3, 30e-9};
    CHECK_THROWS_AS(cp.validate(line), CriticalCurrentExceeded);
}

TEST_CASE("envelopes validate their parameters") {
    CHECK_NOTHROW(validate(EnvelopeSpec{RectangularEnvelope{}}));
    CHECK_THROWS_AS(validate(EnvelopeSpec{StaircaseEnvelope{{}}}), ValidationError);
    CHECK_THROWS_AS(validate(EnvelopeSpec{StaircaseEnvelope{{0.5, 1.5}}}), ValidationError);
    CHECK_THROWS_AS(validate(EnvelopeSpec{GaussianEnvelope{0.0}}), ValidationError);
}

TEST_CASE("errors keep their type when context is added") {
    try {
        try {
            throw CriticalCurrentExceeded(3e-3, 2.5e-3, "branch 7");
        } catch (const Error&) {
            rethrow_with_context("run r001");
        }
        FAIL("no exception");
    } catch (const CriticalCurrentExceeded& e) {
        CHECK(std::string(e.what()).rfind("run r001: ", 0) == 0);
        CHECK(e.current() == 3e-3);
    }
}
