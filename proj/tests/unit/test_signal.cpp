#include "dopplerline/errors.hpp"
#include "dopplerline/signal.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace dopplerline;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
WavePacketSpec packet() {
    WavePacketSpec wp;
    wp.omega_in = 2.0 * std::numbers::pi * 4e9;
    wp.tau_wp = 15e-9;
    wp.delay = 3e-9;
    return wp;
}
}  // namespace

TEST_CASE("rectangular packet is a gated cosine starting at its delay") {
    const WavePacketSpec wp = packet();
    const Waveform w = synth_wave_packet(wp, 160e9);
    CHECK_THAT(w.t0(), WithinAbs(wp.delay, 1e-18));
    CHECK_THAT(w.duration(), WithinRel(wp.tau_wp, 1e-3));
    for (std::size_t k = 0; k < w.size(); k += 37) {
        const double t = w.time(k) - wp.delay;
        CHECK_THAT(w[k], WithinAbs(wp.amplitude * std::cos(wp.omega_in * t), 1e-12));
    }
    CHECK(w.at(wp.delay - 1e-9) == 0.0);
    CHECK(w.at(wp.delay + wp.tau_wp + 1e-9) == 0.0);
}

TEST_CASE("undersampled carriers are rejected") {
    CHECK_THROWS_AS(synth_wave_packet(packet(), 30e9), ValidationError);
}

TEST_CASE("envelope shapes") {
    const double tau = 20e-9;
    CHECK(envelope_value(RectangularEnvelope{}, 5e-9, tau) == 1.0);
    CHECK(envelope_value(RectangularEnvelope{}, -1e-12, tau) == 0.0);
    CHECK(envelope_value(RectangularEnvelope{}, tau, tau) == 0.0);
    const StaircaseEnvelope st{{0.25, 1.0, 0.5, 0.75}};
    CHECK(envelope_value(st, 1e-9, tau) == 0.25);
    CHECK(envelope_value(st, 6e-9, tau) == 1.0);
    CHECK(envelope_value(st, 19e-9, tau) == 0.75);
    const GaussianEnvelope g{4e-9};
    CHECK_THAT(envelope_value(g, 10e-9, tau), WithinAbs(1.0, 1e-12));
    CHECK_THAT(envelope_value(g, 14e-9, tau), WithinRel(std::exp(-0.5), 1e-9));
    const TableEnvelope table{Waveform(1e9, 0.0, {0.0, 0.5, 1.0, 0.5, 0.0})};
    CHECK_THAT(envelope_value(table, 1.5e-9, tau), WithinAbs(0.75, 1e-12));
}

TEST_CASE("rectangular control pulse has linear ramps inside its duration") {
    ControlPulseSpec cp;
    cp.shape = RectPulse{1.6e-3, 30e-9, 1e-9, 2e-9};
    CHECK(control_pulse_value(cp, -1e-12) == 0.0);
    CHECK_THAT(control_pulse_value(cp, 0.5e-9), WithinRel(0.8e-3, 1e-9));
    CHECK_THAT(control_pulse_value(cp, 15e-9), WithinRel(1.6e-3, 1e-12));
    CHECK_THAT(control_pulse_value(cp, 29e-9), WithinRel(0.8e-3, 1e-9));
    CHECK(control_pulse_value(cp, 30.1e-9) == 0.0);
    const Waveform w = synth_control_pulse(cp, 160e9, 2.5e-3);
    CHECK_THAT(w.peak_abs(), WithinRel(1.6e-3, 1e-12));
}

TEST_CASE("control pulse at the critical current is refused") {
    ControlPulseSpec cp;
    cp.shape = RectPulse{2.5e-3, 30e-9};
    CHECK_THROWS_AS(synth_control_pulse(cp, 160e9, 2.5e-3), CriticalCurrentExceeded);
}

TEST_CASE("waveform CSV round trip") {
    const Waveform w(20e9, 1e-9, {0.0, 1e-3, 2e-3, 1.5e-3, 0.0});
    std::stringstream ss;
    write_waveform_csv(w, ss);
    const Waveform r = read_waveform_csv(ss);
    REQUIRE(r.size() == w.size());
    CHECK_THAT(r.sample_rate(), WithinRel(20e9, 1e-9));
    CHECK_THAT(r.t0(), WithinAbs(1e-9, 1e-18));
    for (std::size_t k = 0; k < w.size(); ++k) CHECK_THAT(r[k], WithinAbs(w[k], 1e-15));
}

TEST_CASE("malformed CSV is a validation error") {
    std::stringstream one("time_s,value\n0,1\n");
    CHECK_THROWS_AS(read_waveform_csv(one), ValidationError);
    std::stringstream bad("time_s,value\n0,1\n1e-9,abc\n");
    CHECK_THROWS_AS(read_waveform_csv(bad), ValidationError);
}
