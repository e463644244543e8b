#include "dopplerline/characteristics.hpp"
#include "dopplerline/errors.hpp"
#include "dopplerline/line_model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace dopplerline;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kOmega = 2.0 * std::numbers::pi * 4e9;

WavePacketSpec packet(double tau = 15e-9) {
    WavePacketSpec wp;
    wp.omega_in = kOmega;
    wp.tau_wp = tau;
    return wp;
}

ControlPulseSpec rect(double amp, double duration, double delay = 5e-9) {
    ControlPulseSpec cp;
    cp.shape = RectPulse{amp, duration};
    cp.delay = delay;
    return cp;
}

const OracleOptions kSimple{FrontModel::SimpleWave, 0.0, 0.0, 0.0, ShiftLaw::Exact};

// Entry time of the packet centre for an encounter delay.
double centre_entry(double delay, const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec& cp) {
    const double mid = cp.delay + 0.5 * std::get<RectPulse>(cp.shape).rise;
    return packet_delay_for(delay, line, wp, cp, mid) + 0.5 * wp.tau_wp;
}

}  // namespace

TEST_CASE("free rays take tau_p and keep their frequency") {
    const LineSpec line = default_line();
    for (Port p : {Port::Left, Port::Right}) {
        const RayResult r = trace_point(3e-9, line, p);
        CHECK_THAT(r.exit_time - r.entry_time, WithinAbs(40e-9, 1e-14));
        CHECK(r.omega_ratio == 1.0);
        CHECK(r.crossings.empty());
    }
}

TEST_CASE("a rigid front at v0 gives the moving-interface ratio") {
    const LineSpec line = default_line();
    const ControlPulseSpec cp = rect(1.62e-3, 100e-9);
    const OracleOptions rigid{FrontModel::Rigid, 0.0, 0.0, 0.0, ShiftLaw::Quadratic};
    const RayResult r = trace_point(cp.delay + 0.1e-9 - 20e-9, line, cp, rigid);
    REQUIRE(r.crossings.size() == 1);
    const double v0 = line.velocity();
    CHECK_THAT(r.omega_ratio, WithinRel(doppler_ratio({-v0, v0, phase_velocity(1.62e-3, line)}), 1e-12));
    // The packet is halfway in when the front enters; they meet at three quarters of the line.
    CHECK_THAT(r.crossings[0].x, WithinRel(0.75 * line.length, 1e-3));
}

TEST_CASE("simple-wave rising front matches the exact square-root law") {
    const LineSpec line = default_line();
    for (double amp : {0.5e-3, 1.0e-3, 1.62e-3, 2.0e-3}) {
        const ControlPulseSpec cp = rect(amp, 100e-9);
        const RayResult r = trace_point(cp.delay - 20e-9, line, cp, kSimple);
        const double exact = std::sqrt(phase_velocity(amp, line) / line.velocity());
        CHECK_THAT(r.omega_ratio - 1.0, WithinRel(exact - 1.0, 2e-3));
        // Quadratic law agrees to first order.
        if (amp <= 1e-3) CHECK_THAT((r.omega_ratio - 1.0) * kOmega, WithinRel(shift_from_current(kOmega, amp, line), 0.05));
    }
}

TEST_CASE("crossing both fronts restores the carrier") {
    const LineSpec line = default_line();
    const WavePacketSpec wp = packet();
    const ControlPulseSpec cp = rect(1.62e-3, 30e-9);
    const RayResult r = trace_point(centre_entry(55e-9, line, wp, cp), line, cp, kSimple);
    CHECK(r.crossings.size() == 2);
    CHECK_THAT(r.omega_ratio, WithinAbs(1.0, 1e-4));
}

TEST_CASE("entry_time_for_exit inverts the ray map") {
    const LineSpec line = default_line();
    const ControlPulseSpec cp = rect(1.8e-3, 30e-9);
    for (double entry : {-30e-9, -5e-9, 10e-9, 30e-9}) {
        const RayResult r = trace_point(entry, line, cp, kSimple);
        CHECK_THAT(entry_time_for_exit(r.exit_time, line, cp, kSimple), WithinAbs(entry, 1e-13));
    }
}

TEST_CASE("condition boundaries of the 30 ns pulse") {
    const LineSpec line = default_line();
    const WavePacketSpec wp = packet();
    const ControlPulseSpec cp = rect(1.62e-3, 30e-9);
    const ConditionBoundaries b = condition_boundaries(line, wp, cp);
    const double sep = 29.8e-9;
    const double slow = line.velocity() / phase_velocity(1.62e-3, line);
    CHECK(b.red_start == 0.0);
    CHECK_THAT(b.cancel_start, WithinRel(2.0 * sep / (1.0 + slow), 1e-12));
    CHECK_THAT(b.blue_start, WithinRel(80e-9, 1e-12));
    CHECK_THAT(b.blue_end, WithinRel(80e-9 + sep, 1e-12));
    CHECK(classify_condition(-20e-9, line, wp, cp) == Condition::NoMeeting);
    CHECK(classify_condition(14.65e-9, line, wp, cp) == Condition::RedOnly);
    CHECK(classify_condition(54.65e-9, line, wp, cp) == Condition::Cancel);
    CHECK(classify_condition(94.9e-9, line, wp, cp) == Condition::BlueOnly);
    CHECK(classify_condition(130e-9, line, wp, cp) == Condition::NoMeeting);
}

TEST_CASE("classification agrees with ray-traced crossings away from the boundaries") {
    const LineSpec line = default_line();
    const WavePacketSpec wp = packet();
    for (double duration : {30e-9, 40e-9, 100e-9}) {
        const ControlPulseSpec cp = rect(1.58e-3, duration);
        const ConditionBoundaries b = condition_boundaries(line, wp, cp);
        for (double d = -10e-9; d < b.blue_end + 10e-9; d += 1e-9) {
            const bool near = std::abs(d - b.red_start) < 1.5e-9 || std::abs(d - b.cancel_start) < 1.5e-9 ||
                              std::abs(d - b.inside_start) < 1.5e-9 || std::abs(d - b.blue_start) < 1.5e-9 ||
                              std::abs(d - b.blue_end) < 1.5e-9;
            if (near) continue;
            const RayResult r = trace_point(centre_entry(d, line, wp, cp), line, cp, kSimple);
            Condition traced = Condition::NoMeeting;
            if (r.crossings.size() == 2) traced = Condition::Cancel;
            if (r.crossings.size() == 1) traced = r.crossings[0].delta_i > 0.0 ? Condition::RedOnly : Condition::BlueOnly;
            INFO("duration " << duration * 1e9 << " ns, delay " << d * 1e9 << " ns");
            CHECK(classify_condition(d, line, wp, cp) == traced);
        }
    }
}

TEST_CASE("a plateau longer than the round trip has no cancel window") {
    const LineSpec line = default_line();
    const ConditionBoundaries b = condition_boundaries(line, packet(), rect(0.52e-3, 100e-9));
    CHECK(b.cancel_start == b.inside_start);
    const double slow = line.velocity() / phase_velocity(0.52e-3, line);
    CHECK_THAT(b.blue_start, WithinRel(99.8e-9 - (slow - 1.0) * 40e-9, 1e-12));
}

TEST_CASE("boundaries need a counter-propagating rectangular pulse") {
    const LineSpec line = default_line();
    ControlPulseSpec same = rect(1e-3, 30e-9);
    same.port = Port::Left;
    CHECK_THROWS_AS(condition_boundaries(line, packet(), same), ValidationError);
    ControlPulseSpec arb;
    arb.shape = ArbitraryPulse{Waveform(20e9, 0.0, {0.0, 1e-3, 1e-3, 0.0})};
    CHECK_THROWS_AS(condition_boundaries(line, packet(), arb), ValidationError);
}

TEST_CASE("quadratic-law prediction for a point leaving during the plateau") {
    const LineSpec line = default_line();
    const ControlPulseSpec cp = rect(1.2e-3, 100e-9);
    const OracleOptions quad{FrontModel::SimpleWave, 0.0, 0.0, 0.0, ShiftLaw::Quadratic};
    const double omega = predict_instantaneous(cp.delay + 30e-9, line, packet(), cp, quad);
    CHECK_THAT(omega - kOmega, WithinRel(shift_from_current(kOmega, 1.2e-3, line), 1e-9));
    const OracleOptions exact = kSimple;
    const double omega_x = predict_instantaneous(cp.delay + 30e-9, line, packet(), cp, exact);
    CHECK_THAT(omega_x / kOmega, WithinRel(std::sqrt(phase_velocity(1.2e-3, line) / line.velocity()), 1e-12));
}

TEST_CASE("spacetime diagram carries three worldlines") {
    const LineSpec line = default_line();
    const ControlPulseSpec cp = rect(1.62e-3, 30e-9);
    WavePacketSpec wp = packet();
    wp.delay = 10e-9;
    const SpacetimeDiagram d = spacetime_diagram(line, wp, &cp, 40, kSimple);
    CHECK(d.t_axis.size() == 40);
    CHECK(d.x_axis.size() == 40);
    CHECK(d.current.size() == 1600);
    CHECK(d.worldlines.size() == 3);
    CHECK_THROWS_AS(spacetime_diagram(line, wp, &cp, 1, kSimple), ValidationError);
}
