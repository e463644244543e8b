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
}

TEST_CASE("inductance and velocity follow the kinetic-inductance law") {
    LineSpec line = default_line();
    line.c4 = 0.2;
    for (double i : {0.0, 0.5e-3, 1.5e-3, 2.4e-3}) {
        const double x = (i / line.i_star) * (i / line.i_star);
        const double l = line.l0 * (1.0 + x + 0.2 * x * x);
        CHECK_THAT(kinetic_inductance(i, line), WithinRel(l, 1e-12));
        CHECK_THAT(phase_velocity(i, line), WithinRel(1.0 / std::sqrt(l * line.c), 1e-12));
        CHECK_THAT(characteristic_impedance(i, line), WithinRel(std::sqrt(l / line.c), 1e-12));
    }
    CHECK_THROWS_AS(kinetic_inductance(2.5e-3, line), CriticalCurrentExceeded);
}

TEST_CASE("velocity decreases monotonically with current") {
    const LineSpec line = default_line();
    double prev = phase_velocity(0.0, line);
    for (int k = 1; k < 25; ++k) {
        const double v = phase_velocity(1e-4 * k, line);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("first-order velocity approximation agrees at small current") {
    const LineSpec line = default_line();
    const double i = 0.3e-3;
    CHECK_THAT(phase_velocity_approx(i, line), WithinRel(phase_velocity(i, line), 1e-4));
}

TEST_CASE("Josephson chain inductance") {
    LineSpec line = default_line();
    line.model = NonlinearityModel::JosephsonChain;
    const double i = 1.8e-3;
    CHECK_THAT(kinetic_inductance(i, line), WithinRel(line.l0 / std::sqrt(1.0 - std::pow(i / line.i_crit, 2)), 1e-12));
    CHECK_THROWS_AS(shift_from_current(kOmega, i, line), ValidationError);
}

TEST_CASE("doppler ratio of a moving interface") {
    const double v1 = 6e6;
    const double v2 = 5.9e6;
    CHECK_THAT(doppler_ratio({0.0, v1, v2}), WithinAbs(1.0, 1e-15));
    CHECK_THAT(doppler_ratio({-v1, v1, v1}), WithinAbs(1.0, 1e-15));
    // Head-on front at -v1: (1 + 1) / (1 + v1/v2).
    CHECK_THAT(doppler_ratio({-v1, v1, v2}), WithinRel(2.0 / (1.0 + v1 / v2), 1e-14));
    CHECK_THROWS_AS(doppler_ratio({v2, v1, v2}), SingularInterface);
    CHECK_THROWS_AS(doppler_ratio({0.0, -v1, v2}), ValidationError);
}

TEST_CASE("crossing a front and back composes to identity") {
    const LineSpec line = default_line();
    const double v0 = line.velocity();
    const double v1 = phase_velocity(1.62e-3, line);
    const std::vector<DopplerArgs> there_back{{-v0, v0, v1}, {-v0, v1, v0}};
    CHECK_THAT(compose_doppler(kOmega, there_back), WithinRel(kOmega, 1e-14));
}

TEST_CASE("quadratic shift law equals the composed head-on ratio at small current") {
    const LineSpec line = default_line();
    const double v0 = line.velocity();
    for (int k = 1; k <= 10; ++k) {
        const double i = 0.01 * k * line.i_star;
        const DopplerArgs front{-v0, v0, phase_velocity(i, line)};
        const double exact = compose_doppler(kOmega, std::span<const DopplerArgs>(&front, 1)) - kOmega;
        const double law = shift_from_current(kOmega, i, line);
        CHECK_THAT(law, WithinRel(exact, 0.01));
    }
}

TEST_CASE("shift law: sign, scaling and quartic term") {
    LineSpec line = default_line();
    const double s1 = shift_from_current(kOmega, 1e-3, line);
    const double s2 = shift_from_current(kOmega, 2e-3, line);
    CHECK(s1 < 0.0);
    CHECK_THAT(s2 / s1, WithinRel(4.0, 1e-12));
    CHECK_THAT(shift_from_current(kOmega, -1e-3, line), WithinRel(s1, 1e-12));
    line.c4 = -0.5;
    const double x = std::pow(1e-3 / line.i_star, 2);
    CHECK_THAT(shift_from_current(kOmega, 1e-3, line), WithinRel(-0.25 * kOmega * (x - 0.5 * x * x), 1e-12));
}

TEST_CASE("flux and current are inverse maps") {
    LineSpec line = default_line();
    line.c4 = 0.3;
    for (double i : {-2.2e-3, -0.4e-3, 0.0, 1e-6, 1.1e-3, 2.45e-3}) {
        const double phi = flux_from_current(i, line);
        CHECK_THAT(current_from_flux(phi, line), WithinAbs(i, 1e-15));
    }
    CHECK_THROWS_AS(current_from_flux(flux_from_current(2.49e-3, line) * 1.1, line), CriticalCurrentExceeded);
}

TEST_CASE("simple-wave voltage integrates the impedance") {
    const LineSpec line = default_line();
    const double i = 1.6e-3;
    const double h = 1e-7;
    const double slope = (simple_wave_voltage(i + h, line) - simple_wave_voltage(i - h, line)) / (2.0 * h);
    CHECK_THAT(slope, WithinRel(characteristic_impedance(i, line), 1e-7));
    CHECK(simple_wave_voltage(0.0, line) == 0.0);
    // Trapezoid reference.
    double v = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double a = i * k / n;
        const double b = i * (k + 1) / n;
        v += 0.5 * (characteristic_impedance(a, line) + characteristic_impedance(b, line)) * (b - a);
    }
    CHECK_THAT(simple_wave_voltage(i, line), WithinRel(v, 1e-9));
}
