#include "dopplerline/line_model.hpp"

#include "dopplerline/errors.hpp"

#include <array>
#include <cmath>

namespace dopplerline {

namespace {

void check_current(double i, const LineSpec& spec) {
    if (!std::isfinite(i)) throw ValidationError("current must be finite");
    if (std::abs(i) >= spec.i_crit) throw CriticalCurrentExceeded(i, spec.i_crit);
}

}  // namespace

double kinetic_inductance(double i, const LineSpec& spec) {
    check_current(i, spec);
    if (spec.model == NonlinearityModel::JosephsonChain) {
        const double r = i / spec.i_crit;
        return spec.l0 / std::sqrt(1.0 - r * r);
    }
    const double x = (i / spec.i_star) * (i / spec.i_star);
    return spec.l0 * (1.0 + x + spec.c4 * x * x);
}

double phase_velocity(double i, const LineSpec& spec) { return 1.0 / std::sqrt(kinetic_inductance(i, spec) * spec.c); }

double phase_velocity_approx(double i, const LineSpec& spec) {
    check_current(i, spec);
    const double x = (i / spec.i_star) * (i / spec.i_star);
    return spec.velocity() * (1.0 - 0.5 * x);
}

double characteristic_impedance(double i, const LineSpec& spec) {
    return std::sqrt(kinetic_inductance(i, spec) / spec.c);
}

double doppler_ratio(const DopplerArgs& a) {
    if (!(a.v1 > 0.0) || !(a.v2 > 0.0)) throw ValidationError("doppler_ratio: v1 and v2 must be positive");
    if (a.v == a.v2) throw SingularInterface("doppler_ratio: front velocity equals the transmitted phase velocity");
    return (1.0 - a.v / a.v1) / (1.0 - a.v / a.v2);
}

double shift_from_current(double omega_in, double i_cp, const LineSpec& spec) {
    if (spec.model != NonlinearityModel::KineticInductance)
        throw ValidationError("shift_from_current: only defined for the kinetic-inductance model");
    check_current(i_cp, spec);
    const double x = (i_cp / spec.i_star) * (i_cp / spec.i_star);
    return -0.25 * omega_in * (x + spec.c4 * x * x);
}

double compose_doppler(double omega_in, std::span<const DopplerArgs> crossings) {
    double omega = omega_in;
    for (const auto& c : crossings) omega *= doppler_ratio(c);
    return omega;
}

double flux_from_current(double i, const LineSpec& spec) {
    check_current(i, spec);
    if (spec.model == NonlinearityModel::JosephsonChain) return spec.l0 * spec.i_crit * std::asin(i / spec.i_crit);
    const double u = i / spec.i_star;
    const double u2 = u * u;
    return spec.l0 * spec.i_star * u * (1.0 + u2 / 3.0 + spec.c4 * u2 * u2 / 5.0);
}

double current_from_flux(double phi, const LineSpec& spec, double guess) {
    if (spec.model == NonlinearityModel::JosephsonChain) {
        const double arg = phi / (spec.l0 * spec.i_crit);
        if (std::abs(arg) >= 0.5 * 3.14159265358979323846) throw CriticalCurrentExceeded(spec.i_crit, spec.i_crit);
        const double i = spec.i_crit * std::sin(arg);
        if (std::abs(i) >= spec.i_crit) throw CriticalCurrentExceeded(i, spec.i_crit);
        return i;
    }
    const double target = phi / (spec.l0 * spec.i_star);
    const double c4 = spec.c4;
    double u = guess / spec.i_star;
    for (int it = 0; it < 50; ++it) {
        const double u2 = u * u;
        const double f = u * (1.0 + u2 / 3.0 + c4 * u2 * u2 / 5.0) - target;
        const double df = 1.0 + u2 + c4 * u2 * u2;
        const double du = f / df;
        u -= du;
        if (std::abs(du) <= 1e-15 * (1.0 + std::abs(u))) break;
    }
    const double i = u * spec.i_star;
    if (!std::isfinite(i) || std::abs(i) >= spec.i_crit) throw CriticalCurrentExceeded(i, spec.i_crit);
    return i;
}

double simple_wave_voltage(double i, const LineSpec& spec) {
    check_current(i, spec);
    // 8-point Gauss-Legendre on [0, i]; the integrand is smooth well below i_crit.
    static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                                 0.9602898564975363};
    static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                                   0.1012285362903763};
    const double half = 0.5 * i;
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (double sgn : {-1.0, 1.0}) {
            const double ii = half * (1.0 + sgn * nodes[k]);
            sum += weights[k] * std::sqrt(kinetic_inductance(ii, spec) / spec.c);
        }
    }
    return half * sum;
}

}  // namespace dopplerline
