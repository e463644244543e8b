#pragma once

// Closed-form physics of the current-tunable line.

#include "dopplerline/core.hpp"

#include <span>

namespace dopplerline {

/// Front velocity v (signed, positive along the incident wave) between media with phase velocities v1 and v2.
struct DopplerArgs {
    double v = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
};

/// Inductance per unit length at current i; L0 (1 + x + c4 x^2), x = (i/I*)^2, or L0 / sqrt(1 - (i/Ic)^2)
/// for a Josephson chain. Throws CriticalCurrentExceeded for |i| >= i_crit.
double kinetic_inductance(double i, const LineSpec& spec);

/// Exact 1 / sqrt(L(i) c).
double phase_velocity(double i, const LineSpec& spec);

/// Second-order expansion v0 (1 - i^2 / (2 I*^2)).
double phase_velocity_approx(double i, const LineSpec& spec);

/// sqrt(L(i) / c).
double characteristic_impedance(double i, const LineSpec& spec);

/// omega2 / omega1 = (1 - v/v1) / (1 - v/v2). Throws SingularInterface when v == v2.
double doppler_ratio(const DopplerArgs& args);

/// Frequency shift of a rising front of height i_cp meeting the packet head-on at v0:
/// -(omega_in / 4) (x + c4 x^2), x = (i_cp/I*)^2. Kinetic-inductance model only.
double shift_from_current(double omega_in, double i_cp, const LineSpec& spec);

/// omega_in times the product of doppler_ratio over the crossings.
double compose_doppler(double omega_in, std::span<const DopplerArgs> crossings);

/// Flux per unit length, the integral of L from 0 to i.
double flux_from_current(double i, const LineSpec& spec);

/// Inverse of flux_from_current. `guess` seeds the Newton iteration of the kinetic-inductance model.
/// Throws CriticalCurrentExceeded when the flux lies beyond the critical current.
double current_from_flux(double phi, const LineSpec& spec, double guess = 0.0);

/// Voltage of a simple wave carrying current i into an unbiased line, the integral of sqrt(L/c) from 0 to i.
double simple_wave_voltage(double i, const LineSpec& spec);

}  // namespace dopplerline
