#pragma once

// Stimulus synthesis and waveform CSV IO.

#include "dopplerline/core.hpp"

#include <filesystem>
#include <iosfwd>

namespace dopplerline {

/// Envelope value in [0, 1] at time t since the packet start; zero outside [0, tau).
double envelope_value(const EnvelopeSpec& env, double t, double tau);

/// amplitude * env(t) * cos(omega_in t) on [0, tau_wp), sampled at `sample_rate`, with t0 = spec.delay.
/// Requires at least 10 samples per carrier period.
Waveform synth_wave_packet(const WavePacketSpec& spec, double sample_rate);

/// Control-pulse current profile relative to its start, evaluated at an arbitrary time.
double control_pulse_value(const ControlPulseSpec& spec, double t);

/// Control-pulse current (A) with t0 = spec.delay. Rect pulses need rise, fall >= 2 / sample_rate.
/// Throws CriticalCurrentExceeded when the amplitude reaches `i_crit`.
Waveform synth_control_pulse(const ControlPulseSpec& spec, double sample_rate, double i_crit);

/// Staircase current table: each level held for `step`, joined by linear ramps of `ramp`, back to zero
/// after the last level. Time is relative to the pulse start.
Waveform staircase_pulse(const std::vector<double>& levels, double step, double ramp, double sample_rate = 20e9);

/// Two-column CSV "time_s,value". The sample rate is inferred from the first two rows.
Waveform read_waveform_csv(const std::filesystem::path& path);
Waveform read_waveform_csv(std::istream& in);
void write_waveform_csv(const Waveform& w, const std::filesystem::path& path);
void write_waveform_csv(const Waveform& w, std::ostream& out);

}  // namespace dopplerline
