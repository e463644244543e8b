#pragma once

// Digital down-conversion: complex mixing, two-stage FIR decimation, phase and instantaneous frequency.

#include "dopplerline/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dopplerline {

enum class Window { Hamming, Blackman };

std::string to_string(Window w);

/// Channel filter applied at the intermediate rate. decimation = 0 picks floor(rate_in / target_rate).
struct FilterSpec {
    double cutoff = 42e6;
    int taps = 255;
    Window window = Window::Blackman;
    int decimation = 0;
    double target_rate = 0.55e9;

    void validate(double rate_in) const;
};

/// Channel for the fixed-frequency phase method: 800 MHz cutoff, 47 taps, one decimation stage (~5.5 GS/s).
/// The wide band keeps filter ringing from the packet edges fast and small, so a short packet
/// still has a clean phase slope. Needs f_d above the cutoff.
FilterSpec phase_filter();

/// Resolved two-stage layout: an anti-alias FIR at the input rate decimating by d1, then the
/// channel FIR at rate_mid decimating by d2.
struct DdcPlan {
    double rate_in = 0.0;
    int d1 = 1;
    int d2 = 1;
    double rate_mid = 0.0;
    double rate_out = 0.0;
    std::vector<double> h1;  ///< anti-alias taps, unit DC gain
    std::vector<double> h2;  ///< channel taps, unit DC gain

    std::string describe() const;
};

DdcPlan plan_ddc(double rate_in, const FilterSpec& filt);

/// Windowed-sinc low-pass with unit DC gain. taps must be odd.
std::vector<double> design_lowpass(double cutoff, double rate, int taps, Window window);

/// |H(f)| of a symmetric FIR sampled at `rate`.
double fir_magnitude(const std::vector<double>& h, double f, double rate);

/// Overall baseband magnitude response of the plan at offset f.
double plan_magnitude(const DdcPlan& plan, double f);

/// 1 % to 99 % rise time of the channel step response.
double settling_time(const DdcPlan& plan);

struct IQTrace {
    double f_d = 0.0;
    double sample_rate = 0.0;
    double t0 = 0.0;
    std::vector<double> i;
    std::vector<double> q;
    std::string provenance;

    std::size_t size() const noexcept { return i.size(); }
    double time(std::size_t k) const { return t0 + static_cast<double>(k) / sample_rate; }
};

/// I + jQ = lowpass(w(t) exp(-j 2 pi f_d t)), decimated, zero-phase so t0 is preserved.
IQTrace down_convert(const Waveform& w, double f_d, const FilterSpec& filt);
IQTrace down_convert(const Waveform& w, double f_d, const DdcPlan& plan, const FilterSpec& filt);

/// sqrt(I^2 + Q^2).
Waveform magnitude(const IQTrace& tr);

/// phi = -(unwrapped arg(I + jQ)) relative to the first gated sample, over the contiguous run around the
/// magnitude peak where |I + jQ| >= gate * peak. Throws EmptyGate.
Waveform phase_unwrapped(const IQTrace& tr, double gate = 0.2);

/// -d phi / dt (rad/s) after a centred moving average of `smoothing` samples (odd, >= 3).
Waveform instantaneous_shift(const Waveform& phase, int smoothing);

/// Copy of w with seeded white Gaussian noise of standard deviation sigma.
Waveform add_gaussian_noise(const Waveform& w, double sigma, std::uint64_t seed);

/// "t_s,i,q" with '#' header lines carrying f_d, sample rate and filter provenance.
void write_iq_csv(const IQTrace& tr, const std::filesystem::path& path);

}  // namespace dopplerline
