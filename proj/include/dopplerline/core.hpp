#pragma once

// Domain types shared by every module. All quantities are SI.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dopplerline {

enum class NonlinearityModel { KineticInductance, JosephsonChain };
enum class Port { Left, Right };

Port opposite(Port p) noexcept;
std::string to_string(NonlinearityModel m);
std::string to_string(Port p);

/// Distributed parameters of a current-tunable line.
struct LineSpec {
    double l0 = 0.0;      ///< inductance per unit length at zero current (H/m)
    double c = 0.0;       ///< capacitance per unit length (F/m)
    double length = 0.0;  ///< m
    double i_star = 0.0;  ///< nonlinearity scale current (A)
    double i_crit = 0.0;  ///< critical current (A)
    double c4 = 0.0;      ///< quartic inductance coefficient
    NonlinearityModel model = NonlinearityModel::KineticInductance;
    int n_cells = 6400;

    /// One-way propagation time at zero current, length * sqrt(l0 c).
    double propagation_time() const;
    /// Zero-current characteristic impedance sqrt(l0 / c).
    double impedance() const;
    /// Zero-current phase velocity 1 / sqrt(l0 c).
    double velocity() const;
    double dx() const { return length / n_cells; }

    /// Throws ValidationError when an invariant is broken.
    void validate() const;
};

/// Builds a line from its measured delay and impedance: l0 = z0 tau / length, c = tau / (z0 length).
LineSpec line_from_delay(double tau_p, double z0, double length, double i_star, double i_crit, double c4 = 0.0,
                         NonlinearityModel model = NonlinearityModel::KineticInductance, int n_cells = 6400);

/// 40 ns, 50 ohm, 0.24 m, I* = 6.15 mA, Ic = 2.5 mA, c4 = 0, 6400 cells.
LineSpec default_line();

/// Uniformly sampled real time series.
class Waveform {
public:
    Waveform() = default;
    Waveform(double sample_rate, double t0, std::vector<double> samples);

    double sample_rate() const noexcept { return sample_rate_; }
    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return 1.0 / sample_rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    std::span<const double> samples() const noexcept { return samples_; }
    double operator[](std::size_t k) const { return samples_[k]; }
    double time(std::size_t k) const { return t0_ + static_cast<double>(k) / sample_rate_; }
    /// Time just past the last sample, t0 + size / rate.
    double end_time() const { return t0_ + static_cast<double>(samples_.size()) / sample_rate_; }
    double duration() const { return static_cast<double>(samples_.size()) / sample_rate_; }

    /// Linear interpolation; zero outside [t0, time(size-1)].
    double at(double t) const;
    /// Resampled copy with round(duration * new_rate) samples starting at t0.
    Waveform resampled(double new_rate) const;
    double peak_abs() const;

private:
    double sample_rate_ = 1.0;
    double t0_ = 0.0;
    std::vector<double> samples_;
};

struct RectangularEnvelope {};
struct StaircaseEnvelope {
    std::vector<double> levels;  ///< relative amplitudes in (0, 1], equal-duration plateaus
};
struct GaussianEnvelope {
    double sigma = 0.0;  ///< s, centred at tau_wp / 2
};
struct TableEnvelope {
    Waveform table;  ///< time relative to the packet start
};
using EnvelopeSpec = std::variant<RectangularEnvelope, StaircaseEnvelope, GaussianEnvelope, TableEnvelope>;

void validate(const EnvelopeSpec& env);

struct WavePacketSpec {
    double omega_in = 0.0;  ///< rad/s
    double tau_wp = 0.0;    ///< s
    double amplitude = 1e-5;  ///< A, current of the launched wave
    EnvelopeSpec envelope = RectangularEnvelope{};
    Port port = Port::Left;
    double delay = 0.0;  ///< s, time at which the packet starts at its port

    double carrier_hz() const;
    void validate(const LineSpec& line) const;
};

enum class EdgeShape { Linear, Smoothstep };

struct RectPulse {
    double amplitude = 0.0;  ///< A
    double duration = 0.0;   ///< s, including both ramps
    double rise = 0.2e-9;
    double fall = 0.2e-9;
    EdgeShape edge = EdgeShape::Linear;
};
struct ArbitraryPulse {
    Waveform waveform;  ///< A, time relative to the pulse start
};

struct ControlPulseSpec {
    std::variant<RectPulse, ArbitraryPulse> shape = RectPulse{};
    Port port = Port::Right;
    double delay = 0.0;  ///< s

    /// Largest |current| of the pulse.
    double peak_current() const;
    /// Time from the pulse start to its end.
    double duration() const;
    void validate(const LineSpec& line) const;
};

}  // namespace dopplerline
