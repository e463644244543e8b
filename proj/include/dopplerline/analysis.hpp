#pragma once

// Estimators and fits on down-converted output.

#include "dopplerline/core.hpp"
#include "dopplerline/ddc.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dopplerline {

/// M(f_d, t). values are stored row-major with one row per f_d.
struct MagnitudeMap {
    std::vector<double> f_d_axis;
    std::vector<double> t_axis;
    std::vector<double> values;

    double at(std::size_t f, std::size_t t) const { return values[f * t_axis.size() + t]; }
    /// Column at time index t across all f_d.
    std::vector<double> cut(std::size_t t) const;
    void validate() const;
};

/// Stacked magnitude(down_convert(w, f_d)) rows. f_d_list must be strictly increasing.
MagnitudeMap magnitude_map(const Waveform& w, const std::vector<double>& f_d_list, const FilterSpec& filt, int jobs = 1);

/// Time of the packet centre: the centroid of the column sums above half their maximum.
double packet_centre_time(const MagnitudeMap& map);

/// Vertex of a least-squares parabola through the contiguous run of points with value >= window * max
/// around the maximum. Throws InsufficientSupport (< 5 points) or FitDiverged.
double fit_parabola_vertex(const std::vector<double>& f, const std::vector<double>& values, double window = 0.7);

/// fit_parabola_vertex on the fixed-time cut nearest to t_cut.
double fit_parabola_peak(const MagnitudeMap& map, double t_cut, double window = 0.7);

/// f_out - f_in.
double global_shift(double f_out, double f_in);

struct ShiftFit {
    double i_star_hat = 0.0;
    double c4_hat = 0.0;
    double a = 0.0;  ///< rad/s per A^2
    double b = 0.0;  ///< rad/s per A^4
    double residual_rms = 0.0;  ///< rad/s
    double var_i_star = 0.0;
    double var_c4 = 0.0;

    std::string to_text() const;
};

/// Least squares on d_omega = a i^2 + b i^4, with a = -omega_in / (4 I*^2) and c4 = -4 b I*^4 / omega_in,
/// matching shift_from_current. Throws ValidationError (too few points or too narrow a span) or SignError.
ShiftFit fit_amplitude_sweep(const std::vector<std::pair<double, double>>& points, double omega_in);

struct EnvelopeComparison {
    Waveform difference;  ///< (shifted - ref) / peak on the reference grid, zero where ref < 10 % of peak
    double max_rel_diff = 0.0;
    double lag = 0.0;  ///< time shift applied to `shifted` (s)
};

/// Peak-normalised envelopes aligned by cross-correlation, compared where ref >= 10 % of its peak.
/// Throws AlignmentFailed when the supports do not overlap.
EnvelopeComparison envelope_compare(const Waveform& ref, const Waveform& shifted);

/// Row-stacked map over (delay, f_d), ordered by delay. Every cut must match f_d_axis in length.
MagnitudeMap merge_delay_sweep(const std::vector<std::pair<double, std::vector<double>>>& per_delay_cuts,
                               const std::vector<double>& f_d_axis);

/// Arithmetic mean. Throws ValidationError on empty input.
double average_instantaneous(const std::vector<double>& per_packet);

/// -slope (rad/s) of a straight-line fit to the unwrapped phase on [t_lo, t_hi].
double phase_slope_shift(const Waveform& phase, double t_lo, double t_hi);

/// "t_s" (or "delay_s") column followed by one column per f_d.
void write_map_csv(const MagnitudeMap& map, const std::filesystem::path& path, const std::string& row_label = "t_s");

}  // namespace dopplerline
