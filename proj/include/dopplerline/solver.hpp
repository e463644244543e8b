#pragma once

// Leapfrog integration of the nonlinear telegrapher equations with matched Thevenin ports.

#include "dopplerline/core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace dopplerline {

/// Node voltages at integer steps, branch currents and fluxes at the following half step.
struct FieldState {
    std::vector<double> v;    ///< n_cells + 1 node voltages (V)
    std::vector<double> i;    ///< n_cells branch currents (A), excluding any static bias
    std::vector<double> phi;  ///< n_cells branch fluxes per unit length of the total current
    double t = 0.0;
    std::int64_t n = 0;
};

struct SolverConfig {
    double dx = 0.0;
    double dt = 0.0;
    double duration = 0.0;
    bool record_ports = true;
    int snapshot_stride = 0;  ///< 0 disables spacetime recording
    /// Optional per-branch static bias current (A) added to the branch current when evaluating the
    /// inductance; models a uniform bias or a frozen front. Empty means no bias.
    std::vector<double> static_bias;
};

/// dx = length / n_cells and the magic step dt = dx sqrt(l0 c).
SolverConfig default_solver_config(const LineSpec& line, double duration);

struct PortRecord {
    Waveform left_out;
    Waveform right_out;
    Waveform wp_injected;                ///< packet current at its port
    std::optional<Waveform> cp_injected;  ///< control-pulse current at its port
};

/// Decimated (t, x) samples; rows are times.
struct SpacetimeRecord {
    std::vector<double> t_axis;
    std::vector<double> x_axis;
    std::vector<double> v;  ///< t_axis.size() * x_axis.size(), node voltages
    std::vector<double> i;  ///< same shape, branch current at the nearest branch
};

struct RunOutput {
    PortRecord ports;
    std::optional<SpacetimeRecord> spacetime;
};

/// Source voltages at the two ports at the start and end of a step.
struct StepSources {
    double left_now = 0.0;
    double left_next = 0.0;
    double right_now = 0.0;
    double right_next = 0.0;
};

FieldState zero_state(const LineSpec& line, const std::vector<double>& static_bias = {});

/// Advances one full leapfrog step in place. Throws CriticalCurrentExceeded.
void step_inplace(const LineSpec& line, FieldState& state, const StepSources& src, double dt,
                  const std::vector<double>& static_bias = {});

/// Pure wrapper around step_inplace.
FieldState step(const LineSpec& line, const FieldState& state, const StepSources& src, double dt,
                const std::vector<double>& static_bias = {});

/// Discrete energy conserved by the interior update when the field is away from the ports:
/// sum C dx v^2 / 2 over `before` plus sum L dx i_before i_after / 2. Linear regime only.
double field_energy(const LineSpec& line, const FieldState& before, const FieldState& after);

/// Source voltage that launches current `i` into an unbiased line: Z0 i + W(i).
double control_source_voltage(double i, const LineSpec& line);

/// Full run. The packet is current-referenced (source 2 Z0 i_wp); the control pulse launches exactly its current.
RunOutput run(const LineSpec& line, const WavePacketSpec& wp, const std::optional<ControlPulseSpec>& cp,
              const SolverConfig& cfg);

/// Long format "t_s,x_m,v,i".
void write_spacetime_csv(const SpacetimeRecord& rec, const std::filesystem::path& path);
/// Dense text: header line "# rows cols", then x axis row, then one row per time "t v0 v1 ...".
void write_spacetime_matrix(const SpacetimeRecord& rec, const std::filesystem::path& path);

}  // namespace dopplerline
