#pragma once

// Ray-tracing oracle: packet points travel along dx/dt = v(I_cp(x, t)) through a prescribed control-pulse field.

#include "dopplerline/core.hpp"

#include <string>
#include <vector>

namespace dopplerline {

/// How the prescribed control-pulse field moves through the line.
enum class FrontModel {
    Rigid,       ///< every level translates at v_front
    SimpleWave,  ///< each current level travels at phase_velocity(level); overtaken levels are dropped
};

/// Law used by predict_instantaneous to map a current to a frequency.
enum class ShiftLaw {
    Quadratic,  ///< shift_from_current
    Exact,      ///< closed-form transmission through the chosen front model
};

struct OracleOptions {
    FrontModel model = FrontModel::Rigid;
    double v_front = 0.0;    ///< rigid front speed; 0 selects v0
    double step = 0.0;       ///< ray step (s); 0 selects dx / v0 of the line
    double scan_step = 0.0;  ///< emission-time resolution of the simple-wave field; 0 selects 25 ps
    ShiftLaw law = ShiftLaw::Quadratic;
};

struct Crossing {
    double x = 0.0;
    double t = 0.0;
    double delta_i = 0.0;
};

struct RayResult {
    double entry_time = 0.0;
    double exit_time = 0.0;
    double omega_ratio = 1.0;
    std::vector<Crossing> crossings;
};

/// Prescribed control-pulse current at (x, t); no pulse gives zero.
double cp_field(double x, double t, const LineSpec& line, const ControlPulseSpec& cp, const OracleOptions& opts);

/// Traces a packet point entering its port at entry_time. Throws SingularInterface.
RayResult trace_point(double entry_time, const LineSpec& line, const ControlPulseSpec& cp,
                      const OracleOptions& opts = {}, Port wp_port = Port::Left);
/// Free propagation (no control pulse).
RayResult trace_point(double entry_time, const LineSpec& line, Port wp_port = Port::Left);

/// Entry time of the point leaving the far port at exit_time, by bisection on trace_point.
double entry_time_for_exit(double exit_time, const LineSpec& line, const ControlPulseSpec& cp,
                           const OracleOptions& opts = {}, Port wp_port = Port::Left);

/// omega_in + shift(I_cp at the output at exit_time) - shift(I_cp at the input when the point entered).
/// With ShiftLaw::Quadratic the shift is shift_from_current.
double predict_instantaneous(double exit_time, const LineSpec& line, const WavePacketSpec& wp,
                             const ControlPulseSpec& cp, const OracleOptions& opts = {});

enum class Condition { NoMeeting, RedOnly, Cancel, BlueOnly };
std::string to_string(Condition c);

/// Delay convention: delay = t_entry(packet centre) - t(cp rise midpoint at its port) + tau_p, so delay 0 is
/// the first instant the centre can meet the rising front before either leaves the line.
/// [inside_start, blue_start) is empty unless the plateau outlasts (1 + v0/v(I)) tau_p; the centre then
/// enters after the rising front has left and exits before the falling front arrives.
struct ConditionBoundaries {
    double red_start = 0.0;
    double cancel_start = 0.0;
    double inside_start = 0.0;
    double blue_start = 0.0;
    double blue_end = 0.0;
};

/// Counter-propagating rectangular pulse, fronts at v0, packet at v0 outside and v(I) inside the pulse.
ConditionBoundaries condition_boundaries(const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec& cp);
Condition classify_condition(double delay, const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec& cp);

/// Packet and pulse delays realising a given encounter delay, with the pulse rise midpoint at `cp_rise_mid`.
double packet_delay_for(double delay, const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec& cp,
                        double cp_rise_mid);

struct Worldline {
    double entry_time = 0.0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> omega_ratio;
};

struct SpacetimeDiagram {
    std::vector<double> t_axis;
    std::vector<double> x_axis;
    std::vector<double> current;  ///< t_axis.size() * x_axis.size()
    std::vector<Worldline> worldlines;  ///< packet head, centre, tail
};

/// Grid of the prescribed pulse plus packet worldlines, `resolution` points along each axis.
SpacetimeDiagram spacetime_diagram(const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec* cp,
                                   int resolution, const OracleOptions& opts = {});

}  // namespace dopplerline
