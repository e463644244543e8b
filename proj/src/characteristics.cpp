#include "dopplerline/characteristics.hpp"

#include "dopplerline/errors.hpp"
#include "dopplerline/line_model.hpp"
#include "dopplerline/signal.hpp"

#include <algorithm>
#include <cmath>

namespace dopplerline {

namespace {

double front_speed(const LineSpec& line, const OracleOptions& opts) {
    return opts.v_front > 0.0 ? opts.v_front : line.velocity();
}

// Sign of the pulse's travel direction along +x.
double cp_direction(const ControlPulseSpec& cp) { return cp.port == Port::Left ? 1.0 : -1.0; }

double distance_from_port(double x, const LineSpec& line, Port port) { return port == Port::Left ? x : line.length - x; }

// Constant stretch of the pulse containing [lo, hi] (emission times relative to the pulse start), if any.
bool rect_constant_on(const ControlPulseSpec& cp, double lo, double hi, double& value) {
    const auto* r = std::get_if<RectPulse>(&cp.shape);
    if (!r) {
        // Tabulated pulse: flat when every sample touched by [lo, hi] holds the same value.
        const Waveform& w = std::get<ArbitraryPulse>(cp.shape).waveform;
        if (w.empty()) return false;
        const double last = static_cast<double>(w.size() - 1) / w.sample_rate();
        if (hi < 0.0 || lo > last) {
            value = 0.0;
            return true;
        }
        if (lo < 0.0 || hi > last) return false;
        const auto k0 = static_cast<std::size_t>(std::floor(lo * w.sample_rate()));
        const auto k1 = std::min(w.size() - 1, static_cast<std::size_t>(std::ceil(hi * w.sample_rate())));
        for (std::size_t k = k0 + 1; k <= k1; ++k)
            if (w[k] != w[k0]) return false;
        value = w[k0];
        return true;
    }
    if (hi < 0.0 || lo >= r->duration) {
        value = 0.0;
        return true;
    }
    if (lo >= r->rise && hi < r->duration - r->fall) {
        value = r->amplitude;
        return true;
    }
    return false;
}

double simple_wave_field(double d, double t_rel, const LineSpec& line, const ControlPulseSpec& cp,
                         const OracleOptions& opts) {
    const double v0 = line.velocity();
    const double v_min = phase_velocity(cp.peak_current(), line);
    const double hi = t_rel - d / v0;
    const double lo = t_rel - d / v_min;
    double value = 0.0;
    if (rect_constant_on(cp, lo, hi, value)) return value;

    // Latest emission whose level has already arrived at distance d.
    auto arrived = [&](double tau) { return tau + d / phase_velocity(control_pulse_value(cp, tau), line) <= t_rel; };
    const double h = opts.scan_step > 0.0 ? opts.scan_step : 25e-12;
    double upper = hi;
    if (arrived(upper)) return control_pulse_value(cp, upper);
    double lower = upper - h;
    while (!arrived(lower)) {
        upper = lower;
        lower -= h;
        if (lower < lo - h) break;  // everything before lo has arrived; guards round-off
    }
    for (int it = 0; it < 40 && upper - lower > 1e-16; ++it) {
        const double mid = 0.5 * (lower + upper);
        (arrived(mid) ? lower : upper) = mid;
    }
    return control_pulse_value(cp, lower);
}

// Jump speed between two levels, sqrt([I] / (C [phi])): the shock speed for a jump and the characteristic
// speed in the limit of a small step.
double chord_speed(double i_a, double i_b, const LineSpec& line) {
    const double dphi = flux_from_current(i_b, line) - flux_from_current(i_a, line);
    return std::sqrt((i_b - i_a) / (line.c * dphi));
}

struct TraceContext {
    const LineSpec& line;
    const ControlPulseSpec* cp;
    const OracleOptions& opts;
    Port wp_port;
};

double field_at(const TraceContext& c, double x, double t) {
    return c.cp ? cp_field(x, t, c.line, *c.cp, c.opts) : 0.0;
}

RayResult trace_impl(double entry_time, const TraceContext& c, Worldline* wl) {
    const LineSpec& line = c.line;
    const double v0 = line.velocity();
    const double h = c.opts.step > 0.0 ? c.opts.step : line.dx() / v0;
    const double dir = c.wp_port == Port::Left ? 1.0 : -1.0;
    const double x_end = c.wp_port == Port::Left ? line.length : 0.0;
    const double i_tol = 1e-9 * line.i_crit;

    RayResult res;
    res.entry_time = entry_time;
    double x = c.wp_port == Port::Left ? 0.0 : line.length;
    double t = entry_time;
    double i_a = field_at(c, x, t);
    double v_a = phase_velocity(i_a, line);
    double ratio = 1.0;

    bool in_cross = false;
    Crossing cur;
    double cross_x0 = 0.0;
    double cross_t0 = 0.0;
    const double t_limit = entry_time + 100.0 * line.propagation_time();

    if (wl) {
        wl->entry_time = entry_time;
        wl->t.push_back(t);
        wl->x.push_back(x);
        wl->omega_ratio.push_back(1.0);
    }

    while (true) {
        const double xm = x + dir * 0.5 * h * v_a;
        const double vm = phase_velocity(field_at(c, xm, t + 0.5 * h), line);
        const double xn = x + dir * h * vm;
        const double tn = t + h;
        const double i_b = field_at(c, xn, tn);
        const double v_b = phase_velocity(i_b, line);

        if (std::abs(i_b - i_a) > i_tol) {
            double u;
            if (c.opts.model == FrontModel::Rigid) {
                u = cp_direction(*c.cp) * front_speed(line, c.opts) * dir;
            } else {
                u = cp_direction(*c.cp) * chord_speed(i_a, i_b, line) * dir;
            }
            ratio *= doppler_ratio(DopplerArgs{u, v_a, v_b});
            if (!in_cross) {
                in_cross = true;
                cur = Crossing{};
                cross_x0 = x;
                cross_t0 = t;
            }
            cur.delta_i += i_b - i_a;
        } else if (in_cross) {
            in_cross = false;
            cur.x = 0.5 * (cross_x0 + x);
            cur.t = 0.5 * (cross_t0 + t);
            res.crossings.push_back(cur);
        }

        if (dir * (xn - x_end) >= 0.0) {
            const double frac = (x_end - x) / (xn - x);
            res.exit_time = t + frac * h;
            if (wl) {
                wl->t.push_back(res.exit_time);
                wl->x.push_back(x_end);
                wl->omega_ratio.push_back(ratio);
            }
            break;
        }
        x = xn;
        t = tn;
        i_a = i_b;
        v_a = v_b;
        if (wl) {
            wl->t.push_back(t);
            wl->x.push_back(x);
            wl->omega_ratio.push_back(ratio);
        }
        if (t > t_limit) throw OracleError("trace_point: ray did not leave the line");
    }
    if (in_cross) {
        cur.x = 0.5 * (cross_x0 + x_end);
        cur.t = 0.5 * (cross_t0 + res.exit_time);
        res.crossings.push_back(cur);
    }
    res.omega_ratio = ratio;
    return res;
}

// Transmission ratio from the unbiased line into a region at current i for the chosen front model.
double exact_ratio(double i, const LineSpec& line, const ControlPulseSpec& cp, const OracleOptions& opts, Port wp_port) {
    if (i == 0.0) return 1.0;
    const double dir = wp_port == Port::Left ? 1.0 : -1.0;
    const double v0 = line.velocity();
    const double vi = phase_velocity(i, line);
    if (opts.model == FrontModel::Rigid) {
        const double u = cp_direction(cp) * front_speed(line, opts) * dir;
        return doppler_ratio(DopplerArgs{u, v0, vi});
    }
    if (cp_direction(cp) * dir > 0.0) throw OracleError("exact simple-wave law needs counter-propagating fronts");
    // Each level moves at its own phase velocity toward the packet, so d ln(omega) = d ln(v) / 2.
    return std::sqrt(vi / v0);
}

}  // namespace

double cp_field(double x, double t, const LineSpec& line, const ControlPulseSpec& cp, const OracleOptions& opts) {
    const double d = distance_from_port(x, line, cp.port);
    const double t_rel = t - cp.delay;
    if (opts.model == FrontModel::Rigid) return control_pulse_value(cp, t_rel - d / front_speed(line, opts));
    return simple_wave_field(d, t_rel, line, cp, opts);
}

RayResult trace_point(double entry_time, const LineSpec& line, const ControlPulseSpec& cp, const OracleOptions& opts,
                      Port wp_port) {
    return trace_impl(entry_time, TraceContext{line, &cp, opts, wp_port}, nullptr);
}

RayResult trace_point(double entry_time, const LineSpec& line, Port wp_port) {
    const OracleOptions opts;
    return trace_impl(entry_time, TraceContext{line, nullptr, opts, wp_port}, nullptr);
}

double entry_time_for_exit(double exit_time, const LineSpec& line, const ControlPulseSpec& cp,
                           const OracleOptions& opts, Port wp_port) {
    const TraceContext c{line, &cp, opts, wp_port};
    auto g = [&](double entry) { return trace_impl(entry, c, nullptr).exit_time - exit_time; };
    const double tau = line.propagation_time();
    const double slow = line.velocity() / phase_velocity(cp.peak_current(), line);
    // Illinois regula falsi on a bracket of transit times.
    double a = exit_time - tau * slow * 1.01 - 1e-12;
    double b = exit_time - tau * 0.999;
    double fa = g(a);
    double fb = g(b);
    if (fa > 0.0 || fb < 0.0) throw OracleError("entry_time_for_exit: could not bracket the entry time");
    int side = 0;
    for (int it = 0; it < 100; ++it) {
        const double m = (a * fb - b * fa) / (fb - fa);
        const double fm = g(m);
        if (std::abs(fm) < 1e-15 || std::abs(b - a) < 1e-15) return m;
        if (fm < 0.0) {
            a = m;
            fa = fm;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = m;
            fb = fm;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (a + b);
}

double predict_instantaneous(double exit_time, const LineSpec& line, const WavePacketSpec& wp,
                             const ControlPulseSpec& cp, const OracleOptions& opts) {
    const double x_out = wp.port == Port::Left ? line.length : 0.0;
    const double x_in = wp.port == Port::Left ? 0.0 : line.length;
    const double i_out = cp_field(x_out, exit_time, line, cp, opts);
    const double entry = entry_time_for_exit(exit_time, line, cp, opts, wp.port);
    const double i_in = cp_field(x_in, entry, line, cp, opts);
    if (opts.law == ShiftLaw::Quadratic) {
        return wp.omega_in + shift_from_current(wp.omega_in, i_out, line) - shift_from_current(wp.omega_in, i_in, line);
    }
    return wp.omega_in * exact_ratio(i_out, line, cp, opts, wp.port) / exact_ratio(i_in, line, cp, opts, wp.port);
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::NoMeeting: return "no_meeting";
        case Condition::RedOnly: return "red_only";
        case Condition::Cancel: return "cancel";
        case Condition::BlueOnly: return "blue_only";
    }
    return "?";
}

ConditionBoundaries condition_boundaries(const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec& cp) {
    const auto* r = std::get_if<RectPulse>(&cp.shape);
    if (!r) throw ValidationError("classify_condition: rectangular control pulse required");
    if (cp.port == wp.port) throw ValidationError("classify_condition: pulse and packet must counter-propagate");
    const double tau_p = line.propagation_time();
    const double sep = r->duration - 0.5 * (r->rise + r->fall);
    const double slow = line.velocity() / phase_velocity(r->amplitude, line);
    ConditionBoundaries b;
    b.red_start = 0.0;
    b.inside_start = 2.0 * tau_p;
    b.blue_end = 2.0 * tau_p + sep;
    if (sep <= (1.0 + slow) * tau_p) {
        b.cancel_start = 2.0 * sep / (1.0 + slow);
        b.blue_start = b.inside_start;
    } else {
        // No delay crosses both fronts; a centre entering the plateau meets the falling front only if
        // that front enters before the centre leaves at v(I).
        b.cancel_start = b.inside_start;
        b.blue_start = sep - (slow - 1.0) * tau_p;
    }
    return b;
}

Condition classify_condition(double delay, const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec& cp) {
    const ConditionBoundaries b = condition_boundaries(line, wp, cp);
    if (delay <= b.red_start || delay >= b.blue_end) return Condition::NoMeeting;
    if (delay <= b.cancel_start) return Condition::RedOnly;
    if (delay < b.inside_start) return Condition::Cancel;
    if (delay < b.blue_start) return Condition::NoMeeting;
    return Condition::BlueOnly;
}

double packet_delay_for(double delay, const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec&,
                        double cp_rise_mid) {
    return cp_rise_mid + delay - line.propagation_time() - 0.5 * wp.tau_wp;
}

SpacetimeDiagram spacetime_diagram(const LineSpec& line, const WavePacketSpec& wp, const ControlPulseSpec* cp,
                                   int resolution, const OracleOptions& opts) {
    if (resolution < 2) throw ValidationError("spacetime_diagram: resolution must be >= 2");
    const double tau_p = line.propagation_time();
    double t_lo = wp.delay;
    double t_hi = wp.delay + wp.tau_wp + 1.3 * tau_p;
    if (cp) {
        t_lo = std::min(t_lo, cp->delay);
        t_hi = std::max(t_hi, cp->delay + cp->duration() + 1.3 * tau_p);
    }
    SpacetimeDiagram d;
    const auto n = static_cast<std::size_t>(resolution);
    for (std::size_t k = 0; k < n; ++k) {
        d.t_axis.push_back(t_lo + (t_hi - t_lo) * static_cast<double>(k) / static_cast<double>(n - 1));
        d.x_axis.push_back(line.length * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    d.current.resize(n * n, 0.0);
    if (cp) {
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) d.current[r * n + c] = cp_field(d.x_axis[c], d.t_axis[r], line, *cp, opts);
    }
    const TraceContext ctx{line, cp, opts, wp.port};
    for (double frac : {0.0, 0.5, 1.0}) {
        Worldline full;
        trace_impl(wp.delay + frac * wp.tau_wp, ctx, &full);
        // Thin to about `resolution` points, keeping the last one.
        Worldline thin;
        thin.entry_time = full.entry_time;
        const std::size_t stride = std::max<std::size_t>(1, full.t.size() / n);
        for (std::size_t k = 0; k < full.t.size(); k += stride) {
            thin.t.push_back(full.t[k]);
            thin.x.push_back(full.x[k]);
            thin.omega_ratio.push_back(full.omega_ratio[k]);
        }
        if ((full.t.size() - 1) % stride != 0) {
            thin.t.push_back(full.t.back());
            thin.x.push_back(full.x.back());
            thin.omega_ratio.push_back(full.omega_ratio.back());
        }
        d.worldlines.push_back(std::move(thin));
    }
    return d;
}

}  // namespace dopplerline
