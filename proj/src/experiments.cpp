#include "dopplerline/experiments.hpp"

#include "dopplerline/config.hpp"
#include "dopplerline/errors.hpp"
#include "dopplerline/line_model.hpp"
#include "dopplerline/parallel.hpp"
#include "dopplerline/signal.hpp"
#include "dopplerline/svg.hpp"
#include "dopplerline/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace dopplerline {

namespace fs = std::filesystem;
using units::Dimension;
using units::format_quantity;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Packet edges closer than this to a condition boundary do not count as fully inside a condition.
constexpr double kConditionMargin = 1e-9;

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << std::setprecision(10);
    return out;
}

void check_written(const std::ofstream& out, const fs::path& p) {
    if (!out) throw IoError("write failed: " + p.string());
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double rise_midpoint(const ControlPulseSpec& cp) {
    if (const auto* r = std::get_if<RectPulse>(&cp.shape)) return cp.delay + 0.5 * r->rise;
    const Waveform& w = std::get<ArbitraryPulse>(cp.shape).waveform;
    const double half = 0.5 * w.peak_abs();
    for (std::size_t k = 0; k < w.size(); ++k)
        if (std::abs(w[k]) >= half) return cp.delay + w.time(k) - w.t0();
    return cp.delay;
}

void set_amplitude(ControlPulseSpec& cp, double amplitude) {
    if (auto* r = std::get_if<RectPulse>(&cp.shape)) {
        r->amplitude = amplitude;
        return;
    }
    auto& w = std::get<ArbitraryPulse>(cp.shape).waveform;
    const double peak = w.peak_abs();
    if (!(peak > 0.0)) throw ValidationError("cannot rescale an all-zero control pulse");
    std::vector<double> s(w.samples().begin(), w.samples().end());
    for (double& v : s) v *= amplitude / peak;
    w = Waveform(w.sample_rate(), w.t0(), std::move(s));
}

bool boundaries_available(const Scenario& s) {
    return s.cp && std::holds_alternative<RectPulse>(s.cp->shape) && s.cp->port != s.wp.port;
}

Condition condition_of(const Scenario& s, const WavePacketSpec& wp, const ControlPulseSpec& cp, double delay) {
    if (!std::holds_alternative<RectPulse>(cp.shape) || cp.port == wp.port) return Condition::NoMeeting;
    return classify_condition(delay, s.line, wp, cp);
}

// The condition shared by every point of the packet, or nullopt when the packet straddles a boundary.
std::optional<Condition> whole_packet_condition(const Scenario& s, const RunResult& r) {
    if (!r.cp || !r.coord.delay) return std::nullopt;
    const double d = *r.coord.delay;
    const double h = 0.5 * r.wp.tau_wp - kConditionMargin;
    const Condition c = condition_of(s, r.wp, *r.cp, d);
    if (condition_of(s, r.wp, *r.cp, d - h) != c || condition_of(s, r.wp, *r.cp, d + h) != c) return std::nullopt;
    return c;
}

const Waveform& output_of(const PortRecord& p, Port wp_port) {
    return wp_port == Port::Left ? p.right_out : p.left_out;
}

std::string fd_label(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6gMHz", f / 1e6);
    return buf;
}

void write_ports_csv(const PortRecord& p, int stride, const fs::path& path) {
    auto out = open_out(path);
    out << "t_s,left_out_V,right_out_V,wp_injected_A";
    if (p.cp_injected) out << ",cp_injected_A";
    out << '\n';
    const auto step = static_cast<std::size_t>(std::max(1, stride));
    for (std::size_t k = 0; k < p.right_out.size(); k += step) {
        const double t = p.right_out.time(k);
        out << t << ',' << p.left_out[k] << ',' << p.right_out[k] << ',' << p.wp_injected.at(t);
        if (p.cp_injected) out << ',' << p.cp_injected->at(t);
        out << '\n';
    }
    check_written(out, path);
}

void write_trace_csv(const fs::path& path, const std::string& header, const Waveform& a, const Waveform* b) {
    auto out = open_out(path);
    out << header << '\n';
    for (std::size_t k = 0; k < a.size(); ++k) {
        out << a.time(k) << ',' << a[k];
        if (b) out << ',' << (*b)[k];
        out << '\n';
    }
    check_written(out, path);
}

std::string coordinates_text(const RunCoordinates& c) {
    std::ostringstream os;
    os << "run_index = " << c.index << '\n';
    os << "run_id = " << c.id() << '\n';
    if (c.delay) os << "delay_s = " << fmt(*c.delay) << '\n';
    if (c.cp_amplitude) os << "cp_amplitude_A = " << fmt(*c.cp_amplitude) << '\n';
    os << "envelope_index = " << c.envelope << '\n';
    os << "reference = " << (c.reference ? "true" : "false") << '\n';
    return os.str();
}

// Oracle shift (Hz) of the packet point leaving the device at exit_time.
double oracle_shift_at_exit(const Scenario& s, const WavePacketSpec& wp, const ControlPulseSpec& cp, double exit_time) {
    const double entry = entry_time_for_exit(exit_time, s.line, cp, s.oracle, wp.port);
    const RayResult r = trace_point(entry, s.line, cp, s.oracle, wp.port);
    return (r.omega_ratio - 1.0) * wp.carrier_hz();
}

RunResult execute_run(const Scenario& s, const RunCoordinates& coord) {
    RunResult res;
    res.coord = coord;
    std::tie(res.wp, res.cp) = realise_run(s, coord);
    const WavePacketSpec& wp = res.wp;
    const double f_in = wp.carrier_hz();
    if (res.cp && coord.delay) res.condition = condition_of(s, wp, *res.cp, *coord.delay);

    SolverConfig cfg = default_solver_config(s.line, run_duration(s, wp));
    cfg.snapshot_stride = s.snapshot_stride;
    RunOutput out = run(s.line, wp, res.cp, cfg);
    res.ports = std::move(out.ports);
    Waveform w = output_of(res.ports, wp.port);
    if (s.noise_sigma > 0.0) w = add_gaussian_noise(w, s.noise_sigma, s.seed + coord.index);

    fs::path dir;
    if (s.write_files) {
        dir = s.output_dir / s.name / coord.id();
        fs::create_directories(dir);
        write_ports_csv(res.ports, s.ports_stride, dir / "ports.csv");
        if (out.spacetime) write_spacetime_csv(*out.spacetime, dir / "spacetime.csv");
    }

    if (res.cp) {
        res.oracle_centre_hz =
            (trace_point(wp.delay + 0.5 * wp.tau_wp, s.line, *res.cp, s.oracle, wp.port).omega_ratio - 1.0) * f_in;
    }

    std::vector<std::string> plan_text;
    for (const auto& plan : s.ddc) {
        if (const auto* sweep = std::get_if<FreqSweep>(&plan)) {
            MagnitudeMap map = magnitude_map(w, sweep->f_d, s.filter, 1);
            res.packet_centre = packet_centre_time(map);
            std::size_t col = 0;
            for (std::size_t k = 1; k < map.t_axis.size(); ++k)
                if (std::abs(map.t_axis[k] - res.packet_centre) < std::abs(map.t_axis[col] - res.packet_centre)) col = k;
            res.centre_cut = map.cut(col);
            if (s.has(AnalysisTag::GlobalShift))
                res.global_shift_hz = global_shift(fit_parabola_peak(map, res.packet_centre), f_in);
            if (s.write_files) write_map_csv(map, dir / "map.csv");
            plan_text.push_back("sweep: " + std::to_string(sweep->f_d.size()) + " f_d, " +
                                plan_ddc(w.sample_rate(), s.filter).describe());
            res.map = std::move(map);
            continue;
        }
        const double fd = std::get<FixedFd>(plan).f_d > 0.0 ? std::get<FixedFd>(plan).f_d : f_in;
        const IQTrace tr = down_convert(w, fd, s.phase_filter);
        plan_text.push_back("fixed " + fd_label(fd) + ": " + plan_ddc(w.sample_rate(), s.phase_filter).describe());
        if (s.write_files) write_iq_csv(tr, dir / ("iq_" + fd_label(fd) + ".csv"));
        const bool wants_phase = s.has(AnalysisTag::PhaseShift) || s.has(AnalysisTag::InstantaneousTrace) ||
                                 s.has(AnalysisTag::DelayMerge);
        if (wants_phase) {
            const Waveform ph = phase_unwrapped(tr, 0.2);
            const double offset = fd - f_in;
            if (s.has(AnalysisTag::PhaseShift)) {
                const double span = ph.duration();
                res.phase_shift_hz =
                    phase_slope_shift(ph, ph.t0() + 0.25 * span, ph.t0() + 0.75 * span) / kTwoPi + offset;
            }
            if ((s.has(AnalysisTag::InstantaneousTrace) || s.has(AnalysisTag::DelayMerge)) && ph.size() >= 3) {
                const Waveform inst = instantaneous_shift(ph, 3);
                std::vector<double> hz(inst.size());
                for (std::size_t k = 0; k < inst.size(); ++k) hz[k] = inst[k] / kTwoPi + offset;
                res.inst_shift_hz = Waveform(inst.sample_rate(), inst.t0(), std::move(hz));
            }
        }
        if (s.has(AnalysisTag::EnvelopeCompare)) res.envelope = magnitude(down_convert(w, f_in, s.filter));
    }
    if (s.has(AnalysisTag::EnvelopeCompare) && !res.envelope) res.envelope = magnitude(down_convert(w, f_in, s.filter));

    if (s.has(AnalysisTag::InstantaneousTrace) && res.inst_shift_hz) {
        const Waveform& inst = *res.inst_shift_hz;
        std::vector<double> o(inst.size(), 0.0);
        if (res.cp)
            for (std::size_t k = 0; k < inst.size(); ++k) o[k] = oracle_shift_at_exit(s, wp, *res.cp, inst.time(k));
        res.oracle_shift_hz = Waveform(inst.sample_rate(), inst.t0(), std::move(o));
    }

    if (s.write_files) {
        if (res.inst_shift_hz) {
            write_trace_csv(dir / "inst.csv", res.oracle_shift_hz ? "t_s,shift_hz,oracle_hz" : "t_s,shift_hz",
                            *res.inst_shift_hz, res.oracle_shift_hz ? &*res.oracle_shift_hz : nullptr);
        }
        if (res.envelope) write_trace_csv(dir / "envelope.csv", "t_s,magnitude_V", *res.envelope, nullptr);

        const fs::path fits = dir / "fits.txt";
        auto f = open_out(fits);
        f << "condition = " << (res.cp && coord.delay ? to_string(res.condition) : std::string("n/a")) << '\n';
        if (res.map) f << "packet_centre_s = " << fmt(res.packet_centre) << '\n';
        if (res.global_shift_hz) f << "global_shift_hz = " << fmt(*res.global_shift_hz) << '\n';
        if (res.phase_shift_hz) f << "phase_shift_hz = " << fmt(*res.phase_shift_hz) << '\n';
        if (res.cp) f << "oracle_centre_hz = " << fmt(res.oracle_centre_hz) << '\n';
        check_written(f, fits);

        const fs::path prov = dir / "provenance.txt";
        auto p = open_out(prov);
        p << "scenario = " << s.name << '\n';
        p << "config_hash = " << hash_hex(config_hash(s)) << '\n';
        p << coordinates_text(coord);
        p << "wp_delay_s = " << fmt(wp.delay) << '\n';
        if (res.cp) p << "cp_delay_s = " << fmt(res.cp->delay) << '\n';
        p << "dx_m = " << fmt(cfg.dx) << "\ndt_s = " << fmt(cfg.dt) << "\nduration_s = " << fmt(cfg.duration) << '\n';
        for (const auto& t : plan_text) p << "ddc = " << t << '\n';
        check_written(p, prov);
    }
    return res;
}

// Averaged instantaneous shift on the delay grid from every packet that holds the point deep inside.
void merge_delays(const Scenario& s, const std::vector<const RunResult*>& group, ScenarioResult& out) {
    const std::vector<double>& grid = s.sweep.delays;
    std::vector<std::vector<double>> per(grid.size());
    for (const RunResult* r : group) {
        if (!r->inst_shift_hz || !r->cp || !r->coord.delay) continue;
        const Waveform& inst = *r->inst_shift_hz;
        const double t_first = inst.t0();
        const double t_last = inst.time(inst.size() - 1);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            // Offset of the grid point from the packet start.
            const double off = grid[j] - *r->coord.delay + 0.5 * r->wp.tau_wp;
            if (off < s.deep_margin || off > r->wp.tau_wp - s.deep_margin) continue;
            const double exit = trace_point(r->wp.delay + off, s.line, *r->cp, s.oracle, r->wp.port).exit_time;
            if (exit < t_first || exit > t_last) continue;
            per[j].push_back(inst.at(exit));
        }
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (per[j].empty()) continue;
        out.averaged_inst.emplace_back(grid[j], average_instantaneous(per[j]));
        out.averaged_count.push_back(static_cast<int>(per[j].size()));
    }
}

void fit_amplitudes(const Scenario& s, ScenarioResult& out, std::string& note) {
    std::vector<std::pair<double, double>> points;
    for (double amp : s.sweep.cp_amplitudes) {
        std::vector<double> shifts;
        for (const auto& r : out.runs) {
            if (r.coord.reference || !r.coord.cp_amplitude || *r.coord.cp_amplitude != amp) continue;
            const std::optional<double> v = r.phase_shift_hz ? r.phase_shift_hz : r.global_shift_hz;
            if (!v) continue;
            if (r.coord.delay) {
                const auto c = whole_packet_condition(s, r);
                if (!c || (*c != Condition::RedOnly && *c != Condition::BlueOnly)) continue;
            }
            shifts.push_back(*v);
        }
        if (shifts.empty()) continue;
        const double mean = average_instantaneous(shifts);
        out.amplitude_points.push_back({amp, mean, static_cast<int>(shifts.size())});
        points.emplace_back(amp, kTwoPi * mean);
    }
    if (points.empty()) throw ValidationError("amplitude fit: no run lies fully inside a red or blue condition");
    double total = 0.0;
    for (const auto& p : points) total += p.second;
    // A blueshift sweep is fitted as its mirror image, so I* keeps its meaning.
    if (total > 0.0) {
        for (auto& p : points) p.second = -p.second;
        note = "shifts are blueshifts; fitted with the sign reversed";
    }
    out.fit = fit_amplitude_sweep(points, s.wp.omega_in);
}

void write_scenario_files(const Scenario& s, ScenarioResult& r, const std::string& fit_note) {
    const fs::path dir = r.directory;
    {
        const fs::path p = dir / "summary.csv";
        auto out = open_out(p);
        out << "run_id,delay_s,cp_amplitude_A,envelope,reference,condition,global_shift_hz,phase_shift_hz,oracle_centre_hz\n";
        for (const auto& run : r.runs) {
            out << run.coord.id() << ',' << (run.coord.delay ? fmt(*run.coord.delay) : "") << ','
                << (run.coord.cp_amplitude ? fmt(*run.coord.cp_amplitude) : "") << ',' << run.coord.envelope << ','
                << (run.coord.reference ? 1 : 0) << ','
                << (run.cp && run.coord.delay ? to_string(run.condition) : std::string("n/a")) << ','
                << (run.global_shift_hz ? fmt(*run.global_shift_hz) : "") << ','
                << (run.phase_shift_hz ? fmt(*run.phase_shift_hz) : "") << ',' << fmt(run.oracle_centre_hz) << '\n';
        }
        check_written(out, p);
    }
    {
        const fs::path p = dir / "provenance.txt";
        auto out = open_out(p);
        out << "scenario = " << s.name << "\nconfig_hash = " << hash_hex(r.config_hash) << "\nruns = " << r.runs.size()
            << "\n\n# effective configuration\n"
            << r.config_text << '\n';
        check_written(out, p);
    }
    {
        const fs::path p = dir / "fits.txt";
        auto out = open_out(p);
        out << "scenario = " << s.name << '\n';
        if (r.fit) {
            if (!fit_note.empty()) out << "note = " << fit_note << '\n';
            out << r.fit->to_text();
            for (const auto& a : r.amplitude_points)
                out << "point = " << fmt(a.i_cp) << " A, " << fmt(a.shift_hz) << " Hz, " << a.packets << " packets\n";
        }
        for (const auto& e : r.envelopes)
            out << "envelope " << e.name << ": max_rel_diff = " << fmt(e.max_rel_diff) << ", lag_s = " << fmt(e.lag) << '\n';
        check_written(out, p);
    }
    if (r.merged_map) {
        write_map_csv(*r.merged_map, dir / "map.csv", "delay_s");
        svg::Heatmap h;
        h.title = s.name + ": merged magnitude";
        h.x_label = "delay (ns)";
        h.y_label = "f_d (GHz)";
        for (double d : r.merged_map->t_axis) h.x_axis.push_back(d * 1e9);
        for (double f : r.merged_map->f_d_axis) h.y_axis.push_back(f * 1e-9);
        h.values = r.merged_map->values;
        if (!r.averaged_inst.empty()) {
            svg::Series line{"averaged instantaneous", "#ffffff", {}, {}};
            for (const auto& [d, f] : r.averaged_inst) {
                line.x.push_back(d * 1e9);
                line.y.push_back((s.wp.carrier_hz() + f) * 1e-9);
            }
            h.overlays.push_back(line);
        }
        svg::write_file(dir / "map.svg", svg::render_heatmap(h));
    }
    if (!r.averaged_inst.empty()) {
        const fs::path p = dir / "inst_averaged.csv";
        auto out = open_out(p);
        out << "delay_s,shift_hz,packets\n";
        for (std::size_t k = 0; k < r.averaged_inst.size(); ++k)
            out << r.averaged_inst[k].first << ',' << r.averaged_inst[k].second << ',' << r.averaged_count[k] << '\n';
        check_written(out, p);
    }
    if (s.has(AnalysisTag::InstantaneousTrace)) {
        svg::LinePlot plot;
        plot.title = s.name + ": instantaneous shift";
        plot.x_label = "t (ns)";
        plot.y_label = "shift (MHz)";
        for (const auto& run : r.runs) {
            if (!run.inst_shift_hz) continue;
            svg::Series m{run.coord.id() + " measured", "#1f77b4", {}, {}};
            svg::Series o{run.coord.id() + " oracle", "#d62728", {}, {}};
            for (std::size_t k = 0; k < run.inst_shift_hz->size(); ++k) {
                m.x.push_back(run.inst_shift_hz->time(k) * 1e9);
                m.y.push_back((*run.inst_shift_hz)[k] * 1e-6);
                if (run.oracle_shift_hz) {
                    o.x.push_back(run.oracle_shift_hz->time(k) * 1e9);
                    o.y.push_back((*run.oracle_shift_hz)[k] * 1e-6);
                }
            }
            plot.series.push_back(std::move(m));
            if (!o.x.empty()) plot.series.push_back(std::move(o));
            break;
        }
        if (!plot.series.empty()) svg::write_file(dir / "inst.svg", svg::render_line_plot(plot));
    }
    if (r.fit) {
        svg::LinePlot plot;
        plot.title = s.name + ": shift versus control amplitude";
        plot.x_label = "I_cp (mA)";
        plot.y_label = "shift (MHz)";
        svg::Series pts{"measured", "#1f77b4", {}, {}};
        pts.markers = true;
        for (const auto& a : r.amplitude_points) {
            pts.x.push_back(a.i_cp * 1e3);
            pts.y.push_back(a.shift_hz * 1e-6);
        }
        plot.series.push_back(pts);
        svg::write_file(dir / "amplitude.svg", svg::render_line_plot(plot));
    }
}

}  // namespace

std::string to_string(AnalysisTag t) {
    switch (t) {
        case AnalysisTag::GlobalShift: return "global_shift";
        case AnalysisTag::PhaseShift: return "phase_shift";
        case AnalysisTag::InstantaneousTrace: return "instantaneous_trace";
        case AnalysisTag::DelayMerge: return "delay_merge";
        case AnalysisTag::AmplitudeFit: return "amplitude_fit";
        case AnalysisTag::EnvelopeCompare: return "envelope_compare";
    }
    return "?";
}

AnalysisTag analysis_tag_from_string(const std::string& s) {
    for (auto t : {AnalysisTag::GlobalShift, AnalysisTag::PhaseShift, AnalysisTag::InstantaneousTrace,
                   AnalysisTag::DelayMerge, AnalysisTag::AmplitudeFit, AnalysisTag::EnvelopeCompare})
        if (to_string(t) == s) return t;
    throw ValidationError("unknown analysis '" + s + "'");
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t k = 0; k < n; ++k) v[k] = a + static_cast<double>(k) * (b - a) / static_cast<double>(n - 1);
    return v;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool Scenario::has(AnalysisTag t) const { return std::find(analyses.begin(), analyses.end(), t) != analyses.end(); }

void Scenario::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ValidationError("scenario: " + msg);
    };
    require(!name.empty(), "name must not be empty");
    line.validate();
    wp.validate(line);
    if (cp) cp->validate(line);
    for (double a : sweep.cp_amplitudes) {
        require(std::isfinite(a) && a > 0.0, "cp amplitudes must be positive");
        if (a >= line.i_crit) throw CriticalCurrentExceeded(a, line.i_crit, "scenario " + name + " cp amplitude");
    }
    require(sweep.cp_amplitudes.empty() || cp, "an amplitude sweep needs a control pulse");
    require(sweep.delays.empty() || cp, "a delay sweep needs a control pulse");
    for (const auto& e : sweep.envelopes) dopplerline::validate(e);
    require(sweep.envelope_names.empty() || sweep.envelope_names.size() == sweep.envelopes.size(),
            "envelope names must match the envelopes");
    const double rate = 1.0 / default_solver_config(line, line.propagation_time()).dt;
    for (const auto& p : ddc) {
        if (const auto* f = std::get_if<FreqSweep>(&p)) {
            require(!f->f_d.empty(), "frequency sweep must not be empty");
            for (std::size_t k = 1; k < f->f_d.size(); ++k) require(f->f_d[k] > f->f_d[k - 1], "f_d must increase");
            filter.validate(rate);
        } else {
            const double fd = std::get<FixedFd>(p).f_d > 0.0 ? std::get<FixedFd>(p).f_d : wp.carrier_hz();
            require(std::get<FixedFd>(p).f_d >= 0.0, "fixed f_d must be >= 0");
            phase_filter.validate(rate);
            require(fd > phase_filter.cutoff && fd < rate / 2.0 - phase_filter.cutoff,
                    "fixed f_d must lie within (phase_filter.cutoff, rate/2 - cutoff)");
        }
    }
    const bool has_sweep = std::any_of(ddc.begin(), ddc.end(), [](const auto& p) { return std::holds_alternative<FreqSweep>(p); });
    const bool has_fixed = std::any_of(ddc.begin(), ddc.end(), [](const auto& p) { return std::holds_alternative<FixedFd>(p); });
    require(!has(AnalysisTag::GlobalShift) || has_sweep, "global_shift needs a frequency sweep");
    require(!(has(AnalysisTag::PhaseShift) || has(AnalysisTag::InstantaneousTrace)) || has_fixed,
            "phase analyses need a fixed down-conversion frequency");
    require(!has(AnalysisTag::DelayMerge) || (has_sweep && has_fixed && !sweep.delays.empty()),
            "delay_merge needs a frequency sweep, a fixed f_d and a delay sweep");
    require(!has(AnalysisTag::AmplitudeFit) || sweep.cp_amplitudes.size() >= 6,
            "amplitude_fit needs at least 6 amplitudes");
    require(!has(AnalysisTag::EnvelopeCompare) || reference_runs, "envelope_compare needs reference runs");
    require(duration >= 0.0 && std::isfinite(duration), "duration must be >= 0");
    require(deep_margin >= 0.0, "deep_margin must be >= 0");
    require(ports_stride >= 1, "ports_stride must be >= 1");
    require(snapshot_stride >= 0, "snapshot_stride must be >= 0");
    require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
    require(jobs >= 0, "jobs must be >= 0");
}

std::string RunCoordinates::id() const {
    char buf[128];
    int n = std::snprintf(buf, sizeof buf, "r%03zu", index);
    if (delay) n += std::snprintf(buf + n, sizeof buf - n, "_d%.4gns", *delay * 1e9);
    if (cp_amplitude) n += std::snprintf(buf + n, sizeof buf - n, "_a%.4gmA", *cp_amplitude * 1e3);
    if (reference) n += std::snprintf(buf + n, sizeof buf - n, "_ref");
    std::snprintf(buf + n, sizeof buf - n, "_e%zu", envelope);
    return buf;
}

std::vector<RunCoordinates> enumerate_runs(const Scenario& s) {
    std::vector<std::optional<double>> amps;
    if (s.cp) {
        if (s.sweep.cp_amplitudes.empty()) amps.emplace_back(s.cp->peak_current());
        for (double a : s.sweep.cp_amplitudes) amps.emplace_back(a);
    }
    std::vector<std::optional<double>> delays;
    if (s.sweep.delays.empty()) delays.emplace_back(std::nullopt);
    for (double d : s.sweep.delays) delays.emplace_back(d);
    const std::size_t n_env = std::max<std::size_t>(1, s.sweep.envelopes.size());

    std::vector<RunCoordinates> out;
    auto push = [&](std::optional<double> a, std::size_t e, std::optional<double> d, bool ref) {
        RunCoordinates c;
        c.index = out.size();
        c.cp_amplitude = a;
        c.envelope = e;
        c.delay = d;
        c.reference = ref;
        out.push_back(c);
    };
    if (s.cp) {
        for (const auto& a : amps)
            for (std::size_t e = 0; e < n_env; ++e)
                for (const auto& d : delays) push(a, e, d, false);
    }
    if (s.reference_runs || !s.cp) {
        for (std::size_t e = 0; e < n_env; ++e)
            for (const auto& d : delays) push(std::nullopt, e, d, s.cp.has_value());
    }
    return out;
}

std::pair<WavePacketSpec, std::optional<ControlPulseSpec>> realise_run(const Scenario& s, const RunCoordinates& c) {
    WavePacketSpec wp = s.wp;
    if (!s.sweep.envelopes.empty()) wp.envelope = s.sweep.envelopes.at(c.envelope);
    std::optional<ControlPulseSpec> cp = s.cp;
    if (cp && c.cp_amplitude) set_amplitude(*cp, *c.cp_amplitude);
    if (cp && c.delay) wp.delay = packet_delay_for(*c.delay, s.line, wp, *cp, rise_midpoint(*cp));
    if (cp) {
        // Keep every stimulus at t >= 0.
        const double t_min = std::min(wp.delay, cp->delay);
        if (t_min < 0.0) {
            wp.delay -= t_min;
            cp->delay -= t_min;
        }
    }
    if (c.reference) cp.reset();
    return {wp, cp};
}

double run_duration(const Scenario& s, const WavePacketSpec& wp) {
    if (s.duration > 0.0) return s.duration;
    return wp.delay + wp.tau_wp + 1.15 * s.line.propagation_time() + 4e-9;
}

ScenarioResult run_scenario(const Scenario& s) {
    s.validate();
    ScenarioResult result;
    result.name = s.name;
    result.config_hash = config_hash(s);
    result.config_text = scenario_to_json(s);
    if (s.write_files) {
        result.directory = s.output_dir / s.name;
        fs::create_directories(result.directory);
    }

    const auto coords = enumerate_runs(s);
    result.runs.resize(coords.size());
    const int jobs = s.jobs > 0 ? s.jobs : default_jobs();
    parallel_for(coords.size(), jobs, [&](std::size_t k) {
        try {
            result.runs[k] = execute_run(s, coords[k]);
        } catch (const Error&) {
            rethrow_with_context("scenario " + s.name + ", run " + coords[k].id());
        }
    });

    std::vector<const RunResult*> group;
    for (const auto& r : result.runs) {
        if (r.coord.reference || r.coord.envelope != 0) continue;
        if (!s.sweep.cp_amplitudes.empty() && r.coord.cp_amplitude != s.sweep.cp_amplitudes.front()) continue;
        group.push_back(&r);
    }

    if (s.has(AnalysisTag::DelayMerge)) {
        std::vector<std::pair<double, std::vector<double>>> cuts;
        std::vector<double> axis;
        for (const RunResult* r : group) {
            if (!r->map || !r->coord.delay) continue;
            cuts.emplace_back(*r->coord.delay, r->centre_cut);
            axis = r->map->f_d_axis;
        }
        if (!cuts.empty()) result.merged_map = merge_delay_sweep(cuts, axis);
        merge_delays(s, group, result);
    }

    std::string fit_note;
    if (s.has(AnalysisTag::AmplitudeFit)) fit_amplitudes(s, result, fit_note);

    if (s.has(AnalysisTag::EnvelopeCompare)) {
        const std::size_t n_env = std::max<std::size_t>(1, s.sweep.envelopes.size());
        for (std::size_t e = 0; e < n_env; ++e) {
            const RunResult* ref = nullptr;
            const RunResult* shifted = nullptr;
            for (const auto& r : result.runs) {
                if (r.coord.envelope != e || !r.envelope) continue;
                if (r.coord.reference && !ref) ref = &r;
                if (!r.coord.reference && !shifted) shifted = &r;
            }
            if (!ref || !shifted) continue;
            const EnvelopeComparison cmp = envelope_compare(*ref->envelope, *shifted->envelope);
            EnvelopeReport rep;
            rep.name = e < s.sweep.envelope_names.size() ? s.sweep.envelope_names[e] : "envelope" + std::to_string(e);
            rep.max_rel_diff = cmp.max_rel_diff;
            rep.lag = cmp.lag;
            result.envelopes.push_back(rep);
            if (s.write_files)
                write_trace_csv(result.directory / ("envelope_diff_" + std::to_string(e) + ".csv"), "t_s,rel_diff",
                                cmp.difference, nullptr);
        }
    }

    if (s.write_files) {
        write_scenario_files(s, result, fit_note);
        const bool has_sweep = std::any_of(s.ddc.begin(), s.ddc.end(), [](const auto& p) { return std::holds_alternative<FreqSweep>(p); });
        const bool has_fixed = std::any_of(s.ddc.begin(), s.ddc.end(), [](const auto& p) { return std::holds_alternative<FixedFd>(p); });
        if (has_sweep && has_fixed && !s.sweep.delays.empty() && s.has(AnalysisTag::DelayMerge)) {
            const CrossValidationReport rep = cross_validate(s, result);
            const fs::path p = result.directory / "cross_validation.csv";
            auto out = open_out(p);
            out << "delay_s,parabola_hz,phase_hz,oracle_hz,near_boundary\n";
            for (const auto& row : rep.rows)
                out << row.delay << ',' << row.parabola_hz << ',' << row.phase_hz << ',' << row.oracle_hz << ','
                    << (row.near_boundary ? 1 : 0) << '\n';
            check_written(out, p);
        }
    }
    return result;
}

CrossValidationReport cross_validate(const Scenario& s) {
    Scenario copy = s;
    if (!copy.has(AnalysisTag::GlobalShift)) copy.analyses.push_back(AnalysisTag::GlobalShift);
    if (!copy.has(AnalysisTag::DelayMerge)) copy.analyses.push_back(AnalysisTag::DelayMerge);
    return cross_validate(copy, run_scenario(copy));
}

CrossValidationReport cross_validate(const Scenario& s, const ScenarioResult& r) {
    if (s.sweep.delays.empty()) throw ValidationError("cross_validate: needs a delay sweep");
    std::optional<ConditionBoundaries> b;
    if (boundaries_available(s)) b = condition_boundaries(s.line, s.wp, *s.cp);

    CrossValidationReport rep;
    for (const auto& run : r.runs) {
        if (run.coord.reference || run.coord.envelope != 0 || !run.coord.delay || !run.global_shift_hz) continue;
        if (!s.sweep.cp_amplitudes.empty() && run.coord.cp_amplitude != s.sweep.cp_amplitudes.front()) continue;
        const double d = *run.coord.delay;
        const auto it = std::find_if(r.averaged_inst.begin(), r.averaged_inst.end(),
                                     [&](const auto& p) { return p.first == d; });
        if (it == r.averaged_inst.end()) continue;
        CrossValidationRow row;
        row.delay = d;
        row.parabola_hz = *run.global_shift_hz;
        row.phase_hz = it->second;
        row.oracle_hz = run.oracle_centre_hz;
        if (b) {
            const double h = 0.5 * s.wp.tau_wp;
            for (double edge : {b->red_start, b->cancel_start, b->inside_start, b->blue_start, b->blue_end})
                if (std::abs(d - edge) < h) row.near_boundary = true;
        }
        rep.rows.push_back(row);
    }
    for (const auto& row : rep.rows) {
        const double ab = std::abs(row.parabola_hz - row.phase_hz);
        const double ao = std::abs(row.parabola_hz - row.oracle_hz);
        const double bo = std::abs(row.phase_hz - row.oracle_hz);
        rep.max_parabola_vs_phase = std::max(rep.max_parabola_vs_phase, ab);
        rep.max_parabola_vs_oracle = std::max(rep.max_parabola_vs_oracle, ao);
        rep.max_phase_vs_oracle = std::max(rep.max_phase_vs_oracle, bo);
        if (!row.near_boundary) {
            rep.interior_parabola_vs_phase = std::max(rep.interior_parabola_vs_phase, ab);
            rep.interior_parabola_vs_oracle = std::max(rep.interior_parabola_vs_oracle, ao);
            rep.interior_phase_vs_oracle = std::max(rep.interior_phase_vs_oracle, bo);
        }
    }
    return rep;
}

std::string CrossValidationReport::to_text() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << "delay_ns  parabola_MHz  phase_MHz  oracle_MHz\n";
    for (const auto& r : rows) {
        os << std::setw(8) << r.delay * 1e9 << "  " << std::setw(12) << r.parabola_hz * 1e-6 << "  " << std::setw(9)
           << r.phase_hz * 1e-6 << "  " << std::setw(10) << r.oracle_hz * 1e-6 << (r.near_boundary ? "  *" : "") << '\n';
    }
    os << "max |parabola - phase|  = " << max_parabola_vs_phase * 1e-6 << " MHz (interior "
       << interior_parabola_vs_phase * 1e-6 << ")\n";
    os << "max |parabola - oracle| = " << max_parabola_vs_oracle * 1e-6 << " MHz (interior "
       << interior_parabola_vs_oracle * 1e-6 << ")\n";
    os << "max |phase - oracle|    = " << max_phase_vs_oracle * 1e-6 << " MHz (interior "
       << interior_phase_vs_oracle * 1e-6 << ")\n";
    os << "* within tau_wp / 2 of a condition boundary\n";
    return os.str();
}

// ---------------------------------------------------------------------------------------------
// Builtin catalog

namespace {

WavePacketSpec packet(double carrier, double tau) {
    WavePacketSpec wp;
    wp.omega_in = kTwoPi * carrier;
    wp.tau_wp = tau;
    wp.amplitude = 1e-5;
    return wp;
}

ControlPulseSpec rect_pulse(double amplitude, double duration, double delay = 5e-9) {
    ControlPulseSpec cp;
    RectPulse r;
    r.amplitude = amplitude;
    r.duration = duration;
    cp.shape = r;
    cp.delay = delay;
    return cp;
}

std::vector<double> sweep_axis(double lo, double hi, std::size_t n) { return linspace(lo, hi, n); }

// Two unequal raised-cosine humps.
Waveform double_hump(double tau) {
    const double rate = 10e9;
    const auto n = static_cast<std::size_t>(std::lround(tau * rate));
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(n);
        const double hump = std::sin(2.0 * std::numbers::pi * x);
        s[k] = x < 0.5 ? hump * hump : 0.55 * hump * hump;
    }
    return Waveform(rate, 0.0, std::move(s));
}

// Current that shifts a packet at `carrier` by `shift` (Hz) under the quadratic law.
double amplitude_for_shift(double shift, double carrier, const LineSpec& line) {
    return line.i_star * std::sqrt(4.0 * std::abs(shift) / carrier);
}

}  // namespace

std::vector<Scenario> builtin_catalog() {
    const LineSpec line = default_line();
    std::vector<Scenario> out;

    {
        Scenario s;
        s.name = "fig1";
        s.description =
            "500 MHz staircase packet (40 ns) crossing the falling front of a 100 ns control pulse; full output trace. "
            "The pulse amplitude is not published: it is set by solving the quadratic shift law for a 14 MHz shift "
            "at 500 MHz, I = I* sqrt(4 * 14 MHz / 500 MHz) = 2.058 mA.";
        s.wp = packet(500e6, 40e-9);
        s.wp.envelope = StaircaseEnvelope{{0.35, 0.7, 1.0, 0.6, 0.3}};
        s.cp = rect_pulse(amplitude_for_shift(14e6, 500e6, line), 100e-9);
        s.sweep.delays = {130e-9};
        s.reference_runs = true;
        s.ddc = {FreqSweep{sweep_axis(450e6, 550e6, 101)}, FixedFd{0.0}};
        s.phase_filter.cutoff = 200e6;
        s.phase_filter.taps = 255;
        s.analyses = {AnalysisTag::GlobalShift, AnalysisTag::PhaseShift};
        s.ports_stride = 4;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig2";
        s.description =
            "Four encounter conditions of a 15 ns / 4 GHz packet with a 1.62 mA / 30 ns pulse: no meeting, rising "
            "front only, both fronts, falling front only.";
        s.wp = packet(4e9, 15e-9);
        s.cp = rect_pulse(1.62e-3, 30e-9);
        s.sweep.delays = {-20e-9, 14.65e-9, 54.65e-9, 94.9e-9};
        s.ddc = {FreqSweep{sweep_axis(3.8e9, 4.2e9, 200)}, FixedFd{0.0}};
        s.analyses = {AnalysisTag::GlobalShift, AnalysisTag::PhaseShift};
        s.ports_stride = 4;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig3";
        s.description =
            "70 packets of 15 ns at delays 0-128 ns against a 1.58 mA / 40 ns pulse; magnitude maps over 191 f_d "
            "(2 MHz steps) merged by delay, and the instantaneous shift averaged over the packets holding each delay.";
        s.wp = packet(4e9, 15e-9);
        s.cp = rect_pulse(1.58e-3, 40e-9);
        s.sweep.delays = sweep_axis(0.0, 128e-9, 70);
        s.ddc = {FreqSweep{sweep_axis(3.86e9, 4.24e9, 191)}, FixedFd{0.0}};
        s.analyses = {AnalysisTag::GlobalShift, AnalysisTag::PhaseShift, AnalysisTag::DelayMerge};
        s.ports_stride = 8;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig4";
        s.description =
            "Three 30 ns / 4 GHz packets with nontrivial envelopes through a 0.52 mA rising front, compared with "
            "reference runs without the pulse.";
        s.wp = packet(4e9, 30e-9);
        s.cp = rect_pulse(0.52e-3, 100e-9);
        s.sweep.delays = {40e-9};
        s.sweep.envelopes = {GaussianEnvelope{5e-9}, StaircaseEnvelope{{0.4, 1.0, 0.7, 0.25}},
                             TableEnvelope{double_hump(30e-9)}};
        s.sweep.envelope_names = {"gaussian", "staircase", "double_hump"};
        s.reference_runs = true;
        s.ddc = {FixedFd{0.0}};
        s.analyses = {AnalysisTag::PhaseShift, AnalysisTag::EnvelopeCompare};
        s.ports_stride = 4;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig5";
        s.description =
            "Rising fronts of 0.08-2.03 mA met by 15 ns / 4 GHz packets at 24 delays from -3.6 to 38.2 ns; phase "
            "slopes of fully shifted packets averaged per amplitude and fitted with quadratic and quartic terms.";
        s.wp = packet(4e9, 15e-9);
        s.cp = rect_pulse(1.0e-3, 100e-9);
        s.sweep.delays = sweep_axis(-3.6e-9, 38.2e-9, 24);
        s.sweep.cp_amplitudes = {0.08e-3, 0.2e-3, 0.4e-3, 0.6e-3, 0.8e-3, 1.0e-3,
                                 1.2e-3,  1.4e-3, 1.6e-3, 1.8e-3, 2.03e-3};
        s.ddc = {FixedFd{0.0}};
        s.analyses = {AnalysisTag::PhaseShift, AnalysisTag::AmplitudeFit};
        s.ports_stride = 8;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "fig6";
        s.description =
            "Rectangular 66 ns / 4 GHz packet leaving the device while a multi-level staircase pulse enters it; each "
            "point takes the shift set by the pulse level at the output port when it leaves.";
        s.wp = packet(4e9, 66e-9);
        s.wp.delay = 0.0;
        ControlPulseSpec cp;
        cp.shape = ArbitraryPulse{staircase_pulse({0.5e-3, 1.0e-3, 1.5e-3, 2.0e-3, 1.5e-3, 1.0e-3, 0.5e-3}, 8e-9, 0.2e-9)};
        cp.delay = 43e-9;
        s.cp = cp;
        s.ddc = {FixedFd{0.0}};
        s.analyses = {AnalysisTag::InstantaneousTrace};
        s.ports_stride = 4;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "edf2";
        s.description =
            "30 ns / 4 GHz packet meeting a 1.62 mA front with a 5 ns linear ramp; the instantaneous shift rises "
            "linearly over the ramp duration.";
        s.wp = packet(4e9, 30e-9);
        s.wp.delay = 0.0;
        ControlPulseSpec cp = rect_pulse(1.62e-3, 100e-9, 50e-9);
        std::get<RectPulse>(cp.shape).rise = 5e-9;
        s.cp = cp;
        s.ddc = {FixedFd{0.0}};
        s.analyses = {AnalysisTag::InstantaneousTrace};
        s.ports_stride = 4;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "edf3";
        s.description =
            "500 MHz / 40 ns packets crossing only the falling front of 100 ns pulses of 0.25-2.25 mA; global "
            "blueshift versus amplitude with a quadratic plus quartic fit.";
        s.wp = packet(500e6, 40e-9);
        s.cp = rect_pulse(1.0e-3, 100e-9);
        s.sweep.delays = {130e-9};
        s.sweep.cp_amplitudes = {0.25e-3, 0.5e-3, 0.75e-3, 1.0e-3, 1.25e-3, 1.5e-3, 1.75e-3, 2.0e-3, 2.25e-3};
        s.ddc = {FreqSweep{sweep_axis(440e6, 560e6, 121)}, FixedFd{0.0}};
        s.phase_filter.cutoff = 200e6;
        s.phase_filter.taps = 255;
        s.analyses = {AnalysisTag::GlobalShift, AnalysisTag::PhaseShift, AnalysisTag::AmplitudeFit};
        s.ports_stride = 4;
        out.push_back(s);
    }
    for (auto& s : out) s.line = line;
    return out;
}

Scenario builtin_scenario(const std::string& name) {
    for (auto& s : builtin_catalog())
        if (s.name == name) return s;
    throw ValidationError("unknown builtin scenario '" + name + "'");
}

}  // namespace dopplerline
