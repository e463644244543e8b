// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is nonzero when any criterion fails.

#include "dopplerline/analysis.hpp"
#include "dopplerline/characteristics.hpp"
#include "dopplerline/ddc.hpp"
#include "dopplerline/experiments.hpp"
#include "dopplerline/line_model.hpp"
#include "dopplerline/parallel.hpp"
#include "dopplerline/signal.hpp"
#include "dopplerline/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

using namespace dopplerline;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tolerances.
constexpr double kC1VertexHz = 1e6;
constexpr double kC1EnvelopeL2 = 0.01;
constexpr double kC1RuntimeS = 10.0;
constexpr double kC2CancelHz = 0.5e6;
constexpr double kC3Asymmetry = 0.02;
constexpr double kC4IStarRel = 0.02;
constexpr double kC4PointRel = 0.03;
constexpr double kC4RuntimeS = 180.0;
constexpr double kC5Hz = 1e6;
constexpr double kC6Rel = 0.01;
constexpr double kC6RuntimeS = 1.0;
constexpr double kC7RmsOfPeak = 0.05;
constexpr double kC8MaxRel = 0.05;
constexpr double kC9BoundaryS = 1e-9;
constexpr double kC9BandRel = 0.03;
constexpr double kC10OffsetRel = 1e-3;
constexpr double kC10StopbandDb = 40.0;
constexpr double kC11RuntimeS = 600.0;

// Fig. 3 interval edges (ns) quoted for the 40 ns / 1.58 mA pulse.
const std::vector<double> kQuotedEdgesNs{16.0, 56.0, 78.0, 118.0};

struct Verdict {
    bool pass = false;
    std::string text;
};

std::map<int, Verdict> verdicts;
std::vector<std::string> notes;

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void record(int id, bool pass, const std::string& text) {
    verdicts[id] = {pass, text};
    std::fprintf(stderr, "[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, text.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WavePacketSpec packet(double carrier, double tau) {
    WavePacketSpec wp;
    wp.omega_in = kTwoPi * carrier;
    wp.tau_wp = tau;
    return wp;
}

ControlPulseSpec rect(double amp, double duration) {
    ControlPulseSpec cp;
    cp.shape = RectPulse{amp, duration};
    cp.delay = 5e-9;
    return cp;
}

// Mean of measured minus oracle instantaneous shift over the central half of the gated trace.
double central_inst_gap(const RunResult& r) {
    const Waveform& m = *r.inst_shift_hz;
    const Waveform& o = *r.oracle_shift_hz;
    const std::size_t lo = m.size() / 4;
    const std::size_t hi = 3 * m.size() / 4;
    double acc = 0.0;
    for (std::size_t k = lo; k < hi; ++k) acc += m[k] - o[k];
    return acc / static_cast<double>(hi - lo);
}

// ---------------------------------------------------------------------------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const LineSpec line = default_line();
    WavePacketSpec wp = packet(4e9, 15e-9);
    wp.delay = 2e-9;
    const SolverConfig cfg = default_solver_config(line, wp.delay + wp.tau_wp + line.propagation_time() + 8e-9);
    const RunOutput out = run(line, wp, std::nullopt, cfg);
    const Waveform& w = out.ports.right_out;
    const double z0 = line.impedance();

    // Integer-sample lag maximising the correlation with the injected packet.
    const auto n_tau = static_cast<long>(std::lround(line.propagation_time() / cfg.dt));
    long best_lag = 0;
    double best = -1e300;
    for (long lag = n_tau - 40; lag <= n_tau + 40; ++lag) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * out.ports.wp_injected.at(w.time(k) - lag * cfg.dt);
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    const double delay = best_lag * cfg.dt;

    std::vector<double> ref(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) ref[k] = z0 * out.ports.wp_injected.at(w.time(k) - line.propagation_time());
    const Waveform ref_w(w.sample_rate(), w.t0(), ref);
    const Waveform env_out = magnitude(down_convert(w, 4e9, FilterSpec{}));
    const Waveform env_ref = magnitude(down_convert(ref_w, 4e9, FilterSpec{}));
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < env_ref.size(); ++k) {
        diff += std::pow(env_out[k] - env_ref[k], 2);
        norm += env_ref[k] * env_ref[k];
    }
    const double l2 = std::sqrt(diff / norm);

    const MagnitudeMap map = magnitude_map(w, linspace(3.9e9, 4.1e9, 101), FilterSpec{}, 1);
    const double f_out = fit_parabola_peak(map, packet_centre_time(map));
    const double runtime = seconds_since(t0);

    const bool pass = std::abs(delay - line.propagation_time()) <= cfg.dt * (1.0 + 1e-9) && l2 < kC1EnvelopeL2 &&
                      std::abs(f_out - 4e9) < kC1VertexHz && runtime < kC1RuntimeS;
    record(1, pass,
           fmt("delay %.4f ns (tau_p 40 ns, dt %.2f ps), envelope L2 %.2e (< %.0e), f_out %.6f GHz (+-1 MHz), "
               "runtime %.1f s (< 10 s)",
               delay * 1e9, cfg.dt * 1e12, l2, kC1EnvelopeL2, f_out * 1e-9, runtime));
}

void criteria_2_3() {
    Scenario s = builtin_scenario("fig2");
    s.write_files = false;
    const ScenarioResult r = run_scenario(s);
    const double red = *r.runs.at(1).global_shift_hz;
    const double cancel = *r.runs.at(2).global_shift_hz;
    const double blue = *r.runs.at(3).global_shift_hz;
    record(2, std::abs(cancel) < kC2CancelHz,
           fmt("both fronts of 1.62 mA / 30 ns (delay %.2f ns, %s): global shift %.3f MHz (|.| < 0.5 MHz); "
               "phase %.3f MHz; oracle %.3f MHz",
               *r.runs.at(2).coord.delay * 1e9, to_string(r.runs.at(2).condition).c_str(), cancel * 1e-6,
               *r.runs.at(2).phase_shift_hz * 1e-6, r.runs.at(2).oracle_centre_hz * 1e-6));

    // Supplementary: the same encounter with a 2 ns falling edge, which stays smooth inside the line.
    Scenario soft = s;
    std::get<RectPulse>(soft.cp->shape).fall = 2e-9;
    soft.sweep.delays = {s.sweep.delays.at(2)};
    const ScenarioResult rs = run_scenario(soft);
    notes.push_back(fmt("criterion 2, supplementary (not scored): with a 2 ns falling edge the same encounter gives "
                        "%.3f MHz (parabola), %.3f MHz (phase)",
                        *rs.runs.at(0).global_shift_hz * 1e-6, *rs.runs.at(0).phase_shift_hz * 1e-6));

    const double asym = std::abs(red + blue) / std::abs(red);
    record(3, asym < kC3Asymmetry,
           fmt("red %.3f MHz, blue %.3f MHz, |red + blue| / |red| = %.2f %% (< 2 %%)", red * 1e-6, blue * 1e-6,
               asym * 100.0));
}

std::optional<ShiftFit> c4_fit;

void criteria_4_5() {
    const auto amps = linspace(0.1e-3, 2.0e-3, 10);
    Scenario s;
    s.name = "acceptance_amplitude";
    s.wp = packet(4e9, 15e-9);
    s.cp = rect(1e-3, 100e-9);
    s.sweep.delays = {20e-9};
    s.sweep.cp_amplitudes = amps;
    s.ddc = {FixedFd{0.0}};
    s.analyses = {AnalysisTag::PhaseShift, AnalysisTag::InstantaneousTrace, AnalysisTag::AmplitudeFit};
    s.write_files = false;

    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioResult r = run_scenario(s);
    const double runtime = seconds_since(t0);
    c4_fit = r.fit;

    const LineSpec line = s.line;
    const double omega = s.wp.omega_in;
    double worst_point = 0.0;
    double worst_at = 0.0;
    int failing = 0;
    for (const auto& p : r.amplitude_points) {
        if (p.i_cp > 0.5 * line.i_star) continue;
        const double law = -(omega / 4.0) * std::pow(p.i_cp / line.i_star, 2) / kTwoPi;
        const double rel = std::abs(p.shift_hz - law) / std::abs(law);
        if (rel >= kC4PointRel) ++failing;
        if (rel > worst_point) {
            worst_point = rel;
            worst_at = p.i_cp;
        }
    }
    const double istar_rel = std::abs(r.fit->i_star_hat - line.i_star) / line.i_star;
    const bool pass4 = istar_rel < kC4IStarRel && failing == 0 && runtime < kC4RuntimeS;
    record(4, pass4,
           fmt("i_star_hat %.4f mA (%.2f %%, < 2 %%), c4_hat %.3f; pointwise vs -(w/4)(I/I*)^2: worst %.2f %% at "
               "%.2f mA, %d of %zu points >= 3 %%; runtime %.0f s (< 180 s, %d worker(s))",
               r.fit->i_star_hat * 1e3, istar_rel * 100.0, r.fit->c4_hat, worst_point * 100.0, worst_at * 1e3, failing,
               r.amplitude_points.size(), runtime, default_jobs()));

    // Oracle equivalence on rising fronts (the sweep above) and falling fronts (packets behind the pulse).
    Scenario fall = s;
    fall.name = "acceptance_falling";
    fall.sweep.delays = {130e-9};
    fall.analyses = {AnalysisTag::PhaseShift, AnalysisTag::InstantaneousTrace};
    const ScenarioResult rf = run_scenario(fall);
    double worst_rise = 0.0;
    double worst_fall = 0.0;
    double worst_fall_at = 0.0;
    for (const auto& run : r.runs) worst_rise = std::max(worst_rise, std::abs(central_inst_gap(run)));
    for (const auto& run : rf.runs) {
        const double g = std::abs(central_inst_gap(run));
        if (g > worst_fall) {
            worst_fall = g;
            worst_fall_at = *run.coord.cp_amplitude;
        }
    }
    record(5, std::max(worst_rise, worst_fall) < kC5Hz,
           fmt("max |f_inst - oracle| over the packet centre, 0.1-2.0 mA: rising fronts %.3f MHz, falling fronts "
               "%.3f MHz (at %.2f mA); limit 1 MHz",
               worst_rise * 1e-6, worst_fall * 1e-6, worst_fall_at * 1e3));
}

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const LineSpec line = default_line();
    const double omega = kTwoPi * 4e9;
    const double v0 = line.velocity();
    double worst = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double i = 0.001 * k * line.i_star;
        const DopplerArgs front{-v0, v0, phase_velocity(i, line)};
        const double exact = compose_doppler(omega, std::span<const DopplerArgs>(&front, 1)) - omega;
        worst = std::max(worst, std::abs(exact - shift_from_current(omega, i, line)) / std::abs(exact));
    }
    const double runtime = seconds_since(t0);
    record(6, worst < kC6Rel && runtime < kC6RuntimeS,
           fmt("max relative gap between the composed front ratio and the quadratic law for I <= 0.1 I*: %.3f %% "
               "(< 1 %%), %.3f s",
               worst * 100.0, runtime));
}

void criterion_7() {
    Scenario s = builtin_scenario("fig6");
    s.write_files = false;
    const ScenarioResult r = run_scenario(s);
    const RunResult& run = r.runs.at(0);
    const Waveform& m = *run.inst_shift_hz;
    const Waveform& o = *run.oracle_shift_hz;
    const double settle = settling_time(plan_ddc(run.ports.right_out.sample_rate(), s.phase_filter));

    // Steps of the oracle profile; the packet's own head and tail count as steps too.
    std::vector<double> steps{m.t0(), m.time(m.size() - 1)};
    for (std::size_t k = 1; k < o.size(); ++k)
        if (std::abs(o[k] - o[k - 1]) > 0.5e6) steps.push_back(0.5 * (o.time(k) + o.time(k - 1)));
    double peak = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) peak = std::max(peak, std::abs(o[k]));
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double t = m.time(k);
        const bool near = std::any_of(steps.begin(), steps.end(), [&](double st) { return std::abs(t - st) <= settle; });
        if (near) continue;
        ss += std::pow(m[k] - o[k], 2);
        ++n;
    }
    const double rms = std::sqrt(ss / static_cast<double>(n));
    record(7, rms < kC7RmsOfPeak * peak,
           fmt("staircase pulse: RMS(measured - oracle) %.3f MHz = %.2f %% of the %.2f MHz peak (< 5 %%), %zu of %zu "
               "samples kept (settling %.2f ns around %zu step samples)",
               rms * 1e-6, 100.0 * rms / peak, peak * 1e-6, n, m.size(), settle * 1e9, steps.size()));
}

void criterion_8() {
    Scenario s = builtin_scenario("fig4");
    s.write_files = false;
    const ScenarioResult r = run_scenario(s);
    bool pass = r.envelopes.size() == 3;
    std::string per;
    for (const auto& e : r.envelopes) {
        pass = pass && e.max_rel_diff < kC8MaxRel;
        per += fmt(" %s %.2f %%;", e.name.c_str(), e.max_rel_diff * 100.0);
    }
    record(8, pass, "max relative envelope difference through a 0.52 mA rising front (< 5 %):" + per);
}

void criteria_9_11() {
    Scenario s = builtin_scenario("fig3");
    s.output_dir = std::filesystem::temp_directory_path() / "dopplerline_acceptance";
    std::filesystem::remove_all(s.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioResult r = run_scenario(s);
    const double runtime = seconds_since(t0);
    record(11, runtime < kC11RuntimeS && r.merged_map && r.merged_map->t_axis.size() == 70 &&
                   r.merged_map->f_d_axis.size() == 191,
           fmt("fig3 (70 delays x 191 f_d, files written) in %.0f s (< 600 s) on %d worker(s)", runtime,
               default_jobs()));

    const ConditionBoundaries b = condition_boundaries(s.line, s.wp, *s.cp);
    const std::vector<double> edges{b.red_start, b.cancel_start, b.blue_start, b.blue_end};
    double worst_edge = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k)
        worst_edge = std::max(worst_edge, std::abs(edges[k] * 1e9 - kQuotedEdgesNs[k]) * 1e-9);
    const bool edges_ok = worst_edge <= kC9BoundaryS;

    // Band averages of the parabola shifts over delays whose whole packet sits inside one condition.
    const double h = 0.5 * s.wp.tau_wp;
    std::map<Condition, std::vector<double>> bands;
    for (const auto& run : r.runs) {
        const double d = *run.coord.delay;
        const Condition c = classify_condition(d, s.line, s.wp, *s.cp);
        if (classify_condition(d - h, s.line, s.wp, *s.cp) != c || classify_condition(d + h, s.line, s.wp, *s.cp) != c)
            continue;
        bands[c].push_back(*run.global_shift_hz);
    }
    auto mean = [](const std::vector<double>& v) {
        double a = 0.0;
        for (double x : v) a += x;
        return v.empty() ? std::nan("") : a / static_cast<double>(v.size());
    };
    const double red = mean(bands[Condition::RedOnly]);
    const double zero = mean(bands[Condition::Cancel]);
    const double blue = mean(bands[Condition::BlueOnly]);
    const double i = std::get<RectPulse>(s.cp->shape).amplitude;
    const double pred = c4_fit ? (c4_fit->a * i * i + c4_fit->b * std::pow(i, 4)) / kTwoPi : std::nan("");
    const bool red_ok = std::abs(red - pred) < kC9BandRel * std::abs(pred);
    const bool blue_ok = std::abs(blue + pred) < kC9BandRel * std::abs(pred);
    const bool zero_ok = std::abs(zero) < kC2CancelHz;
    record(9, edges_ok && red_ok && blue_ok && zero_ok,
           fmt("geometric edges %.1f / %.1f / %.1f / %.1f ns vs quoted 16 / 56 / 78 / 118 ns (worst %.1f ns, limit "
               "1 ns); bands: red %.2f MHz (%zu delays), zero %.2f MHz (%zu), blue %.2f MHz (%zu); criterion-4 fit "
               "at 1.58 mA %.2f MHz (bands within 3 %%, zero band < 0.5 MHz)",
               edges[0] * 1e9, edges[1] * 1e9, edges[2] * 1e9, edges[3] * 1e9, worst_edge * 1e9, red * 1e-6,
               bands[Condition::RedOnly].size(), zero * 1e-6, bands[Condition::Cancel].size(), blue * 1e-6,
               bands[Condition::BlueOnly].size(), pred * 1e-6));
    std::filesystem::remove_all(s.output_dir);
}

void criterion_10() {
    const double rate = 160e9;
    double worst = 0.0;
    for (const FilterSpec& filt : {FilterSpec{}, phase_filter()}) {
        for (double off : {-30e6, -20e6, -10e6, -2e6, 2e6, 10e6, 20e6, 30e6}) {
            const auto n = static_cast<std::size_t>(std::lround(200e-9 * rate));
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) x[k] = std::cos(kTwoPi * (4e9 + off) * static_cast<double>(k) / rate);
            const Waveform ph = phase_unwrapped(down_convert(Waveform(rate, 0.0, x), 4e9, filt));
            const double span = ph.duration();
            const double est = phase_slope_shift(ph, ph.t0() + 0.25 * span, ph.t0() + 0.75 * span) / kTwoPi;
            worst = std::max(worst, std::abs(est - off) / std::abs(off));
        }
    }
    const double rejection_db = -20.0 * std::log10(plan_magnitude(plan_ddc(rate, FilterSpec{}), 100e6));
    record(10, worst < kC10OffsetRel && rejection_db > kC10StopbandDb,
           fmt("tone offsets up to +-30 MHz: worst relative error %.2e (< 1e-3); rejection at 100 MHz %.1f dB (> 40 dB)",
               worst, rejection_db));
}

}  // namespace

int main() {
    try {
        criterion_6();
        criterion_10();
        criterion_1();
        criteria_2_3();
        criteria_4_5();
        criterion_7();
        criterion_8();
        criteria_9_11();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    int failed = 0;
    for (int id = 1; id <= 11; ++id) {
        const auto it = verdicts.find(id);
        if (it == verdicts.end()) {
            std::printf("FAIL criterion %2d: not evaluated\n", id);
            ++failed;
            continue;
        }
        std::printf("%s criterion %2d: %s\n", it->second.pass ? "PASS" : "FAIL", id, it->second.text.c_str());
        if (!it->second.pass) ++failed;
    }
    for (const auto& n : notes) std::printf("note: %s\n", n.c_str());
    std::printf("%d of 11 criteria passed\n", 11 - failed);
    return failed == 0 ? 0 : 1;
}
