#include "dopplerline/selftest.hpp"

#include "dopplerline/analysis.hpp"
#include "dopplerline/ddc.hpp"
#include "dopplerline/errors.hpp"
#include "dopplerline/line_model.hpp"
#include "dopplerline/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace dopplerline {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Waveform tone(double rate, double f, double duration) {
    const auto n = static_cast<std::size_t>(std::lround(duration * rate));
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = std::cos(kTwoPi * f * static_cast<double>(k) / rate);
    return Waveform(rate, 0.0, std::move(s));
}

// max |product of the two one-way ratios - 1| over a few fronts.
double doppler_reciprocity() {
    const LineSpec line = default_line();
    const double v0 = line.velocity();
    const double v1 = phase_velocity(1.5e-3, line);
    double worst = 0.0;
    for (double v : {-v0, -0.5 * v0, 0.3 * v0}) {
        const double there = doppler_ratio({v, v0, v1});
        const double back = doppler_ratio({v, v1, v0});
        worst = std::max(worst, std::abs(there * back - 1.0));
    }
    worst = std::max(worst, std::abs(doppler_ratio({-v0, v0, v0}) - 1.0));
    return worst;
}

// Relative gap between the exact head-on ratio and the quadratic shift law at a small current.
double shift_law_consistency() {
    const LineSpec line = default_line();
    const double omega = kTwoPi * 4e9;
    const double i = 0.3e-3;
    const DopplerArgs front{-line.velocity(), line.velocity(), phase_velocity(i, line)};
    const double exact = compose_doppler(omega, std::span<const DopplerArgs>(&front, 1)) - omega;
    const double law = shift_from_current(omega, i, line);
    return std::abs(exact - law) / std::abs(law);
}

// A 20 MHz offset tone down-converted and read back by both estimators.
std::pair<double, double> ddc_offset(const SelftestHooks& hooks) {
    const double rate = 160e9;
    const double offset = 20e6;
    const Waveform w = tone(rate, 4e9 + offset, 100e-9);
    const IQTrace tr = down_convert(w, 4e9, phase_filter());
    const Waveform ph = phase_unwrapped(tr, 0.2);
    const double span = ph.duration();
    const double slope = hooks.phase_slope(ph, ph.t0() + 0.25 * span, ph.t0() + 0.75 * span) / kTwoPi;
    const Waveform inst = hooks.instantaneous(ph, 3);
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = inst.size() / 4; k < 3 * inst.size() / 4; ++k, ++n) acc += inst[k];
    const double mean = acc / static_cast<double>(n) / kTwoPi;
    return {std::abs(slope - offset) / offset, std::abs(mean - offset) / offset};
}

// Worst plan response over the stop band edge and beyond, relative to DC.
double stopband() {
    const DdcPlan plan = plan_ddc(160e9, FilterSpec{});
    double worst = 0.0;
    for (double f = 100e6; f <= 250e6; f += 5e6) worst = std::max(worst, plan_magnitude(plan, f));
    return worst;
}

// A linear line at the magic time step delays the injected packet by tau_p without distortion.
double magic_step_transport() {
    LineSpec line = default_line();
    line.n_cells = 400;
    line.i_star = 10.0;
    line.i_crit = 5.0;
    WavePacketSpec wp;
    wp.omega_in = kTwoPi * 1e9;
    wp.tau_wp = 8e-9;
    wp.delay = 1e-9;
    const double tau = line.propagation_time();
    const SolverConfig cfg = default_solver_config(line, tau + wp.delay + wp.tau_wp + 2e-9);
    const RunOutput out = run(line, wp, std::nullopt, cfg);
    const Waveform& right = out.ports.right_out;
    const double z0 = line.impedance();
    double worst = 0.0;
    double peak = 0.0;
    for (std::size_t k = 0; k < right.size(); ++k) {
        const double t = right.time(k);
        const double expected = z0 * out.ports.wp_injected.at(t - tau);
        worst = std::max(worst, std::abs(right[k] - expected));
        peak = std::max(peak, std::abs(expected));
    }
    return worst / peak;
}

// Vertex of a sampled, symmetric peak placed between grid points.
double parabola_vertex() {
    const double centre = 4.0123e9;
    std::vector<double> f;
    std::vector<double> m;
    for (int k = -40; k <= 40; ++k) {
        const double fd = 4e9 + 2e6 * k;
        const double u = (fd - centre) / 20e6;
        f.push_back(fd);
        m.push_back(std::exp(-u * u));
    }
    return std::abs(fit_parabola_vertex(f, m) - centre);
}

// I* and c4 read back from noiseless synthetic data.
double fit_recovery() {
    const LineSpec line = default_line();
    const double omega = kTwoPi * 4e9;
    LineSpec quartic = line;
    quartic.c4 = -0.3;
    std::vector<std::pair<double, double>> pts;
    for (int k = 1; k <= 10; ++k) {
        const double i = 0.2e-3 * k;
        pts.emplace_back(i, shift_from_current(omega, i, quartic));
    }
    const ShiftFit fit = fit_amplitude_sweep(pts, omega);
    return std::max(std::abs(fit.i_star_hat - line.i_star) / line.i_star, std::abs(fit.c4_hat - quartic.c4));
}

}  // namespace

std::map<std::string, double> default_tolerances() {
    return {
        {"doppler_reciprocity", 1e-12},
        {"shift_law_consistency", 0.01},
        {"ddc_phase_slope", 1e-3},
        {"ddc_instantaneous", 1e-3},
        {"ddc_stopband", 0.01},
        {"magic_step_transport", 1e-6},
        {"parabola_vertex_hz", 100e3},
        {"fit_recovery", 1e-6},
    };
}

std::vector<PropertyResult> run_selftest(const SelftestOptions& opts) {
    auto tol = default_tolerances();
    for (const auto& [name, value] : opts.tolerances) {
        if (!tol.count(name)) throw ValidationError("selftest: unknown property '" + name + "'");
        if (!(value >= 0.0)) throw ValidationError("selftest: tolerance of '" + name + "' must be >= 0");
        tol[name] = value;
    }
    SelftestHooks hooks = opts.hooks;
    if (!hooks.instantaneous) hooks.instantaneous = instantaneous_shift;
    if (!hooks.phase_slope) hooks.phase_slope = phase_slope_shift;

    std::vector<PropertyResult> out;
    auto check = [&](const std::string& name, const std::function<double()>& fn, const std::string& detail) {
        PropertyResult r;
        r.name = name;
        r.tolerance = tol.at(name);
        r.detail = detail;
        try {
            r.value = fn();
            r.passed = std::isfinite(r.value) && r.value <= r.tolerance;
        } catch (const Error& e) {
            r.value = std::numeric_limits<double>::quiet_NaN();
            r.detail += " (" + std::string(e.what()) + ")";
        }
        out.push_back(r);
    };

    check("doppler_reciprocity", doppler_reciprocity, "crossing a front and back restores omega");
    check("shift_law_consistency", shift_law_consistency, "exact head-on ratio versus the quadratic law at 0.3 mA");
    std::pair<double, double> ddc{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    check("ddc_phase_slope", [&] { ddc = ddc_offset(hooks); return ddc.first; }, "+20 MHz tone read by the phase slope");
    check("ddc_instantaneous", [&] { return ddc.second; }, "+20 MHz tone read by -dphi/dt");
    check("ddc_stopband", stopband, "channel response at 100-250 MHz");
    check("magic_step_transport", magic_step_transport, "linear line delays the packet by tau_p");
    check("parabola_vertex_hz", parabola_vertex, "vertex of a sampled gaussian peak");
    check("fit_recovery", fit_recovery, "I* and c4 from noiseless quartic data");
    return out;
}

std::string format_selftest(const std::vector<PropertyResult>& results) {
    std::ostringstream os;
    char buf[256];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "%-4s %-24s value=%-12.4g tol=%-10.3g %s\n", r.passed ? "PASS" : "FAIL",
                      r.name.c_str(), r.value, r.tolerance, r.detail.c_str());
        os << buf;
    }
    return os.str();
}

}  // namespace dopplerline
