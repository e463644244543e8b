#include "dopplerline/signal.hpp"

#include "dopplerline/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

namespace dopplerline {

double envelope_value(const EnvelopeSpec& env, double t, double tau) {
    if (t < 0.0 || t >= tau) return 0.0;
    if (std::holds_alternative<RectangularEnvelope>(env)) return 1.0;
    if (const auto* s = std::get_if<StaircaseEnvelope>(&env)) {
        const auto n = s->levels.size();
        auto k = static_cast<std::size_t>(t / tau * static_cast<double>(n));
        if (k >= n) k = n - 1;
        return s->levels[k];
    }
    if (const auto* g = std::get_if<GaussianEnvelope>(&env)) {
        const double u = (t - 0.5 * tau) / g->sigma;
        return std::exp(-0.5 * u * u);
    }
    const auto& table = std::get<TableEnvelope>(env).table;
    return table.at(table.t0() + t) / table.peak_abs();
}

Waveform synth_wave_packet(const WavePacketSpec& spec, double sample_rate) {
    if (!(spec.omega_in > 0.0) || !(spec.tau_wp > 0.0)) throw ValidationError("wave packet: omega_in and tau_wp must be positive");
    validate(spec.envelope);
    if (sample_rate < 10.0 * spec.carrier_hz())
        throw ValidationError("wave packet: sample rate gives fewer than 10 samples per carrier period");
    const auto n = static_cast<std::size_t>(std::llround(spec.tau_wp * sample_rate));
    std::vector<double> out(std::max<std::size_t>(n, 1));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double t = static_cast<double>(k) / sample_rate;
        out[k] = spec.amplitude * envelope_value(spec.envelope, t, spec.tau_wp) * std::cos(spec.omega_in * t);
    }
    return Waveform(sample_rate, spec.delay, std::move(out));
}

namespace {

double edge(double s, EdgeShape shape) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return shape == EdgeShape::Linear ? s : s * s * (3.0 - 2.0 * s);
}

}  // namespace

double control_pulse_value(const ControlPulseSpec& spec, double t) {
    if (const auto* r = std::get_if<RectPulse>(&spec.shape)) {
        if (t < 0.0 || t >= r->duration) return 0.0;
        const double up = edge(t / r->rise, r->edge);
        const double down = edge((r->duration - t) / r->fall, r->edge);
        return r->amplitude * std::min(up, down);
    }
    const auto& w = std::get<ArbitraryPulse>(spec.shape).waveform;
    return w.at(w.t0() + t);
}

Waveform synth_control_pulse(const ControlPulseSpec& spec, double sample_rate, double i_crit) {
    if (!(sample_rate > 0.0)) throw ValidationError("control pulse: sample rate must be positive");
    if (const auto* r = std::get_if<RectPulse>(&spec.shape)) {
        if (r->rise < 2.0 / sample_rate || r->fall < 2.0 / sample_rate)
            throw ValidationError("control pulse: rise and fall must span at least two samples");
        if (r->duration <= r->rise + r->fall) throw ValidationError("control pulse: duration must exceed rise + fall");
    }
    if (spec.peak_current() >= i_crit) throw CriticalCurrentExceeded(spec.peak_current(), i_crit, "control pulse");
    const auto n = static_cast<std::size_t>(std::llround(spec.duration() * sample_rate)) + 1;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = control_pulse_value(spec, static_cast<double>(k) / sample_rate);
    return Waveform(sample_rate, spec.delay, std::move(out));
}

Waveform read_waveform_csv(std::istream& in) {
    std::vector<double> t;
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a;
        std::string b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b)) throw ValidationError("waveform csv: expected two columns: " + line);
        char* end = nullptr;
        const double tv = std::strtod(a.c_str(), &end);
        if (end == a.c_str()) {
            if (t.empty()) continue;  // header row
            throw ValidationError("waveform csv: bad number '" + a + "'");
        }
        const double vv = std::strtod(b.c_str(), &end);
        if (end == b.c_str()) throw ValidationError("waveform csv: bad number '" + b + "'");
        t.push_back(tv);
        v.push_back(vv);
    }
    if (t.size() < 2) throw ValidationError("waveform csv: need at least two samples");
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw ValidationError("waveform csv: time column must be increasing");
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * dt) throw ValidationError("waveform csv: time column is not uniform");
    }
    return Waveform(1.0 / dt, t[0], std::move(v));
}

Waveform read_waveform_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_waveform_csv(in);
}

void write_waveform_csv(const Waveform& w, std::ostream& out) {
    out << "time_s,value\n" << std::setprecision(12);
    for (std::size_t k = 0; k < w.size(); ++k) out << w.time(k) << ',' << w[k] << '\n';
}

void write_waveform_csv(const Waveform& w, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_waveform_csv(w, out);
    if (!out) throw IoError("write failed: " + path.string());
}

Waveform staircase_pulse(const std::vector<double>& levels, double step, double ramp, double rate) {
    if (levels.empty()) throw ValidationError("staircase_pulse: no levels");
    if (!(step > 0.0) || !(ramp >= 0.0) || !(ramp < step) || !(rate > 0.0))
        throw ValidationError("staircase_pulse: need step > ramp >= 0 and a positive rate");
    const double total = step * static_cast<double>(levels.size()) + ramp;
    const auto n = static_cast<std::size_t>(std::lround(total * rate)) + 1;
    std::vector<double> s(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        double prev = 0.0;
        double v = 0.0;
        for (std::size_t m = 0; m <= levels.size(); ++m) {
            const double target = m < levels.size() ? levels[m] : 0.0;
            const double t_start = step * static_cast<double>(m);
            if (t < t_start) break;
            const double f = ramp > 0.0 ? std::min(1.0, (t - t_start) / ramp) : 1.0;
            v = prev + (target - prev) * f;
            prev = target;
        }
        s[k] = v;
    }
    s.back() = 0.0;
    return Waveform(rate, 0.0, std::move(s));
}

}  // namespace dopplerline
