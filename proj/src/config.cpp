#include "dopplerline/config.hpp"

#include "dopplerline/errors.hpp"
#include "dopplerline/signal.hpp"
#include "dopplerline/units.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dopplerline {

using nlohmann::json;
using units::Dimension;

namespace {

double quantity(const json& j, Dimension dim, const std::string& key) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return units::parse_quantity(j.get<std::string>(), dim);
    throw ValidationError("config: '" + key + "' must be a number or a unit string");
}

double get_q(const json& obj, const std::string& key, Dimension dim, double fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return quantity(obj.at(key), dim, key);
}

template <class T>
T get_v(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("config: bad value for '" + key + "': " + e.what());
    }
}

// Either an explicit list or {"start", "stop", "count"}.
std::vector<double> axis(const json& j, Dimension dim, const std::string& key) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(quantity(e, dim, key));
        return out;
    }
    if (j.is_object()) {
        const double a = get_q(j, "start", dim, 0.0);
        const double b = get_q(j, "stop", dim, 0.0);
        const auto n = get_v<std::size_t>(j, "count", 0);
        if (n == 0) throw ValidationError("config: '" + key + "' needs count >= 1");
        return linspace(a, b, n);
    }
    throw ValidationError("config: '" + key + "' must be a list or {start, stop, count}");
}

json axis_to_json(const std::vector<double>& v) {
    if (v.size() >= 3) {
        const auto ls = linspace(v.front(), v.back(), v.size());
        if (ls == v) return json{{"start", v.front()}, {"stop", v.back()}, {"count", v.size()}};
    }
    return json(v);
}

Waveform waveform_from_json(const json& j, const std::string& key) {
    if (j.contains("file")) return read_waveform_csv(std::filesystem::path(j.at("file").get<std::string>()));
    const double rate = get_q(j, "rate", Dimension::Frequency, 0.0);
    const double t0 = get_q(j, "t0", Dimension::Time, 0.0);
    if (!j.contains("samples")) throw ValidationError("config: '" + key + "' needs samples or file");
    return Waveform(rate, t0, j.at("samples").get<std::vector<double>>());
}

json waveform_to_json(const Waveform& w) {
    return json{{"rate", w.sample_rate()}, {"t0", w.t0()},
                {"samples", std::vector<double>(w.samples().begin(), w.samples().end())}};
}

EnvelopeSpec envelope_from_json(const json& j) {
    const std::string type = get_v<std::string>(j, "type", "rectangular");
    if (type == "rectangular") return RectangularEnvelope{};
    if (type == "staircase") return StaircaseEnvelope{j.at("levels").get<std::vector<double>>()};
    if (type == "gaussian") return GaussianEnvelope{get_q(j, "sigma", Dimension::Time, 0.0)};
    if (type == "table") return TableEnvelope{waveform_from_json(j, "envelope")};
    throw ValidationError("config: unknown envelope type '" + type + "'");
}

json envelope_to_json(const EnvelopeSpec& env) {
    return std::visit(
        [](const auto& e) -> json {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RectangularEnvelope>) return json{{"type", "rectangular"}};
            if constexpr (std::is_same_v<T, StaircaseEnvelope>) return json{{"type", "staircase"}, {"levels", e.levels}};
            if constexpr (std::is_same_v<T, GaussianEnvelope>) return json{{"type", "gaussian"}, {"sigma", e.sigma}};
            if constexpr (std::is_same_v<T, TableEnvelope>) {
                json out = waveform_to_json(e.table);
                out["type"] = "table";
                return out;
            }
        },
        env);
}

Port port_from(const json& obj, Port fallback) {
    const std::string p = get_v<std::string>(obj, "port", fallback == Port::Left ? "left" : "right");
    if (p == "left" || p == "Left") return Port::Left;
    if (p == "right" || p == "Right") return Port::Right;
    throw ValidationError("config: port must be left or right, got '" + p + "'");
}

std::string port_name(Port p) { return p == Port::Left ? "left" : "right"; }

LineSpec line_from_json(const json& j) {
    LineSpec d = default_line();
    const std::string model_s = get_v<std::string>(j, "model", "kinetic_inductance");
    NonlinearityModel model;
    if (model_s == "kinetic_inductance" || model_s == "KineticInductance") model = NonlinearityModel::KineticInductance;
    else if (model_s == "josephson_chain" || model_s == "JosephsonChain") model = NonlinearityModel::JosephsonChain;
    else throw ValidationError("config: unknown line model '" + model_s + "'");

    const double length = get_q(j, "length", Dimension::Length, d.length);
    const double i_star = get_q(j, "i_star", Dimension::Current, d.i_star);
    const double i_crit = get_q(j, "i_crit", Dimension::Current, d.i_crit);
    const double c4 = get_v<double>(j, "c4", d.c4);
    const int n_cells = get_v<int>(j, "n_cells", d.n_cells);
    LineSpec line;
    if (j.contains("l0") || j.contains("c")) {
        line = d;
        line.l0 = get_v<double>(j, "l0", d.l0);
        line.c = get_v<double>(j, "c", d.c);
        line.length = length;
        line.i_star = i_star;
        line.i_crit = i_crit;
        line.c4 = c4;
        line.model = model;
        line.n_cells = n_cells;
    } else {
        const double tau_p = get_q(j, "tau_p", Dimension::Time, d.propagation_time());
        const double z0 = get_q(j, "z0", Dimension::Resistance, d.impedance());
        line = line_from_delay(tau_p, z0, length, i_star, i_crit, c4, model, n_cells);
    }
    return line;
}

json line_to_json(const LineSpec& l) {
    return json{{"l0", l.l0},         {"c", l.c},         {"length", l.length},
                {"i_star", l.i_star}, {"i_crit", l.i_crit}, {"c4", l.c4},
                {"model", l.model == NonlinearityModel::KineticInductance ? "kinetic_inductance" : "josephson_chain"},
                {"n_cells", l.n_cells}};
}

WavePacketSpec wp_from_json(const json& j) {
    WavePacketSpec wp;
    if (j.contains("omega_in")) wp.omega_in = get_v<double>(j, "omega_in", 0.0);
    else wp.omega_in = 2.0 * M_PI * get_q(j, "carrier", Dimension::Frequency, 4e9);
    wp.tau_wp = get_q(j, "tau", Dimension::Time, 15e-9);
    wp.amplitude = get_q(j, "amplitude", Dimension::Current, 1e-5);
    if (j.contains("envelope")) wp.envelope = envelope_from_json(j.at("envelope"));
    wp.port = port_from(j, Port::Left);
    wp.delay = get_q(j, "delay", Dimension::Time, 0.0);
    return wp;
}

json wp_to_json(const WavePacketSpec& wp) {
    return json{{"omega_in", wp.omega_in},  {"tau", wp.tau_wp},          {"amplitude", wp.amplitude},
                {"envelope", envelope_to_json(wp.envelope)}, {"port", port_name(wp.port)}, {"delay", wp.delay}};
}

ControlPulseSpec cp_from_json(const json& j) {
    ControlPulseSpec cp;
    const std::string type = get_v<std::string>(j, "type", "rect");
    if (type == "rect") {
        RectPulse r;
        r.amplitude = get_q(j, "amplitude", Dimension::Current, 0.0);
        r.duration = get_q(j, "duration", Dimension::Time, 0.0);
        r.rise = get_q(j, "rise", Dimension::Time, r.rise);
        r.fall = get_q(j, "fall", Dimension::Time, r.fall);
        const std::string edge = get_v<std::string>(j, "edge", "linear");
        if (edge == "linear") r.edge = EdgeShape::Linear;
        else if (edge == "smoothstep") r.edge = EdgeShape::Smoothstep;
        else throw ValidationError("config: unknown edge '" + edge + "'");
        cp.shape = r;
    } else if (type == "arbitrary") {
        cp.shape = ArbitraryPulse{waveform_from_json(j, "cp")};
    } else if (type == "staircase") {
        std::vector<double> levels;
        for (const auto& e : j.at("levels")) levels.push_back(quantity(e, Dimension::Current, "levels"));
        cp.shape = ArbitraryPulse{staircase_pulse(levels, get_q(j, "step", Dimension::Time, 4e-9),
                                                  get_q(j, "ramp", Dimension::Time, 0.2e-9))};
    } else {
        throw ValidationError("config: unknown control pulse type '" + type + "'");
    }
    cp.port = port_from(j, Port::Right);
    cp.delay = get_q(j, "delay", Dimension::Time, 0.0);
    return cp;
}

json cp_to_json(const ControlPulseSpec& cp) {
    json out;
    if (const auto* r = std::get_if<RectPulse>(&cp.shape)) {
        out = json{{"type", "rect"}, {"amplitude", r->amplitude}, {"duration", r->duration}, {"rise", r->rise},
                   {"fall", r->fall}, {"edge", r->edge == EdgeShape::Linear ? "linear" : "smoothstep"}};
    } else {
        out = waveform_to_json(std::get<ArbitraryPulse>(cp.shape).waveform);
        out["type"] = "arbitrary";
    }
    out["port"] = port_name(cp.port);
    out["delay"] = cp.delay;
    return out;
}

FilterSpec filter_from_json(const json& j, FilterSpec f) {
    f.cutoff = get_q(j, "cutoff", Dimension::Frequency, f.cutoff);
    f.taps = get_v<int>(j, "taps", f.taps);
    const std::string w = get_v<std::string>(j, "window", to_string(f.window));
    if (w == "blackman") f.window = Window::Blackman;
    else if (w == "hamming") f.window = Window::Hamming;
    else throw ValidationError("config: unknown window '" + w + "'");
    f.decimation = get_v<int>(j, "decimation", f.decimation);
    f.target_rate = get_q(j, "target_rate", Dimension::Frequency, f.target_rate);
    return f;
}

json filter_to_json(const FilterSpec& f) {
    return json{{"cutoff", f.cutoff}, {"taps", f.taps}, {"window", to_string(f.window)},
                {"decimation", f.decimation}, {"target_rate", f.target_rate}};
}

OracleOptions oracle_from_json(const json& j) {
    OracleOptions o{FrontModel::SimpleWave};
    const std::string m = get_v<std::string>(j, "model", "simple_wave");
    if (m == "simple_wave") o.model = FrontModel::SimpleWave;
    else if (m == "rigid") o.model = FrontModel::Rigid;
    else throw ValidationError("config: unknown oracle model '" + m + "'");
    const std::string law = get_v<std::string>(j, "law", "exact");
    if (law == "exact") o.law = ShiftLaw::Exact;
    else if (law == "quadratic") o.law = ShiftLaw::Quadratic;
    else throw ValidationError("config: unknown shift law '" + law + "'");
    o.v_front = get_v<double>(j, "v_front", 0.0);
    o.step = get_q(j, "step", Dimension::Time, 0.0);
    o.scan_step = get_q(j, "scan_step", Dimension::Time, 0.0);
    return o;
}

json oracle_to_json(const OracleOptions& o) {
    return json{{"model", o.model == FrontModel::SimpleWave ? "simple_wave" : "rigid"},
                {"law", o.law == ShiftLaw::Exact ? "exact" : "quadratic"},
                {"v_front", o.v_front}, {"step", o.step}, {"scan_step", o.scan_step}};
}

json to_json_full(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["description"] = s.description;
    j["line"] = line_to_json(s.line);
    j["wp"] = wp_to_json(s.wp);
    j["cp"] = s.cp ? cp_to_json(*s.cp) : json(nullptr);
    json sw = json::object();
    if (!s.sweep.delays.empty()) sw["delays"] = axis_to_json(s.sweep.delays);
    if (!s.sweep.cp_amplitudes.empty()) sw["cp_amplitudes"] = axis_to_json(s.sweep.cp_amplitudes);
    if (!s.sweep.envelopes.empty()) {
        json envs = json::array();
        for (std::size_t k = 0; k < s.sweep.envelopes.size(); ++k) {
            json e = envelope_to_json(s.sweep.envelopes[k]);
            if (k < s.sweep.envelope_names.size()) e["name"] = s.sweep.envelope_names[k];
            envs.push_back(e);
        }
        sw["envelopes"] = envs;
    }
    j["sweep"] = sw;
    j["reference_runs"] = s.reference_runs;
    json ddc = json::array();
    for (const auto& p : s.ddc) {
        if (const auto* fs = std::get_if<FreqSweep>(&p)) ddc.push_back(json{{"sweep", axis_to_json(fs->f_d)}});
        else ddc.push_back(json{{"fixed", std::get<FixedFd>(p).f_d}});
    }
    j["ddc"] = ddc;
    j["filter"] = filter_to_json(s.filter);
    j["phase_filter"] = filter_to_json(s.phase_filter);
    json an = json::array();
    for (auto t : s.analyses) an.push_back(to_string(t));
    j["analyses"] = an;
    j["oracle"] = oracle_to_json(s.oracle);
    j["duration"] = s.duration;
    j["deep_margin"] = s.deep_margin;
    j["ports_stride"] = s.ports_stride;
    j["snapshot_stride"] = s.snapshot_stride;
    j["noise_sigma"] = s.noise_sigma;
    j["seed"] = s.seed;
    j["jobs"] = s.jobs;
    j["output_dir"] = s.output_dir.string();
    j["write_files"] = s.write_files;
    return j;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    try {
        Scenario s;
        s.name = get_v<std::string>(j, "name", "custom");
        s.description = get_v<std::string>(j, "description", "");
        if (j.contains("line")) s.line = line_from_json(j.at("line"));
        if (j.contains("wp")) s.wp = wp_from_json(j.at("wp"));
        if (j.contains("cp") && !j.at("cp").is_null()) s.cp = cp_from_json(j.at("cp"));
        if (j.contains("sweep")) {
            const json& sw = j.at("sweep");
            if (sw.contains("delays")) s.sweep.delays = axis(sw.at("delays"), Dimension::Time, "delays");
            if (sw.contains("cp_amplitudes"))
                s.sweep.cp_amplitudes = axis(sw.at("cp_amplitudes"), Dimension::Current, "cp_amplitudes");
            if (sw.contains("envelopes")) {
                for (const auto& e : sw.at("envelopes")) {
                    s.sweep.envelopes.push_back(envelope_from_json(e));
                    s.sweep.envelope_names.push_back(get_v<std::string>(e, "name", get_v<std::string>(e, "type", "")));
                }
            }
        }
        s.reference_runs = get_v<bool>(j, "reference_runs", false);
        if (j.contains("ddc")) {
            for (const auto& p : j.at("ddc")) {
                if (p.contains("sweep")) s.ddc.push_back(FreqSweep{axis(p.at("sweep"), Dimension::Frequency, "sweep")});
                else if (p.contains("fixed")) s.ddc.push_back(FixedFd{quantity(p.at("fixed"), Dimension::Frequency, "fixed")});
                else throw ValidationError("config: ddc entries need 'sweep' or 'fixed'");
            }
        }
        if (j.contains("filter")) s.filter = filter_from_json(j.at("filter"), s.filter);
        if (j.contains("phase_filter")) s.phase_filter = filter_from_json(j.at("phase_filter"), s.phase_filter);
        if (j.contains("analyses"))
            for (const auto& a : j.at("analyses")) s.analyses.push_back(analysis_tag_from_string(a.get<std::string>()));
        if (j.contains("oracle")) s.oracle = oracle_from_json(j.at("oracle"));
        s.duration = get_q(j, "duration", Dimension::Time, 0.0);
        s.deep_margin = get_q(j, "deep_margin", Dimension::Time, s.deep_margin);
        s.ports_stride = get_v<int>(j, "ports_stride", 1);
        s.snapshot_stride = get_v<int>(j, "snapshot_stride", 0);
        s.noise_sigma = get_q(j, "noise_sigma", Dimension::Voltage, 0.0);
        s.seed = get_v<std::uint64_t>(j, "seed", 0);
        s.jobs = get_v<int>(j, "jobs", 0);
        s.output_dir = get_v<std::string>(j, "output_dir", "out");
        s.write_files = get_v<bool>(j, "write_files", true);
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

std::string scenario_to_json(const Scenario& s) { return to_json_full(s).dump(2); }

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << scenario_to_json(s) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

std::uint64_t config_hash(const Scenario& s) {
    json j = to_json_full(s);
    j.erase("output_dir");
    j.erase("jobs");
    j.erase("write_files");
    return fnv1a64(j.dump());
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dopplerline
