#include "dopplerline/config.hpp"
#include "dopplerline/errors.hpp"
#include "dopplerline/experiments.hpp"
#include "dopplerline/selftest.hpp"
#include "dopplerline/svg.hpp"
#include "dopplerline/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace dopplerline;

namespace {

constexpr const char* kRunFooter = R"(Output tree <output_dir>/<scenario>/:
  summary.csv      run_id,delay_s,cp_amplitude_A,envelope,reference,condition,global_shift_hz,phase_shift_hz,oracle_centre_hz
  map.csv          merged delay sweep: header delay_s,<f_d...>; rows delay, magnitude per f_d
  inst_averaged.csv  delay_s,shift_hz,packets
  cross_validation.csv  delay_s,parabola_hz,phase_hz,oracle_hz,near_boundary
  fits.txt, provenance.txt  key = value lines (fit, config echo, config hash)
Per run <run-id>/:
  ports.csv        t_s,left_out_V,right_out_V,wp_injected_A[,cp_injected_A]
  iq_<f_d>.csv     '# f_d_hz=', '# sample_rate_hz=', '# filter:' lines, then t_s,i,q
  map.csv          header t_s,<f_d...>; rows output time, magnitude per f_d
  inst.csv         t_s,shift_hz[,oracle_hz]
  envelope.csv     t_s,magnitude_V
  spacetime.csv    t_s,x_m,v,i (when snapshot_stride > 0)
Exit status: 0 ok, 1 failure, 2 invalid input, 3 physics error, 4 i/o error.)";

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kPhysics = 3, kIo = 4 };

Scenario resolve(const std::string& target) {
    if (target.size() > 5 && target.ends_with(".json")) return load_scenario(target);
    if (fs::exists(target) && fs::is_regular_file(target)) return load_scenario(target);
    return builtin_scenario(target);
}

std::string mhz(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v * 1e-6);
    return buf;
}

void print_result(const Scenario& s, const ScenarioResult& r) {
    std::printf("%-32s %-10s %12s %12s %12s\n", "run", "condition", "parabola_MHz", "phase_MHz", "oracle_MHz");
    for (const auto& run : r.runs) {
        std::printf("%-32s %-10s %12s %12s %12.3f\n", run.coord.id().c_str(),
                    run.cp && run.coord.delay ? to_string(run.condition).c_str() : "n/a", mhz(run.global_shift_hz).c_str(),
                    mhz(run.phase_shift_hz).c_str(), run.oracle_centre_hz * 1e-6);
    }
    if (r.fit) std::printf("\n%s", r.fit->to_text().c_str());
    for (const auto& e : r.envelopes)
        std::printf("envelope %-12s max_rel_diff=%.4f lag=%.3f ns\n", e.name.c_str(), e.max_rel_diff, e.lag * 1e9);
    if (s.has(AnalysisTag::DelayMerge) && !r.averaged_inst.empty())
        std::printf("\n%s", cross_validate(s, r).to_text().c_str());
    if (s.write_files) std::printf("\noutputs: %s\n", r.directory.string().c_str());
}

void write_diagram(const Scenario& s, const RunCoordinates& c, int resolution, const fs::path& dir) {
    const auto [wp, cp] = realise_run(s, c);
    const SpacetimeDiagram d = spacetime_diagram(s.line, wp, cp ? &*cp : nullptr, resolution, s.oracle);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "diagram.csv");
        if (!out) throw IoError("cannot write " + (dir / "diagram.csv").string());
        out << "t_s,x_m,i_cp_A\n";
        for (std::size_t r = 0; r < d.t_axis.size(); ++r)
            for (std::size_t k = 0; k < d.x_axis.size(); ++k)
                out << d.t_axis[r] << ',' << d.x_axis[k] << ',' << d.current[r * d.x_axis.size() + k] << '\n';
        if (!out) throw IoError("write failed: " + (dir / "diagram.csv").string());
    }
    svg::Heatmap h;
    h.title = s.name + " " + c.id() + ": control current and packet worldlines";
    h.x_label = "x (mm)";
    h.y_label = "t (ns)";
    for (double x : d.x_axis) h.x_axis.push_back(x * 1e3);
    for (double t : d.t_axis) h.y_axis.push_back(t * 1e9);
    h.values = d.current;
    const char* colours[] = {"#ffffff", "#ff7f0e", "#d62728"};
    const char* names[] = {"head", "centre", "tail"};
    for (std::size_t w = 0; w < d.worldlines.size(); ++w) {
        svg::Series line{names[w % 3], colours[w % 3], {}, {}};
        for (std::size_t k = 0; k < d.worldlines[w].t.size(); ++k) {
            line.x.push_back(d.worldlines[w].x[k] * 1e3);
            line.y.push_back(d.worldlines[w].t[k] * 1e9);
        }
        h.overlays.push_back(std::move(line));
    }
    svg::write_file(dir / "diagram.svg", svg::render_heatmap(h));
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Time-varying transmission line frequency shifter: simulation, down-conversion and estimators"};
    app.require_subcommand(1);

    std::string target;
    std::string output_dir;
    int jobs = -1;
    std::int64_t seed = -1;
    std::vector<std::string> cp_amplitudes;
    std::string noise;
    bool no_files = false;

    std::string run_config;
    auto* run_cmd = app.add_subcommand("run", "Run a builtin scenario or a JSON config");
    auto* run_target = run_cmd->add_option("scenario", target, "builtin name (see `catalog`) or config file");
    run_cmd->add_option("--config", run_config, "scenario config file (JSON)")->excludes(run_target);
    run_cmd->footer(kRunFooter);
    run_cmd->add_option("--output-dir", output_dir, "output root (config key: output_dir)");
    run_cmd->add_option("--jobs", jobs, "worker threads, 0 = all cores (config key: jobs)");
    run_cmd->add_option("--seed", seed, "noise seed (config key: seed)");
    run_cmd->add_option("--cp-amplitude", cp_amplitudes, "control amplitudes, e.g. 1.2mA (config key: sweep.cp_amplitudes)");
    run_cmd->add_option("--noise", noise, "white noise sigma added to the output, e.g. 20uV (config key: noise_sigma)");
    run_cmd->add_flag("--no-files", no_files, "skip the output tree (config key: write_files)");

    int resolution = 200;
    int run_index = -1;
    auto* diag_cmd = app.add_subcommand("diagram", "Space-time diagram of the prescribed pulse with packet worldlines");
    diag_cmd->add_option("scenario", target, "builtin name or config file")->required();
    diag_cmd->add_option("--resolution", resolution, "grid points per axis")->check(CLI::Range(2, 4000));
    diag_cmd->add_option("--run", run_index, "run index (default: every run)");
    diag_cmd->add_option("--output-dir", output_dir, "output root (config key: output_dir)");

    std::vector<std::string> tolerances;
    std::string selftest_config;
    auto* self_cmd = app.add_subcommand("selftest", "Property checks of the estimators and the solver");
    self_cmd->add_option("--tolerance", tolerances, "override, name=value");
    self_cmd->add_option("--config", selftest_config, "JSON file {\"tolerances\": {name: value}}");

    std::string export_dir;
    auto* cat_cmd = app.add_subcommand("catalog", "List builtin scenarios");
    cat_cmd->add_option("--export", export_dir, "write each scenario as <dir>/<name>.json");

    std::string cutoff = "42MHz";
    int taps = 255;
    std::string window = "blackman";
    std::string rate = "160GHz";
    std::string span = "250MHz";
    int points = 51;
    auto* filt_cmd = app.add_subcommand("filter", "Print the decimation plan and channel response");
    filt_cmd->add_option("--cutoff", cutoff);
    filt_cmd->add_option("--taps", taps);
    filt_cmd->add_option("--window", window)->check(CLI::IsMember({"blackman", "hamming"}));
    filt_cmd->add_option("--rate", rate, "input sample rate");
    filt_cmd->add_option("--span", span, "highest frequency of the response table");
    filt_cmd->add_option("--points", points)->check(CLI::Range(2, 10000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    if (*run_cmd) {
        if (target.empty() && run_config.empty()) throw ValidationError("run: give a scenario name or --config FILE");
        Scenario s = resolve(run_config.empty() ? target : run_config);
        if (!output_dir.empty()) s.output_dir = output_dir;
        if (jobs >= 0) s.jobs = jobs;
        if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
        if (!cp_amplitudes.empty()) {
            s.sweep.cp_amplitudes.clear();
            for (const auto& a : cp_amplitudes) s.sweep.cp_amplitudes.push_back(units::parse_quantity(a, units::Dimension::Current));
        }
        if (!noise.empty()) s.noise_sigma = units::parse_quantity(noise, units::Dimension::Voltage);
        if (no_files) s.write_files = false;
        std::printf("%s: %s\nconfig hash %s, %zu runs\n\n", s.name.c_str(), s.description.c_str(),
                    hash_hex(config_hash(s)).c_str(), enumerate_runs(s).size());
        std::fflush(stdout);
        print_result(s, run_scenario(s));
        return kOk;
    }
    if (*diag_cmd) {
        Scenario s = resolve(target);
        if (!output_dir.empty()) s.output_dir = output_dir;
        s.validate();
        const auto coords = enumerate_runs(s);
        for (const auto& c : coords) {
            if (run_index >= 0 && c.index != static_cast<std::size_t>(run_index)) continue;
            const fs::path dir = s.output_dir / s.name / c.id();
            write_diagram(s, c, resolution, dir);
            std::printf("%s\n", (dir / "diagram.svg").string().c_str());
        }
        return kOk;
    }
    if (*self_cmd) {
        SelftestOptions opts;
        if (!selftest_config.empty()) {
            std::ifstream in(selftest_config);
            if (!in) throw IoError("cannot read " + selftest_config);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in, nullptr, true, true);
                for (const auto& [k, v] : j.at("tolerances").items()) opts.tolerances[k] = v.get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(selftest_config + ": " + e.what());
            }
        }
        for (const auto& t : tolerances) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ValidationError("--tolerance expects name=value, got '" + t + "'");
            try {
                opts.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
            } catch (const std::exception&) {
                throw ValidationError("--tolerance: bad value in '" + t + "'");
            }
        }
        const auto results = run_selftest(opts);
        std::printf("%s", format_selftest(results).c_str());
        const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
        return ok ? kOk : kFailure;
    }
    if (*cat_cmd) {
        for (const auto& s : builtin_catalog()) {
            std::printf("%-6s %4zu runs  %s\n", s.name.c_str(), enumerate_runs(s).size(), s.description.c_str());
            if (!export_dir.empty()) {
                fs::create_directories(export_dir);
                save_scenario(s, fs::path(export_dir) / (s.name + ".json"));
            }
        }
        return kOk;
    }
    if (*filt_cmd) {
        FilterSpec f;
        f.cutoff = units::parse_quantity(cutoff, units::Dimension::Frequency);
        f.taps = taps;
        f.window = window == "hamming" ? Window::Hamming : Window::Blackman;
        const double fs_in = units::parse_quantity(rate, units::Dimension::Frequency);
        const double top = units::parse_quantity(span, units::Dimension::Frequency);
        const DdcPlan plan = plan_ddc(fs_in, f);
        std::printf("%s\nsettling time %.3f ns\n\n%12s %12s %10s\n", plan.describe().c_str(), settling_time(plan) * 1e9,
                    "f_MHz", "magnitude", "dB");
        for (int k = 0; k < points; ++k) {
            const double fr = top * k / (points - 1);
            const double m = plan_magnitude(plan, fr);
            std::printf("%12.3f %12.6f %10.2f\n", fr * 1e-6, m, 20.0 * std::log10(std::max(m, 1e-300)));
        }
        return kOk;
    }
    return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const CriticalCurrentExceeded& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kPhysics;
    } catch (const NonFiniteField& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kPhysics;
    } catch (const SingularInterface& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kPhysics;
    } catch (const CflViolation& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kPhysics;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
