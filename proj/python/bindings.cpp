#include "dopplerline/analysis.hpp"
#include "dopplerline/characteristics.hpp"
#include "dopplerline/config.hpp"
#include "dopplerline/errors.hpp"
#include "dopplerline/experiments.hpp"
#include "dopplerline/line_model.hpp"
#include "dopplerline/selftest.hpp"
#include "dopplerline/solver.hpp"
#include "dopplerline/units.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace dopplerline;

namespace {

py::array_t<double> to_numpy(const Waveform& w) {
    py::array_t<double> a(static_cast<py::ssize_t>(w.size()));
    auto m = a.mutable_unchecked<1>();
    for (std::size_t k = 0; k < w.size(); ++k) m(static_cast<py::ssize_t>(k)) = w[k];
    return a;
}

py::array_t<double> times(const Waveform& w) {
    py::array_t<double> a(static_cast<py::ssize_t>(w.size()));
    auto m = a.mutable_unchecked<1>();
    for (std::size_t k = 0; k < w.size(); ++k) m(static_cast<py::ssize_t>(k)) = w.time(k);
    return a;
}

py::dict waveform_dict(const Waveform& w) {
    py::dict d;
    d["t"] = times(w);
    d["y"] = to_numpy(w);
    return d;
}

py::dict run_dict(const RunResult& r) {
    py::dict d;
    d["id"] = r.coord.id();
    d["condition"] = to_string(r.condition);
    d["delay"] = r.coord.delay ? py::cast(*r.coord.delay) : py::none();
    d["cp_amplitude"] = r.coord.cp_amplitude ? py::cast(*r.coord.cp_amplitude) : py::none();
    d["reference"] = r.coord.reference;
    d["global_shift_hz"] = r.global_shift_hz ? py::cast(*r.global_shift_hz) : py::none();
    d["phase_shift_hz"] = r.phase_shift_hz ? py::cast(*r.phase_shift_hz) : py::none();
    d["oracle_centre_hz"] = r.oracle_centre_hz;
    d["left_out"] = waveform_dict(r.ports.left_out);
    d["right_out"] = waveform_dict(r.ports.right_out);
    if (r.inst_shift_hz) d["inst_shift_hz"] = waveform_dict(*r.inst_shift_hz);
    if (r.oracle_shift_hz) d["oracle_shift_hz"] = waveform_dict(*r.oracle_shift_hz);
    return d;
}

py::dict scenario_dict(const ScenarioResult& r) {
    py::dict d;
    d["name"] = r.name;
    d["config_hash"] = hash_hex(r.config_hash);
    py::list runs;
    for (const auto& run : r.runs) runs.append(run_dict(run));
    d["runs"] = runs;
    d["averaged_inst"] = r.averaged_inst;
    py::list amps;
    for (const auto& a : r.amplitude_points) amps.append(py::make_tuple(a.i_cp, a.shift_hz, a.packets));
    d["amplitude_points"] = amps;
    if (r.fit) {
        py::dict f;
        f["i_star"] = r.fit->i_star_hat;
        f["c4"] = r.fit->c4_hat;
        f["residual_rms"] = r.fit->residual_rms;
        d["fit"] = f;
    }
    py::dict env;
    for (const auto& e : r.envelopes) env[py::str(e.name)] = e.max_rel_diff;
    d["envelopes"] = env;
    d["directory"] = r.directory.string();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings to the dopplerline C++ library";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<CriticalCurrentExceeded>(m, "CriticalCurrentExceeded", base.ptr());
    py::register_exception<SingularInterface>(m, "SingularInterface", base.ptr());
    py::register_exception<CflViolation>(m, "CflViolation", base.ptr());
    py::register_exception<NonFiniteField>(m, "NonFiniteField", base.ptr());
    py::register_exception<EmptyGate>(m, "EmptyGate", base.ptr());
    py::register_exception<InsufficientSupport>(m, "InsufficientSupport", base.ptr());
    py::register_exception<FitDiverged>(m, "FitDiverged", base.ptr());
    py::register_exception<SignError>(m, "SignError", base.ptr());
    py::register_exception<AlignmentFailed>(m, "AlignmentFailed", base.ptr());
    py::register_exception<OracleError>(m, "OracleError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<LineSpec>(m, "LineSpec")
        .def(py::init<>())
        .def_readwrite("l0", &LineSpec::l0)
        .def_readwrite("c", &LineSpec::c)
        .def_readwrite("length", &LineSpec::length)
        .def_readwrite("i_star", &LineSpec::i_star)
        .def_readwrite("i_crit", &LineSpec::i_crit)
        .def_readwrite("c4", &LineSpec::c4)
        .def_readwrite("n_cells", &LineSpec::n_cells)
        .def_property_readonly("propagation_time", &LineSpec::propagation_time)
        .def_property_readonly("impedance", &LineSpec::impedance)
        .def_property_readonly("velocity", &LineSpec::velocity)
        .def("validate", &LineSpec::validate);
    m.def("default_line", &default_line);

    m.def("phase_velocity", &phase_velocity, py::arg("i"), py::arg("line"));
    m.def("shift_from_current", &shift_from_current, py::arg("omega_in"), py::arg("i_cp"), py::arg("line"));
    m.def(
        "doppler_ratio", [](double v, double v1, double v2) { return doppler_ratio({v, v1, v2}); }, py::arg("v"),
        py::arg("v1"), py::arg("v2"));
    m.def(
        "compose_doppler",
        [](double omega_in, const std::vector<std::tuple<double, double, double>>& fronts) {
            std::vector<DopplerArgs> args;
            for (const auto& [v, v1, v2] : fronts) args.push_back({v, v1, v2});
            return compose_doppler(omega_in, args);
        },
        py::arg("omega_in"), py::arg("fronts"));

    m.def(
        "condition_boundaries",
        [](double amplitude, double duration, double tau_wp) {
            const LineSpec line = default_line();
            WavePacketSpec wp;
            wp.tau_wp = tau_wp;
            ControlPulseSpec cp;
            cp.shape = RectPulse{amplitude, duration};
            const ConditionBoundaries b = condition_boundaries(line, wp, cp);
            return py::dict(py::arg("red_start") = b.red_start, py::arg("cancel_start") = b.cancel_start,
                            py::arg("inside_start") = b.inside_start, py::arg("blue_start") = b.blue_start,
                            py::arg("blue_end") = b.blue_end);
        },
        py::arg("amplitude"), py::arg("duration"), py::arg("tau_wp") = 15e-9,
        "Encounter-delay boundaries on the default line for a rectangular pulse.");

    m.def(
        "fit_amplitude_sweep",
        [](const std::vector<std::pair<double, double>>& points, double omega_in) {
            const ShiftFit f = fit_amplitude_sweep(points, omega_in);
            return py::dict(py::arg("i_star") = f.i_star_hat, py::arg("c4") = f.c4_hat, py::arg("a") = f.a,
                            py::arg("b") = f.b, py::arg("residual_rms") = f.residual_rms);
        },
        py::arg("points"), py::arg("omega_in"));

    m.def("parse_current", [](const std::string& s) { return units::parse_quantity(s, units::Dimension::Current); });

    m.def("catalog", []() {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : builtin_catalog()) out.emplace_back(s.name, s.description);
        return out;
    });
    m.def("scenario_json", [](const std::string& name) { return scenario_to_json(builtin_scenario(name)); },
          py::arg("name"));
    m.def(
        "run_scenario",
        [](const std::string& name_or_json, const std::filesystem::path& output_dir, bool write_files, int jobs,
           const std::vector<double>& cp_amplitudes, const std::vector<double>& delays) {
            Scenario s = name_or_json.find('{') == std::string::npos ? builtin_scenario(name_or_json)
                                                                     : scenario_from_json(name_or_json);
            s.output_dir = output_dir;
            s.write_files = write_files;
            s.jobs = jobs;
            if (!cp_amplitudes.empty()) s.sweep.cp_amplitudes = cp_amplitudes;
            if (!delays.empty()) s.sweep.delays = delays;
            ScenarioResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(s);
            }
            return scenario_dict(r);
        },
        py::arg("scenario"), py::arg("output_dir") = "out", py::arg("write_files") = false, py::arg("jobs") = 0,
        py::arg("cp_amplitudes") = std::vector<double>{}, py::arg("delays") = std::vector<double>{},
        "Runs a builtin scenario (by name) or a JSON scenario; returns per-run shifts and traces.");

    m.def("selftest", [](const std::map<std::string, double>& tolerances) {
        SelftestOptions opts;
        opts.tolerances = tolerances;
        py::list out;
        for (const auto& p : run_selftest(opts))
            out.append(py::dict(py::arg("name") = p.name, py::arg("passed") = p.passed, py::arg("value") = p.value,
                                py::arg("tolerance") = p.tolerance, py::arg("detail") = p.detail));
        return out;
    }, py::arg("tolerances") = std::map<std::string, double>{});
}
