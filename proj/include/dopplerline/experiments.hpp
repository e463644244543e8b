#pragma once

// Scenario catalog and runner: synthesis -> solver -> down-conversion -> estimators, with file outputs.

#include "dopplerline/analysis.hpp"
#include "dopplerline/characteristics.hpp"
#include "dopplerline/core.hpp"
#include "dopplerline/ddc.hpp"
#include "dopplerline/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dopplerline {

/// Down-conversion at every frequency of a list (magnitude maps, parabola fits).
struct FreqSweep {
    std::vector<double> f_d;
};
/// Down-conversion at one frequency (phase method). f_d = 0 selects the packet carrier.
struct FixedFd {
    double f_d = 0.0;
};
using DdcPlanSpec = std::variant<FreqSweep, FixedFd>;

enum class AnalysisTag {
    GlobalShift,         ///< parabola vertex of the centre cut of each run's magnitude map
    PhaseShift,          ///< phase slope over the central half of each run's gated phase
    InstantaneousTrace,  ///< per-run -dphi/dt trace with the oracle profile alongside
    DelayMerge,          ///< merged (delay, f_d) map and the N-packet averaged instantaneous shift
    AmplitudeFit,        ///< fit_amplitude_sweep over cp amplitudes
    EnvelopeCompare,     ///< shifted versus reference envelopes
};
std::string to_string(AnalysisTag t);
AnalysisTag analysis_tag_from_string(const std::string& s);

/// Swept axes. An empty axis keeps the base value of the scenario.
struct SweepSpec {
    /// Encounter delays (s). When set, the pulse keeps its delay and the packet is placed with
    /// packet_delay_for; otherwise both delays are taken literally.
    std::vector<double> delays;
    std::vector<double> cp_amplitudes;  ///< A, replaces the rectangular amplitude
    std::vector<EnvelopeSpec> envelopes;
    std::vector<std::string> envelope_names;  ///< labels matching `envelopes`
};

struct Scenario {
    std::string name;
    std::string description;
    LineSpec line = default_line();
    WavePacketSpec wp;
    std::optional<ControlPulseSpec> cp;
    SweepSpec sweep;
    bool reference_runs = false;  ///< one extra run per envelope without the control pulse
    std::vector<DdcPlanSpec> ddc;
    FilterSpec filter;                       ///< channel filter for FreqSweep
    FilterSpec phase_filter = dopplerline::phase_filter();  ///< channel filter for FixedFd
    std::vector<AnalysisTag> analyses;
    OracleOptions oracle{FrontModel::SimpleWave, 0.0, 0.0, 0.0, ShiftLaw::Exact};
    double duration = 0.0;     ///< s; 0 picks packet end + 1.15 tau_p + 4 ns
    double deep_margin = 2.5e-9;  ///< DelayMerge: minimum distance of a sampled point from the packet edges
    int ports_stride = 1;      ///< keep every k-th sample in ports.csv
    int snapshot_stride = 0;   ///< > 0 also writes spacetime.csv
    double noise_sigma = 0.0;  ///< V, white noise added to the output before down-conversion
    std::uint64_t seed = 0;
    int jobs = 0;              ///< 0 selects default_jobs()
    std::filesystem::path output_dir = "out";
    bool write_files = true;

    /// Throws ValidationError or CriticalCurrentExceeded.
    void validate() const;
    bool has(AnalysisTag t) const;
};

/// Coordinates of one solver run inside a scenario.
struct RunCoordinates {
    std::size_t index = 0;
    std::optional<double> delay;
    std::optional<double> cp_amplitude;  ///< unset for reference runs
    std::size_t envelope = 0;
    bool reference = false;
    std::string id() const;  ///< directory name, e.g. "r007_d12.5ns_a1.62mA_e0"
};

struct RunResult {
    RunCoordinates coord;
    WavePacketSpec wp;
    std::optional<ControlPulseSpec> cp;
    Condition condition = Condition::NoMeeting;
    PortRecord ports;
    std::optional<MagnitudeMap> map;
    std::vector<double> centre_cut;  ///< cut at the packet centre time, on the sweep axis
    double packet_centre = 0.0;       ///< s, output time of the map's packet centre
    std::optional<double> global_shift_hz;
    std::optional<double> phase_shift_hz;
    std::optional<Waveform> inst_shift_hz;   ///< Delta f_inst(t)
    std::optional<Waveform> oracle_shift_hz;  ///< oracle Delta f at the same times
    std::optional<Waveform> envelope;         ///< |I + jQ| at the packet carrier
    double oracle_centre_hz = 0.0;            ///< oracle shift of the packet centre point
};

struct AmplitudePoint {
    double i_cp = 0.0;
    double shift_hz = 0.0;
    int packets = 0;
};

struct EnvelopeReport {
    std::string name;
    double max_rel_diff = 0.0;
    double lag = 0.0;
};

struct ScenarioResult {
    std::string name;
    std::uint64_t config_hash = 0;
    std::string config_text;  ///< effective configuration echo
    std::vector<RunResult> runs;
    std::optional<MagnitudeMap> merged_map;      ///< rows are delays
    std::vector<std::pair<double, double>> averaged_inst;  ///< (delay, Delta f) with >= 1 contributing packet
    std::vector<int> averaged_count;
    std::vector<AmplitudePoint> amplitude_points;
    std::optional<ShiftFit> fit;
    std::vector<EnvelopeReport> envelopes;
    std::filesystem::path directory;
};

/// Runs every sweep point (in parallel), applies the analyses and writes the output tree
/// <output_dir>/<name>/<run-id>/{ports.csv, iq_*.csv, map.csv, fits.txt, provenance.txt}.
/// Errors are rethrown with the run coordinates prefixed to the message.
ScenarioResult run_scenario(const Scenario& s);

/// The packet and pulse actually used by one run.
std::pair<WavePacketSpec, std::optional<ControlPulseSpec>> realise_run(const Scenario& s, const RunCoordinates& c);
std::vector<RunCoordinates> enumerate_runs(const Scenario& s);
/// End time of the simulation for one run.
double run_duration(const Scenario& s, const WavePacketSpec& wp);

/// "fig1" ... "fig6", "edf2", "edf3".
std::vector<Scenario> builtin_catalog();
/// Throws ValidationError for an unknown name.
Scenario builtin_scenario(const std::string& name);

struct CrossValidationRow {
    double delay = 0.0;
    double parabola_hz = 0.0;
    double phase_hz = 0.0;
    double oracle_hz = 0.0;
    bool near_boundary = false;  ///< within tau_wp / 2 of a condition boundary
};

struct CrossValidationReport {
    std::vector<CrossValidationRow> rows;
    double max_parabola_vs_phase = 0.0;
    double max_parabola_vs_oracle = 0.0;
    double max_phase_vs_oracle = 0.0;
    /// Same maxima over rows away from condition boundaries.
    double interior_parabola_vs_phase = 0.0;
    double interior_parabola_vs_oracle = 0.0;
    double interior_phase_vs_oracle = 0.0;
    std::string to_text() const;
};

/// Per-delay parabola, phase and oracle shifts. Needs both a FreqSweep and a FixedFd plan and a delay sweep.
CrossValidationReport cross_validate(const Scenario& s);
CrossValidationReport cross_validate(const Scenario& s, const ScenarioResult& r);

/// n points from a to b inclusive, a + k (b - a) / (n - 1); n == 1 gives {a}.
std::vector<double> linspace(double a, double b, std::size_t n);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace dopplerline
