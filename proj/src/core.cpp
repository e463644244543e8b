#include "dopplerline/core.hpp"

#include "dopplerline/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dopplerline {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

Port opposite(Port p) noexcept { return p == Port::Left ? Port::Right : Port::Left; }

std::string to_string(NonlinearityModel m) {
    return m == NonlinearityModel::KineticInductance ? "kinetic_inductance" : "josephson_chain";
}

std::string to_string(Port p) { return p == Port::Left ? "left" : "right"; }

double LineSpec::propagation_time() const { return length * std::sqrt(l0 * c); }
double LineSpec::impedance() const { return std::sqrt(l0 / c); }
double LineSpec::velocity() const { return 1.0 / std::sqrt(l0 * c); }

void LineSpec::validate() const {
    require(std::isfinite(l0) && l0 > 0.0, "line: l0 must be positive");
    require(std::isfinite(c) && c > 0.0, "line: c must be positive");
    require(std::isfinite(length) && length > 0.0, "line: length must be positive");
    require(std::isfinite(i_star) && i_star > 0.0, "line: i_star must be positive");
    require(std::isfinite(i_crit) && i_crit > 0.0, "line: i_crit must be positive");
    require(std::isfinite(c4), "line: c4 must be finite");
    require(n_cells >= 16, "line: n_cells must be at least 16");
    if (model == NonlinearityModel::KineticInductance) {
        require(i_crit < i_star, "line: i_crit must be below i_star for the kinetic-inductance model");
        // The inductance must stay increasing in |I| up to i_crit.
        const double x = (i_crit / i_star) * (i_crit / i_star);
        require(1.0 + 2.0 * c4 * x > 0.0, "line: c4 makes the inductance non-monotone below i_crit");
    }
}

LineSpec line_from_delay(double tau_p, double z0, double length, double i_star, double i_crit, double c4,
                         NonlinearityModel model, int n_cells) {
    require(tau_p > 0.0 && z0 > 0.0 && length > 0.0 && i_star > 0.0 && i_crit > 0.0,
            "line_from_delay: all arguments must be positive");
    LineSpec line;
    line.l0 = z0 * tau_p / length;
    line.c = tau_p / (z0 * length);
    line.length = length;
    line.i_star = i_star;
    line.i_crit = i_crit;
    line.c4 = c4;
    line.model = model;
    line.n_cells = n_cells;
    line.validate();
    return line;
}

LineSpec default_line() { return line_from_delay(40e-9, 50.0, 0.24, 6.15e-3, 2.5e-3); }

Waveform::Waveform(double sample_rate, double t0, std::vector<double> samples)
    : sample_rate_(sample_rate), t0_(t0), samples_(std::move(samples)) {
    require(std::isfinite(sample_rate_) && sample_rate_ > 0.0, "waveform: sample_rate must be positive");
    require(std::isfinite(t0_), "waveform: t0 must be finite");
    require(!samples_.empty(), "waveform: samples must be non-empty");
    require(std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); }),
            "waveform: samples must be finite");
}

double Waveform::at(double t) const {
    const double pos = (t - t0_) * sample_rate_;
    if (pos < 0.0 || samples_.empty()) return 0.0;
    const double last = static_cast<double>(samples_.size() - 1);
    if (pos > last) return 0.0;
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= samples_.size()) return samples_.back();
    const double frac = pos - static_cast<double>(k);
    return samples_[k] + frac * (samples_[k + 1] - samples_[k]);
}

Waveform Waveform::resampled(double new_rate) const {
    require(new_rate > 0.0, "resample: rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration() * new_rate));
    std::vector<double> out(std::max<std::size_t>(n, 1));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(t0_ + static_cast<double>(k) / new_rate);
    return Waveform(new_rate, t0_, std::move(out));
}

double Waveform::peak_abs() const {
    double p = 0.0;
    for (double v : samples_) p = std::max(p, std::abs(v));
    return p;
}

void validate(const EnvelopeSpec& env) {
    if (const auto* s = std::get_if<StaircaseEnvelope>(&env)) {
        require(!s->levels.empty(), "staircase envelope: levels must be non-empty");
        for (double l : s->levels) require(l > 0.0 && l <= 1.0, "staircase envelope: levels must lie in (0, 1]");
    } else if (const auto* g = std::get_if<GaussianEnvelope>(&env)) {
        require(g->sigma > 0.0, "gaussian envelope: sigma must be positive");
    } else if (const auto* t = std::get_if<TableEnvelope>(&env)) {
        require(t->table.size() >= 2, "table envelope: at least two samples required");
        require(t->table.peak_abs() > 0.0, "table envelope: table must not be all zero");
    }
}

double WavePacketSpec::carrier_hz() const { return omega_in / (2.0 * std::numbers::pi); }

void WavePacketSpec::validate(const LineSpec& line) const {
    require(std::isfinite(omega_in) && omega_in > 0.0, "wave packet: omega_in must be positive");
    require(std::isfinite(tau_wp) && tau_wp > 0.0, "wave packet: tau_wp must be positive");
    require(std::isfinite(amplitude) && amplitude > 0.0, "wave packet: amplitude must be positive");
    require(amplitude <= 0.05 * line.i_star, "wave packet: amplitude must not exceed 0.05 * i_star");
    require(std::isfinite(delay), "wave packet: delay must be finite");
    dopplerline::validate(envelope);
}

double ControlPulseSpec::peak_current() const {
    if (const auto* r = std::get_if<RectPulse>(&shape)) return std::abs(r->amplitude);
    return std::get<ArbitraryPulse>(shape).waveform.peak_abs();
}

double ControlPulseSpec::duration() const {
    if (const auto* r = std::get_if<RectPulse>(&shape)) return r->duration;
    const auto& w = std::get<ArbitraryPulse>(shape).waveform;
    return w.time(w.size() - 1) - w.t0() + 0.0;
}

void ControlPulseSpec::validate(const LineSpec& line) const {
    require(std::isfinite(delay), "control pulse: delay must be finite");
    if (const auto* r = std::get_if<RectPulse>(&shape)) {
        require(std::isfinite(r->amplitude), "control pulse: amplitude must be finite");
        require(r->rise > 0.0 && r->fall > 0.0, "control pulse: rise and fall must be positive");
        require(r->duration > r->rise + r->fall, "control pulse: duration must exceed rise + fall");
    }
    if (peak_current() >= line.i_crit) throw CriticalCurrentExceeded(peak_current(), line.i_crit, "control pulse");
}

CriticalCurrentExceeded::CriticalCurrentExceeded(double current, double i_crit, std::string where)
    : Error((where.empty() ? std::string() : where + ": ") + "|I| = " + std::to_string(current * 1e3) +
            " mA reaches the critical current " + std::to_string(i_crit * 1e3) + " mA"),
      current_(current),
      i_crit_(i_crit) {}

CriticalCurrentExceeded::CriticalCurrentExceeded(const std::string& message, double current, double i_crit)
    : Error(message), current_(current), i_crit_(i_crit) {}

NonFiniteField::NonFiniteField(const std::string& message, std::int64_t step) : Error(message), step_(step) {}

NonFiniteField::NonFiniteField(std::int64_t step, double time)
    : Error("non-finite field at step " + std::to_string(step) + " (t = " + std::to_string(time * 1e9) + " ns)"),
      step_(step) {}

void rethrow_with_context(const std::string& context) {
    const std::string p = context + ": ";
    try {
        throw;
    } catch (const CriticalCurrentExceeded& e) {
        throw CriticalCurrentExceeded(p + e.what(), e.current(), e.i_crit());
    } catch (const NonFiniteField& e) {
        throw NonFiniteField(p + e.what(), e.step());
    } catch (const ValidationError& e) {
        throw ValidationError(p + e.what());
    } catch (const SingularInterface& e) {
        throw SingularInterface(p + e.what());
    } catch (const CflViolation& e) {
        throw CflViolation(p + e.what());
    } catch (const EmptyGate& e) {
        throw EmptyGate(p + e.what());
    } catch (const InsufficientSupport& e) {
        throw InsufficientSupport(p + e.what());
    } catch (const FitDiverged& e) {
        throw FitDiverged(p + e.what());
    } catch (const SignError& e) {
        throw SignError(p + e.what());
    } catch (const AlignmentFailed& e) {
        throw AlignmentFailed(p + e.what());
    } catch (const OracleError& e) {
        throw OracleError(p + e.what());
    } catch (const IoError& e) {
        throw IoError(p + e.what());
    } catch (const Error& e) {
        throw Error(p + e.what());
    }
}

}  // namespace dopplerline
