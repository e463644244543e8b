#include "dopplerline/solver.hpp"

#include "dopplerline/errors.hpp"
#include "dopplerline/line_model.hpp"
#include "dopplerline/signal.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace dopplerline {

namespace {

constexpr std::int64_t kFiniteCheckInterval = 64;

double bias_at(const std::vector<double>& bias, std::size_t k) { return bias.empty() ? 0.0 : bias[k]; }

[[noreturn]] void branch_overflow(double total, const LineSpec& line, std::size_t k) {
    throw CriticalCurrentExceeded(total, line.i_crit, "branch " + std::to_string(k));
}

// Newton solve of u + u^3/3 + c4 u^5/5 = target, seeded with u.
inline double invert_ki(double target, double u, double c4) {
    for (int it = 0; it < 40; ++it) {
        const double u2 = u * u;
        const double f = u * (1.0 + u2 * (1.0 / 3.0 + c4 * u2 * 0.2)) - target;
        const double du = f / (1.0 + u2 * (1.0 + c4 * u2));
        u -= du;
        // Quadratic convergence: a correction this small leaves a round-off sized error.
        if (std::abs(du) <= 1e-9 * std::abs(u) || du == 0.0) break;
    }
    return u;
}

}  // namespace

SolverConfig default_solver_config(const LineSpec& line, double duration) {
    SolverConfig cfg;
    cfg.dx = line.dx();
    cfg.dt = cfg.dx * std::sqrt(line.l0 * line.c);
    cfg.duration = duration;
    return cfg;
}

FieldState zero_state(const LineSpec& line, const std::vector<double>& static_bias) {
    const auto n = static_cast<std::size_t>(line.n_cells);
    if (!static_bias.empty() && static_bias.size() != n)
        throw ValidationError("static_bias must be empty or hold one value per cell");
    FieldState s;
    s.v.assign(n + 1, 0.0);
    s.i.assign(n, 0.0);
    s.phi.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.phi[k] = flux_from_current(bias_at(static_bias, k), line);
    return s;
}

void step_inplace(const LineSpec& line, FieldState& s, const StepSources& src, double dt,
                  const std::vector<double>& static_bias) {
    const auto n = static_cast<std::size_t>(line.n_cells);
    if (s.v.size() != n + 1 || s.i.size() != n || s.phi.size() != n)
        throw ValidationError("field state does not match the line resolution");
    const double dx = line.dx();
    const double r = dt / dx;
    const bool has_bias = !static_bias.empty();

    if (line.model == NonlinearityModel::KineticInductance) {
        const double scale = 1.0 / (line.l0 * line.i_star);
        const double u_crit = line.i_crit / line.i_star;
        const double c4 = line.c4;
        for (std::size_t k = 0; k < n; ++k) {
            s.phi[k] -= r * (s.v[k + 1] - s.v[k]);
            const double b = has_bias ? static_bias[k] : 0.0;
            const double u = invert_ki(s.phi[k] * scale, (s.i[k] + b) / line.i_star, c4);
            if (!(std::abs(u) < u_crit)) branch_overflow(u * line.i_star, line, k);
            s.i[k] = u * line.i_star - b;
        }
    } else {
        const double scale = 1.0 / (line.l0 * line.i_crit);
        for (std::size_t k = 0; k < n; ++k) {
            s.phi[k] -= r * (s.v[k + 1] - s.v[k]);
            const double arg = s.phi[k] * scale;
            if (!(std::abs(arg) < 0.5 * 3.14159265358979323846)) branch_overflow(line.i_crit, line, k);
            const double total = line.i_crit * std::sin(arg);
            if (!(std::abs(total) < line.i_crit)) branch_overflow(total, line, k);
            s.i[k] = total - (has_bias ? static_bias[k] : 0.0);
        }
    }

    const double rc = dt / (line.c * dx);
    for (std::size_t k = 1; k < n; ++k) s.v[k] -= rc * (s.i[k] - s.i[k - 1]);

    // Half cells at the ports, trapezoidal in the source and the port voltage.
    const double a = line.c * dx / (2.0 * dt);
    const double b = 0.5 / line.impedance();
    s.v[0] = (s.v[0] * (a - b) + b * (src.left_now + src.left_next) - s.i[0]) / (a + b);
    s.v[n] = (s.v[n] * (a - b) + b * (src.right_now + src.right_next) + s.i[n - 1]) / (a + b);

    s.n += 1;
    s.t = static_cast<double>(s.n) * dt;
}

FieldState step(const LineSpec& line, const FieldState& state, const StepSources& src, double dt,
                const std::vector<double>& static_bias) {
    FieldState next = state;
    step_inplace(line, next, src, dt, static_bias);
    return next;
}

double field_energy(const LineSpec& line, const FieldState& before, const FieldState& after) {
    const double dx = line.dx();
    double e = 0.0;
    const std::size_t nv = before.v.size();
    for (std::size_t k = 0; k < nv; ++k) {
        const double w = (k == 0 || k + 1 == nv) ? 0.5 : 1.0;
        e += 0.5 * w * line.c * dx * before.v[k] * before.v[k];
    }
    for (std::size_t k = 0; k < before.i.size(); ++k) e += 0.5 * line.l0 * dx * before.i[k] * after.i[k];
    return e;
}

double control_source_voltage(double i, const LineSpec& line) {
    if (i == 0.0) return 0.0;
    return line.impedance() * i + simple_wave_voltage(i, line);
}

RunOutput run(const LineSpec& line, const WavePacketSpec& wp, const std::optional<ControlPulseSpec>& cp,
              const SolverConfig& cfg) {
    line.validate();
    wp.validate(line);
    if (cp) cp->validate(line);
    if (!(cfg.dx > 0.0) || std::abs(cfg.dx - line.dx()) > 1e-9 * line.dx())
        throw ValidationError("solver: dx must equal length / n_cells");
    const double dt_max = cfg.dx * std::sqrt(line.l0 * line.c);
    if (!(cfg.dt > 0.0)) throw ValidationError("solver: dt must be positive");
    if (cfg.dt > dt_max * (1.0 + 1e-12)) throw CflViolation("solver: dt exceeds dx * sqrt(l0 c)");
    if (cfg.duration < line.propagation_time()) throw ValidationError("solver: duration must be at least tau_p");
    if (cfg.snapshot_stride < 0) throw ValidationError("solver: snapshot_stride must be >= 0");

    const double rate = 1.0 / cfg.dt;
    const double z0 = line.impedance();
    const Waveform wp_wave = synth_wave_packet(wp, rate);
    std::optional<Waveform> cp_wave;
    if (cp) cp_wave = synth_control_pulse(*cp, rate, line.i_crit);

    auto source = [&](Port side, double t) {
        double vs = 0.0;
        if (wp.port == side) vs += 2.0 * z0 * wp_wave.at(t);
        if (cp_wave && cp->port == side) vs += control_source_voltage(cp_wave->at(t), line);
        return vs;
    };

    const auto steps = static_cast<std::int64_t>(std::ceil(cfg.duration / cfg.dt - 1e-9));
    const auto n = static_cast<std::size_t>(line.n_cells);
    FieldState s = zero_state(line, cfg.static_bias);

    std::vector<double> left;
    std::vector<double> right;
    if (cfg.record_ports) {
        left.reserve(static_cast<std::size_t>(steps) + 1);
        right.reserve(static_cast<std::size_t>(steps) + 1);
    }

    std::optional<SpacetimeRecord> st;
    const auto stride = static_cast<std::size_t>(cfg.snapshot_stride);
    if (stride > 0) {
        st.emplace();
        for (std::size_t k = 0; k <= n; k += stride) st->x_axis.push_back(static_cast<double>(k) * cfg.dx);
    }
    auto snapshot = [&]() {
        st->t_axis.push_back(s.t);
        for (std::size_t k = 0; k <= n; k += stride) {
            st->v.push_back(s.v[k]);
            st->i.push_back(s.i[std::min(k, n - 1)]);
        }
    };

    double vl_now = source(Port::Left, 0.0);
    double vr_now = source(Port::Right, 0.0);
    auto record = [&]() {
        if (!cfg.record_ports) return;
        left.push_back(s.v[0] - 0.5 * vl_now);
        right.push_back(s.v[n] - 0.5 * vr_now);
    };
    record();
    if (st) snapshot();

    for (std::int64_t k = 0; k < steps; ++k) {
        const double t_next = static_cast<double>(k + 1) * cfg.dt;
        StepSources src{vl_now, source(Port::Left, t_next), vr_now, source(Port::Right, t_next)};
        try {
            step_inplace(line, s, src, cfg.dt, cfg.static_bias);
        } catch (const CriticalCurrentExceeded&) {
            rethrow_with_context("step " + std::to_string(k + 1));
        }
        vl_now = src.left_next;
        vr_now = src.right_next;
        if ((k + 1) % kFiniteCheckInterval == 0 || k + 1 == steps) {
            double acc = 0.0;
            for (double v : s.v) acc += v;
            if (!std::isfinite(acc)) throw NonFiniteField(s.n, s.t);
        }
        record();
        if (st && (static_cast<std::size_t>(k + 1) % stride == 0)) snapshot();
    }

    RunOutput out;
    if (cfg.record_ports) {
        out.ports.left_out = Waveform(rate, 0.0, std::move(left));
        out.ports.right_out = Waveform(rate, 0.0, std::move(right));
    }
    out.ports.wp_injected = wp_wave;
    out.ports.cp_injected = cp_wave;
    out.spacetime = std::move(st);
    return out;
}

void write_spacetime_csv(const SpacetimeRecord& rec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t_s,x_m,v,i\n" << std::setprecision(10);
    const std::size_t nx = rec.x_axis.size();
    for (std::size_t r = 0; r < rec.t_axis.size(); ++r) {
        for (std::size_t c = 0; c < nx; ++c) {
            out << rec.t_axis[r] << ',' << rec.x_axis[c] << ',' << rec.v[r * nx + c] << ',' << rec.i[r * nx + c] << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_spacetime_matrix(const SpacetimeRecord& rec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const std::size_t nx = rec.x_axis.size();
    out << "# " << rec.t_axis.size() << ' ' << nx << '\n' << std::setprecision(10);
    out << "x";
    for (double x : rec.x_axis) out << ' ' << x;
    out << '\n';
    for (std::size_t r = 0; r < rec.t_axis.size(); ++r) {
        out << rec.t_axis[r];
        for (std::size_t c = 0; c < nx; ++c) out << ' ' << rec.v[r * nx + c];
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dopplerline
