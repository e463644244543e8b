#include "dopplerline/analysis.hpp"

#include "dopplerline/errors.hpp"
#include "dopplerline/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace dopplerline {

namespace {

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] > v[k - 1])) return false;
    return true;
}

// Catmull-Rom interpolation of uniform samples; zero outside the sampled span.
double catmull_rom(const Waveform& w, double t) {
    const double pos = (t - w.t0()) * w.sample_rate();
    const auto n = static_cast<std::ptrdiff_t>(w.size());
    if (pos < 0.0 || pos > static_cast<double>(n - 1)) return 0.0;
    const auto k = static_cast<std::ptrdiff_t>(std::floor(pos));
    const double u = pos - static_cast<double>(k);
    auto s = [&](std::ptrdiff_t j) { return w[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))]; };
    const double p0 = s(k - 1);
    const double p1 = s(k);
    const double p2 = s(k + 1);
    const double p3 = s(k + 2);
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

// First and last times at which a peak-normalised envelope reaches `level`.
std::pair<double, double> support(const Waveform& w, double level) {
    std::size_t lo = w.size();
    std::size_t hi = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] < level) continue;
        lo = std::min(lo, k);
        hi = k;
    }
    return {w.time(lo), w.time(hi)};
}

Waveform normalised(const Waveform& w) {
    const double peak = w.peak_abs();
    if (!(peak > 0.0)) throw AlignmentFailed("envelope_compare: envelope is identically zero");
    std::vector<double> out(w.samples().begin(), w.samples().end());
    for (double& v : out) v /= peak;
    return Waveform(w.sample_rate(), w.t0(), std::move(out));
}

}  // namespace

std::vector<double> MagnitudeMap::cut(std::size_t t) const {
    std::vector<double> c(f_d_axis.size());
    for (std::size_t f = 0; f < f_d_axis.size(); ++f) c[f] = at(f, t);
    return c;
}

void MagnitudeMap::validate() const {
    if (f_d_axis.empty() || t_axis.empty()) throw ValidationError("magnitude map: empty axis");
    if (!strictly_increasing(f_d_axis) || !strictly_increasing(t_axis))
        throw ValidationError("magnitude map: axes must be strictly increasing");
    if (values.size() != f_d_axis.size() * t_axis.size()) throw ValidationError("magnitude map: inconsistent dimensions");
}

MagnitudeMap magnitude_map(const Waveform& w, const std::vector<double>& f_d_list, const FilterSpec& filt, int jobs) {
    if (f_d_list.empty() || !strictly_increasing(f_d_list))
        throw ValidationError("magnitude_map: f_d list must be non-empty and sorted");
    const DdcPlan plan = plan_ddc(w.sample_rate(), filt);
    std::vector<Waveform> rows(f_d_list.size());
    parallel_for(f_d_list.size(), jobs, [&](std::size_t k) { rows[k] = magnitude(down_convert(w, f_d_list[k], plan, filt)); });
    MagnitudeMap map;
    map.f_d_axis = f_d_list;
    const std::size_t nt = rows.front().size();
    for (std::size_t k = 0; k < nt; ++k) map.t_axis.push_back(rows.front().time(k));
    map.values.reserve(nt * rows.size());
    for (const auto& r : rows) map.values.insert(map.values.end(), r.samples().begin(), r.samples().end());
    return map;
}

double packet_centre_time(const MagnitudeMap& map) {
    map.validate();
    const std::size_t nt = map.t_axis.size();
    std::vector<double> col(nt, 0.0);
    for (std::size_t f = 0; f < map.f_d_axis.size(); ++f)
        for (std::size_t t = 0; t < nt; ++t) col[t] += map.at(f, t);
    const double peak = *std::max_element(col.begin(), col.end());
    if (!(peak > 0.0)) throw EmptyGate("packet_centre_time: map is identically zero");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        if (col[t] >= 0.5 * peak) {
            num += col[t] * map.t_axis[t];
            den += col[t];
        }
    }
    return num / den;
}

double fit_parabola_vertex(const std::vector<double>& f, const std::vector<double>& values, double window) {
    if (f.size() != values.size() || f.empty()) throw ValidationError("parabola fit: size mismatch");
    if (!(window > 0.0 && window <= 1.0)) throw ValidationError("parabola fit: window must lie in (0, 1]");
    const auto peak_it = std::max_element(values.begin(), values.end());
    const double level = window * *peak_it;
    auto lo = static_cast<std::size_t>(peak_it - values.begin());
    auto hi = lo;
    while (lo > 0 && values[lo - 1] >= level) --lo;
    while (hi + 1 < values.size() && values[hi + 1] >= level) ++hi;
    const std::size_t n = hi - lo + 1;
    if (n < 5) throw InsufficientSupport("parabola fit: fewer than 5 points above the window level");

    // Centre and scale the abscissa for conditioning.
    const double fc = 0.5 * (f[lo] + f[hi]);
    const double fs = 0.5 * (f[hi] - f[lo]);
    double s[5] = {0, 0, 0, 0, 0};
    double r[3] = {0, 0, 0};
    for (std::size_t k = lo; k <= hi; ++k) {
        const double x = (f[k] - fc) / fs;
        double p = 1.0;
        for (int j = 0; j < 5; ++j) {
            s[j] += p;
            if (j < 3) r[j] += p * values[k];
            p *= x;
        }
    }
    // Normal equations for y = c0 + c1 x + c2 x^2, solved by Cramer's rule.
    const double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
    auto det3 = [](const double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double d = det3(m);
    if (d == 0.0) throw FitDiverged("parabola fit: singular normal equations");
    double m1[3][3];
    double m2[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            m1[i][j] = (j == 1) ? r[i] : m[i][j];
            m2[i][j] = (j == 2) ? r[i] : m[i][j];
        }
    const double c1 = det3(m1) / d;
    const double c2 = det3(m2) / d;
    if (!(c2 < 0.0)) throw FitDiverged("parabola fit: curvature is not negative");
    const double vertex = fc - 0.5 * c1 / c2 * fs;
    if (vertex < f[lo] || vertex > f[hi]) throw FitDiverged("parabola fit: vertex outside the selected band");
    return vertex;
}

double fit_parabola_peak(const MagnitudeMap& map, double t_cut, double window) {
    map.validate();
    const auto it = std::lower_bound(map.t_axis.begin(), map.t_axis.end(), t_cut);
    std::size_t idx;
    if (it == map.t_axis.begin()) idx = 0;
    else if (it == map.t_axis.end()) idx = map.t_axis.size() - 1;
    else {
        idx = static_cast<std::size_t>(it - map.t_axis.begin());
        if (t_cut - map.t_axis[idx - 1] < map.t_axis[idx] - t_cut) --idx;
    }
    return fit_parabola_vertex(map.f_d_axis, map.cut(idx), window);
}

double global_shift(double f_out, double f_in) { return f_out - f_in; }

std::string ShiftFit::to_text() const {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "i_star_hat_a=" << i_star_hat << '\n'
       << "c4_hat=" << c4_hat << '\n'
       << "a_rad_s_per_a2=" << a << '\n'
       << "b_rad_s_per_a4=" << b << '\n'
       << "residual_rms_rad_s=" << residual_rms << '\n'
       << "var_i_star=" << var_i_star << '\n'
       << "var_c4=" << var_c4 << '\n';
    return os.str();
}

ShiftFit fit_amplitude_sweep(const std::vector<std::pair<double, double>>& points, double omega_in) {
    if (points.size() < 6) throw ValidationError("fit_amplitude_sweep: at least 6 points required");
    if (!(omega_in > 0.0)) throw ValidationError("fit_amplitude_sweep: omega_in must be positive");
    double i_min = INFINITY;
    double i_max = 0.0;
    for (const auto& [i, dw] : points) {
        if (!std::isfinite(i) || !std::isfinite(dw)) throw ValidationError("fit_amplitude_sweep: non-finite point");
        i_min = std::min(i_min, std::abs(i));
        i_max = std::max(i_max, std::abs(i));
    }
    if (!(i_min > 0.0) || i_max < 4.0 * i_min) throw ValidationError("fit_amplitude_sweep: currents must span a factor of 4");

    // Scaled regressors x = (i / i_max)^2 keep the 2x2 normal equations well conditioned.
    double sxx = 0.0, sxy = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
    for (const auto& [i, dw] : points) {
        const double x = (i / i_max) * (i / i_max);
        const double x2 = x * x;
        sxx += x * x;
        sxy += x * x2;
        syy += x2 * x2;
        sx += x * dw;
        sy += x2 * dw;
    }
    const double det = sxx * syy - sxy * sxy;
    if (!(std::abs(det) > 0.0)) throw ValidationError("fit_amplitude_sweep: degenerate currents");
    const double as = (sx * syy - sy * sxy) / det;
    const double bs = (sy * sxx - sx * sxy) / det;
    ShiftFit fit;
    fit.a = as / (i_max * i_max);
    fit.b = bs / (i_max * i_max * i_max * i_max);
    if (!(fit.a < 0.0)) throw SignError("fit_amplitude_sweep: quadratic coefficient is not negative");
    fit.i_star_hat = std::sqrt(-omega_in / (4.0 * fit.a));
    fit.c4_hat = -fit.b * omega_in / (4.0 * fit.a * fit.a);

    double rss = 0.0;
    for (const auto& [i, dw] : points) {
        const double r = dw - (fit.a * i * i + fit.b * i * i * i * i);
        rss += r * r;
    }
    const auto n = static_cast<double>(points.size());
    fit.residual_rms = std::sqrt(rss / n);
    const double sigma2 = rss / (n - 2.0);
    const double var_as = sigma2 * syy / det;
    const double var_bs = sigma2 * sxx / det;
    const double cov_ab = -sigma2 * sxy / det;
    const double s2 = i_max * i_max;
    const double var_a = var_as / (s2 * s2);
    const double var_b = var_bs / (s2 * s2 * s2 * s2);
    const double cov = cov_ab / (s2 * s2 * s2);
    const double di_da = -fit.i_star_hat / (2.0 * fit.a);
    fit.var_i_star = di_da * di_da * var_a;
    const double dc_da = fit.b * omega_in / (2.0 * fit.a * fit.a * fit.a);
    const double dc_db = -omega_in / (4.0 * fit.a * fit.a);
    fit.var_c4 = dc_da * dc_da * var_a + dc_db * dc_db * var_b + 2.0 * dc_da * dc_db * cov;
    return fit;
}

EnvelopeComparison envelope_compare(const Waveform& ref_in, const Waveform& shifted_in) {
    const Waveform ref = normalised(ref_in);
    const Waveform sh = normalised(shifted_in);
    const auto [ref_lo, ref_hi] = support(ref, 0.1);
    const auto [sh_lo, sh_hi] = support(sh, 0.1);
    if (sh_lo > ref_hi || sh_hi < ref_lo) throw AlignmentFailed("envelope_compare: supports do not overlap");
    const double dt = ref.dt();
    const auto lag_lo = static_cast<long>(std::floor((sh.t0() - ref.end_time()) / dt)) - 1;
    const auto lag_hi = static_cast<long>(std::ceil((sh.end_time() - ref.t0()) / dt)) + 1;
    auto corr = [&](double lag) {
        double acc = 0.0;
        for (std::size_t k = 0; k < ref.size(); ++k) acc += ref[k] * catmull_rom(sh, ref.time(k) + lag);
        return acc;
    };
    long best = lag_lo;
    double best_c = -INFINITY;
    for (long l = lag_lo; l <= lag_hi; ++l) {
        const double c = corr(static_cast<double>(l) * dt);
        if (c > best_c) {
            best_c = c;
            best = l;
        }
    }
    if (!(best_c > 0.0)) throw AlignmentFailed("envelope_compare: supports do not overlap");
    const double cm = corr(static_cast<double>(best - 1) * dt);
    const double cp = corr(static_cast<double>(best + 1) * dt);
    const double curv = cm - 2.0 * best_c + cp;
    const double frac = curv < 0.0 ? std::clamp(0.5 * (cm - cp) / curv, -0.5, 0.5) : 0.0;

    EnvelopeComparison out;
    out.lag = (static_cast<double>(best) + frac) * dt;
    std::vector<double> diff(ref.size(), 0.0);
    for (std::size_t k = 0; k < ref.size(); ++k) {
        if (ref[k] < 0.1) continue;
        diff[k] = catmull_rom(sh, ref.time(k) + out.lag) - ref[k];
        out.max_rel_diff = std::max(out.max_rel_diff, std::abs(diff[k]));
    }
    out.difference = Waveform(ref.sample_rate(), ref.t0(), std::move(diff));
    return out;
}

MagnitudeMap merge_delay_sweep(const std::vector<std::pair<double, std::vector<double>>>& per_delay_cuts,
                               const std::vector<double>& f_d_axis) {
    if (per_delay_cuts.empty()) throw ValidationError("merge_delay_sweep: no cuts");
    std::vector<std::size_t> order(per_delay_cuts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return per_delay_cuts[a].first < per_delay_cuts[b].first; });
    MagnitudeMap map;
    map.f_d_axis = f_d_axis;
    for (std::size_t k : order) {
        if (per_delay_cuts[k].second.size() != f_d_axis.size())
            throw ValidationError("merge_delay_sweep: cut does not match the f_d axis");
        map.t_axis.push_back(per_delay_cuts[k].first);
    }
    map.values.resize(f_d_axis.size() * order.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        for (std::size_t f = 0; f < f_d_axis.size(); ++f)
            map.values[f * order.size() + r] = per_delay_cuts[order[r]].second[f];
    map.validate();
    return map;
}

double average_instantaneous(const std::vector<double>& per_packet) {
    if (per_packet.empty()) throw ValidationError("average_instantaneous: empty input");
    double acc = 0.0;
    for (double v : per_packet) acc += v;
    return acc / static_cast<double>(per_packet.size());
}

double phase_slope_shift(const Waveform& phase, double t_lo, double t_hi) {
    std::vector<double> ts;
    std::vector<double> ps;
    for (std::size_t k = 0; k < phase.size(); ++k) {
        const double t = phase.time(k);
        if (t < t_lo || t > t_hi) continue;
        ts.push_back(t);
        ps.push_back(phase[k]);
    }
    if (ts.size() < 2) throw InsufficientSupport("phase_slope_shift: fewer than 2 samples in range");
    const double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
    const double pm = std::accumulate(ps.begin(), ps.end(), 0.0) / static_cast<double>(ps.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        num += (ts[k] - tm) * (ps[k] - pm);
        den += (ts[k] - tm) * (ts[k] - tm);
    }
    return -num / den;
}

void write_map_csv(const MagnitudeMap& map, const std::filesystem::path& path, const std::string& row_label) {
    map.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(10) << row_label;
    for (double f : map.f_d_axis) out << ',' << f;
    out << '\n';
    for (std::size_t t = 0; t < map.t_axis.size(); ++t) {
        out << map.t_axis[t];
        for (std::size_t f = 0; f < map.f_d_axis.size(); ++f) out << ',' << map.at(f, t);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dopplerline
