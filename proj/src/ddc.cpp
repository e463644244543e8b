#include "dopplerline/ddc.hpp"

#include "dopplerline/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace dopplerline {

namespace {

constexpr double kPi = std::numbers::pi;

int make_odd(double n) {
    auto k = static_cast<int>(std::ceil(n));
    return (k % 2 == 0) ? k + 1 : k;
}

// Zero-phase FIR evaluated only at output indices out_k * step, samples outside the input are zero.
std::vector<double> fir_decimate(const std::vector<double>& x, const std::vector<double>& h, int step) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto nh = static_cast<std::ptrdiff_t>(h.size());
    const std::ptrdiff_t half = (nh - 1) / 2;
    const std::ptrdiff_t n_out = (n - 1) / step + 1;
    std::vector<double> y(static_cast<std::size_t>(n_out));
    for (std::ptrdiff_t j = 0; j < n_out; ++j) {
        const std::ptrdiff_t centre = j * step;
        const std::ptrdiff_t m_lo = std::max<std::ptrdiff_t>(0, half - centre);
        const std::ptrdiff_t m_hi = std::min<std::ptrdiff_t>(nh, n - centre + half);
        double acc = 0.0;
        const std::ptrdiff_t off = centre - half;
        for (std::ptrdiff_t m = m_lo; m < m_hi; ++m) acc += h[static_cast<std::size_t>(m)] * x[static_cast<std::size_t>(off + m)];
        y[static_cast<std::size_t>(j)] = acc;
    }
    return y;
}

double unwrap_step(double d) {
    while (d > kPi) d -= 2.0 * kPi;
    while (d < -kPi) d += 2.0 * kPi;
    return d;
}

}  // namespace

std::string to_string(Window w) { return w == Window::Blackman ? "blackman" : "hamming"; }

void FilterSpec::validate(double rate_in) const {
    if (!(cutoff > 0.0)) throw ValidationError("filter: cutoff must be positive");
    if (!(cutoff < rate_in / 2.0)) throw ValidationError("filter: cutoff must be below half the input rate");
    if (taps < 31 || taps % 2 == 0) throw ValidationError("filter: taps must be odd and at least 31");
    if (decimation < 0) throw ValidationError("filter: decimation must be >= 0");
    if (!(target_rate > 0.0)) throw ValidationError("filter: target_rate must be positive");
}

FilterSpec phase_filter() {
    FilterSpec f;
    f.cutoff = 800e6;
    f.taps = 47;
    f.target_rate = 5.5e9;
    return f;
}

std::vector<double> design_lowpass(double cutoff, double rate, int taps, Window window) {
    if (taps < 1 || taps % 2 == 0) throw ValidationError("design_lowpass: taps must be odd");
    if (!(cutoff > 0.0) || !(cutoff < rate / 2.0)) throw ValidationError("design_lowpass: cutoff out of range");
    std::vector<double> h(static_cast<std::size_t>(taps));
    const double fc = cutoff / rate;
    const int half = (taps - 1) / 2;
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
        const int m = k - half;
        const double sinc = (m == 0) ? 2.0 * fc : std::sin(2.0 * kPi * fc * m) / (kPi * m);
        double w = 1.0;
        if (taps > 1) {
            const double p = 2.0 * kPi * k / (taps - 1);
            w = (window == Window::Blackman) ? 0.42 - 0.5 * std::cos(p) + 0.08 * std::cos(2.0 * p)
                                              : 0.54 - 0.46 * std::cos(p);
        }
        h[static_cast<std::size_t>(k)] = sinc * w;
        sum += sinc * w;
    }
    for (double& v : h) v /= sum;
    return h;
}

double fir_magnitude(const std::vector<double>& h, double f, double rate) {
    const int half = static_cast<int>(h.size() - 1) / 2;
    double re = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) re += h[k] * std::cos(2.0 * kPi * f / rate * (static_cast<int>(k) - half));
    return std::abs(re);
}

DdcPlan plan_ddc(double rate_in, const FilterSpec& filt) {
    filt.validate(rate_in);
    DdcPlan p;
    p.rate_in = rate_in;
    int d = filt.decimation > 0 ? filt.decimation : static_cast<int>(std::floor(rate_in / filt.target_rate));
    d = std::max(d, 1);
    // Largest divisor of d not above 10 for the channel stage keeps its FIR short in time.
    int d2 = 1;
    for (int k = std::min(d, 10); k >= 1; --k) {
        if (d % k == 0) {
            d2 = k;
            break;
        }
    }
    p.d1 = d / d2;
    p.d2 = d2;
    p.rate_mid = rate_in / p.d1;
    p.rate_out = p.rate_mid / p.d2;
    if (!(filt.cutoff < p.rate_out / 2.0))
        throw ValidationError("filter: cutoff must be below half the decimated rate");
    if (p.d1 > 1) {
        const double guard = p.rate_mid - 2.0 * filt.cutoff;
        if (!(guard > 0.0)) throw ValidationError("filter: cutoff too wide for the decimation");
        const int taps1 = std::max(31, make_odd(5.5 * rate_in / guard));
        p.h1 = design_lowpass(0.5 * p.rate_mid, rate_in, taps1, Window::Blackman);
    } else {
        p.h1 = {1.0};
    }
    p.h2 = design_lowpass(filt.cutoff, p.rate_mid, filt.taps, filt.window);
    return p;
}

std::string DdcPlan::describe() const {
    std::ostringstream os;
    os << std::setprecision(10) << "rate_in=" << rate_in << " d1=" << d1 << " taps1=" << h1.size()
       << " rate_mid=" << rate_mid << " d2=" << d2 << " taps2=" << h2.size() << " rate_out=" << rate_out;
    return os.str();
}

double plan_magnitude(const DdcPlan& plan, double f) {
    return fir_magnitude(plan.h1, f, plan.rate_in) * fir_magnitude(plan.h2, f, plan.rate_mid);
}

double settling_time(const DdcPlan& plan) {
    double acc = 0.0;
    std::ptrdiff_t first = -1;
    std::ptrdiff_t last = -1;
    for (std::size_t k = 0; k < plan.h2.size(); ++k) {
        acc += plan.h2[k];
        if (first < 0 && acc >= 0.01) first = static_cast<std::ptrdiff_t>(k);
        if (acc < 0.99) last = static_cast<std::ptrdiff_t>(k) + 1;
    }
    return static_cast<double>(last - first) / plan.rate_mid;
}

IQTrace down_convert(const Waveform& w, double f_d, const FilterSpec& filt) {
    return down_convert(w, f_d, plan_ddc(w.sample_rate(), filt), filt);
}

IQTrace down_convert(const Waveform& w, double f_d, const DdcPlan& plan, const FilterSpec& filt) {
    if (w.empty()) throw ValidationError("down_convert: empty waveform");
    const double fs = w.sample_rate();
    if (std::abs(fs - plan.rate_in) > 1e-9 * fs) throw ValidationError("down_convert: plan built for another rate");
    if (!(f_d > filt.cutoff && f_d < fs / 2.0 - filt.cutoff))
        throw ValidationError("down_convert: f_d must lie within (f_LP, rate/2 - f_LP)");

    const std::size_t n = w.size();
    std::vector<double> mi(n);
    std::vector<double> mq(n);
    const double dphi = 2.0 * kPi * f_d / fs;
    const double rc = std::cos(dphi);
    const double rs = std::sin(dphi);
    double c = 1.0;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % 512 == 0) {
            // Reseed the rotator from the exact phase to bound round-off drift.
            const double th = 2.0 * kPi * std::fmod(f_d * w.time(k), 1.0);
            c = std::cos(th);
            s = std::sin(th);
        }
        mi[k] = w[k] * c;
        mq[k] = -w[k] * s;
        const double cn = c * rc - s * rs;
        s = s * rc + c * rs;
        c = cn;
    }

    IQTrace tr;
    tr.f_d = f_d;
    tr.sample_rate = plan.rate_out;
    tr.t0 = w.t0();
    if (plan.d1 > 1) {
        mi = fir_decimate(mi, plan.h1, plan.d1);
        mq = fir_decimate(mq, plan.h1, plan.d1);
    }
    tr.i = fir_decimate(mi, plan.h2, plan.d2);
    tr.q = fir_decimate(mq, plan.h2, plan.d2);
    std::ostringstream os;
    os << "cutoff=" << filt.cutoff << " window=" << to_string(filt.window) << ' ' << plan.describe();
    tr.provenance = os.str();
    return tr;
}

Waveform magnitude(const IQTrace& tr) {
    if (tr.i.size() != tr.q.size() || tr.i.empty()) throw ValidationError("magnitude: malformed IQ trace");
    std::vector<double> m(tr.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::hypot(tr.i[k], tr.q[k]);
    return Waveform(tr.sample_rate, tr.t0, std::move(m));
}

Waveform phase_unwrapped(const IQTrace& tr, double gate) {
    if (!(gate > 0.0 && gate <= 1.0)) throw ValidationError("phase_unwrapped: gate must lie in (0, 1]");
    const Waveform mag = magnitude(tr);
    const auto samples = mag.samples();
    const auto peak_it = std::max_element(samples.begin(), samples.end());
    const double peak = *peak_it;
    if (!(peak > 0.0)) throw EmptyGate("phase_unwrapped: trace is identically zero");
    const double level = gate * peak;
    auto lo = static_cast<std::size_t>(peak_it - samples.begin());
    auto hi = lo;
    while (lo > 0 && samples[lo - 1] >= level) --lo;
    while (hi + 1 < samples.size() && samples[hi + 1] >= level) ++hi;
    std::vector<double> phi(hi - lo + 1);
    double prev = std::atan2(tr.q[lo], tr.i[lo]);
    double acc = 0.0;
    phi[0] = 0.0;
    for (std::size_t k = lo + 1; k <= hi; ++k) {
        const double a = std::atan2(tr.q[k], tr.i[k]);
        acc += unwrap_step(a - prev);
        prev = a;
        phi[k - lo] = -acc;
    }
    return Waveform(tr.sample_rate, tr.time(lo), std::move(phi));
}

Waveform instantaneous_shift(const Waveform& phase, int smoothing) {
    if (smoothing < 3 || smoothing % 2 == 0) throw ValidationError("instantaneous_shift: smoothing must be odd and >= 3");
    const std::size_t n = phase.size();
    if (n < static_cast<std::size_t>(smoothing)) throw ValidationError("instantaneous_shift: trace shorter than smoothing");
    const auto half = static_cast<std::ptrdiff_t>(smoothing / 2);
    const auto nn = static_cast<std::ptrdiff_t>(n);
    std::vector<double> sm(n);
    for (std::ptrdiff_t k = 0; k < nn; ++k) {
        // Shrink the window symmetrically near the ends so a linear phase stays linear.
        const std::ptrdiff_t h = std::min({half, k, nn - 1 - k});
        double acc = 0.0;
        for (std::ptrdiff_t j = k - h; j <= k + h; ++j) acc += phase[static_cast<std::size_t>(j)];
        sm[static_cast<std::size_t>(k)] = acc / static_cast<double>(2 * h + 1);
    }
    const double fs = phase.sample_rate();
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
        double slope;
        if (k == 0) slope = (sm[1] - sm[0]) * fs;
        else if (k + 1 == n) slope = (sm[n - 1] - sm[n - 2]) * fs;
        else slope = 0.5 * (sm[k + 1] - sm[k - 1]) * fs;
        d[k] = -slope;
    }
    return Waveform(fs, phase.t0(), std::move(d));
}

Waveform add_gaussian_noise(const Waveform& w, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ValidationError("noise: sigma must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> out(w.samples().begin(), w.samples().end());
    for (double& v : out) v += sigma * dist(rng);
    return Waveform(w.sample_rate(), w.t0(), std::move(out));
}

void write_iq_csv(const IQTrace& tr, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(12);
    out << "# f_d_hz=" << tr.f_d << '\n';
    out << "# sample_rate_hz=" << tr.sample_rate << '\n';
    out << "# filter: " << tr.provenance << '\n';
    out << "t_s,i,q\n";
    for (std::size_t k = 0; k < tr.size(); ++k) out << tr.time(k) << ',' << tr.i[k] << ',' << tr.q[k] << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dopplerline
