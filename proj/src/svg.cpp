#include "dopplerline/svg.hpp"

#include "dopplerline/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace dopplerline::svg {

namespace {

constexpr int kLeft = 70;
constexpr int kRight = 20;
constexpr int kTop = 36;
constexpr int kBottom = 50;

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-300) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5g", v);
    return buf;
}

// About five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

struct Frame {
    int width;
    int height;
    Range x;
    Range y;
    double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (width - kLeft - kRight); }
    double py(double v) const { return height - kBottom - (v - y.lo) / (y.hi - y.lo) * (height - kTop - kBottom); }
};

void open_doc(std::ostringstream& os, int w, int h, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl) {
    const int x0 = kLeft;
    const int x1 = f.width - kRight;
    const int y0 = f.height - kBottom;
    const int y1 = kTop;
    os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(f.x.lo, f.x.hi)) {
        const double p = f.px(t);
        os << "<line x1=\"" << p << "\" y1=\"" << y0 << "\" x2=\"" << p << "\" y2=\"" << y0 + 5 << "\" stroke=\"black\"/>"
           << "<text x=\"" << p << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t : ticks(f.y.lo, f.y.hi)) {
        const double p = f.py(t);
        os << "<line x1=\"" << x0 - 5 << "\" y1=\"" << p << "\" x2=\"" << x0 << "\" y2=\"" << p << "\" stroke=\"black\"/>"
           << "<text x=\"" << x0 - 8 << "\" y=\"" << p + 4 << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\">" << esc(xl)
       << "</text>\n";
    os << "<text transform=\"translate(16," << (y0 + y1) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << esc(yl)
       << "</text>\n";
}

void draw_series(std::ostringstream& os, const Frame& f, const Series& s) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
        for (std::size_t k = 0; k < n; ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
                os << "<circle cx=\"" << f.px(s.x[k]) << "\" cy=\"" << f.py(s.y[k]) << "\" r=\"3\" fill=\"" << s.color
                   << "\"/>\n";
        return;
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < n; ++k)
        if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) os << f.px(s.x[k]) << ',' << f.py(s.y[k]) << ' ';
    os << "\"/>\n";
}

void legend(std::ostringstream& os, const Frame& f, const std::vector<Series>& series) {
    int y = kTop + 16;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        os << "<rect x=\"" << f.width - kRight - 190 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
           << s.color << "\"/><text x=\"" << f.width - kRight - 175 << "\" y=\"" << y << "\">" << esc(s.label)
           << "</text>\n";
        y += 16;
    }
}

// Perceptually ordered dark-blue to yellow ramp.
std::string colour(double u) {
    static constexpr std::array<std::array<double, 3>, 5> anchors{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                                  {94, 201, 98}, {253, 231, 37}}};
    u = std::clamp(u, 0.0, 1.0) * (anchors.size() - 1);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(u), anchors.size() - 2);
    const double w = u - static_cast<double>(k);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(anchors[k][c] * (1 - w) + anchors[k + 1][c] * w));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

// Cell edges halfway between axis points.
std::vector<double> edges(const std::vector<double>& axis) {
    std::vector<double> e(axis.size() + 1);
    if (axis.size() == 1) return {axis[0] - 0.5, axis[0] + 0.5};
    for (std::size_t k = 1; k < axis.size(); ++k) e[k] = 0.5 * (axis[k - 1] + axis[k]);
    e.front() = axis.front() - (e[1] - axis.front());
    e.back() = axis.back() + (axis.back() - e[axis.size() - 1]);
    return e;
}

}  // namespace

std::string render_line_plot(const LinePlot& p, int width, int height) {
    Frame f{width, height, {}, {}};
    for (const auto& s : p.series) {
        for (double v : s.x) f.x.add(v);
        for (double v : s.y) f.y.add(v);
    }
    f.x.finish();
    f.y.finish();
    const double pad = 0.05 * (f.y.hi - f.y.lo);
    f.y.lo -= pad;
    f.y.hi += pad;
    std::ostringstream os;
    open_doc(os, width, height, p.title);
    axes(os, f, p.x_label, p.y_label);
    for (const auto& s : p.series) draw_series(os, f, s);
    legend(os, f, p.series);
    os << "</svg>\n";
    return os.str();
}

std::string render_heatmap(const Heatmap& h, int width, int height) {
    if (h.x_axis.empty() || h.y_axis.empty() || h.values.size() != h.x_axis.size() * h.y_axis.size())
        throw ValidationError("heatmap: values do not match the axes");
    const auto xe = edges(h.x_axis);
    const auto ye = edges(h.y_axis);
    Frame f{width, height, {}, {}};
    f.x.add(std::min(xe.front(), xe.back()));
    f.x.add(std::max(xe.front(), xe.back()));
    f.y.add(std::min(ye.front(), ye.back()));
    f.y.add(std::max(ye.front(), ye.back()));
    f.x.finish();
    f.y.finish();
    Range v;
    for (double z : h.values) v.add(z);
    v.finish();

    std::ostringstream os;
    open_doc(os, width, height, h.title);
    os << "<g shape-rendering=\"crispEdges\">\n";
    const std::size_t nx = h.x_axis.size();
    for (std::size_t iy = 0; iy < h.y_axis.size(); ++iy) {
        const double y_top = f.py(std::max(ye[iy], ye[iy + 1]));
        const double y_bot = f.py(std::min(ye[iy], ye[iy + 1]));
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x_l = f.px(std::min(xe[ix], xe[ix + 1]));
            const double x_r = f.px(std::max(xe[ix], xe[ix + 1]));
            const double z = h.values[iy * nx + ix];
            os << "<rect x=\"" << num(x_l) << "\" y=\"" << num(y_top) << "\" width=\"" << num(x_r - x_l + 0.3)
               << "\" height=\"" << num(y_bot - y_top + 0.3) << "\" fill=\""
               << (std::isfinite(z) ? colour((z - v.lo) / (v.hi - v.lo)) : "#808080") << "\"/>\n";
        }
    }
    os << "</g>\n";
    axes(os, f, h.x_label, h.y_label);
    for (const auto& s : h.overlays) draw_series(os, f, s);
    legend(os, f, h.overlays);
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dopplerline::svg
