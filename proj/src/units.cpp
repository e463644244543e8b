#include "dopplerline/units.hpp"

#include "dopplerline/errors.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <utility>

namespace dopplerline::units {

namespace {

std::string_view base_symbol(Dimension dim) {
    switch (dim) {
        case Dimension::Time: return "s";
        case Dimension::Current: return "A";
        case Dimension::Frequency: return "Hz";
        case Dimension::Length: return "m";
        case Dimension::Resistance: return "ohm";
        case Dimension::Voltage: return "V";
        case Dimension::Dimensionless: return "";
    }
    return "";
}

double prefix_scale(std::string_view prefix) {
    static constexpr std::array<std::pair<std::string_view, double>, 9> table{{
        {"", 1.0},
        {"p", 1e-12},
        {"n", 1e-9},
        {"u", 1e-6},
        {"µ", 1e-6},
        {"m", 1e-3},
        {"k", 1e3},
        {"M", 1e6},
        {"G", 1e9},
    }};
    for (const auto& [p, s] : table) {
        if (p == prefix) return s;
    }
    return std::nan("");
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw ValidationError("empty quantity");

    char* end = nullptr;
    const double number = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ValidationError("not a number: '" + s + "'");
    std::string suffix(end);
    while (!suffix.empty() && suffix.front() == ' ') suffix.erase(suffix.begin());
    if (suffix.empty()) return number;

    // Accept the Ω sign as an alias for "ohm".
    const std::string omega = "Ω";
    if (auto pos = suffix.find(omega); pos != std::string::npos) suffix.replace(pos, omega.size(), "ohm");

    const std::string_view base = base_symbol(dim);
    if (base.empty() || suffix.size() < base.size() ||
        std::string_view(suffix).substr(suffix.size() - base.size()) != base) {
        throw ValidationError("unit suffix '" + suffix + "' does not match expected unit '" + std::string(base) +
                              "' in '" + s + "'");
    }
    const double scale = prefix_scale(std::string_view(suffix).substr(0, suffix.size() - base.size()));
    if (std::isnan(scale)) throw ValidationError("unknown unit prefix in '" + s + "'");
    return number * scale;
}

std::string format_quantity(double value, Dimension dim) {
    static constexpr std::array<std::pair<const char*, double>, 7> prefixes{{
        {"G", 1e9}, {"M", 1e6}, {"k", 1e3}, {"", 1.0}, {"m", 1e-3}, {"u", 1e-6}, {"n", 1e-9}}};
    const std::string_view base = base_symbol(dim);
    std::ostringstream os;
    os.precision(12);
    if (value == 0.0 || base.empty()) {
        os << value << base;
        return os.str();
    }
    const double mag = std::abs(value);
    for (const auto& [p, scale] : prefixes) {
        if (mag >= scale * 0.9999999999) {
            os << value / scale << p << base;
            return os.str();
        }
    }
    if (dim == Dimension::Time && mag >= 1e-12 * 0.9999999999) {
        os << value / 1e-12 << "p" << base;
        return os.str();
    }
    os << value << base;
    return os.str();
}

}  // namespace dopplerline::units
