#pragma once

#include <string>
#include <string_view>

namespace dopplerline::units {

/// Physical dimension expected by a parsed quantity.
enum class Dimension { Time, Current, Frequency, Length, Resistance, Voltage, Dimensionless };

/// Parses "40ns", "1.62mA", "4GHz", "50ohm", "0.24m" or a bare number (taken as SI).
/// Throws ValidationError on an unknown or mismatched suffix.
double parse_quantity(std::string_view text, Dimension dim);

/// Formats an SI value with an engineering prefix, e.g. format_quantity(1.62e-3, Current) == "1.62mA".
std::string format_quantity(double value, Dimension dim);

inline constexpr double ns = 1e-9;
inline constexpr double ps = 1e-12;
inline constexpr double mA = 1e-3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;

}  // namespace dopplerline::units
