#pragma once

// Built-in property checks with injectable estimators, so a tampered estimator is caught.

#include "dopplerline/core.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dopplerline {

struct SelftestHooks {
    /// -d phi / dt estimator, defaults to instantaneous_shift.
    std::function<Waveform(const Waveform& phase, int smoothing)> instantaneous;
    /// Phase-slope estimator, defaults to phase_slope_shift.
    std::function<double(const Waveform& phase, double t_lo, double t_hi)> phase_slope;
};

struct SelftestOptions {
    /// Overrides of default_tolerances(), by property name.
    std::map<std::string, double> tolerances;
    SelftestHooks hooks;
};

struct PropertyResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

std::map<std::string, double> default_tolerances();
/// Throws ValidationError for a tolerance name that is not a property.
std::vector<PropertyResult> run_selftest(const SelftestOptions& opts = {});
std::string format_selftest(const std::vector<PropertyResult>& results);

}  // namespace dopplerline
