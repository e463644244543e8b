#pragma once

// Scenario config files: JSON with // comments, quantities as unit strings ("40ns", "1.62mA").

#include "dopplerline/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace dopplerline {

/// Parses a scenario. Missing keys keep the defaults of Scenario. Throws ValidationError.
Scenario scenario_from_json(const std::string& text);
/// Pretty-printed JSON that scenario_from_json maps back to the same scenario.
std::string scenario_to_json(const Scenario& s);

/// Reads a config file. Throws IoError when unreadable, ValidationError when malformed.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// FNV-1a of the canonical JSON with output_dir, jobs and write_files removed.
std::uint64_t config_hash(const Scenario& s);
std::string hash_hex(std::uint64_t h);

}  // namespace dopplerline
