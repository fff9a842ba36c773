#pragma once

#include <filesystem>
#include <string>

#include "smal/simulator.hpp"

namespace smal::cli {

/// Reads a whole file; throws ValidationError naming the path when missing.
std::string read_file(const std::filesystem::path& file);

/// Strict config parser: the JSON document mirrors SimConfig field for field,
/// angles in degrees. Unknown keys are errors (they are typos in a scientific
/// config until proven otherwise).
sim::SimConfig parse_config(const std::string& text);

sim::SimConfig load_config(const std::filesystem::path& file);

}  // namespace smal::cli
