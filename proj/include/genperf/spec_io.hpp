#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "genperf/archspec.hpp"

namespace genperf {

/// Schema version written to and required in every spec and hardware document.
inline constexpr int kSpecVersion = 1;

/// Parses and validates a model spec document (JSON, `spec_version: 1`).
/// Unknown keys are rejected so that typos surface as errors.
ModelSpec parse_spec(std::string_view text);
ModelSpec load_spec(const std::filesystem::path& path);

/// Serializes a spec; parse_spec(write_spec(s)) == s for every valid s.
std::string write_spec(const ModelSpec& spec);

HardwareSpec parse_hardware(std::string_view text);
HardwareSpec load_hardware(const std::filesystem::path& path);
std::string write_hardware(const HardwareSpec& hw);

/// Names of the built-in presets.
std::vector<std::string> preset_names();

/// Spec document text for a preset. `GENPERF_PRESET_DIR/<name>.json` takes precedence
/// over the embedded copy when the variable is set and the file exists.
std::string preset_source(std::string_view name);

/// Loads a preset by name; throws ValidationError for unknown names.
ModelSpec preset(std::string_view name);

/// Resolves "preset:<name>" or a filesystem path.
ModelSpec resolve_spec(std::string_view ref);

/// Resolves "default", "preset:a100" or a hardware file path.
HardwareSpec resolve_hardware(std::string_view ref);

std::string read_file(const std::filesystem::path& path);

}  // namespace genperf
