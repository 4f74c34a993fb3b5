#pragma once

#include <span>
#include <string_view>

namespace genperf::detail {

struct EmbeddedFile {
    std::string_view name;
    std::string_view text;
};

// Generated at build time from presets/*.json and presets/default_rules.csv.
std::span<const EmbeddedFile> embedded_presets();
std::string_view embedded_default_rules();

}  // namespace genperf::detail
