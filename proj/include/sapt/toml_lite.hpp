#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace sapt::toml {

/// Reads the TOML subset used by experiment configs: tables ([a.b]),
/// dotted/quoted keys, strings, integers, floats, booleans, multi-line
/// arrays and inline tables. Arrays of tables and dates are rejected.
/// Throws ParseError with the offending line.
nlohmann::json parse(std::string_view text);
nlohmann::json parse_file(const std::filesystem::path& path);

/// Parse a single TOML value (used for "key=value" command-line overrides).
nlohmann::json parse_value(std::string_view text);

}  // namespace sapt::toml
