#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace owlaudit::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target, so a
// failed write never leaves a partial artifact behind.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// Pretty JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

// 64-bit FNV-1a, rendered as 16 hex digits. Used for config/template hashes.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

// UTC timestamp "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_timestamp();

// Reads a config file as JSON: *.json is parsed directly, *.toml through a
// small TOML reader (tables, dotted keys, strings, numbers, booleans, arrays of
// scalars).
nlohmann::json read_config(const std::filesystem::path& path);
nlohmann::json parse_toml(std::string_view text);

}  // namespace owlaudit::io
