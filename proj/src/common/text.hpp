#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vultriage::text {

// Collapses every whitespace run to one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

std::string trim(std::string_view s);

std::string to_lower(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// 64-bit FNV-1a. Stable across platforms; used for prompt hashes and fingerprints.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

// Replaces <key> placeholders in one pass; substituted text is never rescanned.
// Unknown placeholders are left untouched.
std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string, std::string>>& values);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace vultriage::text
