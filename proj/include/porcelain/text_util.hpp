#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace porcelain::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// 64-bit FNV-1a; stable across platforms, used for fingerprints and run ids.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Shortest-round-trip formatting for reals written to text artifacts.
std::string format_real(double v);
double parse_real(std::string_view s);
std::int64_t parse_int(std::string_view s);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename so readers never see partial files.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace porcelain::text
