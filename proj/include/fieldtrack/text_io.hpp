#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fieldtrack::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Strict numeric parsing: the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
/// As above, throwing DataError("<what>: ...") on failure.
double require_double(std::string_view s, std::string_view what);
int require_int(std::string_view s, std::string_view what);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial content.
void write_file(const std::filesystem::path& path, std::string_view content);
void write_binary(const std::filesystem::path& path, const std::vector<std::uint8_t>& content);

}  // namespace fieldtrack::text
