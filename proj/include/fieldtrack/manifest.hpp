#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "json.hpp"

namespace fieldtrack {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

/// Reproduction record written next to command outputs. Holds no timestamps or absolute
/// paths, so reruns on equal inputs produce equal bytes.
struct Manifest {
    std::string command;
    std::map<std::string, std::string> inputs;   // label -> sha256
    std::map<std::string, std::string> outputs;  // relative path -> sha256
    nlohmann::json parameters;
    std::map<std::string, std::uint64_t> seeds;

    nlohmann::json to_json() const;
    void write(const std::filesystem::path& path) const;
};

std::string tool_version();

}  // namespace fieldtrack
