#include "fieldtrack/manifest.hpp"

#include <openssl/evp.h>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

#ifndef FIELDTRACK_VERSION
#define FIELDTRACK_VERSION "0.0.0"
#endif

namespace fieldtrack {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw DataError("sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(text::read_binary(path)); }

std::string tool_version() { return FIELDTRACK_VERSION; }

nlohmann::json Manifest::to_json() const {
    return {{"tool", "fieldtrack"},
            {"tool_version", tool_version()},
            {"command", command},
            {"inputs", inputs},
            {"outputs", outputs},
            {"parameters", parameters},
            {"parameter_digest", sha256_hex(parameters.dump())},
            {"seeds", seeds}};
}

void Manifest::write(const std::filesystem::path& path) const { text::write_file(path, to_json().dump(2) + "\n"); }

}  // namespace fieldtrack
