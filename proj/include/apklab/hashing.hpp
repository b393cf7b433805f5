#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace apklab {

// Lowercase hex digests over a byte buffer.
std::string md5_hex(std::string_view bytes);
std::string sha1_hex(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

std::uint32_t crc32_of(std::string_view bytes);

}  // namespace apklab
