#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace apklab {

struct SampleMeta {
    std::string filename;
    std::uint64_t size = 0;
    std::string md5;
    std::string sha1;
    std::string sha256;
    std::string received_at;  // ISO 8601 UTC
};

SampleMeta make_sample_meta(std::string_view bytes, const std::string& filename);

}  // namespace apklab
