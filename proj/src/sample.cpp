#include "apklab/sample.hpp"

#include "apklab/hashing.hpp"
#include "apklab/textutil.hpp"

namespace apklab {

SampleMeta make_sample_meta(std::string_view bytes, const std::string& filename) {
    SampleMeta meta;
    meta.filename = filename;
    meta.size = bytes.size();
    meta.md5 = md5_hex(bytes);
    meta.sha1 = sha1_hex(bytes);
    meta.sha256 = sha256_hex(bytes);
    meta.received_at = iso8601_now_utc();
    return meta;
}

}  // namespace apklab
