#include "apklab/staticapk.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <zlib.h>

#include "apklab/errors.hpp"
#include "apklab/hashing.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

std::uint16_t le16(const std::string& b, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[off]) |
                                      (static_cast<std::uint8_t>(b[off + 1]) << 8));
}
std::uint32_t le32(const std::string& b, std::size_t off) {
    return static_cast<std::uint32_t>(le16(b, off)) |
           (static_cast<std::uint32_t>(le16(b, off + 2)) << 16);
}

constexpr std::uint32_t kEocdSig = 0x06054b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kLocalSig = 0x04034b50;

std::string inflate_raw(const std::string& data, std::size_t expected) {
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error("zlib init failure");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw ParseError("zip: deflate stream corrupt");
    out.resize(out.size() - zs.avail_out);
    return out;
}

}  // namespace

ApkArchive::ApkArchive(std::string bytes) : bytes_(std::move(bytes)) {
    if (bytes_.size() < 22) throw ParseError("zip: too small for an end-of-central-directory record");
    // EOCD sits in the last 64KB + 22 bytes (variable comment length).
    std::size_t scan_floor = bytes_.size() > 65557 ? bytes_.size() - 65557 : 0;
    std::size_t eocd = std::string::npos;
    for (std::size_t i = bytes_.size() - 22; i + 1 > scan_floor; --i) {
        if (le32(bytes_, i) == kEocdSig) {
            eocd = i;
            break;
        }
        if (i == 0) break;
    }
    if (eocd == std::string::npos) throw ParseError("zip: missing end-of-central-directory record");

    std::uint16_t count = le16(bytes_, eocd + 10);
    std::uint32_t cd_size = le32(bytes_, eocd + 12);
    std::uint32_t cd_off = le32(bytes_, eocd + 16);
    if (static_cast<std::size_t>(cd_off) + cd_size > bytes_.size()) {
        throw ParseError("zip: central directory out of range");
    }

    std::size_t pos = cd_off;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (pos + 46 > bytes_.size() || le32(bytes_, pos) != kCentralSig) {
            throw ParseError("zip: truncated central directory");
        }
        ApkEntry e;
        e.method = le16(bytes_, pos + 10);
        e.crc32 = le32(bytes_, pos + 16);
        e.compressed_size = le32(bytes_, pos + 20);
        e.uncompressed_size = le32(bytes_, pos + 24);
        std::uint16_t name_len = le16(bytes_, pos + 28);
        std::uint16_t extra_len = le16(bytes_, pos + 30);
        std::uint16_t comment_len = le16(bytes_, pos + 32);
        e.local_header_offset = le32(bytes_, pos + 42);
        if (pos + 46 + name_len > bytes_.size()) throw ParseError("zip: truncated entry name");
        e.name = bytes_.substr(pos + 46, name_len);
        if (e.method != 0 && e.method != 8) {
            throw ParseError("zip: unsupported compression method " + std::to_string(e.method) +
                             " for " + e.name);
        }
        entries_.push_back(std::move(e));
        pos += 46u + name_len + extra_len + comment_len;
    }
}

const ApkEntry* ApkArchive::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

std::string ApkArchive::read(const ApkEntry& entry) const {
    std::size_t pos = entry.local_header_offset;
    if (pos + 30 > bytes_.size() || le32(bytes_, pos) != kLocalSig) {
        throw ParseError("zip: bad local header for " + entry.name);
    }
    std::uint16_t name_len = le16(bytes_, pos + 26);
    std::uint16_t extra_len = le16(bytes_, pos + 28);
    std::size_t data = pos + 30 + name_len + extra_len;
    if (data + entry.compressed_size > bytes_.size()) {
        throw ParseError("zip: entry data out of range for " + entry.name);
    }
    std::string raw = bytes_.substr(data, entry.compressed_size);
    std::string content =
        entry.method == 0 ? raw : inflate_raw(raw, entry.uncompressed_size);
    if (content.size() != entry.uncompressed_size || crc32_of(content) != entry.crc32) {
        throw ParseError("zip: CRC mismatch for " + entry.name);
    }
    return content;
}

std::vector<std::string> urls_in_text(std::string_view text) {
    static const std::string_view allowed_path =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
        "-._~!$&'()*+,;=:@/?%#";
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t hit = text.find("http", pos);
        if (hit == std::string_view::npos) break;
        std::size_t scheme_end = hit + 4;
        if (scheme_end < text.size() && text[scheme_end] == 's') ++scheme_end;
        if (text.substr(scheme_end, 3) != "://") {
            pos = hit + 4;
            continue;
        }
        std::size_t host_start = scheme_end + 3;
        std::size_t i = host_start;
        auto host_char = [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
        };
        while (i < text.size() && host_char(text[i])) ++i;
        if (i == host_start) {
            pos = host_start;
            continue;
        }
        if (i < text.size() && text[i] == ':') {
            std::size_t p = i + 1;
            while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
            if (p > i + 1) i = p;
        }
        if (i < text.size() && text[i] == '/') {
            while (i < text.size() && allowed_path.find(text[i]) != std::string_view::npos) ++i;
        }
        out.emplace_back(text.substr(hit, i - hit));
        pos = i;
    }
    return out;
}

std::vector<UrlFinding> extract_urls(const ApkArchive& apk, std::size_t min_run) {
    std::vector<UrlFinding> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& entry : apk.entries()) {
        std::string content;
        try {
            content = apk.read(entry);
        } catch (const ParseError&) {
            continue;  // unreadable entries contribute no strings
        }
        for (const std::string& run : printable_runs(content, min_run)) {
            for (const std::string& url : urls_in_text(run)) {
                if (seen.insert({entry.name, url}).second) {
                    out.push_back({entry.name, url});
                }
            }
        }
    }
    return out;
}

std::string detect_filetype(std::string_view bytes) {
    auto starts = [&](std::string_view magic) {
        return bytes.size() >= magic.size() && bytes.substr(0, magic.size()) == magic;
    };
    if (starts("\x7f" "ELF")) return "elf";
    if (starts("\x89PNG")) return "png";
    if (starts("\xff\xd8\xff")) return "jpeg";
    if (starts("PK\x03\x04")) return "zip";
    if (starts("dex\n")) return "dex";
    if (starts("%PDF")) return "pdf";
    return "unknown";
}

std::string implied_filetype(std::string_view name) {
    std::size_t dot = name.rfind('.');
    if (dot == std::string_view::npos) return "unknown";
    std::string ext = to_lower(name.substr(dot + 1));
    if (ext == "png") return "png";
    if (ext == "jpg" || ext == "jpeg") return "jpeg";
    if (ext == "zip" || ext == "apk" || ext == "jar") return "zip";
    if (ext == "dex") return "dex";
    if (ext == "pdf") return "pdf";
    if (ext == "so" || ext == "elf") return "elf";
    return "unknown";
}

std::vector<FiletypeReport> identify_filetypes(const ApkArchive& apk) {
    std::vector<FiletypeReport> out;
    for (const auto& entry : apk.entries()) {
        std::string content;
        try {
            content = apk.read(entry);
        } catch (const ParseError&) {
            continue;
        }
        FiletypeReport r;
        r.entry = entry.name;
        r.detected = detect_filetype(content);
        r.implied = implied_filetype(entry.name);
        r.mismatch = r.detected != "unknown" && r.implied != "unknown" && r.detected != r.implied;
        out.push_back(std::move(r));
    }
    return out;
}

ManifestInfo decode_manifest(const std::string& bytes) {
    if (looks_like_binary_xml(bytes)) return decode_binary_manifest(bytes);
    return decode_plain_manifest(bytes);
}

}  // namespace apklab
