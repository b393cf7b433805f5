#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace apklab {

struct ApkEntry {
    std::string name;
    std::uint16_t method = 0;  // 0 stored, 8 deflate
    std::uint32_t crc32 = 0;
    std::uint32_t compressed_size = 0;
    std::uint32_t uncompressed_size = 0;
    std::uint32_t local_header_offset = 0;
};

// Minimal ZIP reader: central-directory driven, stored/deflate methods,
// CRC verified on every read.
class ApkArchive {
public:
    explicit ApkArchive(std::string bytes);  // throws ParseError

    const std::vector<ApkEntry>& entries() const { return entries_; }
    const ApkEntry* find(std::string_view name) const;
    std::string read(const ApkEntry& entry) const;  // throws ParseError on CRC mismatch

private:
    std::string bytes_;
    std::vector<ApkEntry> entries_;
};

struct ManifestInfo {
    std::string package;
    std::vector<std::string> permissions;
    std::vector<std::string> services;
    std::vector<std::string> receivers;
    std::vector<std::string> activities;

    bool operator==(const ManifestInfo&) const = default;
};

// Accepts plain-text XML or Android binary XML (chunk magic 0x00080003);
// both forms of one document decode to the same ManifestInfo.
ManifestInfo decode_manifest(const std::string& bytes);

bool looks_like_binary_xml(const std::string& bytes);
ManifestInfo decode_binary_manifest(const std::string& bytes);
ManifestInfo decode_plain_manifest(const std::string& bytes);

struct UrlFinding {
    std::string entry;
    std::string url;
    bool operator==(const UrlFinding&) const = default;
};

// Printable-ASCII runs (length ≥ min_run) scanned for http/https URLs;
// deduplicated per (entry, url), ordered by entry then first occurrence.
std::vector<UrlFinding> extract_urls(const ApkArchive& apk, std::size_t min_run = 6);
std::vector<std::string> urls_in_text(std::string_view text);

struct FiletypeReport {
    std::string entry;
    std::string detected;  // magic-byte verdict, "unknown" when no magic matches
    std::string implied;   // extension verdict, "unknown" without a known suffix
    bool mismatch = false; // both known and different
};

std::vector<FiletypeReport> identify_filetypes(const ApkArchive& apk);
std::string detect_filetype(std::string_view bytes);
std::string implied_filetype(std::string_view name);

}  // namespace apklab
