#include <algorithm>
#include <cctype>
#include <map>

#include "apklab/errors.hpp"
#include "apklab/staticapk.hpp"
#include "apklab/textutil.hpp"

// Android binary XML decoding: string-pool chunk plus start-element chunks,
// which is everything a manifest needs. Chunk layout follows the platform's
// ResChunk_header conventions.

namespace apklab {
namespace {

constexpr std::uint16_t kChunkXml = 0x0003;
constexpr std::uint16_t kChunkStringPool = 0x0001;
constexpr std::uint16_t kChunkStartElement = 0x0102;

std::uint16_t le16(const std::string& b, std::size_t off) {
    if (off + 2 > b.size()) throw ParseError("axml: truncated");
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[off]) |
                                      (static_cast<std::uint8_t>(b[off + 1]) << 8));
}
std::uint32_t le32(const std::string& b, std::size_t off) {
    return static_cast<std::uint32_t>(le16(b, off)) |
           (static_cast<std::uint32_t>(le16(b, off + 2)) << 16);
}

std::string utf8_from_utf16le(const std::string& b, std::size_t off, std::size_t chars) {
    std::string out;
    for (std::size_t i = 0; i < chars; ++i) {
        std::uint16_t cu = le16(b, off + i * 2);
        if (cu < 0x80) {
            out.push_back(static_cast<char>(cu));
        } else if (cu < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cu >> 6)));
            out.push_back(static_cast<char>(0x80 | (cu & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xe0 | (cu >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cu >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cu & 0x3f)));
        }
    }
    return out;
}

std::vector<std::string> read_string_pool(const std::string& b, std::size_t chunk,
                                          std::size_t chunk_size) {
    std::uint32_t count = le32(b, chunk + 8);
    std::uint32_t flags = le32(b, chunk + 16);
    std::uint32_t strings_start = le32(b, chunk + 20);
    bool utf8 = (flags & 0x100) != 0;

    std::vector<std::string> pool;
    pool.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t rel = le32(b, chunk + 28 + i * 4);
        std::size_t s = chunk + strings_start + rel;
        if (s >= chunk + chunk_size) throw ParseError("axml: string offset out of pool");
        if (utf8) {
            // UTF-8 pool: u8 utf16-length, u8 byte-length (each with a
            // high-bit extension we don't need for manifest-sized strings).
            std::size_t p = s;
            std::uint8_t u16len = static_cast<std::uint8_t>(b.at(p++));
            if (u16len & 0x80) ++p;
            std::uint8_t bytelen = static_cast<std::uint8_t>(b.at(p++));
            if (bytelen & 0x80) {
                bytelen = static_cast<std::uint8_t>(((bytelen & 0x7f) << 8) |
                                                    static_cast<std::uint8_t>(b.at(p)));
                ++p;
            }
            if (p + bytelen > b.size()) throw ParseError("axml: string runs past pool");
            pool.push_back(b.substr(p, bytelen));
        } else {
            std::uint16_t chars = le16(b, s);
            if (chars & 0x8000) {
                std::uint32_t high = chars & 0x7fff;
                chars = le16(b, s + 2);
                s += 2;
                (void)high;  // manifest strings never need the long form
            }
            pool.push_back(utf8_from_utf16le(b, s + 2, chars));
        }
    }
    return pool;
}

void push_unique(std::vector<std::string>& list, const std::string& value) {
    if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
}

void apply_element(ManifestInfo& info, const std::string& element,
                   const std::map<std::string, std::string>& attrs) {
    auto attr = [&](const char* name) -> const std::string* {
        auto it = attrs.find(name);
        return it == attrs.end() ? nullptr : &it->second;
    };
    if (element == "manifest") {
        if (const std::string* p = attr("package")) info.package = *p;
    } else if (element == "uses-permission") {
        if (const std::string* p = attr("name")) push_unique(info.permissions, *p);
    } else if (element == "service") {
        if (const std::string* p = attr("name")) push_unique(info.services, *p);
    } else if (element == "receiver") {
        if (const std::string* p = attr("name")) push_unique(info.receivers, *p);
    } else if (element == "activity") {
        if (const std::string* p = attr("name")) push_unique(info.activities, *p);
    }
}

std::string xml_unescape(const std::string& s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '&') {
            if (s.compare(i, 5, "&amp;") == 0) { out += '&'; i += 5; continue; }
            if (s.compare(i, 4, "&lt;") == 0) { out += '<'; i += 4; continue; }
            if (s.compare(i, 4, "&gt;") == 0) { out += '>'; i += 4; continue; }
            if (s.compare(i, 6, "&quot;") == 0) { out += '"'; i += 6; continue; }
            if (s.compare(i, 6, "&apos;") == 0) { out += '\''; i += 6; continue; }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

// Attribute names are matched by local part, so android:name counts as name.
std::string local_name(const std::string& qualified) {
    std::size_t colon = qualified.rfind(':');
    return colon == std::string::npos ? qualified : qualified.substr(colon + 1);
}

}  // namespace

bool looks_like_binary_xml(const std::string& bytes) {
    return bytes.size() >= 8 && le16(bytes, 0) == kChunkXml && le16(bytes, 2) == 0x0008;
}

ManifestInfo decode_binary_manifest(const std::string& b) {
    if (!looks_like_binary_xml(b)) throw ParseError("axml: bad chunk magic");
    std::uint32_t doc_size = le32(b, 4);
    if (doc_size > b.size()) throw ParseError("axml: declared size exceeds data");

    std::vector<std::string> pool;
    ManifestInfo info;
    auto pooled = [&](std::uint32_t idx) -> std::string {
        if (idx == 0xffffffff) return "";
        if (idx >= pool.size()) throw ParseError("axml: string index out of range");
        return pool[idx];
    };

    std::size_t off = 8;
    while (off + 8 <= doc_size) {
        std::uint16_t type = le16(b, off);
        std::uint16_t header_size = le16(b, off + 2);
        std::uint32_t size = le32(b, off + 4);
        if (size < 8 || off + size > doc_size) throw ParseError("axml: chunk size out of range");

        if (type == kChunkStringPool) {
            pool = read_string_pool(b, off, size);
        } else if (type == kChunkStartElement) {
            std::size_t body = off + header_size;
            std::string element = pooled(le32(b, body + 4));
            std::uint16_t attr_start = le16(b, body + 8);
            std::uint16_t attr_size = le16(b, body + 10);
            std::uint16_t attr_count = le16(b, body + 12);
            std::map<std::string, std::string> attrs;
            for (std::uint16_t i = 0; i < attr_count; ++i) {
                std::size_t a = body + attr_start + static_cast<std::size_t>(i) * attr_size;
                std::string name = pooled(le32(b, a + 4));
                std::uint32_t raw = le32(b, a + 8);
                std::string value;
                if (raw != 0xffffffff) {
                    value = pooled(raw);
                } else {
                    value = std::to_string(le32(b, a + 16));  // typed data fallback
                }
                attrs[local_name(name)] = value;
            }
            apply_element(info, element, attrs);
        }
        off += size;
    }
    return info;
}

ManifestInfo decode_plain_manifest(const std::string& text) {
    ManifestInfo info;
    std::size_t i = 0;
    bool any_element = false;
    while (i < text.size()) {
        std::size_t open = text.find('<', i);
        if (open == std::string::npos) break;
        if (text.compare(open, 4, "<!--") == 0) {
            std::size_t end = text.find("-->", open);
            if (end == std::string::npos) throw ParseError("xml: unterminated comment");
            i = end + 3;
            continue;
        }
        std::size_t close = text.find('>', open);
        if (close == std::string::npos) throw ParseError("xml: unterminated tag");
        std::string tag = text.substr(open + 1, close - open - 1);
        i = close + 1;
        if (tag.empty() || tag[0] == '?' || tag[0] == '/' || tag[0] == '!') continue;
        if (!tag.empty() && tag.back() == '/') tag.pop_back();

        std::size_t p = 0;
        while (p < tag.size() && !std::isspace(static_cast<unsigned char>(tag[p]))) ++p;
        std::string element = tag.substr(0, p);
        any_element = true;

        std::map<std::string, std::string> attrs;
        while (p < tag.size()) {
            while (p < tag.size() && std::isspace(static_cast<unsigned char>(tag[p]))) ++p;
            std::size_t eq = tag.find('=', p);
            if (eq == std::string::npos) break;
            std::string name = trim(tag.substr(p, eq - p));
            std::size_t q1 = tag.find_first_of("\"'", eq + 1);
            if (q1 == std::string::npos) throw ParseError("xml: attribute value not quoted");
            char quote = tag[q1];
            std::size_t q2 = tag.find(quote, q1 + 1);
            if (q2 == std::string::npos) throw ParseError("xml: unterminated attribute value");
            attrs[local_name(name)] = xml_unescape(tag.substr(q1 + 1, q2 - q1 - 1));
            p = q2 + 1;
        }
        apply_element(info, element, attrs);
    }
    if (!any_element) throw ParseError("xml: no elements found");
    return info;
}

}  // namespace apklab
