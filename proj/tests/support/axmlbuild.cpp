#include "axmlbuild.hpp"

#include <cstdint>
#include <map>

namespace testsupport {
namespace {

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xffff));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

// UTF-16 pool entry: u16 char count, UTF-16LE units, u16 terminator.
// Manifest strings are ASCII, so one byte maps to one code unit.
void put_pool_string(std::string& out, const std::string& s) {
    put16(out, static_cast<std::uint16_t>(s.size()));
    for (char c : s) put16(out, static_cast<std::uint16_t>(static_cast<unsigned char>(c)));
    put16(out, 0);
}

}  // namespace

std::string build_axml(const std::vector<AxmlElement>& elements) {
    std::vector<std::string> pool;
    std::map<std::string, std::uint32_t> index;
    auto intern = [&](const std::string& s) {
        auto it = index.find(s);
        if (it != index.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(pool.size());
        pool.push_back(s);
        index.emplace(s, id);
        return id;
    };
    for (const auto& el : elements) {
        intern(el.name);
        for (const auto& [k, v] : el.attrs) {
            intern(k);
            intern(v);
        }
    }

    // String pool chunk: 28-byte header, offset table, packed strings.
    std::string strings;
    std::vector<std::uint32_t> offsets;
    for (const auto& s : pool) {
        offsets.push_back(static_cast<std::uint32_t>(strings.size()));
        put_pool_string(strings, s);
    }
    if (strings.size() % 4) strings.resize(strings.size() + (4 - strings.size() % 4), '\0');

    std::string sp;
    std::uint32_t strings_start = 28 + static_cast<std::uint32_t>(pool.size()) * 4;
    std::uint32_t sp_size = strings_start + static_cast<std::uint32_t>(strings.size());
    put16(sp, 0x0001);                 // RES_STRING_POOL_TYPE
    put16(sp, 28);                     // header size
    put32(sp, sp_size);
    put32(sp, static_cast<std::uint32_t>(pool.size()));
    put32(sp, 0);                      // style count
    put32(sp, 0);                      // flags: UTF-16
    put32(sp, strings_start);
    put32(sp, 0);                      // styles start
    for (std::uint32_t off : offsets) put32(sp, off);
    sp += strings;

    std::string body;
    for (const auto& el : elements) {
        std::string chunk;
        std::uint32_t size = 16 + 20 + static_cast<std::uint32_t>(el.attrs.size()) * 20;
        put16(chunk, 0x0102);          // RES_XML_START_ELEMENT_TYPE
        put16(chunk, 16);              // header size
        put32(chunk, size);
        put32(chunk, 0);               // line number
        put32(chunk, 0xffffffff);      // comment
        put32(chunk, 0xffffffff);      // namespace
        put32(chunk, intern(el.name));
        put16(chunk, 20);              // attribute start
        put16(chunk, 20);              // attribute size
        put16(chunk, static_cast<std::uint16_t>(el.attrs.size()));
        put16(chunk, 0);               // id index
        put16(chunk, 0);               // class index
        put16(chunk, 0);               // style index
        for (const auto& [k, v] : el.attrs) {
            put32(chunk, 0xffffffff);  // attribute namespace
            put32(chunk, intern(k));
            put32(chunk, intern(v));   // raw value: string
            put16(chunk, 8);           // typed value size
            chunk.push_back('\0');     // res0
            chunk.push_back('\x03');   // TYPE_STRING
            put32(chunk, intern(v));
        }
        body += chunk;
    }

    std::string doc;
    put16(doc, 0x0003);                // RES_XML_TYPE
    put16(doc, 0x0008);
    put32(doc, 8 + sp_size + static_cast<std::uint32_t>(body.size()));
    doc += sp;
    doc += body;
    return doc;
}

}  // namespace testsupport
