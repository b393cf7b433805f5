#include <cstring>

#include "apklab/errors.hpp"
#include "apklab/netparse.hpp"

namespace apklab::net {
namespace {

struct Reader {
    const std::string& b;
    bool swap;  // file byte order differs from little-endian

    std::uint32_t u32(std::size_t off) const {
        std::uint32_t v = static_cast<std::uint8_t>(b[off]) |
                          (static_cast<std::uint8_t>(b[off + 1]) << 8) |
                          (static_cast<std::uint8_t>(b[off + 2]) << 16) |
                          (static_cast<std::uint8_t>(b[off + 3]) << 24);
        if (swap) {
            v = ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
        }
        return v;
    }
};

std::uint16_t be16(const std::string& b, std::size_t off) {
    return static_cast<std::uint16_t>((static_cast<std::uint8_t>(b[off]) << 8) |
                                      static_cast<std::uint8_t>(b[off + 1]));
}
std::uint32_t be32(const std::string& b, std::size_t off) {
    return (static_cast<std::uint32_t>(be16(b, off)) << 16) | be16(b, off + 2);
}

// Decodes one IPv4 datagram starting at `off`; false when not parseable.
bool decode_ipv4(const std::string& frame, std::size_t off, std::size_t limit, Packet& p) {
    if (limit - off < 20) return false;
    std::uint8_t vihl = static_cast<std::uint8_t>(frame[off]);
    if ((vihl >> 4) != 4) return false;
    std::size_t ihl = (vihl & 0x0f) * 4u;
    if (ihl < 20 || off + ihl > limit) return false;

    std::size_t total = be16(frame, off + 2);
    std::size_t ip_end = off + total;
    if (total < ihl) return false;
    if (ip_end > limit) {
        ip_end = limit;  // capture shorter than the datagram claims
        p.truncated = true;
    }

    p.proto = static_cast<std::uint8_t>(frame[off + 9]);
    p.src_ip = be32(frame, off + 12);
    p.dst_ip = be32(frame, off + 16);

    std::size_t t = off + ihl;  // transport header start
    if (p.proto == 6) {
        if (ip_end - t < 20) return false;
        p.src_port = be16(frame, t);
        p.dst_port = be16(frame, t + 2);
        p.tcp_seq = be32(frame, t + 4);
        std::size_t dataoff = (static_cast<std::uint8_t>(frame[t + 12]) >> 4) * 4u;
        p.tcp_flags = static_cast<std::uint8_t>(frame[t + 13]);
        if (dataoff < 20 || t + dataoff > ip_end) return false;
        p.payload = frame.substr(t + dataoff, ip_end - t - dataoff);
    } else if (p.proto == 17) {
        if (ip_end - t < 8) return false;
        p.src_port = be16(frame, t);
        p.dst_port = be16(frame, t + 2);
        std::size_t ulen = be16(frame, t + 4);
        std::size_t have = ip_end - t;
        std::size_t take = ulen >= 8 ? std::min(ulen, have) - 8 : have - 8;
        p.payload = frame.substr(t + 8, take);
    } else {
        p.payload = frame.substr(t, ip_end - t);
    }
    return true;
}

}  // namespace

std::vector<Packet> parse_pcap(const std::string& bytes, CaptureStats* stats) {
    if (bytes.size() < 24) throw ParseError("pcap: truncated global header");
    std::uint32_t raw_magic = static_cast<std::uint8_t>(bytes[0]) |
                              (static_cast<std::uint8_t>(bytes[1]) << 8) |
                              (static_cast<std::uint8_t>(bytes[2]) << 16) |
                              (static_cast<std::uint8_t>(bytes[3]) << 24);
    bool swap;
    if (raw_magic == 0xa1b2c3d4) {
        swap = false;
    } else if (raw_magic == 0xd4c3b2a1) {
        swap = true;
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "pcap: bad magic 0x%08x", raw_magic);
        throw ParseError(buf);
    }
    Reader r{bytes, swap};
    std::uint32_t linktype = r.u32(20);
    if (linktype != 1 && linktype != 101) {
        throw ParseError("pcap: unsupported linktype " + std::to_string(linktype));
    }

    std::vector<Packet> out;
    std::size_t off = 24;
    while (off + 16 <= bytes.size()) {
        std::uint32_t ts_sec = r.u32(off);
        std::uint32_t ts_usec = r.u32(off + 4);
        std::uint32_t incl = r.u32(off + 8);
        std::uint32_t orig = r.u32(off + 12);
        off += 16;
        std::size_t have = std::min<std::size_t>(incl, bytes.size() - off);

        Packet p;
        p.ts_us = static_cast<std::int64_t>(ts_sec) * 1000000 + ts_usec;
        p.truncated = incl < orig || have < incl;

        std::size_t l2 = off;
        std::size_t limit = off + have;
        bool ok = false;
        if (linktype == 1) {
            if (have >= 14 && be16(bytes, l2 + 12) == 0x0800) {
                ok = decode_ipv4(bytes, l2 + 14, limit, p);
            }
        } else {
            ok = decode_ipv4(bytes, l2, limit, p);
        }
        if (ok) {
            if (p.truncated && stats) ++stats->truncated_packets;
            out.push_back(std::move(p));
        } else if (stats) {
            ++stats->skipped_non_ipv4;
        }
        off = limit;
    }
    return out;
}

}  // namespace apklab::net
