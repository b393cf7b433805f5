#include <map>
#include <set>
#include <tuple>

#include "apklab/errors.hpp"
#include "apklab/netparse.hpp"
#include "apklab/textutil.hpp"
#include "apklab/wirebuild.hpp"

namespace apklab::net {
namespace {

std::uint16_t rd16(const std::string& b, std::size_t off) {
    if (off + 2 > b.size()) throw ParseError("dns: truncated");
    return static_cast<std::uint16_t>((static_cast<std::uint8_t>(b[off]) << 8) |
                                      static_cast<std::uint8_t>(b[off + 1]));
}

// Decodes a possibly-compressed name starting at `off`; advances `off` past
// the name as stored (pointers consume two bytes).
std::string read_name(const std::string& m, std::size_t& off) {
    std::string name;
    std::size_t pos = off;
    bool jumped = false;
    std::set<std::size_t> visited;
    while (true) {
        if (pos >= m.size()) throw ParseError("dns: name runs past message");
        std::uint8_t len = static_cast<std::uint8_t>(m[pos]);
        if ((len & 0xc0) == 0xc0) {
            if (pos + 1 >= m.size()) throw ParseError("dns: cut pointer");
            std::size_t target =
                ((len & 0x3f) << 8) | static_cast<std::uint8_t>(m[pos + 1]);
            if (!visited.insert(target).second) throw ParseError("dns: pointer loop");
            if (!jumped) off = pos + 2;
            jumped = true;
            pos = target;
            continue;
        }
        if (len == 0) {
            if (!jumped) off = pos + 1;
            break;
        }
        if (pos + 1 + len > m.size()) throw ParseError("dns: label runs past message");
        if (!name.empty()) name.push_back('.');
        name += m.substr(pos + 1, len);
        pos += 1 + len;
    }
    return to_lower(name);
}

struct Question {
    std::string qname;
    std::uint16_t qtype;
};

struct Message {
    std::uint16_t txid;
    bool response;
    bool nxdomain;
    std::vector<Question> questions;
    std::vector<DnsAnswer> answers;
};

Message decode(const std::string& m) {
    if (m.size() < 12) throw ParseError("dns: short header");
    Message msg;
    msg.txid = rd16(m, 0);
    std::uint16_t flags = rd16(m, 2);
    msg.response = (flags & 0x8000) != 0;
    msg.nxdomain = (flags & 0x000f) == 3;
    std::uint16_t qd = rd16(m, 4);
    std::uint16_t an = rd16(m, 6);

    std::size_t off = 12;
    for (std::uint16_t i = 0; i < qd; ++i) {
        Question q;
        q.qname = read_name(m, off);
        q.qtype = rd16(m, off);
        off += 4;  // qtype + qclass
        msg.questions.push_back(std::move(q));
    }
    for (std::uint16_t i = 0; i < an; ++i) {
        DnsAnswer a;
        a.name = read_name(m, off);
        std::uint16_t atype = rd16(m, off);
        off += 8;  // type + class + ttl
        std::uint16_t rdlen = rd16(m, off);
        off += 2;
        if (off + rdlen > m.size()) throw ParseError("dns: rdata runs past message");
        a.type = dns_type_name(atype);
        if (atype == 1 && rdlen == 4) {
            a.rdata = wire::ipv4_to_string(
                (static_cast<std::uint32_t>(static_cast<std::uint8_t>(m[off])) << 24) |
                (static_cast<std::uint8_t>(m[off + 1]) << 16) |
                (static_cast<std::uint8_t>(m[off + 2]) << 8) |
                static_cast<std::uint8_t>(m[off + 3]));
        } else if (atype == 2 || atype == 5 || atype == 12) {
            std::size_t noff = off;
            a.rdata = read_name(m, noff);
        } else if (atype == 16) {
            a.rdata = m.substr(off + 1, rdlen > 0 ? rdlen - 1 : 0);  // skip text length
        } else {
            a.rdata = to_hex(m.substr(off, rdlen));
        }
        off += rdlen;
        msg.answers.push_back(std::move(a));
    }
    return msg;
}

}  // namespace

std::string dns_type_name(std::uint16_t qtype) {
    switch (qtype) {
        case 1: return "A";
        case 2: return "NS";
        case 5: return "CNAME";
        case 6: return "SOA";
        case 12: return "PTR";
        case 15: return "MX";
        case 16: return "TXT";
        case 28: return "AAAA";
        default: return std::to_string(qtype);
    }
}

DnsExtract extract_dns(const std::vector<Packet>& packets) {
    DnsExtract out;
    // Pending queries keyed by (txid, client, server) awaiting the swapped-
    // endpoint response. Values index into out.records.
    std::map<std::tuple<std::uint16_t, std::uint32_t, std::uint16_t, std::uint32_t>,
             std::size_t>
        pending;

    for (const Packet& p : packets) {
        if (p.proto != 17 || (p.src_port != 53 && p.dst_port != 53)) continue;
        Message msg;
        try {
            msg = decode(p.payload);
        } catch (const ParseError& e) {
            DnsRecord rec;
            rec.parse_error = true;
            rec.raw_hex = to_hex(p.payload);
            out.records.push_back(std::move(rec));
            out.notes.push_back(e.what());
            continue;
        }
        if (!msg.response) {
            if (msg.questions.empty()) {
                out.notes.push_back("dns: query with zero questions");
                continue;
            }
            DnsRecord rec;
            rec.txid = msg.txid;
            rec.qname = msg.questions[0].qname;
            rec.qtype = dns_type_name(msg.questions[0].qtype);
            pending[{msg.txid, p.src_ip, p.src_port, p.dst_ip}] = out.records.size();
            out.records.push_back(std::move(rec));
        } else {
            auto it = pending.find({msg.txid, p.dst_ip, p.dst_port, p.src_ip});
            if (it == pending.end()) {
                out.notes.push_back("dns: response without a matching query (txid " +
                                    std::to_string(msg.txid) + ")");
                continue;
            }
            DnsRecord& rec = out.records[it->second];
            rec.response_seen = true;
            rec.nxdomain = msg.nxdomain;
            rec.answers = msg.answers;
            pending.erase(it);
        }
    }
    return out;
}

}  // namespace apklab::net
