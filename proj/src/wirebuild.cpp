#include "apklab/wirebuild.hpp"

#include <charconv>

#include "apklab/errors.hpp"

namespace apklab::wire {
namespace {

void put8(std::string& b, std::uint8_t v) { b.push_back(static_cast<char>(v)); }
void put16be(std::string& b, std::uint16_t v) {
    put8(b, static_cast<std::uint8_t>(v >> 8));
    put8(b, static_cast<std::uint8_t>(v & 0xff));
}
void put32be(std::string& b, std::uint32_t v) {
    put16be(b, static_cast<std::uint16_t>(v >> 16));
    put16be(b, static_cast<std::uint16_t>(v & 0xffff));
}
void put16le(std::string& b, std::uint16_t v) {
    put8(b, static_cast<std::uint8_t>(v & 0xff));
    put8(b, static_cast<std::uint8_t>(v >> 8));
}
void put32le(std::string& b, std::uint32_t v) {
    put16le(b, static_cast<std::uint16_t>(v & 0xffff));
    put16le(b, static_cast<std::uint16_t>(v >> 16));
}
void patch16be(std::string& b, std::size_t off, std::uint16_t v) {
    b[off] = static_cast<char>(v >> 8);
    b[off + 1] = static_cast<char>(v & 0xff);
}

}  // namespace

std::uint32_t ipv4_address(const std::string& dotted) {
    std::uint32_t addr = 0;
    const char* p = dotted.data();
    const char* end = p + dotted.size();
    for (int i = 0; i < 4; ++i) {
        unsigned octet = 256;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || octet > 255) throw ParseError("bad IPv4 address: " + dotted);
        addr = (addr << 8) | octet;
        p = next;
        if (i < 3) {
            if (p >= end || *p != '.') throw ParseError("bad IPv4 address: " + dotted);
            ++p;
        }
    }
    if (p != end) throw ParseError("bad IPv4 address: " + dotted);
    return addr;
}

std::string ipv4_to_string(std::uint32_t addr) {
    std::string out;
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((addr >> shift) & 0xff);
        if (shift) out.push_back('.');
    }
    return out;
}

std::uint16_t inet_checksum(const std::string& data, std::uint32_t seed) {
    std::uint32_t sum = seed;
    std::size_t i = 0;
    for (; i + 1 < data.size(); i += 2) {
        sum += (static_cast<std::uint8_t>(data[i]) << 8) | static_cast<std::uint8_t>(data[i + 1]);
    }
    if (i < data.size()) sum += static_cast<std::uint8_t>(data[i]) << 8;
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum & 0xffff);
}

std::string ethernet_frame(const std::string& payload, std::uint16_t ethertype) {
    std::string f;
    f.append("\x02\x00\x00\x00\x00\x02", 6);  // destination
    f.append("\x02\x00\x00\x00\x00\x01", 6);  // source
    put16be(f, ethertype);
    f += payload;
    return f;
}

std::string ipv4_packet(std::uint32_t src, std::uint32_t dst, std::uint8_t proto,
                        const std::string& payload, std::uint16_t ident, std::uint8_t ttl) {
    std::string h;
    put8(h, 0x45);  // version 4, ihl 5
    put8(h, 0);
    put16be(h, static_cast<std::uint16_t>(20 + payload.size()));
    put16be(h, ident);
    put16be(h, 0x4000);  // don't-fragment
    put8(h, ttl);
    put8(h, proto);
    put16be(h, 0);  // checksum placeholder
    put32be(h, src);
    put32be(h, dst);
    patch16be(h, 10, inet_checksum(h));
    return h + payload;
}

namespace {

// Pseudo-header seed for TCP/UDP checksums: src, dst, proto, segment length.
std::uint32_t pseudo_seed(std::uint32_t src, std::uint32_t dst, std::uint8_t proto,
                          std::size_t len) {
    std::uint32_t sum = 0;
    sum += src >> 16;
    sum += src & 0xffff;
    sum += dst >> 16;
    sum += dst & 0xffff;
    sum += proto;
    sum += static_cast<std::uint32_t>(len);
    return sum;
}

}  // namespace

std::string tcp_segment(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                        std::uint16_t dst_port, std::uint32_t seq, std::uint32_t ack,
                        std::uint8_t flags, const std::string& payload, std::uint16_t window) {
    std::string s;
    put16be(s, src_port);
    put16be(s, dst_port);
    put32be(s, seq);
    put32be(s, ack);
    put8(s, 0x50);  // data offset 5 words
    put8(s, flags);
    put16be(s, window);
    put16be(s, 0);  // checksum placeholder
    put16be(s, 0);  // urgent pointer
    s += payload;
    patch16be(s, 16, inet_checksum(s, pseudo_seed(src_ip, dst_ip, 6, s.size())));
    return s;
}

std::string udp_datagram(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                         std::uint16_t dst_port, const std::string& payload) {
    std::string d;
    put16be(d, src_port);
    put16be(d, dst_port);
    put16be(d, static_cast<std::uint16_t>(8 + payload.size()));
    put16be(d, 0);  // checksum placeholder
    d += payload;
    std::uint16_t sum = inet_checksum(d, pseudo_seed(src_ip, dst_ip, 17, d.size()));
    if (sum == 0) sum = 0xffff;
    patch16be(d, 6, sum);
    return d;
}

std::string icmp_echo(bool reply, std::uint16_t ident, std::uint16_t seq,
                      const std::string& payload) {
    std::string m;
    put8(m, reply ? 0 : 8);
    put8(m, 0);
    put16be(m, 0);  // checksum placeholder
    put16be(m, ident);
    put16be(m, seq);
    m += payload;
    patch16be(m, 2, inet_checksum(m));
    return m;
}

std::string a_rdata(const std::string& dotted) {
    std::string r;
    put32be(r, ipv4_address(dotted));
    return r;
}

std::string encode_dns_name(const std::string& qname) {
    std::string out;
    std::size_t start = 0;
    while (start <= qname.size()) {
        std::size_t dot = qname.find('.', start);
        std::size_t end = (dot == std::string::npos) ? qname.size() : dot;
        std::size_t len = end - start;
        if (len == 0 || len > 63) throw ParseError("bad DNS label in: " + qname);
        put8(out, static_cast<std::uint8_t>(len));
        out.append(qname, start, len);
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    put8(out, 0);
    return out;
}

namespace {

std::string dns_header(std::uint16_t id, std::uint16_t flags, std::uint16_t qd, std::uint16_t an) {
    std::string h;
    put16be(h, id);
    put16be(h, flags);
    put16be(h, qd);
    put16be(h, an);
    put16be(h, 0);  // nscount
    put16be(h, 0);  // arcount
    return h;
}

}  // namespace

std::string encode_dns_query(std::uint16_t id, const std::string& qname, std::uint16_t qtype) {
    std::string m = dns_header(id, 0x0100, 1, 0);  // standard query, RD
    m += encode_dns_name(qname);
    put16be(m, qtype);
    put16be(m, 1);  // class IN
    return m;
}

std::string encode_dns_response(std::uint16_t id, const std::string& qname, std::uint16_t qtype,
                                const std::vector<DnsAnswer>& answers, bool nxdomain,
                                bool compress) {
    std::uint16_t flags = nxdomain ? 0x8183 : 0x8180;  // QR+RD+RA, rcode 3 or 0
    std::string m = dns_header(id, flags, 1, static_cast<std::uint16_t>(answers.size()));
    m += encode_dns_name(qname);
    put16be(m, qtype);
    put16be(m, 1);
    for (const auto& a : answers) {
        if (compress && a.name == qname) {
            put16be(m, 0xc00c);  // pointer to the question name at offset 12
        } else {
            m += encode_dns_name(a.name);
        }
        put16be(m, a.qtype);
        put16be(m, 1);
        put32be(m, a.ttl);
        put16be(m, static_cast<std::uint16_t>(a.rdata.size()));
        m += a.rdata;
    }
    return m;
}

PcapWriter::PcapWriter(std::uint32_t linktype) {
    put32le(buf_, 0xa1b2c3d4);
    put16le(buf_, 2);      // version major
    put16le(buf_, 4);      // version minor
    put32le(buf_, 0);      // thiszone
    put32le(buf_, 0);      // sigfigs
    put32le(buf_, 65535);  // snaplen
    put32le(buf_, linktype);
}

void PcapWriter::add_packet(std::uint32_t ts_sec, std::uint32_t ts_usec,
                            const std::string& frame) {
    put32le(buf_, ts_sec);
    put32le(buf_, ts_usec);
    put32le(buf_, static_cast<std::uint32_t>(frame.size()));
    put32le(buf_, static_cast<std::uint32_t>(frame.size()));
    buf_ += frame;
    ++packets_;
}

FlowBuilder::FlowBuilder(PcapWriter& out, std::uint32_t client_ip, std::uint16_t client_port,
                         std::uint32_t server_ip, std::uint16_t server_port, std::uint32_t ts_sec,
                         std::uint32_t ts_usec)
    : out_(out),
      client_ip_(client_ip),
      server_ip_(server_ip),
      client_port_(client_port),
      server_port_(server_port),
      client_seq_(1000),
      server_seq_(5000),
      ts_sec_(ts_sec),
      ts_usec_(ts_usec) {}

void FlowBuilder::emit(bool from_client, std::uint8_t flags, const std::string& payload) {
    std::uint32_t src_ip = from_client ? client_ip_ : server_ip_;
    std::uint32_t dst_ip = from_client ? server_ip_ : client_ip_;
    std::uint16_t src_port = from_client ? client_port_ : server_port_;
    std::uint16_t dst_port = from_client ? server_port_ : client_port_;
    std::uint32_t& seq = from_client ? client_seq_ : server_seq_;
    std::uint32_t ack = from_client ? client_ack_ : server_ack_;
    std::string seg =
        tcp_segment(src_ip, dst_ip, src_port, dst_port, seq, ack, flags, payload);
    out_.add_packet(ts_sec_, ts_usec_, ethernet_frame(ipv4_packet(src_ip, dst_ip, 6, seg)));
    ts_usec_ += 1000;
    if (ts_usec_ >= 1000000) {
        ts_usec_ -= 1000000;
        ++ts_sec_;
    }
    std::uint32_t consumed = static_cast<std::uint32_t>(payload.size());
    if (flags & (kTcpSyn | kTcpFin)) ++consumed;
    seq += consumed;
    // The peer must acknowledge everything sent so far.
    if (from_client) server_ack_ = client_seq_;
    else client_ack_ = server_seq_;
}

void FlowBuilder::handshake() {
    emit(true, kTcpSyn, "");
    emit(false, kTcpSyn | kTcpAck, "");
    emit(true, kTcpAck, "");
    open_ = true;
}

void FlowBuilder::client_send(const std::string& payload) {
    if (!open_) handshake();
    emit(true, kTcpPsh | kTcpAck, payload);
}

void FlowBuilder::server_send(const std::string& payload) {
    if (!open_) handshake();
    emit(false, kTcpPsh | kTcpAck, payload);
}

void FlowBuilder::close() {
    if (!open_) return;
    emit(true, kTcpFin | kTcpAck, "");
    emit(false, kTcpFin | kTcpAck, "");
    emit(true, kTcpAck, "");
    open_ = false;
}

}  // namespace apklab::wire
