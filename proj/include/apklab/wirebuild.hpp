#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace apklab::wire {

// Byte-level builders for classic pcap captures. The simulated device uses
// them to synthesize traffic; the capture parser's tests use them as the
// independent encoder side of round-trip checks.

std::uint32_t ipv4_address(const std::string& dotted);  // throws ParseError
std::string ipv4_to_string(std::uint32_t addr);

// RFC 1071 checksum over `data`, with `seed` folded in first.
std::uint16_t inet_checksum(const std::string& data, std::uint32_t seed = 0);

std::string ethernet_frame(const std::string& payload, std::uint16_t ethertype = 0x0800);
std::string ipv4_packet(std::uint32_t src, std::uint32_t dst, std::uint8_t proto,
                        const std::string& payload, std::uint16_t ident = 0,
                        std::uint8_t ttl = 64);
std::string tcp_segment(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                        std::uint16_t dst_port, std::uint32_t seq, std::uint32_t ack,
                        std::uint8_t flags, const std::string& payload,
                        std::uint16_t window = 65535);
std::string udp_datagram(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                         std::uint16_t dst_port, const std::string& payload);
std::string icmp_echo(bool reply, std::uint16_t ident, std::uint16_t seq,
                      const std::string& payload);

constexpr std::uint8_t kTcpFin = 0x01;
constexpr std::uint8_t kTcpSyn = 0x02;
constexpr std::uint8_t kTcpRst = 0x04;
constexpr std::uint8_t kTcpPsh = 0x08;
constexpr std::uint8_t kTcpAck = 0x10;

// DNS wire encoding. Answer names may use a compression pointer back to the
// question name at offset 12.
struct DnsAnswer {
    std::string name;
    std::uint16_t qtype = 1;
    std::uint32_t ttl = 60;
    std::string rdata;  // raw bytes; use a_rdata() for address records
};
std::string a_rdata(const std::string& dotted);
std::string encode_dns_name(const std::string& qname);
std::string encode_dns_query(std::uint16_t id, const std::string& qname, std::uint16_t qtype);
std::string encode_dns_response(std::uint16_t id, const std::string& qname, std::uint16_t qtype,
                                const std::vector<DnsAnswer>& answers, bool nxdomain = false,
                                bool compress = true);

// Classic pcap writer: magic 0xa1b2c3d4 little-endian, version 2.4.
class PcapWriter {
public:
    explicit PcapWriter(std::uint32_t linktype = 1);

    void add_packet(std::uint32_t ts_sec, std::uint32_t ts_usec, const std::string& frame);
    const std::string& bytes() const { return buf_; }
    std::size_t packet_count() const { return packets_; }

private:
    std::string buf_;
    std::size_t packets_ = 0;
};

// Scripted bidirectional TCP conversation appended to a PcapWriter: SYN /
// SYN-ACK / ACK handshake, alternating payload exchanges, FIN teardown.
// Timestamps advance 1 ms per packet from the construction-time base.
class FlowBuilder {
public:
    FlowBuilder(PcapWriter& out, std::uint32_t client_ip, std::uint16_t client_port,
                std::uint32_t server_ip, std::uint16_t server_port, std::uint32_t ts_sec,
                std::uint32_t ts_usec = 0);

    void handshake();
    void client_send(const std::string& payload);
    void server_send(const std::string& payload);
    void close();

private:
    void emit(bool from_client, std::uint8_t flags, const std::string& payload);

    PcapWriter& out_;
    std::uint32_t client_ip_, server_ip_;
    std::uint16_t client_port_, server_port_;
    std::uint32_t client_seq_, server_seq_;
    std::uint32_t client_ack_ = 0, server_ack_ = 0;
    std::uint32_t ts_sec_, ts_usec_;
    bool open_ = false;
};

}  // namespace apklab::wire
