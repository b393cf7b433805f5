#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace apklab::net {

// Decoded IPv4 packet from a classic pcap capture. Transport fields are
// meaningful for the protocol indicated by `proto` (6 TCP, 17 UDP).
struct Packet {
    std::int64_t ts_us = 0;  // capture timestamp in microseconds
    std::uint32_t src_ip = 0, dst_ip = 0;
    std::uint8_t proto = 0;
    std::uint16_t src_port = 0, dst_port = 0;
    std::uint32_t tcp_seq = 0;
    std::uint8_t tcp_flags = 0;
    std::string payload;
    bool truncated = false;
};

struct CaptureStats {
    std::size_t skipped_non_ipv4 = 0;
    std::size_t truncated_packets = 0;
};

// Classic pcap only (magic 0xa1b2c3d4 either byte order), linktype
// Ethernet(1) or Raw-IP(101). Throws ParseError on bad magic/linktype or a
// truncated global header; truncation inside the packet stream is tolerated.
std::vector<Packet> parse_pcap(const std::string& bytes, CaptureStats* stats = nullptr);

struct Endpoint {
    std::uint32_t ip = 0;
    std::uint16_t port = 0;
    auto operator<=>(const Endpoint&) const = default;
};

// Key identical for both directions of one conversation. TCP/UDP keys carry
// ports; other protocols are keyed by (ip_a ≤ ip_b, proto) with ports zero.
struct ConnectionKey {
    Endpoint initiator, responder;
    std::uint8_t proto = 0;
    bool has_ports = false;
    bool operator==(const ConnectionKey&) const = default;
};

struct ConnectionStats {
    std::uint64_t packet_count = 0;
    std::uint64_t byte_count = 0;  // transport payload bytes
    std::int64_t first_us = 0, last_us = 0;
};

// Connections in order of first appearance. The initiator is the source of
// the first-seen packet, corrected to the SYN sender for TCP when a pure SYN
// appears later in the capture. Σ packet_count equals the packet count.
std::vector<std::pair<ConnectionKey, ConnectionStats>> extract_connections(
    const std::vector<Packet>& packets);

struct DnsAnswer {
    std::string name;
    std::string type;
    std::string rdata;  // dotted quad for A, decoded name for NS/CNAME/PTR, text otherwise
};

struct DnsRecord {
    std::uint16_t txid = 0;
    std::string qname;  // lowercase, dot-separated, no trailing dot
    std::string qtype;
    bool nxdomain = false;
    bool response_seen = false;
    std::vector<DnsAnswer> answers;
    bool parse_error = false;
    std::string raw_hex;  // payload preserved for parse_error records
};

struct DnsExtract {
    std::vector<DnsRecord> records;
    std::vector<std::string> notes;
};

std::string dns_type_name(std::uint16_t qtype);

// Walks UDP port-53 traffic: queries become records, responses with a
// matching (txid, swapped endpoints) pending query attach their answers.
DnsExtract extract_dns(const std::vector<Packet>& packets);

struct HttpTransaction {
    std::string method;   // uppercase
    std::string url;      // "http://" + host + path; path alone when Host is missing
    std::string version;  // "HTTP/1.1"
    std::string host;
    std::string path;     // request-target as sent
    std::vector<std::pair<std::string, std::string>> headers;
    std::map<std::string, std::string> get_params;
    std::map<std::string, std::string> post_params;
    std::string body_excerpt;
    bool host_missing = false;
    Endpoint client, server;
};

struct HttpExtract {
    std::vector<HttpTransaction> transactions;
    std::size_t skipped_streams = 0;
};

// Rebuilds per-direction byte streams (TCP sequence order, first payload per
// range wins) for flows whose server port is watched, then parses
// consecutive requests. Bodies are read up to Content-Length.
HttpExtract extract_http(const std::vector<Packet>& packets,
                         const std::set<std::uint16_t>& ports = {80});

constexpr std::size_t kBodyExcerptLimit = 256;

}  // namespace apklab::net
