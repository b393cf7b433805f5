#include <algorithm>
#include <map>
#include <tuple>

#include "apklab/netparse.hpp"
#include "apklab/wirebuild.hpp"

namespace apklab::net {
namespace {

// Direction-invariant grouping key.
using NormKey = std::tuple<std::uint32_t, std::uint16_t, std::uint32_t, std::uint16_t,
                           std::uint8_t, bool>;

NormKey normalize(const Packet& p) {
    bool ports = p.proto == 6 || p.proto == 17;
    Endpoint a{p.src_ip, ports ? p.src_port : static_cast<std::uint16_t>(0)};
    Endpoint b{p.dst_ip, ports ? p.dst_port : static_cast<std::uint16_t>(0)};
    if (b < a) std::swap(a, b);
    return {a.ip, a.port, b.ip, b.port, p.proto, ports};
}

}  // namespace

std::vector<std::pair<ConnectionKey, ConnectionStats>> extract_connections(
    const std::vector<Packet>& packets) {
    struct Entry {
        ConnectionKey key;
        ConnectionStats stats;
        bool initiator_from_syn = false;
        std::size_t order;
    };
    std::map<NormKey, Entry> groups;
    std::size_t next_order = 0;

    for (const Packet& p : packets) {
        bool ports = p.proto == 6 || p.proto == 17;
        NormKey nk = normalize(p);
        auto [it, inserted] = groups.try_emplace(nk);
        Entry& e = it->second;
        if (inserted) {
            e.order = next_order++;
            e.key.proto = p.proto;
            e.key.has_ports = ports;
            e.key.initiator = {p.src_ip, ports ? p.src_port : static_cast<std::uint16_t>(0)};
            e.key.responder = {p.dst_ip, ports ? p.dst_port : static_cast<std::uint16_t>(0)};
            e.stats.first_us = p.ts_us;
        }
        // A pure SYN pins the initiator regardless of which side was seen first.
        bool pure_syn =
            p.proto == 6 && (p.tcp_flags & wire::kTcpSyn) && !(p.tcp_flags & wire::kTcpAck);
        if (pure_syn && !e.initiator_from_syn) {
            e.key.initiator = {p.src_ip, p.src_port};
            e.key.responder = {p.dst_ip, p.dst_port};
            e.initiator_from_syn = true;
        }
        ++e.stats.packet_count;
        e.stats.byte_count += p.payload.size();
        e.stats.last_us = p.ts_us;
    }

    std::vector<const Entry*> ordered;
    ordered.reserve(groups.size());
    for (const auto& [nk, e] : groups) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(),
              [](const Entry* a, const Entry* b) { return a->order < b->order; });

    std::vector<std::pair<ConnectionKey, ConnectionStats>> out;
    out.reserve(ordered.size());
    for (const Entry* e : ordered) out.emplace_back(e->key, e->stats);
    return out;
}

}  // namespace apklab::net
