#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <tuple>

#include "apklab/netparse.hpp"
#include "apklab/textutil.hpp"
#include "apklab/wirebuild.hpp"

namespace apklab::net {
namespace {

struct Direction {
    bool syn_seen = false;
    std::uint32_t isn = 0;                       // sequence of the first byte
    std::map<std::uint32_t, std::string> segs;   // rel seq → payload, first wins
    bool any_payload = false;
};

struct Flow {
    Endpoint a, b;  // a < b
    Direction ab, ba;
    std::size_t order = 0;
};

// Stitches segments in sequence order. Overlapping bytes keep the first
// payload seen; a gap ends the stream.
std::string stitch(const Direction& d) {
    std::string out;
    std::uint32_t expected = 0;
    for (const auto& [rel, payload] : d.segs) {
        if (rel > expected) break;
        std::uint32_t skip = expected - rel;
        if (skip < payload.size()) {
            out += payload.substr(skip);
            expected = rel + static_cast<std::uint32_t>(payload.size());
        }
    }
    return out;
}

std::map<std::string, std::string> form_decode(const std::string& text) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    for (const std::string& pair : split(text, '&')) {
        if (pair.empty()) continue;
        std::size_t eq = pair.find('=');
        std::string key = url_decode(eq == std::string::npos ? pair : pair.substr(0, eq));
        std::string value = eq == std::string::npos ? "" : url_decode(pair.substr(eq + 1));
        out.emplace(std::move(key), std::move(value));
    }
    return out;
}

bool token_method(const std::string& m) {
    if (m.empty() || m.size() > 16) return false;
    return std::all_of(m.begin(), m.end(), [](unsigned char c) { return std::isalpha(c); });
}

// Parses consecutive requests out of one client→server byte stream.
// Returns false when the stream does not start with a well-formed request.
bool parse_requests(const std::string& stream, Endpoint client, Endpoint server,
                    std::vector<HttpTransaction>& out) {
    std::size_t pos = 0;
    bool any = false;
    while (pos < stream.size()) {
        std::size_t line_end = stream.find("\r\n", pos);
        if (line_end == std::string::npos) break;
        std::string line = stream.substr(pos, line_end - pos);
        std::size_t sp1 = line.find(' ');
        std::size_t sp2 = line.rfind(' ');
        if (sp1 == std::string::npos || sp2 == sp1) return any;
        std::string method = line.substr(0, sp1);
        std::string target = line.substr(sp1 + 1, sp2 - sp1 - 1);
        std::string version = line.substr(sp2 + 1);
        if (!token_method(method) || target.empty() || version.rfind("HTTP/", 0) != 0) {
            return any;
        }

        std::size_t headers_end = stream.find("\r\n\r\n", line_end);
        if (headers_end == std::string::npos) break;

        HttpTransaction t;
        t.method = to_upper(method);
        t.version = version;
        t.path = target;
        t.client = client;
        t.server = server;

        std::size_t content_length = 0;
        std::string content_type;
        std::size_t h = line_end + 2;
        while (h < headers_end) {
            std::size_t he = stream.find("\r\n", h);
            std::string header = stream.substr(h, he - h);
            h = he + 2;
            std::size_t colon = header.find(':');
            if (colon == std::string::npos) continue;
            std::string name = trim(header.substr(0, colon));
            std::string value = trim(header.substr(colon + 1));
            if (iequals(name, "host")) t.host = value;
            if (iequals(name, "content-length")) {
                content_length = static_cast<std::size_t>(std::strtoull(value.c_str(), nullptr, 10));
            }
            if (iequals(name, "content-type")) content_type = to_lower(value);
            t.headers.emplace_back(std::move(name), std::move(value));
        }

        std::size_t body_start = headers_end + 4;
        std::size_t body_len = std::min(content_length, stream.size() - body_start);
        std::string body = stream.substr(body_start, body_len);
        t.body_excerpt = body.substr(0, kBodyExcerptLimit);

        std::string path_only = target;
        if (std::size_t q = target.find('?'); q != std::string::npos) {
            path_only = target.substr(0, q);
            t.get_params = form_decode(target.substr(q + 1));
        }
        if (t.method == "CONNECT") {
            t.url = target;  // authority form
            t.host = t.host.empty() ? target : t.host;
        } else if (!t.host.empty()) {
            t.url = "http://" + t.host + path_only;
        } else {
            t.url = path_only;
            t.host_missing = true;
        }
        if (t.method == "POST" &&
            content_type.find("application/x-www-form-urlencoded") != std::string::npos) {
            t.post_params = form_decode(body);
        }

        out.push_back(std::move(t));
        any = true;
        pos = body_start + body_len;
    }
    return any;
}

}  // namespace

HttpExtract extract_http(const std::vector<Packet>& packets,
                         const std::set<std::uint16_t>& ports) {
    HttpExtract result;
    using FlowKey = std::tuple<std::uint32_t, std::uint16_t, std::uint32_t, std::uint16_t>;
    std::map<FlowKey, Flow> flows;
    std::size_t next_order = 0;

    for (const Packet& p : packets) {
        if (p.proto != 6) continue;
        Endpoint src{p.src_ip, p.src_port}, dst{p.dst_ip, p.dst_port};
        Endpoint a = src, b = dst;
        if (b < a) std::swap(a, b);
        auto [it, inserted] = flows.try_emplace({a.ip, a.port, b.ip, b.port});
        Flow& f = it->second;
        if (inserted) {
            f.a = a;
            f.b = b;
            f.order = next_order++;
        }
        Direction& d = (src == f.a) ? f.ab : f.ba;

        bool syn = (p.tcp_flags & wire::kTcpSyn) != 0;
        if (syn && !d.syn_seen) {
            d.syn_seen = true;
            d.isn = p.tcp_seq + 1;  // first data byte follows the SYN
        }
        if (!p.payload.empty()) {
            if (!d.any_payload && !d.syn_seen) d.isn = p.tcp_seq;
            d.any_payload = true;
            std::uint32_t rel = p.tcp_seq - d.isn;
            d.segs.emplace(rel, p.payload);  // keeps the first payload per range
        }
    }

    std::vector<const Flow*> ordered;
    ordered.reserve(flows.size());
    for (const auto& [k, f] : flows) ordered.push_back(&f);
    std::sort(ordered.begin(), ordered.end(),
              [](const Flow* x, const Flow* y) { return x->order < y->order; });

    for (const Flow* f : ordered) {
        // The client is whichever side talks to a watched port.
        const Direction* client_dir = nullptr;
        Endpoint client, server;
        if (ports.count(f->b.port)) {
            client_dir = &f->ab;
            client = f->a;
            server = f->b;
        } else if (ports.count(f->a.port)) {
            client_dir = &f->ba;
            client = f->b;
            server = f->a;
        } else {
            continue;
        }
        if (!client_dir->any_payload) continue;
        std::string stream = stitch(*client_dir);
        if (!parse_requests(stream, client, server, result.transactions)) {
            ++result.skipped_streams;
        }
    }
    return result;
}

}  // namespace apklab::net
