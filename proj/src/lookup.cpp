#include "apklab/lookup.hpp"

#include <cctype>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "apklab/errors.hpp"

namespace apklab {
namespace {

using nlohmann::json;

const char* api_key() {
    return std::getenv("ANALYSIS_LOOKUP_KEY");
}

httplib::Headers default_headers() {
    httplib::Headers h;
    if (const char* key = api_key()) h.emplace("X-Api-Key", key);
    return h;
}

}  // namespace

int LookupResult::positives() const {
    int n = 0;
    for (const auto& d : detections) {
        if (d.detected) ++n;
    }
    return n;
}

std::string_view to_string(LookupStatus s) {
    switch (s) {
        case LookupStatus::Found: return "found";
        case LookupStatus::NotFound: return "not_found";
        case LookupStatus::Pending: return "pending";
        case LookupStatus::Rejected: return "rejected";
        case LookupStatus::Unavailable: return "unavailable";
    }
    return "unavailable";
}

bool valid_sha256(const std::string& digest) {
    if (digest.size() != 64) return false;
    for (char c : digest) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!ok) return false;
    }
    return true;
}

LookupResult lookup_result_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("lookup: invalid JSON: ") + e.what());
    }
    LookupResult r;
    r.sha256 = j.value("sha256", "");
    r.total_engines = j.value("total_engines", 0);
    r.scanned_at = j.value("scanned_at", "");
    if (j.contains("detections")) {
        for (const auto& d : j["detections"]) {
            r.detections.push_back({d.value("engine", ""), d.value("detected", false),
                                    d.value("label", "")});
        }
    }
    if (static_cast<int>(r.detections.size()) > r.total_engines) {
        throw ParseError("lookup: more detections than engines");
    }
    return r;
}

std::string lookup_result_to_json(const LookupResult& r) {
    json j;
    j["sha256"] = r.sha256;
    j["total_engines"] = r.total_engines;
    j["scanned_at"] = r.scanned_at;
    json arr = json::array();
    for (const auto& d : r.detections) {
        arr.push_back({{"engine", d.engine}, {"detected", d.detected}, {"label", d.label}});
    }
    j["detections"] = arr;
    return j.dump();
}

LookupClient::LookupClient(std::string endpoint, int retries)
    : endpoint_(std::move(endpoint)), retries_(retries) {}

LookupOutcome LookupClient::get_json(const std::string& path) {
    LookupOutcome out;
    for (int attempt = 0; attempt <= retries_; ++attempt) {
        httplib::Client cli(endpoint_);
        cli.set_connection_timeout(2, 0);
        cli.set_read_timeout(2, 0);
        auto res = cli.Get(path, default_headers());
        if (!res) {
            out.status = LookupStatus::Unavailable;
            out.detail = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 404) {
            out.status = LookupStatus::NotFound;
            out.detail = res->body;
            return out;
        }
        if (res->status == 202) {
            out.status = LookupStatus::Pending;
            return out;
        }
        if (res->status == 200) {
            try {
                out.result = lookup_result_from_json(res->body);
                out.status = LookupStatus::Found;
            } catch (const ParseError& e) {
                out.status = LookupStatus::Unavailable;
                out.detail = e.what();
            }
            return out;
        }
        out.status = LookupStatus::Unavailable;
        out.detail = "unexpected status " + std::to_string(res->status);
    }
    return out;
}

LookupOutcome LookupClient::query_hash(const std::string& sha256) {
    if (!valid_sha256(sha256)) {
        throw ConfigError("not a sha256 digest: '" + sha256 + "'");
    }
    return get_json("/v1/report/" + sha256);
}

LookupOutcome LookupClient::submit_and_poll(const std::string& sha256,
                                            const std::string& sample_bytes,
                                            const PollPolicy& policy) {
    LookupOutcome known = query_hash(sha256);
    if (known.status != LookupStatus::NotFound) return known;

    LookupOutcome out;
    httplib::Client cli(endpoint_);
    cli.set_connection_timeout(2, 0);
    cli.set_read_timeout(2, 0);
    httplib::Headers headers = default_headers();
    headers.emplace("X-Sample-Sha256", sha256);
    auto res = cli.Post("/v1/upload", headers, sample_bytes, "application/octet-stream");
    if (!res) {
        out.status = LookupStatus::Unavailable;
        out.detail = "upload transport error: " + httplib::to_string(res.error());
        return out;
    }
    if (res->status != 200) {
        out.status = LookupStatus::Rejected;
        out.detail = res->body;
        return out;
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("ticket")) {
        out.status = LookupStatus::Unavailable;
        out.detail = "malformed upload response";
        return out;
    }
    UploadTicket ticket{j["ticket"].get<std::string>(), j.value("submitted_at", "")};
    out.ticket = ticket;

    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(policy.interval_ms));
        }
        LookupOutcome poll = get_json("/v1/ticket/" + ticket.id);
        if (poll.status == LookupStatus::Found) {
            poll.ticket = ticket;
            return poll;
        }
        if (poll.status == LookupStatus::Unavailable) {
            poll.ticket = ticket;
            return poll;
        }
    }
    out.status = LookupStatus::Pending;
    out.detail = "result not ready after " + std::to_string(policy.max_attempts) + " polls";
    return out;
}

}  // namespace apklab
