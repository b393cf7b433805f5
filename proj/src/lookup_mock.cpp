#include "apklab/lookup_mock.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "apklab/errors.hpp"
#include "apklab/hashing.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

using nlohmann::json;

}  // namespace

MockSeed mock_seed_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("mock seed: invalid JSON: ") + e.what());
    }
    MockSeed seed;
    seed.resolve_after_polls = j.value("resolve_after_polls", 0);
    seed.min_upload_size = j.value("min_upload_size", std::size_t{1});
    seed.default_total_engines = j.value("default_total_engines", 46);
    if (j.contains("reports")) {
        for (auto& [hash, body] : j["reports"].items()) {
            LookupResult r = lookup_result_from_json(body.dump());
            if (r.sha256.empty()) r.sha256 = hash;
            seed.reports[hash] = std::move(r);
        }
    }
    return seed;
}

struct MockLookupServer::Impl {
    MockSeed seed;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    std::mutex mu;
    struct Ticket {
        std::string sha256;
        int polls_left = 0;
    };
    std::map<std::string, Ticket> tickets;
    int next_ticket = 1;

    LookupResult result_for(const std::string& sha256) {
        if (auto it = seed.reports.find(sha256); it != seed.reports.end()) return it->second;
        LookupResult clean;
        clean.sha256 = sha256;
        clean.total_engines = seed.default_total_engines;
        clean.scanned_at = "2013-09-02T10:15:30Z";
        return clean;
    }

    void routes() {
        server.Get(R"(/v1/report/([0-9a-f]{64}))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       std::string hash = req.matches[1];
                       std::lock_guard<std::mutex> lock(mu);
                       auto it = seed.reports.find(hash);
                       if (it == seed.reports.end()) {
                           res.status = 404;
                           res.set_content(R"({"status":"unknown"})", "application/json");
                           return;
                       }
                       res.set_content(lookup_result_to_json(it->second), "application/json");
                   });

        server.Post("/v1/upload", [this](const httplib::Request& req, httplib::Response& res) {
            if (req.body.size() < seed.min_upload_size) {
                res.status = 400;
                res.set_content(R"({"error":"sample too small"})", "application/json");
                return;
            }
            std::string hash = req.get_header_value("X-Sample-Sha256");
            if (!valid_sha256(hash)) hash = sha256_hex(req.body);
            std::lock_guard<std::mutex> lock(mu);
            std::string id = "t-" + std::to_string(next_ticket++);
            tickets[id] = {hash, seed.resolve_after_polls};
            json j;
            j["ticket"] = id;
            j["submitted_at"] = iso8601_now_utc();
            res.set_content(j.dump(), "application/json");
        });

        server.Get(R"(/v1/ticket/(t-\d+))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       std::string id = req.matches[1];
                       std::lock_guard<std::mutex> lock(mu);
                       auto it = tickets.find(id);
                       if (it == tickets.end()) {
                           res.status = 404;
                           res.set_content(R"({"status":"unknown"})", "application/json");
                           return;
                       }
                       if (it->second.polls_left > 0) {
                           --it->second.polls_left;
                           res.status = 202;
                           res.set_content(R"({"status":"pending"})", "application/json");
                           return;
                       }
                       LookupResult r = result_for(it->second.sha256);
                       // An upload that resolved becomes queryable by hash.
                       seed.reports[it->second.sha256] = r;
                       res.set_content(lookup_result_to_json(r), "application/json");
                   });
    }
};

MockLookupServer::MockLookupServer(MockSeed seed) : impl_(std::make_unique<Impl>()) {
    impl_->seed = std::move(seed);
    impl_->routes();
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) throw Error("mock lookup server: bind failed");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

MockLookupServer::~MockLookupServer() { stop(); }

void MockLookupServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
    if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

int MockLookupServer::port() const { return impl_->port; }

std::string MockLookupServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace apklab
