#pragma once

#include <map>
#include <memory>
#include <string>

#include "apklab/lookup.hpp"

namespace apklab {

// Seed data for the loopback scan service used in tests and demos.
struct MockSeed {
    std::map<std::string, LookupResult> reports;  // sha256 → canned result
    int resolve_after_polls = 0;   // ticket polls before a result appears
    std::size_t min_upload_size = 1;
    int default_total_engines = 46;
};

MockSeed mock_seed_from_json(const std::string& text);

// Minimal scan service on 127.0.0.1 with an OS-assigned port. Serves the
// protocol LookupClient speaks; unknown uploaded hashes synthesize a clean
// result once their poll schedule elapses.
class MockLookupServer {
public:
    explicit MockLookupServer(MockSeed seed);
    ~MockLookupServer();

    MockLookupServer(const MockLookupServer&) = delete;
    MockLookupServer& operator=(const MockLookupServer&) = delete;

    int port() const;
    std::string endpoint() const;  // http://127.0.0.1:<port>
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace apklab
