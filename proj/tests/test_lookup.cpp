#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "apklab/errors.hpp"
#include "apklab/hashing.hpp"
#include "apklab/lookup.hpp"
#include "apklab/lookup_mock.hpp"

using namespace apklab;

namespace {

LookupResult canned_result(const std::string& sha256, int total, int positive) {
    LookupResult r;
    r.sha256 = sha256;
    r.total_engines = total;
    r.scanned_at = "2013-09-02T10:15:30Z";
    for (int n = 0; n < total; ++n) {
        Detection d;
        d.engine = "engine-" + std::to_string(n);
        d.detected = n < positive;
        d.label = d.detected ? "Trojan.AndroidOS.Agent" : "";
        r.detections.push_back(std::move(d));
    }
    return r;
}

PollPolicy fast_policy(int max_attempts) {
    PollPolicy p;
    p.interval_ms = 1;
    p.max_attempts = max_attempts;
    return p;
}

}  // namespace

TEST_CASE("digest validation happens before any network use") {
    CHECK(valid_sha256(std::string(64, 'a')));
    CHECK(valid_sha256(sha256_hex("anything")));
    CHECK_FALSE(valid_sha256("xyz"));
    CHECK_FALSE(valid_sha256(std::string(63, 'a')));
    CHECK_FALSE(valid_sha256(std::string(64, 'A')));  // lowercase only
    CHECK_FALSE(valid_sha256(std::string(64, 'g')));

    // No server exists at this endpoint; the throw proves no connection was tried.
    LookupClient client("http://127.0.0.1:1", 0);
    CHECK_THROWS_WITH_AS(client.query_hash("xyz"),
                         doctest::Contains("not a sha256 digest: 'xyz'"), ConfigError);
}

TEST_CASE("result JSON round trips and counts positives") {
    LookupResult r = canned_result(std::string(64, 'b'), 46, 35);
    CHECK(r.positives() == 35);

    LookupResult back = lookup_result_from_json(lookup_result_to_json(r));
    CHECK(back.sha256 == r.sha256);
    CHECK(back.total_engines == 46);
    CHECK(back.scanned_at == r.scanned_at);
    REQUIRE(back.detections.size() == 46);
    CHECK(back.positives() == 35);
    CHECK(back.detections[0].engine == "engine-0");
    CHECK(back.detections[0].detected);
    CHECK(back.detections[0].label == "Trojan.AndroidOS.Agent");
    CHECK_FALSE(back.detections[45].detected);

    CHECK_THROWS_WITH_AS(lookup_result_from_json("not json"),
                         doctest::Contains("lookup: invalid JSON"), ParseError);
    CHECK_THROWS_WITH_AS(
        lookup_result_from_json(
            R"({"total_engines":1,"detections":[{"engine":"a"},{"engine":"b"}]})"),
        doctest::Contains("more detections than engines"), ParseError);
}

TEST_CASE("status names") {
    CHECK(to_string(LookupStatus::Found) == "found");
    CHECK(to_string(LookupStatus::NotFound) == "not_found");
    CHECK(to_string(LookupStatus::Pending) == "pending");
    CHECK(to_string(LookupStatus::Rejected) == "rejected");
    CHECK(to_string(LookupStatus::Unavailable) == "unavailable");
}

TEST_CASE("seeded hash is found with its detection counts intact") {
    std::string hash = sha256_hex("known malicious sample");
    MockSeed seed;
    seed.reports[hash] = canned_result(hash, 46, 35);
    MockLookupServer server(std::move(seed));
    LookupClient client(server.endpoint());

    LookupOutcome out = client.query_hash(hash);
    CHECK(out.status == LookupStatus::Found);
    REQUIRE(out.result.has_value());
    CHECK(out.result->sha256 == hash);
    CHECK(out.result->total_engines == 46);
    CHECK(out.result->positives() == 35);

    LookupOutcome missing = client.query_hash(std::string(64, '0'));
    CHECK(missing.status == LookupStatus::NotFound);
    CHECK_FALSE(missing.result.has_value());
}

TEST_CASE("submit_and_poll never re-uploads a hash the service knows") {
    std::string hash = sha256_hex("already catalogued");
    MockSeed seed;
    seed.reports[hash] = canned_result(hash, 10, 4);
    seed.resolve_after_polls = 99;  // an upload path would hang on this
    MockLookupServer server(std::move(seed));
    LookupClient client(server.endpoint());

    LookupOutcome out = client.submit_and_poll(hash, "bytes", fast_policy(1));
    CHECK(out.status == LookupStatus::Found);
    CHECK_FALSE(out.ticket.has_value());  // no upload happened
    REQUIRE(out.result.has_value());
    CHECK(out.result->positives() == 4);
}

TEST_CASE("unknown sample uploads, polls and resolves") {
    std::string sample = "previously unseen sample bytes";
    std::string hash = sha256_hex(sample);
    MockSeed seed;
    seed.resolve_after_polls = 0;
    MockLookupServer server(std::move(seed));
    LookupClient client(server.endpoint());

    LookupOutcome out = client.submit_and_poll(hash, sample, fast_policy(1));
    CHECK(out.status == LookupStatus::Found);
    REQUIRE(out.ticket.has_value());
    CHECK(out.ticket->id.substr(0, 2) == "t-");
    REQUIRE(out.result.has_value());
    CHECK(out.result->sha256 == hash);
    CHECK(out.result->positives() == 0);  // synthesized clean verdict
    CHECK(out.result->total_engines == 46);

    // The resolved upload is now queryable by hash.
    CHECK(client.query_hash(hash).status == LookupStatus::Found);
}

TEST_CASE("poll budget decides between pending and found") {
    std::string sample = "slow scan sample";
    std::string hash = sha256_hex(sample);

    SUBCASE("budget too small leaves the ticket pending") {
        MockSeed seed;
        seed.resolve_after_polls = 2;
        MockLookupServer server(std::move(seed));
        LookupClient client(server.endpoint());
        LookupOutcome out = client.submit_and_poll(hash, sample, fast_policy(1));
        CHECK(out.status == LookupStatus::Pending);
        REQUIRE(out.ticket.has_value());
        CHECK(out.detail == "result not ready after 1 polls");
    }
    SUBCASE("a bigger budget sees the resolution") {
        MockSeed seed;
        seed.resolve_after_polls = 2;
        MockLookupServer server(std::move(seed));
        LookupClient client(server.endpoint());
        LookupOutcome out = client.submit_and_poll(hash, sample, fast_policy(3));
        CHECK(out.status == LookupStatus::Found);
        REQUIRE(out.result.has_value());
        CHECK(out.result->sha256 == hash);
    }
}

TEST_CASE("empty uploads are rejected by the service") {
    MockSeed seed;  // min_upload_size default 1
    MockLookupServer server(std::move(seed));
    LookupClient client(server.endpoint());

    LookupOutcome out = client.submit_and_poll(sha256_hex(""), "", fast_policy(1));
    CHECK(out.status == LookupStatus::Rejected);
    CHECK(out.detail.find("sample too small") != std::string::npos);
    CHECK_FALSE(out.ticket.has_value());
}

TEST_CASE("unreachable endpoint degrades to unavailable, never throws") {
    MockSeed seed;
    auto server = std::make_unique<MockLookupServer>(std::move(seed));
    std::string endpoint = server->endpoint();
    server.reset();  // port is now closed

    LookupClient client(endpoint, 1);
    LookupOutcome out = client.query_hash(std::string(64, 'c'));
    CHECK(out.status == LookupStatus::Unavailable);
    CHECK(out.detail.find("transport error") != std::string::npos);

    LookupOutcome up = client.submit_and_poll(std::string(64, 'c'), "bytes", fast_policy(1));
    CHECK(up.status == LookupStatus::Unavailable);
}

TEST_CASE("seed files configure reports and scheduling") {
    std::string hash_a(64, 'a');
    MockSeed seed = mock_seed_from_json(R"({
        "resolve_after_polls": 2,
        "min_upload_size": 16,
        "default_total_engines": 40,
        "reports": {
            ")" + hash_a + R"(": {"total_engines": 3, "detections": [
                {"engine": "x", "detected": true, "label": "Agent"},
                {"engine": "y", "detected": false}
            ]}
        }
    })");
    CHECK(seed.resolve_after_polls == 2);
    CHECK(seed.min_upload_size == 16);
    CHECK(seed.default_total_engines == 40);
    REQUIRE(seed.reports.count(hash_a) == 1);
    CHECK(seed.reports[hash_a].sha256 == hash_a);  // filled from the key
    CHECK(seed.reports[hash_a].positives() == 1);

    CHECK_THROWS_WITH_AS(mock_seed_from_json("nope"), doctest::Contains("mock seed: invalid JSON"),
                         ParseError);
}
