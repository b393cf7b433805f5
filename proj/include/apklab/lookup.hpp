#pragma once

#include <optional>
#include <string>
#include <vector>

namespace apklab {

struct Detection {
    std::string engine;
    bool detected = false;
    std::string label;
};

struct LookupResult {
    std::string sha256;
    int total_engines = 0;
    std::vector<Detection> detections;
    std::string scanned_at;

    int positives() const;
};

struct UploadTicket {
    std::string id;
    std::string submitted_at;
};

enum class LookupStatus {
    Found,
    NotFound,
    Pending,      // uploaded, result not ready within the poll budget
    Rejected,     // upload refused by the service
    Unavailable,  // endpoint unreachable after retries
};

std::string_view to_string(LookupStatus s);

struct LookupOutcome {
    LookupStatus status = LookupStatus::Unavailable;
    std::optional<LookupResult> result;
    std::optional<UploadTicket> ticket;
    std::string detail;
};

struct PollPolicy {
    int interval_ms = 50;
    int max_attempts = 3;
};

// JSON-over-HTTP client: GET /v1/report/{sha256}, POST /v1/upload,
// GET /v1/ticket/{id}. The API key, when present in ANALYSIS_LOOKUP_KEY, is
// sent as X-Api-Key. Transport errors are retried, then reported as
// Unavailable; they never throw.
class LookupClient {
public:
    explicit LookupClient(std::string endpoint, int retries = 2);

    // Throws ConfigError on a malformed digest before any network use.
    LookupOutcome query_hash(const std::string& sha256);

    // Queries first and never re-uploads a hash the service already knows.
    LookupOutcome submit_and_poll(const std::string& sha256, const std::string& sample_bytes,
                                  const PollPolicy& policy);

private:
    LookupOutcome get_json(const std::string& path);

    std::string endpoint_;
    int retries_;
};

LookupResult lookup_result_from_json(const std::string& text);
std::string lookup_result_to_json(const LookupResult& r);
bool valid_sha256(const std::string& digest);

}  // namespace apklab
