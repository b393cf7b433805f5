#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apklab/record.hpp"

struct sqlite3;

namespace apklab {

// One row of the analysis_run table.
struct RunMetaRow {
    std::string run_id;
    std::string filename;
    std::string md5;
    std::string sha1;
    std::string sha256;
    std::string started_at;
    std::string finished_at;
    std::string android_version;

    bool operator==(const RunMetaRow&) const = default;
};

// Relational persistence for analysis results. Two tables:
//   analysis_run(run_id PK, filename, md5, sha1, sha256, started_at,
//                finished_at, android_version)
//   plugin_record(run_id FK, plugin, seq, event_type, ts, payload_json,
//                 PK (run_id, plugin, seq))
// Payloads are canonical JSON (sorted keys, no insignificant whitespace) so
// a report regenerated from the store alone is byte-stable.
class ResultStore {
public:
    explicit ResultStore(const std::filesystem::path& db_path);  // throws StoreError
    ~ResultStore();

    ResultStore(const ResultStore&) = delete;
    ResultStore& operator=(const ResultStore&) = delete;

    // Transactional and idempotent per run: the run's previous rows are
    // replaced, so persisting twice yields identical tables.
    void persist(const RunMetaRow& meta, const std::vector<PluginRecord>& records);

    std::optional<RunMetaRow> run_meta(const std::string& run_id) const;
    std::vector<std::string> run_ids() const;  // sorted

    // Ordered by (plugin ASC, seq ASC); report sections derive solely
    // from this read-back, never from in-memory records.
    std::vector<PluginRecord> records_for_run(const std::string& run_id) const;

    std::int64_t record_count(const std::string& run_id) const;
    std::int64_t record_count(const std::string& run_id, const std::string& plugin) const;

private:
    void exec(const char* sql);

    sqlite3* db_ = nullptr;
};

}  // namespace apklab
