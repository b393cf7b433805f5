#include "apklab/store.hpp"

#include <sqlite3.h>

#include <json.hpp>

#include "apklab/errors.hpp"

namespace apklab {
namespace {

constexpr const char* kSchemaSql = R"sql(
CREATE TABLE IF NOT EXISTS analysis_run (
    run_id TEXT PRIMARY KEY,
    filename TEXT NOT NULL,
    md5 TEXT NOT NULL,
    sha1 TEXT NOT NULL,
    sha256 TEXT NOT NULL,
    started_at TEXT NOT NULL,
    finished_at TEXT NOT NULL,
    android_version TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS plugin_record (
    run_id TEXT NOT NULL REFERENCES analysis_run(run_id),
    plugin TEXT NOT NULL,
    seq INTEGER NOT NULL,
    event_type TEXT NOT NULL,
    ts INTEGER NOT NULL,
    payload_json TEXT NOT NULL,
    PRIMARY KEY (run_id, plugin, seq)
);
CREATE INDEX IF NOT EXISTS idx_plugin_record_run_plugin
    ON plugin_record(run_id, plugin);
)sql";

// Finalizes the statement on scope exit.
struct Stmt {
    sqlite3_stmt* p = nullptr;

    Stmt(sqlite3* db, const char* sql) {
        if (sqlite3_prepare_v2(db, sql, -1, &p, nullptr) != SQLITE_OK)
            throw StoreError(std::string("store: prepare failed: ") + sqlite3_errmsg(db));
    }
    ~Stmt() { sqlite3_finalize(p); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    void bind(int idx, const std::string& v) {
        sqlite3_bind_text(p, idx, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    }
    void bind(int idx, std::int64_t v) { sqlite3_bind_int64(p, idx, v); }

    std::string column_text(int idx) const {
        const unsigned char* t = sqlite3_column_text(p, idx);
        return t ? reinterpret_cast<const char*>(t) : "";
    }
};

[[noreturn]] void db_fail(sqlite3* db, const char* what) {
    throw StoreError(std::string("store: ") + what + ": " + sqlite3_errmsg(db));
}

}  // namespace

ResultStore::ResultStore(const std::filesystem::path& db_path) {
    if (sqlite3_open(db_path.string().c_str(), &db_) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("store: cannot open " + db_path.string() + ": " + msg);
    }
    exec("PRAGMA foreign_keys = ON;");
    exec(kSchemaSql);
}

ResultStore::~ResultStore() { sqlite3_close(db_); }

void ResultStore::exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError("store: " + msg);
    }
}

void ResultStore::persist(const RunMetaRow& meta, const std::vector<PluginRecord>& records) {
    exec("BEGIN IMMEDIATE;");
    try {
        {
            // Upsert keeps the parent row in place so the child FK holds.
            Stmt s(db_,
                   "INSERT INTO analysis_run (run_id, filename, md5, sha1, sha256, started_at,"
                   " finished_at, android_version) VALUES (?,?,?,?,?,?,?,?)"
                   " ON CONFLICT(run_id) DO UPDATE SET filename=excluded.filename,"
                   " md5=excluded.md5, sha1=excluded.sha1, sha256=excluded.sha256,"
                   " started_at=excluded.started_at, finished_at=excluded.finished_at,"
                   " android_version=excluded.android_version;");
            s.bind(1, meta.run_id);
            s.bind(2, meta.filename);
            s.bind(3, meta.md5);
            s.bind(4, meta.sha1);
            s.bind(5, meta.sha256);
            s.bind(6, meta.started_at);
            s.bind(7, meta.finished_at);
            s.bind(8, meta.android_version);
            if (sqlite3_step(s.p) != SQLITE_DONE) db_fail(db_, "run upsert");
        }
        {
            Stmt s(db_, "DELETE FROM plugin_record WHERE run_id = ?;");
            s.bind(1, meta.run_id);
            if (sqlite3_step(s.p) != SQLITE_DONE) db_fail(db_, "record clear");
        }
        Stmt ins(db_,
                 "INSERT INTO plugin_record (run_id, plugin, seq, event_type, ts, payload_json)"
                 " VALUES (?,?,?,?,?,?);");
        for (const auto& rec : records) {
            sqlite3_reset(ins.p);
            sqlite3_clear_bindings(ins.p);
            ins.bind(1, meta.run_id);
            ins.bind(2, rec.plugin);
            ins.bind(3, rec.seq);
            ins.bind(4, rec.event_type);
            ins.bind(5, rec.ts);
            ins.bind(6, canonical_fields_json(rec.fields));
            if (sqlite3_step(ins.p) != SQLITE_DONE) db_fail(db_, "record insert");
        }
    } catch (...) {
        exec("ROLLBACK;");
        throw;
    }
    exec("COMMIT;");
}

std::optional<RunMetaRow> ResultStore::run_meta(const std::string& run_id) const {
    Stmt s(db_,
           "SELECT run_id, filename, md5, sha1, sha256, started_at, finished_at,"
           " android_version FROM analysis_run WHERE run_id = ?;");
    s.bind(1, run_id);
    int rc = sqlite3_step(s.p);
    if (rc == SQLITE_DONE) return std::nullopt;
    if (rc != SQLITE_ROW) db_fail(db_, "run query");
    RunMetaRow row;
    row.run_id = s.column_text(0);
    row.filename = s.column_text(1);
    row.md5 = s.column_text(2);
    row.sha1 = s.column_text(3);
    row.sha256 = s.column_text(4);
    row.started_at = s.column_text(5);
    row.finished_at = s.column_text(6);
    row.android_version = s.column_text(7);
    return row;
}

std::vector<std::string> ResultStore::run_ids() const {
    Stmt s(db_, "SELECT run_id FROM analysis_run ORDER BY run_id;");
    std::vector<std::string> ids;
    int rc;
    while ((rc = sqlite3_step(s.p)) == SQLITE_ROW) ids.push_back(s.column_text(0));
    if (rc != SQLITE_DONE) db_fail(db_, "run list");
    return ids;
}

std::vector<PluginRecord> ResultStore::records_for_run(const std::string& run_id) const {
    Stmt s(db_,
           "SELECT plugin, seq, event_type, ts, payload_json FROM plugin_record"
           " WHERE run_id = ? ORDER BY plugin ASC, seq ASC;");
    s.bind(1, run_id);
    std::vector<PluginRecord> out;
    int rc;
    while ((rc = sqlite3_step(s.p)) == SQLITE_ROW) {
        PluginRecord rec;
        rec.plugin = s.column_text(0);
        rec.seq = sqlite3_column_int64(s.p, 1);
        rec.event_type = s.column_text(2);
        rec.ts = sqlite3_column_int64(s.p, 3);
        std::string payload = s.column_text(4);
        try {
            rec.fields = fields_from_json(nlohmann::json::parse(payload));
        } catch (const std::exception& e) {
            throw StoreError("store: bad payload for (" + rec.plugin + ", " +
                             std::to_string(rec.seq) + "): " + e.what());
        }
        out.push_back(std::move(rec));
    }
    if (rc != SQLITE_DONE) db_fail(db_, "record query");
    return out;
}

std::int64_t ResultStore::record_count(const std::string& run_id) const {
    Stmt s(db_, "SELECT COUNT(*) FROM plugin_record WHERE run_id = ?;");
    s.bind(1, run_id);
    if (sqlite3_step(s.p) != SQLITE_ROW) db_fail(db_, "count query");
    return sqlite3_column_int64(s.p, 0);
}

std::int64_t ResultStore::record_count(const std::string& run_id,
                                       const std::string& plugin) const {
    Stmt s(db_, "SELECT COUNT(*) FROM plugin_record WHERE run_id = ? AND plugin = ?;");
    s.bind(1, run_id);
    s.bind(2, plugin);
    if (sqlite3_step(s.p) != SQLITE_ROW) db_fail(db_, "count query");
    return sqlite3_column_int64(s.p, 0);
}

}  // namespace apklab
