#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "apklab/record.hpp"

namespace apklab {

// Collects every record a run produces. Each emit assigns the plugin's next
// seq and appends one JSON line to raw/<plugin>.jsonl immediately; the raw
// logs are the most detailed view and are never filtered. Raw write failures
// do not lose the in-memory record but mark the book degraded.
class RecordBook {
public:
    explicit RecordBook(std::filesystem::path raw_dir);

    const PluginRecord& emit(const std::string& plugin, std::string event_type, std::int64_t ts,
                             FieldMap fields);

    const std::vector<PluginRecord>& records() const { return records_; }
    std::vector<PluginRecord> snapshot() const { return records_; }

    bool degraded() const { return !io_errors_.empty(); }
    const std::vector<std::string>& io_errors() const { return io_errors_; }

    std::map<std::string, std::filesystem::path> raw_paths() const;
    std::filesystem::path raw_path(const std::string& plugin) const;

private:
    std::filesystem::path raw_dir_;
    std::vector<PluginRecord> records_;
    std::map<std::string, std::int64_t> next_seq_;
    std::vector<std::string> io_errors_;
};

// Re-reads one raw log; tolerant of a trailing empty line only.
std::vector<PluginRecord> read_raw_log(const std::filesystem::path& file);

}  // namespace apklab
