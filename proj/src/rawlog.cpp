#include "apklab/rawlog.hpp"

#include <fstream>

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"

namespace apklab {

RecordBook::RecordBook(std::filesystem::path raw_dir) : raw_dir_(std::move(raw_dir)) {
    std::error_code ec;
    std::filesystem::create_directories(raw_dir_, ec);
}

const PluginRecord& RecordBook::emit(const std::string& plugin, std::string event_type,
                                     std::int64_t ts, FieldMap fields) {
    PluginRecord rec;
    rec.plugin = plugin;
    rec.event_type = std::move(event_type);
    rec.seq = ++next_seq_[plugin];
    rec.ts = ts;
    rec.fields = std::move(fields);
    records_.push_back(std::move(rec));
    const PluginRecord& stored = records_.back();

    std::ofstream out(raw_path(plugin), std::ios::binary | std::ios::app);
    if (out) out << record_to_line(stored) << "\n";
    if (!out) io_errors_.push_back("raw log append failed for plugin " + plugin);
    return stored;
}

std::map<std::string, std::filesystem::path> RecordBook::raw_paths() const {
    std::map<std::string, std::filesystem::path> out;
    for (const auto& [plugin, _] : next_seq_) out[plugin] = raw_path(plugin);
    return out;
}

std::filesystem::path RecordBook::raw_path(const std::string& plugin) const {
    return raw_dir_ / (plugin + ".jsonl");
}

std::vector<PluginRecord> read_raw_log(const std::filesystem::path& file) {
    std::vector<PluginRecord> out;
    int lineno = 0;
    for (const auto& line : split(read_file(file.string()), '\n')) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(record_from_line(line));
        } catch (const std::exception& e) {
            throw ParseError(std::string("bad raw log line: ") + e.what(), lineno);
        }
    }
    return out;
}

}  // namespace apklab
