#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace apklab {

// One logcat "brief"-format line: L/tag( pid): message
struct LogcatLine {
    int line = 0;  // 1-based position in the file, the only ordering available
    char level = 'I';
    std::string tag;
    std::int64_t pid = 0;
    std::string message;
};

struct LogcatDiagnostic {
    int line = 0;
    std::string text;  // the unparsed line, preserved
};

struct LogcatParse {
    std::vector<LogcatLine> lines;
    std::vector<LogcatDiagnostic> diagnostics;
};

LogcatParse parse_logcat(const std::string& text);

// API call logged by an instrumented app: message grammar Class.method(args).
struct ApiCallRecord {
    int line = 0;
    std::int64_t pid = 0;
    std::string tag;
    std::string class_name;
    std::string method;
    std::string args_text;
    bool flagged = false;  // message did not parse; raw kept in args_text
};

// Lines whose tag equals monitor_tag, in order. Unparseable monitor lines
// yield flagged records so nothing from the monitor is dropped.
std::vector<ApiCallRecord> extract_api_calls(const LogcatParse& parsed,
                                             const std::string& monitor_tag);

}  // namespace apklab
