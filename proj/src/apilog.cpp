#include "apklab/apilog.hpp"

#include <cctype>
#include <cstring>
#include <sstream>

#include "apklab/textutil.hpp"

namespace apklab {
namespace {

constexpr const char* kLevels = "VDIWEF";

bool parse_line(const std::string& text, LogcatLine& out) {
    if (text.size() < 4 || text[1] != '/') return false;
    if (!std::strchr(kLevels, text[0])) return false;
    std::size_t paren = text.find('(', 2);
    if (paren == std::string::npos) return false;
    std::size_t close = text.find(')', paren);
    if (close == std::string::npos || text.compare(close, 3, "): ") != 0) return false;

    std::string pid_text = trim(text.substr(paren + 1, close - paren - 1));
    if (pid_text.empty()) return false;
    for (char c : pid_text) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }

    out.level = text[0];
    out.tag = trim(text.substr(2, paren - 2));
    out.pid = std::stoll(pid_text);
    out.message = text.substr(close + 3);
    return !out.tag.empty();
}

}  // namespace

LogcatParse parse_logcat(const std::string& text) {
    LogcatParse out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        LogcatLine parsed;
        parsed.line = line_no;
        if (parse_line(line, parsed)) {
            out.lines.push_back(std::move(parsed));
        } else {
            out.diagnostics.push_back({line_no, line});
        }
    }
    return out;
}

std::vector<ApiCallRecord> extract_api_calls(const LogcatParse& parsed,
                                             const std::string& monitor_tag) {
    std::vector<ApiCallRecord> out;
    for (const LogcatLine& l : parsed.lines) {
        if (l.tag != monitor_tag) continue;
        ApiCallRecord rec;
        rec.line = l.line;
        rec.pid = l.pid;
        rec.tag = l.tag;

        const std::string& m = l.message;
        std::size_t open = m.find('(');
        std::size_t close = m.rfind(')');
        std::size_t dot = open == std::string::npos ? std::string::npos
                                                    : m.rfind('.', open);
        bool ok = open != std::string::npos && close != std::string::npos && close > open &&
                  dot != std::string::npos && dot > 0 && dot + 1 < open;
        if (!ok) {
            rec.flagged = true;
            rec.args_text = m;
            out.push_back(std::move(rec));
            continue;
        }
        rec.class_name = m.substr(0, dot);
        rec.method = m.substr(dot + 1, open - dot - 1);
        rec.args_text = m.substr(open + 1, close - open - 1);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace apklab
