#include "apklab/simscript.hpp"

#include <charconv>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string_view>

#include "apklab/errors.hpp"

namespace apklab {
namespace {

struct Token {
    bool quoted = false;
    std::string text;
};

// Splits one source line into tokens. Returns nullopt with `error` set on a
// lexical problem; comment-only and blank lines yield an empty vector.
std::optional<std::vector<Token>> lex_line(std::string_view line, std::string& error) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        if (c == '#') break;
        if (c == '\'') {
            std::string value;
            ++i;
            bool closed = false;
            while (i < line.size()) {
                if (line[i] == '\'') {
                    if (i + 1 < line.size() && line[i + 1] == '\'') {
                        value.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                value.push_back(line[i]);
                ++i;
            }
            if (!closed) {
                error = "unterminated quote";
                return std::nullopt;
            }
            out.push_back({true, std::move(value)});
            continue;
        }
        std::string word;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
               line[i] != '#' && line[i] != '\'') {
            word.push_back(line[i]);
            ++i;
        }
        out.push_back({false, std::move(word)});
    }
    return out;
}

std::optional<std::int64_t> parse_int(const std::string& text) {
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

std::optional<double> parse_decimal(const std::string& text) {
    if (text.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(text.c_str(), &end);
    if (errno != 0 || end != text.c_str() + text.size()) return std::nullopt;
    return value;
}

// Argument shapes: S quoted string, I bare integer, D quoted decimal.
struct GrammarRow {
    std::string_view keyword;
    std::string_view shape;
};

constexpr GrammarRow kGrammar[] = {
    {"startApp", "S"},   {"stopApp", "S"},  {"callfrom", "S"}, {"callcancel", "S"},
    {"smsfrom", "SS"},   {"gsm", "S"},      {"battery", "SI"}, {"changeLocation", "DD"},
    {"monkey", "I"},     {"unlock", ""},    {"lock", ""},      {"shell", "S"},
    {"adb", "S"},        {"screenshot", "S"}, {"wait", "I"},
};

const GrammarRow* grammar_row(std::string_view keyword) {
    for (const auto& row : kGrammar) {
        if (row.keyword == keyword) return &row;
    }
    return nullptr;
}

std::string arity_message(const GrammarRow& row) {
    std::ostringstream os;
    os << "'" << row.keyword << "' takes " << row.shape.size() << " argument"
       << (row.shape.size() == 1 ? "" : "s");
    return os.str();
}

// Builds the action for one checked token list. `tokens[0]` is the keyword
// and arity/shape already validated against the grammar row.
std::optional<DeviceAction> build_action(const GrammarRow& row, const std::vector<Token>& tokens,
                                         std::string& error) {
    auto str = [&](std::size_t n) { return tokens[n + 1].text; };
    auto num = [&](std::size_t n) { return *parse_int(tokens[n + 1].text); };
    if (row.keyword == "startApp") return DeviceAction{StartApp{str(0)}};
    if (row.keyword == "stopApp") return DeviceAction{StopApp{str(0)}};
    if (row.keyword == "callfrom") return DeviceAction{IncomingCall{str(0)}};
    if (row.keyword == "callcancel") return DeviceAction{CancelCall{str(0)}};
    if (row.keyword == "smsfrom") return DeviceAction{IncomingSms{str(0), str(1)}};
    if (row.keyword == "gsm") {
        auto state = gsm_state_from_string(str(0));
        if (!state) {
            error = "unknown gsm state '" + str(0) + "'";
            return std::nullopt;
        }
        return DeviceAction{SetGsmState{*state}};
    }
    if (row.keyword == "battery") {
        auto status = battery_status_from_string(str(0));
        if (!status) {
            error = "unknown battery status '" + str(0) + "'";
            return std::nullopt;
        }
        return DeviceAction{SetBatteryState{static_cast<int>(num(1)), *status}};
    }
    if (row.keyword == "changeLocation") {
        auto lon = parse_decimal(str(0));
        auto lat = parse_decimal(str(1));
        if (!lon || !lat) {
            error = "malformed coordinate";
            return std::nullopt;
        }
        return DeviceAction{SetLocation{*lon, *lat}};
    }
    if (row.keyword == "monkey") return DeviceAction{MonkeyInput{static_cast<int>(num(0))}};
    if (row.keyword == "unlock") return DeviceAction{UnlockScreen{}};
    if (row.keyword == "lock") return DeviceAction{LockScreen{}};
    if (row.keyword == "shell") return DeviceAction{ShellCommand{str(0)}};
    if (row.keyword == "adb") return DeviceAction{AdbCommand{str(0)}};
    if (row.keyword == "screenshot") return DeviceAction{Screenshot{str(0)}};
    if (row.keyword == "wait") return DeviceAction{Wait{num(0)}};
    error = "unknown keyword '" + std::string(row.keyword) + "'";
    return std::nullopt;
}

// Parses one line; empty optional means blank/comment. Sets `error` instead
// of throwing so check_script can keep scanning.
std::optional<SimStatement> parse_line(std::string_view line, int line_no, std::string& error) {
    auto tokens = lex_line(line, error);
    if (!tokens) return std::nullopt;
    if (tokens->empty()) return std::nullopt;
    const Token& head = (*tokens)[0];
    if (head.quoted) {
        error = "expected a keyword, found a quoted string";
        return std::nullopt;
    }
    const GrammarRow* row = grammar_row(head.text);
    if (!row) {
        error = "unknown keyword '" + head.text + "'";
        return std::nullopt;
    }
    if (tokens->size() - 1 != row->shape.size()) {
        error = arity_message(*row);
        return std::nullopt;
    }
    for (std::size_t n = 0; n < row->shape.size(); ++n) {
        const Token& arg = (*tokens)[n + 1];
        char shape = row->shape[n];
        if ((shape == 'S' || shape == 'D') && !arg.quoted) {
            error = "argument " + std::to_string(n + 1) + " of '" + head.text +
                    "' must be quoted";
            return std::nullopt;
        }
        if (shape == 'I') {
            if (arg.quoted || !parse_int(arg.text)) {
                error = "argument " + std::to_string(n + 1) + " of '" + head.text +
                        "' must be an integer";
                return std::nullopt;
            }
        }
    }
    auto action = build_action(*row, *tokens, error);
    if (!action) return std::nullopt;
    SimStatement st;
    st.line = line_no;
    st.keyword = head.text;
    st.action = std::move(*action);
    return st;
}

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string format_decimal(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "0";
    return std::string(buf, ptr);
}

std::string format_statement(const SimStatement& st) {
    struct Fmt {
        std::string operator()(const StartApp& a) const { return "startApp " + quote(a.package); }
        std::string operator()(const StopApp& a) const { return "stopApp " + quote(a.package); }
        std::string operator()(const IncomingCall& a) const {
            return "callfrom " + quote(a.number);
        }
        std::string operator()(const CancelCall& a) const {
            return "callcancel " + quote(a.number);
        }
        std::string operator()(const IncomingSms& a) const {
            return "smsfrom " + quote(a.number) + " " + quote(a.text);
        }
        std::string operator()(const SetGsmState& a) const {
            return "gsm " + quote(std::string(to_string(a.state)));
        }
        std::string operator()(const SetBatteryState& a) const {
            return "battery " + quote(std::string(to_string(a.status))) + " " +
                   std::to_string(a.capacity);
        }
        std::string operator()(const SetLocation& a) const {
            return "changeLocation " + quote(format_decimal(a.lon)) + " " +
                   quote(format_decimal(a.lat));
        }
        std::string operator()(const MonkeyInput& a) const {
            return "monkey " + std::to_string(a.event_count);
        }
        std::string operator()(const UnlockScreen&) const { return "unlock"; }
        std::string operator()(const LockScreen&) const { return "lock"; }
        std::string operator()(const ShellCommand& a) const { return "shell " + quote(a.command); }
        std::string operator()(const AdbCommand& a) const { return "adb " + quote(a.command); }
        std::string operator()(const Screenshot& a) const {
            return "screenshot " + quote(a.label);
        }
        std::string operator()(const Wait& a) const { return "wait " + std::to_string(a.millis); }
    };
    return std::visit(Fmt{}, st.action);
}

}  // namespace

SimScript parse_script(const std::string& text) {
    SimScript script;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string error;
        auto st = parse_line(line, line_no, error);
        if (!error.empty()) throw ParseError(error, line_no);
        if (st) script.statements.push_back(std::move(*st));
    }
    return script;
}

std::string pretty_print(const SimScript& script) {
    std::string out;
    for (const auto& st : script.statements) {
        out += format_statement(st);
        out.push_back('\n');
    }
    return out;
}

SimulationLog execute_script(const SimScript& script, AnalysisTarget& target) {
    SimulationLog log;
    for (const auto& st : script.statements) {
        SimLogEntry entry;
        entry.line = st.line;
        entry.statement = format_statement(st);
        try {
            ActionAck ack = target.apply_action(st.action);
            entry.ok = true;
            entry.clock_ms = ack.clock_ms;
            entry.note = ack.note;
        } catch (const DeviceError& err) {
            entry.ok = false;
            entry.note = err.what();
            log.entries.push_back(std::move(entry));
            log.completed = false;
            return log;
        }
        log.entries.push_back(std::move(entry));
    }
    log.completed = true;
    return log;
}

std::vector<std::string> check_script(const std::string& text) {
    std::vector<std::string> problems;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string error;
        auto st = parse_line(line, line_no, error);
        if (!error.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": " + error);
            continue;
        }
        if (!st) continue;
        if (auto bad = validate_action(st->action)) {
            problems.push_back("line " + std::to_string(line_no) + ": " + *bad);
        }
    }
    return problems;
}

}  // namespace apklab
