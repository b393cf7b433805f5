#include "apklab/filters.hpp"

#include <algorithm>

#include <json.hpp>

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

using nlohmann::json;

const FieldSchema kCoreSchema{
    {"event_type", "plugin", "status", "detail", "filename", "md5", "sha1", "sha256", "size"},
    {}};
const FieldSchema kFsdiffSchema{
    {"event_type", "path", "kind", "sha256", "target", "mode", "pre_sha256", "post_sha256",
     "pre_mode", "post_mode"},
    {}};
const FieldSchema kNetworkSchema{
    {"event_type", "proto", "initiator_ip", "initiator_port", "responder_ip", "responder_port",
     "packets", "bytes", "first_us", "last_us", "txid", "qname", "qtype", "nxdomain", "answers",
     "parse_error", "method", "url", "version", "host", "path", "headers", "body_excerpt",
     "client", "server"},
    {"get.", "post.", "header."}};
const FieldSchema kSyscallSchema{
    {"event_type", "syscall", "pid", "comm", "ret", "indicator", "line", "message", "processes",
     "total_calls", "suspicious", "path", "flags", "mode", "fd", "count", "old_path", "new_path",
     "uid", "gid", "ruid", "euid", "rgid", "egid", "argv"},
    {}};
const FieldSchema kStaticSchema{
    {"event_type", "package", "permissions", "services", "receivers", "activities", "entry",
     "url", "detected", "implied", "mismatch"},
    {}};
const FieldSchema kApilogSchema{
    {"event_type", "line", "pid", "tag", "class_name", "method", "args_text", "flagged", "text",
     "level", "message"},
    {}};
const FieldSchema kHashlookupSchema{
    {"event_type", "sha256", "status", "positives", "total_engines", "scanned_at", "ticket",
     "detail", "engine", "detected", "label"},
    {}};

// Maps each top-level array element to the line its opening brace is on.
// Runs after json::parse succeeded, so brace/string structure is sound.
std::vector<int> rule_start_lines(const std::string& text) {
    std::vector<int> lines;
    int line = 1;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (char c : text) {
        if (c == '\n') ++line;
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            if (c == '{' && depth == 1) lines.push_back(line);
            ++depth;
        } else if (c == '}' || c == ']') {
            --depth;
        }
    }
    return lines;
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ParseError("filters line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& j, const char* key, int line) {
    if (!j.contains(key) || !j[key].is_string())
        fail(line, std::string("missing or non-string '") + key + "'");
    return j[key].get<std::string>();
}

Matcher compile_matcher(const std::string& kind_text, const std::string& pattern,
                        const std::string& field, const FieldSchema& schema,
                        const std::string& plugin, int line) {
    Matcher m;
    m.kind = matcher_kind_from_string(kind_text);
    m.pattern = pattern;
    if (m.kind == MatcherKind::Expression) {
        if (!field.empty()) fail(line, "expression matchers take no 'field'");
        try {
            m.expr = Expression::parse(pattern);
        } catch (const ParseError& e) {
            fail(line, e.what());
        }
        for (const auto& f : m.expr->fields())
            if (!schema.known_field(f))
                fail(line, "unknown field '" + f + "' for plugin '" + plugin + "'");
        return m;
    }
    if (field.empty()) fail(line, "missing or non-string 'field'");
    if (!schema.known_field(field))
        fail(line, "unknown field '" + field + "' for plugin '" + plugin + "'");
    if (m.kind == MatcherKind::Regex) {
        try {
            m.regex = std::make_shared<const std::regex>(pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            fail(line, "bad regex '" + pattern + "': " + e.what());
        }
    }
    return m;
}

// Regex/substring matchers test the named field; integers match their
// decimal rendering. A missing field is a clean non-match.
bool matcher_hits(const Matcher& m, const std::string& field, const PluginRecord& record,
                  FilterStats* stats) {
    if (m.kind == MatcherKind::Expression) {
        auto v = m.expr->evaluate(record);
        if (!v) {
            if (stats) ++stats->expr_faults;
            return false;
        }
        return *v;
    }
    std::string value;
    if (field == "event_type") {
        value = record.event_type;
    } else if (auto it = record.fields.find(field); it != record.fields.end()) {
        value = field_to_string(it->second);
    } else {
        return false;
    }
    if (m.kind == MatcherKind::Substring) return value.find(m.pattern) != std::string::npos;
    return std::regex_search(value, *m.regex);
}

}  // namespace

MatcherKind matcher_kind_from_string(const std::string& s) {
    if (s == "regex") return MatcherKind::Regex;
    if (s == "substring") return MatcherKind::Substring;
    if (s == "expression") return MatcherKind::Expression;
    throw ParseError("unknown matcher kind '" + s + "'");
}

std::string to_string(MatcherKind k) {
    switch (k) {
        case MatcherKind::Regex: return "regex";
        case MatcherKind::Substring: return "substring";
        case MatcherKind::Expression: return "expression";
    }
    return "?";
}

bool FieldSchema::known_field(const std::string& name) const {
    if (std::find(exact.begin(), exact.end(), name) != exact.end()) return true;
    for (const auto& p : prefixes)
        if (name.size() > p.size() && name.compare(0, p.size(), p) == 0) return true;
    return false;
}

const FieldSchema* plugin_schema(const std::string& plugin) {
    if (plugin == "core") return &kCoreSchema;
    if (plugin == "fsdiff") return &kFsdiffSchema;
    if (plugin == "network") return &kNetworkSchema;
    if (plugin == "syscall") return &kSyscallSchema;
    if (plugin == "static") return &kStaticSchema;
    if (plugin == "apilog") return &kApilogSchema;
    if (plugin == "hashlookup") return &kHashlookupSchema;
    return nullptr;
}

FilterRuleSet load_rules(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("filters: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("filters: top-level value must be an array");

    std::vector<int> lines = rule_start_lines(text);
    FilterRuleSet set;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        int line = i < lines.size() ? lines[i] : 1;
        const json& j = doc[i];
        if (!j.is_object()) fail(line, "rule must be an object");

        BlacklistRule rule;
        rule.plugin = require_string(j, "plugin", line);
        const FieldSchema* schema = plugin_schema(rule.plugin);
        if (!schema) fail(line, "unknown plugin '" + rule.plugin + "'");

        rule.id = j.value("id", "rule-" + std::to_string(i + 1));
        for (const auto& prior : set.rules)
            if (prior.id == rule.id) fail(line, "duplicate rule id '" + rule.id + "'");

        rule.field = j.value("field", "");
        rule.matcher = compile_matcher(require_string(j, "kind", line),
                                       require_string(j, "pattern", line), rule.field, *schema,
                                       rule.plugin, line);

        if (j.contains("exceptions")) {
            if (!j["exceptions"].is_array()) fail(line, "'exceptions' must be an array");
            for (const json& ej : j["exceptions"]) {
                if (!ej.is_object()) fail(line, "exception must be an object");
                WhitelistException ex;
                ex.field = ej.value("field", "");
                ex.matcher = compile_matcher(require_string(ej, "kind", line),
                                             require_string(ej, "pattern", line), ex.field,
                                             *schema, rule.plugin, line);
                rule.exceptions.push_back(std::move(ex));
            }
        }
        set.rules.push_back(std::move(rule));
    }
    return set;
}

FilterRuleSet load_rules_file(const std::filesystem::path& path) {
    return load_rules(read_file(path));
}

Verdict evaluate(const FilterRuleSet& rules, const PluginRecord& record, FilterStats* stats) {
    for (const auto& rule : rules.rules) {
        if (rule.plugin != record.plugin) continue;
        if (!matcher_hits(rule.matcher, rule.field, record, stats)) continue;
        bool excused = false;
        for (const auto& ex : rule.exceptions) {
            if (matcher_hits(ex.matcher, ex.field, record, stats)) {
                excused = true;
                break;
            }
        }
        if (!excused) return {true, rule.id};
    }
    return {false, ""};
}

std::pair<std::vector<PluginRecord>, FilterStats> apply_filters(
    const FilterRuleSet& rules, const std::vector<PluginRecord>& records) {
    std::vector<PluginRecord> kept;
    FilterStats stats;
    for (const auto& rec : records) {
        ++stats.total;
        Verdict v = evaluate(rules, rec, &stats);
        if (v.suppress) {
            ++stats.suppressed;
            ++stats.per_rule[v.rule_id];
        } else {
            kept.push_back(rec);
        }
    }
    return {std::move(kept), stats};
}

}  // namespace apklab
