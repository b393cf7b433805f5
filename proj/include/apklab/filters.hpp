#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "apklab/filter_expr.hpp"
#include "apklab/record.hpp"

namespace apklab {

enum class MatcherKind { Regex, Substring, Expression };

MatcherKind matcher_kind_from_string(const std::string& s);  // throws ParseError
std::string to_string(MatcherKind k);

// Compiled matcher. Regex and substring matchers test one named field;
// expression matchers reference fields inside their source text.
struct Matcher {
    MatcherKind kind = MatcherKind::Substring;
    std::string pattern;
    std::shared_ptr<const std::regex> regex;  // Regex kind only
    std::optional<Expression> expr;           // Expression kind only
};

struct WhitelistException {
    std::string field;  // empty for expression matchers
    Matcher matcher;
};

// Suppression rule: a record it matches is dropped from the report unless
// one of the exceptions also matches. Exceptions are never evaluated on
// their own; they only carve records back out of this rule's match set.
struct BlacklistRule {
    std::string id;
    std::string plugin;
    std::string field;  // empty for expression matchers
    Matcher matcher;
    std::vector<WhitelistException> exceptions;
};

struct FilterRuleSet {
    std::vector<BlacklistRule> rules;  // file order; evaluation order
};

// Parses and compiles a filters.json document (top-level array of rule
// objects {id?, plugin, field?, kind, pattern, exceptions?}). Errors carry
// the line the offending rule starts on. Unknown plugin names and field
// paths are load errors: a typo must not silently disable a rule.
FilterRuleSet load_rules(const std::string& text);
FilterRuleSet load_rules_file(const std::filesystem::path& path);

struct Verdict {
    bool suppress = false;
    std::string rule_id;  // first matching rule, file order
};

struct FilterStats {
    std::int64_t total = 0;
    std::int64_t suppressed = 0;
    std::map<std::string, std::int64_t> per_rule;  // rule id → suppressed count
    std::int64_t expr_faults = 0;  // expression evaluations that faulted (→ non-match)
};

// Pure in (rules, record); `stats` only collects expression fault counts.
Verdict evaluate(const FilterRuleSet& rules, const PluginRecord& record,
                 FilterStats* stats = nullptr);

// Order-preserving partition of `records` into kept and suppressed.
std::pair<std::vector<PluginRecord>, FilterStats> apply_filters(
    const FilterRuleSet& rules, const std::vector<PluginRecord>& records);

// Field schema for one plugin's records: exact names plus wildcard prefixes
// for families like get.<param>. Used to validate rule field paths at load.
struct FieldSchema {
    std::vector<std::string> exact;
    std::vector<std::string> prefixes;

    bool known_field(const std::string& name) const;
};

// nullptr when no builtin plugin has that name.
const FieldSchema* plugin_schema(const std::string& plugin);

}  // namespace apklab
