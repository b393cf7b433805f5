#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apklab/record.hpp"

namespace apklab {

// Small sandboxed predicate language over record fields. Grammar:
//
//   expr    := and ('or' and)*
//   and     := unary ('and' unary)*
//   unary   := 'not' unary | '(' expr ')' | comparison
//   compare := operand op operand
//   op      := '==' '!=' '<' '<=' '>' '>=' contains startswith endswith matches
//   operand := field-path | 'string' | integer
//
// Field paths are dotted identifiers resolved against the record's field map;
// "event_type" resolves to the record's event type. String literals use
// single quotes with '' as the escaped quote. The right side of `matches`
// must be a string literal so the regex compiles at parse time.
//
// Evaluation is three-valued: a runtime fault (missing field, type mismatch)
// makes the whole expression indeterminate, which callers treat as non-match.
class Expression {
public:
    // Throws ParseError on syntax errors or an uncompilable regex.
    static Expression parse(const std::string& source);

    // Every field path referenced, in first-appearance order. Used for
    // load-time validation against the plugin's field schema.
    const std::vector<std::string>& fields() const { return fields_; }

    const std::string& source() const { return source_; }

    // nullopt = runtime fault; callers count it and treat as non-match.
    std::optional<bool> evaluate(const PluginRecord& record) const;

    struct Node;  // parse-tree node; layout is an implementation detail

private:
    std::shared_ptr<const Node> root_;  // shared: Expression is copyable
    std::vector<std::string> fields_;
    std::string source_;
};

}  // namespace apklab
