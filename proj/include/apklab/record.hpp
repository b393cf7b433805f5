#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include <json.hpp>

namespace apklab {

// Record fields are flat string/integer pairs; std::map keeps keys sorted so
// the serialized payload is canonical (sorted keys, no insignificant
// whitespace) and report regeneration stays byte-stable.
using FieldValue = std::variant<std::string, std::int64_t>;
using FieldMap = std::map<std::string, FieldValue>;

// One normalized analysis finding; the unit of raw logging, storage,
// filtering, and reporting.
struct PluginRecord {
    std::string plugin;
    std::string event_type;
    std::int64_t seq = 0;  // strictly increasing per plugin per run
    std::int64_t ts = 0;   // logical timestamp
    FieldMap fields;

    bool operator==(const PluginRecord&) const = default;
};

std::string field_to_string(const FieldValue& v);

nlohmann::json fields_to_json(const FieldMap& fields);
FieldMap fields_from_json(const nlohmann::json& j);  // throws ParseError on non string/int values

std::string canonical_fields_json(const FieldMap& fields);

nlohmann::json record_to_json(const PluginRecord& rec);
PluginRecord record_from_json(const nlohmann::json& j);

// One canonical JSON object, no trailing newline.
std::string record_to_line(const PluginRecord& rec);
PluginRecord record_from_line(const std::string& line);

}  // namespace apklab
