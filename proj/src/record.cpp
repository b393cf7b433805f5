#include "apklab/record.hpp"

#include "apklab/errors.hpp"

namespace apklab {

std::string field_to_string(const FieldValue& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    return std::to_string(std::get<std::int64_t>(v));
}

nlohmann::json fields_to_json(const FieldMap& fields) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : fields) {
        if (std::holds_alternative<std::string>(v))
            j[k] = std::get<std::string>(v);
        else
            j[k] = std::get<std::int64_t>(v);
    }
    return j;
}

FieldMap fields_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("record fields must be a JSON object");
    FieldMap out;
    for (const auto& [k, v] : j.items()) {
        if (v.is_string())
            out[k] = v.get<std::string>();
        else if (v.is_number_integer())
            out[k] = v.get<std::int64_t>();
        else
            throw ParseError("field `" + k + "` must be a string or integer");
    }
    return out;
}

std::string canonical_fields_json(const FieldMap& fields) { return fields_to_json(fields).dump(); }

nlohmann::json record_to_json(const PluginRecord& rec) {
    nlohmann::json j = nlohmann::json::object();
    j["event_type"] = rec.event_type;
    j["fields"] = fields_to_json(rec.fields);
    j["plugin"] = rec.plugin;
    j["seq"] = rec.seq;
    j["ts"] = rec.ts;
    return j;
}

PluginRecord record_from_json(const nlohmann::json& j) {
    PluginRecord rec;
    rec.plugin = j.at("plugin").get<std::string>();
    rec.event_type = j.at("event_type").get<std::string>();
    rec.seq = j.at("seq").get<std::int64_t>();
    rec.ts = j.at("ts").get<std::int64_t>();
    rec.fields = fields_from_json(j.at("fields"));
    return rec;
}

std::string record_to_line(const PluginRecord& rec) { return record_to_json(rec).dump(); }

PluginRecord record_from_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, true);
    return record_from_json(j);
}

}  // namespace apklab
