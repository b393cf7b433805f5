#include "apklab/report.hpp"

#include <map>
#include <set>

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"
#include "apklab/xmlwriter.hpp"

namespace apklab {
namespace {

// Status entries come from the core plugin's plugin_status records.
struct PluginStatus {
    std::string status;
    std::string detail;
};

std::string field_or(const FieldMap& fields, const std::string& key) {
    auto it = fields.find(key);
    return it == fields.end() ? "" : field_to_string(it->second);
}

}  // namespace

std::string render_report(const RunMetaRow& meta, const std::vector<PluginRecord>& records,
                          const FilterRuleSet& rules) {
    std::map<std::string, PluginStatus> statuses;
    std::string sample_size;
    std::map<std::string, std::vector<PluginRecord>> by_plugin;

    for (const auto& rec : records) {
        if (rec.plugin == "core") {
            if (rec.event_type == "plugin_status") {
                statuses[field_or(rec.fields, "plugin")] = {field_or(rec.fields, "status"),
                                                            field_or(rec.fields, "detail")};
            } else if (rec.event_type == "sample_meta") {
                sample_size = field_or(rec.fields, "size");
            }
            continue;
        }
        by_plugin[rec.plugin].push_back(rec);
    }

    // A section per plugin that ran or left records; core renders as meta.
    std::set<std::string> sections;
    for (const auto& [name, st] : statuses) sections.insert(name);
    for (const auto& [name, recs] : by_plugin) sections.insert(name);

    XmlWriter xml;
    xml.open("analysis", {{"run_id", meta.run_id}, {"android_version", meta.android_version}});

    xml.open("meta");
    XmlAttrs sample_attrs{{"filename", meta.filename}};
    if (!sample_size.empty()) sample_attrs.emplace_back("size", sample_size);
    sample_attrs.emplace_back("md5", meta.md5);
    sample_attrs.emplace_back("sha1", meta.sha1);
    sample_attrs.emplace_back("sha256", meta.sha256);
    xml.self_close("sample", sample_attrs);
    xml.self_close("timestamps",
                   {{"started_at", meta.started_at}, {"finished_at", meta.finished_at}});
    xml.open("plugins");
    for (const auto& [name, st] : statuses) {
        XmlAttrs attrs{{"name", name}, {"status", st.status}};
        if (!st.detail.empty()) attrs.emplace_back("detail", st.detail);
        xml.self_close("plugin", attrs);
    }
    xml.close();  // plugins
    xml.close();  // meta

    for (const auto& section : sections) {
        auto it = by_plugin.find(section);
        static const std::vector<PluginRecord> kNone;
        const auto& input = it == by_plugin.end() ? kNone : it->second;
        auto [kept, stats] = apply_filters(rules, input);
        xml.open("result", {{"plugin", section},
                            {"total", std::to_string(stats.total)},
                            {"suppressed", std::to_string(stats.suppressed)},
                            {"expr_faults", std::to_string(stats.expr_faults)}});
        for (const auto& [rule_id, count] : stats.per_rule)
            xml.self_close("filter", {{"rule", rule_id}, {"suppressed", std::to_string(count)}});
        for (const auto& rec : kept) {
            xml.open("record", {{"event_type", rec.event_type},
                                {"seq", std::to_string(rec.seq)},
                                {"ts", std::to_string(rec.ts)}});
            for (const auto& [name, value] : rec.fields)
                xml.text_element("field", {{"name", name}}, field_to_string(value));
            xml.close();  // record
        }
        xml.close();  // result
    }

    xml.close();  // analysis
    return xml.str();
}

std::string generate_report(const ResultStore& store, const std::string& run_id,
                            const FilterRuleSet& rules, const std::filesystem::path& out_path) {
    auto meta = store.run_meta(run_id);
    if (!meta) throw StoreError("store: no analysis_run row for '" + run_id + "'");
    std::string doc = render_report(*meta, store.records_for_run(run_id), rules);
    write_file(out_path, doc);
    return doc;
}

}  // namespace apklab
