#include "apklab/config.hpp"

#include <sstream>

#include "apklab/errors.hpp"
#include "apklab/textutil.hpp"

namespace apklab {

IniDocument IniDocument::parse(std::string_view text) {
    IniDocument doc;
    std::string current;  // empty until the first section header
    int lineno = 0;
    for (const auto& raw : split(text, '\n')) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("malformed section header", lineno);
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty()) throw ConfigError("empty section name", lineno);
            doc.sections[current];  // a section may stay empty
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected `key = value`", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno);
        if (current.empty()) throw ConfigError("key outside of any section", lineno);
        doc.sections[current][key] = value;
    }
    return doc;
}

std::string IniDocument::serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, kv] : sections) {
        if (!first) out << "\n";
        first = false;
        out << "[" << name << "]\n";
        for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    }
    return out.str();
}

const std::string* IniDocument::find(const std::string& section, const std::string& key) const {
    auto sit = sections.find(section);
    if (sit == sections.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    return &kit->second;
}

void IniDocument::merge_from(const IniDocument& other) {
    for (const auto& [name, kv] : other.sections) {
        auto& target = sections[name];
        for (const auto& [k, v] : kv) target[k] = v;
    }
}

std::string_view to_string(AndroidVersion v) {
    switch (v) {
        case AndroidVersion::V2_3: return "2.3";
        case AndroidVersion::V4_0: return "4.0";
        case AndroidVersion::V4_1: return "4.1";
        case AndroidVersion::V4_2: return "4.2";
    }
    return "?";
}

std::optional<AndroidVersion> android_version_from_string(std::string_view s) {
    if (s == "2.3") return AndroidVersion::V2_3;
    if (s == "4.0") return AndroidVersion::V4_0;
    if (s == "4.1") return AndroidVersion::V4_1;
    if (s == "4.2") return AndroidVersion::V4_2;
    return std::nullopt;
}

const PluginSettings& FrameworkConfig::settings_for(const std::string& plugin) const {
    static const PluginSettings kEmpty;
    auto it = plugin_settings.find(plugin);
    return it == plugin_settings.end() ? kEmpty : it->second;
}

std::string FrameworkConfig::setting_or(const std::string& plugin, const std::string& key,
                                        const std::string& fallback) const {
    const auto& s = settings_for(plugin);
    auto it = s.find(key);
    return it == s.end() ? fallback : it->second;
}

FrameworkConfig load_config(std::string_view defaults_text,
                            std::optional<std::string_view> override_text) {
    IniDocument doc = IniDocument::parse(defaults_text);
    if (override_text) doc.merge_from(IniDocument::parse(*override_text));

    FrameworkConfig cfg;
    cfg.merged = doc;

    if (const std::string* v = doc.find("core", "android_version")) {
        auto ver = android_version_from_string(*v);
        if (!ver) throw ConfigError("unknown android_version: " + *v +
                                    " (supported: 2.3, 4.0, 4.1, 4.2)");
        cfg.android_version = *ver;
    }
    if (const std::string* v = doc.find("core", "result_root")) cfg.result_root = *v;
    if (const std::string* v = doc.find("core", "image_source")) cfg.image_source = *v;
    if (const std::string* v = doc.find("core", "sim_script")) cfg.sim_script_path = *v;
    if (const std::string* v = doc.find("core", "filter_rules")) cfg.filter_rules_path = *v;
    if (const std::string* v = doc.find("core", "lookup_endpoint")) cfg.lookup_endpoint = *v;
    if (const std::string* v = doc.find("core", "enabled_plugins"))
        cfg.enabled_plugins = split_trimmed(*v, ',');

    for (const auto& [name, kv] : doc.sections) {
        if (name == "core") continue;
        cfg.plugin_settings[name] = kv;
    }
    // Every enabled plugin gets a settings section, possibly empty.
    for (const auto& name : cfg.enabled_plugins) cfg.plugin_settings[name];

    return cfg;
}

std::string_view default_config_text() {
    static const std::string kDefault = R"ini([core]
android_version = 4.1
result_root = results
image_source = data/fixtures/clean.json
enabled_plugins = fsdiff, network, syscall, static, apilog, hashlookup
sim_script = data/scripts/default.sim
filter_rules = data/filters/default.json
lookup_endpoint = http://127.0.0.1:18790

[network]
http_ports = 80, 8080

[static]
min_string_run = 6

[apilog]
monitor_tag = ApiMonitor

[syscall]
indicators =

[hashlookup]
retries = 2
poll_interval_ms = 50
poll_max_attempts = 3
upload_if_unknown = true
)ini";
    return kDefault;
}

}  // namespace apklab
