#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apklab {

// Sectioned key/value config text: `[section]` headers, `key = value` lines,
// `#` or `;` comments. Values are kept verbatim (trimmed).
struct IniDocument {
    // section -> key -> value; keys sorted for stable serialization
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniDocument parse(std::string_view text);  // throws ConfigError with line number
    std::string serialize() const;

    const std::string* find(const std::string& section, const std::string& key) const;
    // Per-key override: every key present in `other` replaces ours.
    void merge_from(const IniDocument& other);
};

enum class AndroidVersion { V2_3, V4_0, V4_1, V4_2 };

std::string_view to_string(AndroidVersion v);
std::optional<AndroidVersion> android_version_from_string(std::string_view s);

using PluginSettings = std::map<std::string, std::string>;

struct FrameworkConfig {
    AndroidVersion android_version = AndroidVersion::V4_1;
    std::filesystem::path result_root = "results";
    std::filesystem::path image_source;
    std::map<std::string, PluginSettings> plugin_settings;
    std::vector<std::string> enabled_plugins;
    std::filesystem::path sim_script_path;
    std::filesystem::path filter_rules_path;
    std::string lookup_endpoint;

    // Merged source document, kept for the config.snapshot artifact.
    IniDocument merged;

    const PluginSettings& settings_for(const std::string& plugin) const;
    std::string setting_or(const std::string& plugin, const std::string& key,
                           const std::string& fallback) const;
};

// Defaults overruled per-key by the optional custom text. Unknown sections are
// preserved as plugin settings. Throws ConfigError on syntax errors or an
// unsupported android_version.
FrameworkConfig load_config(std::string_view defaults_text,
                            std::optional<std::string_view> override_text = std::nullopt);

// Built-in default configuration (mirrored in data/config/default.ini).
std::string_view default_config_text();

}  // namespace apklab
