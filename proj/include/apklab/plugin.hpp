#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "apklab/config.hpp"
#include "apklab/events.hpp"
#include "apklab/rawlog.hpp"
#include "apklab/run.hpp"

namespace apklab {

struct ArtifactBundle;

// Passed to every callback. Read-mostly; the shared config is mutable by
// design, the bundle pointer is set once artifacts have been collected.
struct StageContext {
    AnalysisRun& run;
    FrameworkConfig& shared_config;
    RecordBook& records;
    HookEvent event;
    const ArtifactBundle* bundle = nullptr;
    std::string_view sample_bytes;

    void emit(const std::string& plugin, std::string event_type, std::int64_t ts,
              FieldMap fields) {
        records.emit(plugin, std::move(event_type), ts, std::move(fields));
    }

    // A plugin that cannot deliver full results but keeps the run alive
    // records a degradation note instead of throwing.
    void mark_degraded(const std::string& plugin, const std::string& note) {
        run.degraded_plugins[plugin] = note;
    }

    std::filesystem::path scratch_dir(const std::string& plugin) const;
};

using HookCallback = std::function<void(StageContext&)>;

// Registration surface handed to Plugin::initialize. (plugin, event) pairs
// may repeat only with distinct priorities; a violation throws and disables
// the offending plugin.
class Registrar {
public:
    virtual ~Registrar() = default;
    virtual void add(HookEvent event, int priority, HookCallback callback) = 0;
};

class Plugin {
public:
    virtual ~Plugin() = default;
    virtual std::string name() const = 0;
    // Called once at load time. Any throw disables the plugin for this run.
    virtual void initialize(Registrar& reg, const PluginSettings& settings) = 0;
};

using PluginPtr = std::shared_ptr<Plugin>;

}  // namespace apklab
