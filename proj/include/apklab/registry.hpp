#pragma once

#include <string>
#include <vector>

#include "apklab/plugin.hpp"

namespace apklab {

struct PluginRegistration {
    std::string plugin;
    HookEvent event;
    int priority = 0;
    HookCallback callback;
};

struct DispatchEntry {
    std::string plugin;
    int priority = 0;
    bool failed = false;
    std::string error;
};

struct DispatchReport {
    HookEvent event = HookEvent::BeforeEmulatorStart;
    std::vector<DispatchEntry> entries;  // invocation order

    std::vector<std::string> invocation_order() const;
};

struct LoadReport {
    std::vector<std::string> loaded;
    std::map<std::string, std::string> disabled;  // name -> error
};

// Holds the registrations of every successfully initialized plugin and
// dispatches lifecycle events in priority order (descending, ties broken by
// plugin name ascending). Callback errors are caught: the plugin is disabled
// for the rest of the run and dispatch continues.
class PluginRegistry {
public:
    // Initializes every enabled plugin found in the catalog. Initialization
    // errors (including an enabled name missing from the catalog) disable the
    // plugin and are recorded on the run; they never abort the load.
    LoadReport load(const std::vector<PluginPtr>& catalog, const FrameworkConfig& config,
                    AnalysisRun& run);

    DispatchReport dispatch(HookEvent event, StageContext& ctx);

    const std::vector<PluginRegistration>& registrations() const { return registrations_; }

    // Test seam: register a bare callback without a Plugin instance.
    void add_registration(const std::string& plugin, HookEvent event, int priority,
                          HookCallback callback);

private:
    std::vector<PluginRegistration> registrations_;
    std::vector<PluginPtr> plugins_;  // keeps instances alive
};

}  // namespace apklab
