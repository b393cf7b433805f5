#include "apklab/registry.hpp"

#include <algorithm>

#include "apklab/errors.hpp"

namespace apklab {

std::vector<std::string> DispatchReport::invocation_order() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.plugin);
    return out;
}

namespace {

class BoundRegistrar : public Registrar {
public:
    BoundRegistrar(std::string plugin, std::vector<PluginRegistration>& sink)
        : plugin_(std::move(plugin)), sink_(sink) {}

    void add(HookEvent event, int priority, HookCallback callback) override {
        for (const auto& reg : sink_) {
            if (reg.plugin == plugin_ && reg.event == event && reg.priority == priority)
                throw Error("duplicate registration for " + plugin_ + " at " +
                            std::string(to_string(event)) + " priority " +
                            std::to_string(priority));
        }
        sink_.push_back({plugin_, event, priority, std::move(callback)});
    }

private:
    std::string plugin_;
    std::vector<PluginRegistration>& sink_;
};

}  // namespace

LoadReport PluginRegistry::load(const std::vector<PluginPtr>& catalog,
                                const FrameworkConfig& config, AnalysisRun& run) {
    LoadReport report;
    for (const auto& name : config.enabled_plugins) {
        auto it = std::find_if(catalog.begin(), catalog.end(),
                               [&](const PluginPtr& p) { return p && p->name() == name; });
        if (it == catalog.end()) {
            run.disabled_plugins[name] = "not found in plugin catalog";
            report.disabled[name] = run.disabled_plugins[name];
            continue;
        }
        std::vector<PluginRegistration> staged;
        BoundRegistrar reg(name, staged);
        try {
            (*it)->initialize(reg, config.settings_for(name));
        } catch (const std::exception& e) {
            run.disabled_plugins[name] = std::string("initialization failed: ") + e.what();
            report.disabled[name] = run.disabled_plugins[name];
            continue;
        }
        for (auto& r : staged) registrations_.push_back(std::move(r));
        plugins_.push_back(*it);
        report.loaded.push_back(name);
    }
    return report;
}

void PluginRegistry::add_registration(const std::string& plugin, HookEvent event, int priority,
                                      HookCallback callback) {
    registrations_.push_back({plugin, event, priority, std::move(callback)});
}

DispatchReport PluginRegistry::dispatch(HookEvent event, StageContext& ctx) {
    DispatchReport report;
    report.event = event;
    ctx.event = event;

    std::vector<const PluginRegistration*> due;
    for (const auto& reg : registrations_)
        if (reg.event == event) due.push_back(&reg);

    // Higher priorities first; ties broken by plugin name so the order is a
    // strict total order independent of registration order.
    std::sort(due.begin(), due.end(), [](const PluginRegistration* a, const PluginRegistration* b) {
        if (a->priority != b->priority) return a->priority > b->priority;
        return a->plugin < b->plugin;
    });

    for (const PluginRegistration* reg : due) {
        if (ctx.run.disabled_plugins.count(reg->plugin)) continue;
        DispatchEntry entry{reg->plugin, reg->priority, false, {}};
        try {
            reg->callback(ctx);
        } catch (const std::exception& e) {
            entry.failed = true;
            entry.error = e.what();
            ctx.run.disabled_plugins[reg->plugin] =
                std::string(to_string(event)) + ": " + e.what();
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace apklab
