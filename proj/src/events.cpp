#include "apklab/events.hpp"

namespace apklab {

std::string_view to_string(HookEvent ev) {
    switch (ev) {
        case HookEvent::BeforeEmulatorStart: return "before_emulator_start";
        case HookEvent::BeforeAppInstall: return "before_app_install";
        case HookEvent::BeforeSimulationStart: return "before_simulation_start";
        case HookEvent::BeforeEmulatorStop: return "before_emulator_stop";
        case HookEvent::BeforeDatabase: return "before_database";
        case HookEvent::BeforeReport: return "before_report";
    }
    return "unknown";
}

std::optional<HookEvent> hook_event_from_string(std::string_view name) {
    for (HookEvent ev : kLifecycleEvents)
        if (to_string(ev) == name) return ev;
    return std::nullopt;
}

int lifecycle_index(HookEvent ev) {
    for (std::size_t i = 0; i < kLifecycleEvents.size(); ++i)
        if (kLifecycleEvents[i] == ev) return static_cast<int>(i);
    return -1;
}

}  // namespace apklab
