#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace apklab {

// The six lifecycle hooks, in dispatch order.
enum class HookEvent {
    BeforeEmulatorStart,
    BeforeAppInstall,
    BeforeSimulationStart,
    BeforeEmulatorStop,
    BeforeDatabase,
    BeforeReport,
};

inline constexpr std::array<HookEvent, 6> kLifecycleEvents = {
    HookEvent::BeforeEmulatorStart, HookEvent::BeforeAppInstall,
    HookEvent::BeforeSimulationStart, HookEvent::BeforeEmulatorStop,
    HookEvent::BeforeDatabase,      HookEvent::BeforeReport,
};

std::string_view to_string(HookEvent ev);
std::optional<HookEvent> hook_event_from_string(std::string_view name);

// Position in the lifecycle (0..5); usable for "never invoked after" checks.
int lifecycle_index(HookEvent ev);

}  // namespace apklab
