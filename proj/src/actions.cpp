#include "apklab/actions.hpp"

#include <sstream>

namespace apklab {

std::string_view to_string(GsmState s) {
    switch (s) {
        case GsmState::Unregistered: return "unregistered";
        case GsmState::Home: return "home";
        case GsmState::Roaming: return "roaming";
        case GsmState::Searching: return "searching";
        case GsmState::Denied: return "denied";
        case GsmState::Off: return "off";
        case GsmState::On: return "on";
    }
    return "?";
}

std::optional<GsmState> gsm_state_from_string(std::string_view s) {
    for (GsmState v : {GsmState::Unregistered, GsmState::Home, GsmState::Roaming,
                       GsmState::Searching, GsmState::Denied, GsmState::Off, GsmState::On})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

std::string_view to_string(BatteryStatus s) {
    switch (s) {
        case BatteryStatus::Unknown: return "unknown";
        case BatteryStatus::Charging: return "charging";
        case BatteryStatus::Discharging: return "discharging";
        case BatteryStatus::NotCharging: return "not-charging";
        case BatteryStatus::Full: return "full";
    }
    return "?";
}

std::optional<BatteryStatus> battery_status_from_string(std::string_view s) {
    for (BatteryStatus v : {BatteryStatus::Unknown, BatteryStatus::Charging,
                            BatteryStatus::Discharging, BatteryStatus::NotCharging,
                            BatteryStatus::Full})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

std::optional<std::string> validate_action(const DeviceAction& action) {
    if (const auto* b = std::get_if<SetBatteryState>(&action)) {
        if (b->capacity < 0 || b->capacity > 100)
            return "battery capacity out of range [0,100]: " + std::to_string(b->capacity);
    } else if (const auto* l = std::get_if<SetLocation>(&action)) {
        if (l->lon < -180.0 || l->lon > 180.0)
            return "longitude out of range [-180,180]";
        if (l->lat < -90.0 || l->lat > 90.0)
            return "latitude out of range [-90,90]";
    } else if (const auto* m = std::get_if<MonkeyInput>(&action)) {
        if (m->event_count <= 0) return "monkey event count must be > 0";
    } else if (const auto* w = std::get_if<Wait>(&action)) {
        if (w->millis < 0) return "wait must be >= 0 ms";
    }
    return std::nullopt;
}

std::string describe_action(const DeviceAction& action) {
    std::ostringstream out;
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, StartApp>)
                out << "start_app " << a.package;
            else if constexpr (std::is_same_v<T, StopApp>)
                out << "stop_app " << a.package;
            else if constexpr (std::is_same_v<T, IncomingCall>)
                out << "incoming_call " << a.number;
            else if constexpr (std::is_same_v<T, CancelCall>)
                out << "cancel_call " << a.number;
            else if constexpr (std::is_same_v<T, IncomingSms>)
                out << "incoming_sms " << a.number;
            else if constexpr (std::is_same_v<T, SetGsmState>)
                out << "gsm " << to_string(a.state);
            else if constexpr (std::is_same_v<T, SetBatteryState>)
                out << "battery " << a.capacity << " " << to_string(a.status);
            else if constexpr (std::is_same_v<T, SetLocation>)
                out << "location " << a.lon << " " << a.lat;
            else if constexpr (std::is_same_v<T, MonkeyInput>)
                out << "monkey " << a.event_count;
            else if constexpr (std::is_same_v<T, UnlockScreen>)
                out << "unlock";
            else if constexpr (std::is_same_v<T, LockScreen>)
                out << "lock";
            else if constexpr (std::is_same_v<T, ShellCommand>)
                out << "shell " << a.command;
            else if constexpr (std::is_same_v<T, AdbCommand>)
                out << "adb " << a.command;
            else if constexpr (std::is_same_v<T, Screenshot>)
                out << "screenshot " << a.label;
            else if constexpr (std::is_same_v<T, Wait>)
                out << "wait " << a.millis;
        },
        action);
    return out.str();
}

}  // namespace apklab
