#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace apklab {

struct StartApp {
    std::string package;
};
struct StopApp {
    std::string package;
};
struct IncomingCall {
    std::string number;
};
struct CancelCall {
    std::string number;
};
struct IncomingSms {
    std::string number;
    std::string text;
};

enum class GsmState { Unregistered, Home, Roaming, Searching, Denied, Off, On };
struct SetGsmState {
    GsmState state;
};

enum class BatteryStatus { Unknown, Charging, Discharging, NotCharging, Full };
struct SetBatteryState {
    int capacity = 0;  // 0..100
    BatteryStatus status = BatteryStatus::Unknown;
};

struct SetLocation {
    double lon = 0;  // degrees, [-180, 180]
    double lat = 0;  // degrees, [-90, 90]
};
struct MonkeyInput {
    int event_count = 0;  // > 0
};
struct UnlockScreen {};
struct LockScreen {};
struct ShellCommand {
    std::string command;
};
struct AdbCommand {
    std::string command;
};
struct Screenshot {
    std::string label;
};
struct Wait {
    std::int64_t millis = 0;
};

using DeviceAction =
    std::variant<StartApp, StopApp, IncomingCall, CancelCall, IncomingSms, SetGsmState,
                 SetBatteryState, SetLocation, MonkeyInput, UnlockScreen, LockScreen, ShellCommand,
                 AdbCommand, Screenshot, Wait>;

std::string_view to_string(GsmState s);
std::optional<GsmState> gsm_state_from_string(std::string_view s);
std::string_view to_string(BatteryStatus s);
std::optional<BatteryStatus> battery_status_from_string(std::string_view s);

// Range-invariant check; nullopt when the action is acceptable.
std::optional<std::string> validate_action(const DeviceAction& action);

// Single-line human description, used in simulation logs and acks.
std::string describe_action(const DeviceAction& action);

}  // namespace apklab
