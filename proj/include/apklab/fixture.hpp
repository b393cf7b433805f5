#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace apklab {

// Declarative behavior description for the simulated device: what the
// "installed app" does at boot, at install, and in response to user/phone
// events. Stands in for real malware behavior; schema in docs/formats.md.

enum class EffectKind {
    Http,       // DNS lookup + TCP flow carrying one HTTP transaction
    Dns,        // bare DNS lookup
    Icmp,       // echo request/reply pair
    Syscall,    // append one trace line
    Logcat,     // append one brief-format log line
    FsCreate,
    FsWrite,
    FsDelete,
    FsChmod,
    FsMkdir,
};

struct FixtureEffect {
    EffectKind kind = EffectKind::Logcat;

    // Http / Dns / Icmp
    std::string host;
    std::string method = "GET";
    std::string path = "/";
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    int response_status = 200;
    std::string response_body;
    std::uint16_t port = 0;  // 0: default for the effect kind
    std::string qtype = "A";

    // Syscall
    std::string syscall;
    std::vector<std::variant<std::string, std::int64_t>> sys_args;
    std::int64_t ret = 0;
    std::optional<std::int64_t> pid;    // defaults to the device identity
    std::optional<std::string> comm;

    // Logcat
    std::string level = "I";
    std::string tag;
    std::string message;

    // Fs*
    std::string fs_path;
    std::string content;
    std::string mode = "0644";
};

// Action kinds a rule can key on; matches narrow by the optional fields.
struct FixtureRule {
    std::string on;  // app_start, app_stop, sms, call, call_cancel, gsm, battery,
                     // location, monkey, unlock, lock, shell, adb, screenshot
    std::optional<std::string> package;
    std::optional<std::string> from;
    std::optional<std::string> text_contains;
    std::optional<std::string> command_contains;
    std::vector<FixtureEffect> effects;
};

struct BaselineEntry {
    std::string path;
    std::string kind = "file";  // file | dir | symlink
    std::string content;
    std::string mode;           // octal string; defaulted per kind when empty
    std::string target;         // symlink only
};

struct DeviceIdentity {
    std::string ip = "10.0.2.15";
    std::string dns_server = "10.0.2.3";
    std::string gateway = "10.0.2.2";
    std::string phone_number = "15555215554";
    std::int64_t pid = 421;
    std::string comm = "app_process";
};

struct ScenarioFixture {
    std::string name;
    std::string package;
    DeviceIdentity device;
    bool corrupt_install = false;
    std::map<std::string, std::string> redirect;  // domain → sink address
    std::map<std::string, std::string> hosts;     // domain → address
    std::vector<BaselineEntry> baseline_fs;
    std::vector<FixtureEffect> boot;
    std::vector<FixtureEffect> install;
    std::vector<FixtureRule> rules;
};

// Throws ParseError naming the offending JSON member.
ScenarioFixture parse_fixture(const std::string& json_text);
ScenarioFixture load_fixture(const std::string& path);

}  // namespace apklab
